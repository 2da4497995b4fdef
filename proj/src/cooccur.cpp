#include "cfkit/cooccur.hpp"

namespace cfkit {

CoOccurrence build_cooccurrence(const RatingsMatrix& m) {
  if (m.user_count() == 0) throw DataError("build_cooccurrence: empty user set");

  CoOccurrence c;
  c.n_users_ = static_cast<std::uint32_t>(m.user_count());
  c.raters_.assign(m.item_count(), 0);
  for (ItemIndex i = 0; i < m.item_count(); ++i)
    c.raters_[i] = static_cast<std::uint32_t>(m.users_of(i).size());

  for (UserIndex u = 0; u < m.user_count(); ++u) {
    auto row = m.items_of(u);
    for (std::size_t a = 0; a < row.size(); ++a)
      for (std::size_t b = a + 1; b < row.size(); ++b) {
        // rows are item-sorted, so row[a].id < row[b].id
        const auto key = (static_cast<std::uint64_t>(row[a].id) << 32) | row[b].id;
        ++c.pairs_[key];
      }
  }
  return c;
}

double popularity_score(const CoOccurrence& c, ItemIndex i) {
  return static_cast<double>(c.raters_of(i)) / static_cast<double>(c.n_users());
}

std::optional<double> lift_score(const CoOccurrence& c, ItemIndex i, ItemIndex j) {
  const auto ni = c.raters_of(i);
  const auto nj = c.raters_of(j);
  if (ni == 0 || nj == 0) return std::nullopt;
  const auto joint = c.pair_count(i, j);
  return (static_cast<double>(joint) * static_cast<double>(c.n_users())) /
         (static_cast<double>(ni) * static_cast<double>(nj));
}

}  // namespace cfkit
