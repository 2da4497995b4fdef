#include "cfkit/ratings.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace cfkit {

namespace {

std::uint64_t pair_key(std::uint32_t u, std::uint32_t i) {
  return (static_cast<std::uint64_t>(u) << 32) | i;
}

}  // namespace

std::span<const Entry> RatingsMatrix::items_of(UserIndex u) const {
  if (u >= users_.size()) throw std::out_of_range("RatingsMatrix: user index out of range");
  return {user_rows_.data() + user_begin_[u], user_begin_[u + 1] - user_begin_[u]};
}

std::span<const Entry> RatingsMatrix::users_of(ItemIndex i) const {
  if (i >= items_.size()) throw std::out_of_range("RatingsMatrix: item index out of range");
  return {item_rows_.data() + item_begin_[i], item_begin_[i + 1] - item_begin_[i]};
}

std::optional<double> RatingsMatrix::value(UserIndex u, ItemIndex i) const {
  if (u >= users_.size() || i >= items_.size()) return std::nullopt;
  auto row = items_of(u);
  auto it = std::lower_bound(row.begin(), row.end(), i,
                             [](const Entry& e, ItemIndex key) { return e.id < key; });
  if (it == row.end() || it->id != i) return std::nullopt;
  return it->value;
}

RatingsMatrix build_matrix(IdMap users, IdMap items, std::vector<Rating> ratings) {
  const auto n_users = users.size();
  const auto n_items = items.size();

  // Last write wins for repeated (u, i) pairs.
  std::unordered_map<std::uint64_t, std::size_t> slot;
  slot.reserve(ratings.size());
  std::vector<Rating> unique;
  unique.reserve(ratings.size());
  for (const auto& r : ratings) {
    if (r.user >= n_users || r.item >= n_items)
      throw std::out_of_range("build_matrix: rating index outside the id universe");
    if (!std::isfinite(r.value)) throw DataError("build_matrix: non-finite rating value");
    auto [it, fresh] = slot.emplace(pair_key(r.user, r.item), unique.size());
    if (fresh)
      unique.push_back(r);
    else
      unique[it->second].value = r.value;
  }

  RatingsMatrix m;
  m.users_ = std::move(users);
  m.items_ = std::move(items);

  std::sort(unique.begin(), unique.end(), [](const Rating& a, const Rating& b) {
    return a.user != b.user ? a.user < b.user : a.item < b.item;
  });
  m.user_begin_.assign(n_users + 1, 0);
  m.user_rows_.reserve(unique.size());
  for (const auto& r : unique) {
    m.user_begin_[r.user + 1]++;
    m.user_rows_.push_back({r.item, r.value});
  }
  for (std::size_t u = 0; u < n_users; ++u) m.user_begin_[u + 1] += m.user_begin_[u];

  std::sort(unique.begin(), unique.end(), [](const Rating& a, const Rating& b) {
    return a.item != b.item ? a.item < b.item : a.user < b.user;
  });
  m.item_begin_.assign(n_items + 1, 0);
  m.item_rows_.reserve(unique.size());
  for (const auto& r : unique) {
    m.item_begin_[r.item + 1]++;
    m.item_rows_.push_back({r.user, r.value});
  }
  for (std::size_t i = 0; i < n_items; ++i) m.item_begin_[i + 1] += m.item_begin_[i];

  return m;
}

RatingsMatrix build_matrix(const std::vector<RatingTriple>& triples) {
  IdMap users;
  IdMap items;
  std::vector<Rating> ratings;
  ratings.reserve(triples.size());
  std::size_t pos = 0;
  for (const auto& t : triples) {
    ++pos;
    if (!std::isfinite(t.value))
      throw DataError("build_matrix: non-finite rating value at position " + std::to_string(pos) +
                      " (user=" + t.user + ", item=" + t.item + ")");
    ratings.push_back({users.intern(t.user), items.intern(t.item), t.value});
  }
  return build_matrix(std::move(users), std::move(items), std::move(ratings));
}

std::optional<double> Stats::global_mean() const {
  if (n_ratings_ == 0) return std::nullopt;
  return global_mean_;
}

std::optional<double> Stats::user_mean(UserIndex u) const {
  if (u >= user_count_.size() || user_count_[u] == 0) return std::nullopt;
  return user_mean_[u];
}

std::optional<double> Stats::item_mean(ItemIndex i) const {
  if (i >= item_count_.size() || item_count_[i] == 0) return std::nullopt;
  return item_mean_[i];
}

std::uint32_t Stats::user_rating_count(UserIndex u) const {
  return u < user_count_.size() ? user_count_[u] : 0;
}

std::uint32_t Stats::item_rating_count(ItemIndex i) const {
  return i < item_count_.size() ? item_count_[i] : 0;
}

Stats compute_stats(const RatingsMatrix& m) {
  Stats s;
  s.n_ratings_ = m.rating_count();
  s.user_mean_.assign(m.user_count(), 0.0);
  s.user_count_.assign(m.user_count(), 0);
  s.item_mean_.assign(m.item_count(), 0.0);
  s.item_count_.assign(m.item_count(), 0);

  double total = 0.0;
  for (UserIndex u = 0; u < m.user_count(); ++u) {
    auto row = m.items_of(u);
    double sum = 0.0;
    for (const auto& e : row) sum += e.value;
    total += sum;
    s.user_count_[u] = static_cast<std::uint32_t>(row.size());
    if (!row.empty()) s.user_mean_[u] = sum / static_cast<double>(row.size());
  }
  for (ItemIndex i = 0; i < m.item_count(); ++i) {
    auto row = m.users_of(i);
    double sum = 0.0;
    for (const auto& e : row) sum += e.value;
    s.item_count_[i] = static_cast<std::uint32_t>(row.size());
    if (!row.empty()) s.item_mean_[i] = sum / static_cast<double>(row.size());
  }
  if (s.n_ratings_ > 0) s.global_mean_ = total / static_cast<double>(s.n_ratings_);
  return s;
}

RatingsMatrix mean_center_items(const RatingsMatrix& m, const Stats& s) {
  RatingsMatrix out = m;
  for (auto& e : out.user_rows_) e.value -= *s.item_mean(e.id);
  for (ItemIndex i = 0; i < out.items_.size(); ++i) {
    const double mean = out.item_begin_[i] == out.item_begin_[i + 1] ? 0.0 : *s.item_mean(i);
    for (std::size_t p = out.item_begin_[i]; p < out.item_begin_[i + 1]; ++p)
      out.item_rows_[p].value -= mean;
  }
  return out;
}

namespace {

void require_item(const RatingsMatrix& m, ItemIndex i) {
  if (i >= m.item_count())
    throw DataError("unknown item index " + std::to_string(i));
}

void require_user(const RatingsMatrix& m, UserIndex u) {
  if (u >= m.user_count())
    throw DataError("unknown user index " + std::to_string(u));
}

// Merge-style intersection over two index-sorted rows.
std::vector<std::uint32_t> intersect_ids(std::span<const Entry> a, std::span<const Entry> b) {
  std::vector<std::uint32_t> out;
  std::size_t pa = 0;
  std::size_t pb = 0;
  while (pa < a.size() && pb < b.size()) {
    if (a[pa].id < b[pb].id)
      ++pa;
    else if (b[pb].id < a[pa].id)
      ++pb;
    else {
      out.push_back(a[pa].id);
      ++pa;
      ++pb;
    }
  }
  return out;
}

}  // namespace

std::vector<UserIndex> common_users(const RatingsMatrix& m, ItemIndex i, ItemIndex j) {
  require_item(m, i);
  require_item(m, j);
  return intersect_ids(m.users_of(i), m.users_of(j));
}

std::vector<ItemIndex> common_items(const RatingsMatrix& m, UserIndex u, UserIndex v) {
  require_user(m, u);
  require_user(m, v);
  return intersect_ids(m.items_of(u), m.items_of(v));
}

}  // namespace cfkit
