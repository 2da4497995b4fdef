#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "cfkit/ratings.hpp"

namespace cfkit {

/// Pairwise co-rating counts over items. Only pairs with a nonzero
/// intersection are stored (upper triangle, mirrored on read); the diagonal
/// is the per-item rater count.
class CoOccurrence {
 public:
  std::uint32_t n_users() const { return n_users_; }

  std::uint32_t raters_of(ItemIndex i) const {
    return i < raters_.size() ? raters_[i] : 0;
  }

  std::uint32_t pair_count(ItemIndex i, ItemIndex j) const {
    if (i == j) return raters_of(i);
    const auto lo = i < j ? i : j;
    const auto hi = i < j ? j : i;
    auto it = pairs_.find((static_cast<std::uint64_t>(lo) << 32) | hi);
    return it == pairs_.end() ? 0 : it->second;
  }

  std::size_t stored_pairs() const { return pairs_.size(); }

  friend CoOccurrence build_cooccurrence(const RatingsMatrix& m);

 private:
  std::uint32_t n_users_ = 0;
  std::vector<std::uint32_t> raters_;
  std::unordered_map<std::uint64_t, std::uint32_t> pairs_;
};

/// Exact co-rating counts for every item pair sharing at least one user.
/// Throws DataError when the matrix has no users.
CoOccurrence build_cooccurrence(const RatingsMatrix& m);

/// Fraction of users who rated i; 0 for never-rated or unknown items.
double popularity_score(const CoOccurrence& c, ItemIndex i);

/// Lift of i given j: Pr[i|j] / Pr[i]. Symmetric in i and j. Absent when
/// either item has no raters — 0 is a meaningful lift (perfect
/// anti-association), so the undefined case is kept distinct.
std::optional<double> lift_score(const CoOccurrence& c, ItemIndex i, ItemIndex j);

}  // namespace cfkit
