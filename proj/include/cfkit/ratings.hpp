#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cfkit/errors.hpp"
#include "cfkit/ids.hpp"

namespace cfkit {

using UserIndex = std::uint32_t;
using ItemIndex = std::uint32_t;

/// One ingested record, still keyed by external tokens.
struct RatingTriple {
  std::string user;
  std::string item;
  double value = 0.0;
};

/// One rating in dense-index form.
struct Rating {
  UserIndex user = 0;
  ItemIndex item = 0;
  double value = 0.0;

  friend bool operator==(const Rating&, const Rating&) = default;
};

/// One cell of a sparse row: the other-side index plus the rating value.
/// In a per-user row `id` is an item; in a per-item row it is a user.
struct Entry {
  std::uint32_t id = 0;
  double value = 0.0;

  friend bool operator==(const Entry&, const Entry&) = default;
};

/// Sparsely observed ratings with both orientations materialized: per-user
/// rows sorted by item and per-item rows sorted by user. Slicing either way
/// is O(row length); the memory is paid twice on purpose. Immutable after
/// construction and safe for concurrent reads.
class RatingsMatrix {
 public:
  RatingsMatrix() = default;

  std::size_t user_count() const { return users_.size(); }
  std::size_t item_count() const { return items_.size(); }
  std::size_t rating_count() const { return user_rows_.size(); }

  /// The row of (item, value) pairs for user u, sorted by item index.
  std::span<const Entry> items_of(UserIndex u) const;
  /// The row of (user, value) pairs for item i, sorted by user index.
  std::span<const Entry> users_of(ItemIndex i) const;

  /// The stored rating for (u, i), if observed.
  std::optional<double> value(UserIndex u, ItemIndex i) const;

  const IdMap& users() const { return users_; }
  const IdMap& items() const { return items_; }

  friend RatingsMatrix build_matrix(IdMap users, IdMap items, std::vector<Rating> ratings);

 private:
  IdMap users_;
  IdMap items_;
  std::vector<std::size_t> user_begin_;  // |U|+1 offsets into user_rows_
  std::vector<Entry> user_rows_;
  std::vector<std::size_t> item_begin_;  // |I|+1 offsets into item_rows_
  std::vector<Entry> item_rows_;
};

/// Builds the matrix from token triples. Token-to-index assignment follows
/// first appearance; a repeated (user, item) pair keeps the last value.
/// Throws DataError on non-finite values, naming the 1-based position.
RatingsMatrix build_matrix(const std::vector<RatingTriple>& triples);

/// Dense-index build used when the id universe is fixed up front (synthetic
/// generation, train/test splitting). Keeps users/items with no ratings.
RatingsMatrix build_matrix(IdMap users, IdMap items, std::vector<Rating> ratings);

/// Per-user and per-item means and counts. Means of entities with no ratings
/// are absent rather than zero, so a caller cannot mistake them for data.
class Stats {
 public:
  std::optional<double> global_mean() const;
  std::optional<double> user_mean(UserIndex u) const;
  std::optional<double> item_mean(ItemIndex i) const;
  std::uint32_t user_rating_count(UserIndex u) const;
  std::uint32_t item_rating_count(ItemIndex i) const;

  friend Stats compute_stats(const RatingsMatrix& m);

 private:
  std::size_t n_ratings_ = 0;
  double global_mean_ = 0.0;
  std::vector<double> user_mean_;
  std::vector<double> item_mean_;
  std::vector<std::uint32_t> user_count_;
  std::vector<std::uint32_t> item_count_;
};

Stats compute_stats(const RatingsMatrix& m);

/// Returns a copy of m with every value replaced by value - item_mean.
/// Indices, counts and row structure are unchanged.
RatingsMatrix mean_center_items(const RatingsMatrix& m, const Stats& s);

/// Sorted intersection of the user sets of two items. Throws DataError for
/// an unknown item index, naming it.
std::vector<UserIndex> common_users(const RatingsMatrix& m, ItemIndex i, ItemIndex j);

/// Sorted intersection of the item sets of two users.
std::vector<ItemIndex> common_items(const RatingsMatrix& m, UserIndex u, UserIndex v);

}  // namespace cfkit
