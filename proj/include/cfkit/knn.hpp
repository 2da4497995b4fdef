#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "cfkit/ratings.hpp"

namespace cfkit {

enum class WeightKind {
  CenteredCosine,  // cosine of mean-centered rating vectors
  Pearson,         // correlation over co-rated entries only
};

struct UserKnnConfig {
  std::uint32_t k = 20;
  WeightKind weight_kind = WeightKind::CenteredCosine;
  std::uint32_t min_common = 2;   // minimum co-rated count for a nonzero weight
  bool keep_negative = true;      // drop w < 0 candidates when false
};

struct Neighbor {
  std::uint32_t id = 0;
  double weight = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Cosine weight between two items of an item-mean-centered matrix.
///
/// The numerator runs over the common raters, but each norm in the
/// denominator runs over the item's FULL rater set — not just the
/// intersection. The two readings disagree whenever the items have
/// non-overlapping raters; this implementation is the expanded-form one
/// and the reference tests pin it.
///
/// A zero norm (an item whose centered vector vanishes) yields weight 0:
/// no evidence of association.
double item_weight(const RatingsMatrix& centered, ItemIndex i, ItemIndex j);

/// Interpolation weight between two users. Pearson centers each user by
/// their mean over the common items; CenteredCosine centers by the full
/// user mean with full-norm denominators, mirroring item_weight. Returns 0
/// when fewer than min_common items are co-rated or a norm vanishes.
double user_weight(const RatingsMatrix& m, const Stats& s, UserIndex u, UserIndex v,
                   WeightKind kind, std::uint32_t min_common);

/// The at-most-k users v != u with nonzero weight, restricted to raters of
/// `item` when given, sorted by weight descending then index ascending.
std::vector<Neighbor> neighborhood_user(const RatingsMatrix& m, const Stats& s, UserIndex u,
                                        std::optional<ItemIndex> item, std::uint32_t k,
                                        const UserKnnConfig& cfg);

/// User-based prediction: r̄_u plus the weight-normalized sum of neighbor
/// offsets from their own means. Absent when u is unknown/unrated or the
/// neighborhood is empty.
std::optional<double> score_user_knn(const RatingsMatrix& m, const Stats& s, UserIndex u,
                                     ItemIndex i, const UserKnnConfig& cfg);

/// Precomputed item neighbor lists: per item, the pool of strongest
/// associations sorted by |w| descending (ties by index ascending), plus
/// the item means needed at scoring time.
struct ItemKnnModel {
  std::uint32_t k = 20;        // default neighborhood size at scoring time
  double min_weight = 0.0;
  IdMap items;
  std::vector<std::optional<double>> item_mean;
  std::vector<std::vector<Neighbor>> neighbors;
};

/// Builds the item model: centers the matrix by item means, computes every
/// pairwise weight with at least one common rater, keeps |w| >= min_weight
/// (and w > 0 only, when keep_negative is false), truncates each list to
/// `pool`.
ItemKnnModel build_item_model(const RatingsMatrix& m, std::uint32_t pool = 100,
                              double min_weight = 0.0, std::uint32_t k = 20,
                              bool keep_negative = true);

/// Item-based prediction from the first k pooled neighbors of i that u has
/// rated. The model's item indices must refer to the same universe as m's
/// (remap a deserialized model first). Absent when the neighborhood is
/// empty or i has no mean.
std::optional<double> score_item_knn(const ItemKnnModel& model, const RatingsMatrix& m,
                                     UserIndex u, ItemIndex i, std::uint32_t k);
std::optional<double> score_item_knn(const ItemKnnModel& model, const RatingsMatrix& m,
                                     UserIndex u, ItemIndex i);

/// Text form: `m <token> <mean>` lines then `w <token-i> <token-j> <weight>`
/// lines, index order, reals round-trip exact.
void write_item_knn_model(std::ostream& out, const ItemKnnModel& model);
ItemKnnModel read_item_knn_model(std::istream& in, std::uint32_t k = 20, double min_weight = 0.0);

/// Rebuilds the model against a different item universe (matching by
/// token); entries for tokens absent from the target are dropped. Lists are
/// re-sorted so the ordering invariant holds under the new indices.
ItemKnnModel remap_items(const ItemKnnModel& model, const IdMap& target_items);

}  // namespace cfkit
