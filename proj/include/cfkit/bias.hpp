#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "cfkit/ratings.hpp"

namespace cfkit {

/// Damped user-item bias model: global mean plus per-item and per-user
/// offsets. Entities with no ratings (or outside the training universe)
/// contribute an offset of exactly zero.
struct BiasModel {
  double global_mean = 0.0;
  std::vector<double> item_offset;
  std::vector<double> user_offset;
  double alpha_item = 0.0;
  double alpha_user = 0.0;
  IdMap users;
  IdMap items;

  double item_offset_of(ItemIndex i) const {
    return i < item_offset.size() ? item_offset[i] : 0.0;
  }
  double user_offset_of(UserIndex u) const {
    return u < user_offset.size() ? user_offset[u] : 0.0;
  }

  /// global_mean + item offset + user offset, substituting 0 for absent ids.
  double predict(std::optional<UserIndex> u, std::optional<ItemIndex> i) const {
    double v = global_mean;
    if (i) v += item_offset_of(*i);
    if (u) v += user_offset_of(*u);
    return v;
  }
};

/// Fits the model in sequence: global mean, then item offsets against it,
/// then user offsets against mean + item offset, each sum damped by its
/// alpha in the denominator. Larger alphas shrink low-count offsets harder.
/// Throws DataError on an empty matrix.
BiasModel fit_bias(const RatingsMatrix& m, double alpha_item = 5.0, double alpha_user = 5.0);

double predict_bias(const BiasModel& model, std::optional<UserIndex> u,
                    std::optional<ItemIndex> i);

/// Plain-text form: `g <b>`, then `i <token> <offset>` and `u <token> <offset>`
/// lines in index order. Reals are written round-trip exact. Tokens must not
/// contain whitespace.
void write_bias_model(std::ostream& out, const BiasModel& model);
BiasModel read_bias_model(std::istream& in);

}  // namespace cfkit
