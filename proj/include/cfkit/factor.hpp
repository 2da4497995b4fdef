#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cfkit/bias.hpp"
#include "cfkit/ratings.hpp"

namespace cfkit {

struct TrainConfig {
  std::uint32_t rank = 16;
  std::uint32_t epochs = 200;
  double learning_rate = 0.02;
  double reg = 0.05;           // L2 coefficient on both factor matrices
  double init_scale = 0.1;     // entries start uniform in (-init_scale, +init_scale)
  std::uint64_t seed = 1;
};

/// Latent-factor model: rank-k row vectors per user and item, scored by dot
/// product. Users and items are row vectors throughout. A trained model
/// carries the frozen bias baseline it was fit against; models loaded from
/// factor files carry none.
struct FactorModel {
  std::uint32_t rank = 0;
  std::vector<double> user_factors;  // |U| x rank, row-major
  std::vector<double> item_factors;  // |I| x rank, row-major
  IdMap users;
  IdMap items;
  std::optional<BiasModel> bias;
  std::vector<double> epoch_loss;    // full-objective value at each epoch end

  std::span<const double> user_row(UserIndex u) const {
    return {user_factors.data() + static_cast<std::size_t>(u) * rank, rank};
  }
  std::span<const double> item_row(ItemIndex i) const {
    return {item_factors.data() + static_cast<std::size_t>(i) * rank, rank};
  }
  std::size_t user_count() const { return rank ? user_factors.size() / rank : 0; }
  std::size_t item_count() const { return rank ? item_factors.size() / rank : 0; }
};

/// Dot-product score plus the bias terms when a bias component is present.
/// An unknown user or item contributes a zero vector, so the score falls
/// back to the bias prediction — or to 0 for bias-less (loaded) models,
/// which carry no global mean to fall back on.
double score_mf(const FactorModel& model, std::optional<UserIndex> u,
                std::optional<ItemIndex> i);

/// Funk-style SGD on the residuals of an undamped bias baseline:
/// minimizes sum (r - b_ui - p.q)^2 + reg (|P|^2 + |Q|^2) by per-rating
/// gradient steps, visiting ratings in (user, item)-sorted order each
/// epoch. Deterministic given cfg.seed. Throws DataError if the loss goes
/// non-finite (reduce learning_rate).
FactorModel train_sgd(const RatingsMatrix& m, const TrainConfig& cfg);

struct FactorRow {
  std::string token;
  std::vector<double> values;
};

/// Builds a model from externally computed factors. When sigma (a diagonal
/// of singular values) is given, it is folded symmetrically: both sides are
/// scaled by sqrt(sigma), so scoring needs no special case. Throws
/// DataError on ragged rows (naming the token) or negative sigma entries.
FactorModel load_factors(const std::vector<FactorRow>& user_rows,
                         const std::vector<FactorRow>& item_rows,
                         const std::optional<std::vector<double>>& sigma = std::nullopt);

/// The exact training objective and its analytic gradient, for diagnostics
/// and finite-difference checks. Uses model.bias when present (zero
/// baseline otherwise).
double training_loss(const RatingsMatrix& m, const FactorModel& model, double reg);
void training_gradient(const RatingsMatrix& m, const FactorModel& model, double reg,
                       std::vector<double>& grad_user, std::vector<double>& grad_item);

/// Text form: `k <rank>` header, then `p <user-token> <rank reals>` and
/// `q <item-token> <rank reals>` lines, reals round-trip exact. The bias
/// component is not part of this format.
void write_factor_model(std::ostream& out, const FactorModel& model);
FactorModel read_factor_model(std::istream& in);

/// Rebuilds the model against different id universes, matching by token;
/// rows for tokens absent from a target are dropped.
FactorModel remap_factors(const FactorModel& model, const IdMap& target_users,
                          const IdMap& target_items);

}  // namespace cfkit
