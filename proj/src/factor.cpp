#include "cfkit/factor.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "cfkit/text.hpp"

namespace cfkit {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t f = 0; f < a.size(); ++f) acc += a[f] * b[f];
  return acc;
}

double sum_squares(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

}  // namespace

double score_mf(const FactorModel& model, std::optional<UserIndex> u,
                std::optional<ItemIndex> i) {
  const bool known_u = u && *u < model.user_count();
  const bool known_i = i && *i < model.item_count();
  double value = 0.0;
  if (known_u && known_i) value = dot(model.user_row(*u), model.item_row(*i));
  if (model.bias) value += model.bias->predict(u, i);
  return value;
}

FactorModel train_sgd(const RatingsMatrix& m, const TrainConfig& cfg) {
  if (cfg.rank == 0) throw std::invalid_argument("train_sgd: rank must be >= 1");
  if (cfg.learning_rate <= 0) throw std::invalid_argument("train_sgd: learning_rate must be > 0");
  if (cfg.reg < 0) throw std::invalid_argument("train_sgd: reg must be >= 0");
  if (cfg.init_scale <= 0) throw std::invalid_argument("train_sgd: init_scale must be > 0");
  if (m.rating_count() == 0) throw DataError("train_sgd: empty matrix");

  FactorModel model;
  model.rank = cfg.rank;
  model.users = m.users();
  model.items = m.items();
  model.bias = fit_bias(m, 0.0, 0.0);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> init(-cfg.init_scale, cfg.init_scale);
  model.user_factors.resize(m.user_count() * cfg.rank);
  model.item_factors.resize(m.item_count() * cfg.rank);
  for (auto& x : model.user_factors) x = init(rng);
  for (auto& x : model.item_factors) x = init(rng);

  const auto k = cfg.rank;
  std::vector<double> p_old(k);
  model.epoch_loss.reserve(cfg.epochs);
  for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (UserIndex u = 0; u < m.user_count(); ++u) {
      double* p = model.user_factors.data() + static_cast<std::size_t>(u) * k;
      const double b_u = model.bias->global_mean + model.bias->user_offset[u];
      for (const auto& e : m.items_of(u)) {
        double* q = model.item_factors.data() + static_cast<std::size_t>(e.id) * k;
        double pred = b_u + model.bias->item_offset[e.id];
        for (std::uint32_t f = 0; f < k; ++f) pred += p[f] * q[f];
        const double err = e.value - pred;
        std::copy(p, p + k, p_old.data());
        for (std::uint32_t f = 0; f < k; ++f) {
          p[f] += cfg.learning_rate * (err * q[f] - cfg.reg * p[f]);
          q[f] += cfg.learning_rate * (err * p_old[f] - cfg.reg * q[f]);
        }
      }
    }
    const double loss = training_loss(m, model, cfg.reg);
    model.epoch_loss.push_back(loss);
    if (!std::isfinite(loss))
      throw DataError("train_sgd: training diverged at epoch " + std::to_string(epoch + 1) +
                      "; use a smaller learning_rate");
  }
  return model;
}

FactorModel load_factors(const std::vector<FactorRow>& user_rows,
                         const std::vector<FactorRow>& item_rows,
                         const std::optional<std::vector<double>>& sigma) {
  std::size_t k = 0;
  if (!user_rows.empty())
    k = user_rows.front().values.size();
  else if (!item_rows.empty())
    k = item_rows.front().values.size();
  else if (sigma)
    k = sigma->size();

  if (sigma) {
    if (sigma->size() != k)
      throw DataError("load_factors: sigma has " + std::to_string(sigma->size()) +
                      " entries, expected " + std::to_string(k));
    for (double v : *sigma)
      if (v < 0.0) throw DataError("load_factors: negative singular value " + format_real(v));
  }

  FactorModel model;
  model.rank = static_cast<std::uint32_t>(k);
  auto add_rows = [&](const std::vector<FactorRow>& rows, IdMap& ids, std::vector<double>& flat,
                      const char* side) {
    for (const auto& row : rows) {
      if (row.values.size() != k)
        throw DataError(std::string("load_factors: ") + side + " row for token '" + row.token +
                        "' has " + std::to_string(row.values.size()) + " values, expected " +
                        std::to_string(k));
      const auto idx = ids.intern(row.token);
      if (static_cast<std::size_t>(idx) * k != flat.size())
        throw DataError(std::string("load_factors: duplicate ") + side + " token '" + row.token +
                        "'");
      flat.insert(flat.end(), row.values.begin(), row.values.end());
    }
  };
  add_rows(user_rows, model.users, model.user_factors, "user");
  add_rows(item_rows, model.items, model.item_factors, "item");

  if (sigma) {
    std::vector<double> scale(k);
    for (std::size_t f = 0; f < k; ++f) scale[f] = std::sqrt((*sigma)[f]);
    for (std::size_t r = 0; r < model.user_factors.size() / std::max<std::size_t>(k, 1); ++r)
      for (std::size_t f = 0; f < k; ++f) model.user_factors[r * k + f] *= scale[f];
    for (std::size_t r = 0; r < model.item_factors.size() / std::max<std::size_t>(k, 1); ++r)
      for (std::size_t f = 0; f < k; ++f) model.item_factors[r * k + f] *= scale[f];
  }
  for (double v : model.user_factors)
    if (!std::isfinite(v)) throw DataError("load_factors: non-finite user factor");
  for (double v : model.item_factors)
    if (!std::isfinite(v)) throw DataError("load_factors: non-finite item factor");
  return model;
}

double training_loss(const RatingsMatrix& m, const FactorModel& model, double reg) {
  double loss = 0.0;
  for (UserIndex u = 0; u < m.user_count(); ++u) {
    for (const auto& e : m.items_of(u)) {
      double pred = model.bias ? model.bias->predict(u, e.id) : 0.0;
      pred += dot(model.user_row(u), model.item_row(e.id));
      const double err = e.value - pred;
      loss += err * err;
    }
  }
  loss += reg * (sum_squares(model.user_factors) + sum_squares(model.item_factors));
  return loss;
}

void training_gradient(const RatingsMatrix& m, const FactorModel& model, double reg,
                       std::vector<double>& grad_user, std::vector<double>& grad_item) {
  const auto k = model.rank;
  grad_user.assign(model.user_factors.size(), 0.0);
  grad_item.assign(model.item_factors.size(), 0.0);
  for (UserIndex u = 0; u < m.user_count(); ++u) {
    const auto p = model.user_row(u);
    for (const auto& e : m.items_of(u)) {
      const auto q = model.item_row(e.id);
      double pred = model.bias ? model.bias->predict(u, e.id) : 0.0;
      pred += dot(p, q);
      const double err = e.value - pred;
      for (std::uint32_t f = 0; f < k; ++f) {
        grad_user[static_cast<std::size_t>(u) * k + f] += -2.0 * err * q[f];
        grad_item[static_cast<std::size_t>(e.id) * k + f] += -2.0 * err * p[f];
      }
    }
  }
  for (std::size_t x = 0; x < grad_user.size(); ++x) grad_user[x] += 2.0 * reg * model.user_factors[x];
  for (std::size_t x = 0; x < grad_item.size(); ++x) grad_item[x] += 2.0 * reg * model.item_factors[x];
}

void write_factor_model(std::ostream& out, const FactorModel& model) {
  out << "k " << model.rank << "\n";
  for (UserIndex u = 0; u < model.user_count(); ++u) {
    out << "p " << model.users.token(u);
    for (double v : model.user_row(u)) out << " " << format_real(v);
    out << "\n";
  }
  for (ItemIndex i = 0; i < model.item_count(); ++i) {
    out << "q " << model.items.token(i);
    for (double v : model.item_row(i)) out << " " << format_real(v);
    out << "\n";
  }
}

FactorModel read_factor_model(std::istream& in) {
  std::vector<FactorRow> user_rows;
  std::vector<FactorRow> item_rows;
  std::optional<std::size_t> rank;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    auto fail = [&](const std::string& why) {
      throw DataError("factor model line " + std::to_string(lineno) + ": " + why);
    };
    if (tag == "k") {
      long long v = -1;
      if (!(ls >> v) || v < 0) fail("bad rank");
      rank = static_cast<std::size_t>(v);
    } else if (tag == "p" || tag == "q") {
      if (!rank) fail("row before 'k' header");
      FactorRow row;
      if (!(ls >> row.token)) fail("missing token");
      std::string v;
      while (ls >> v) {
        auto parsed = parse_real(v);
        if (!parsed) fail("bad real '" + v + "'");
        row.values.push_back(*parsed);
      }
      if (row.values.size() != *rank)
        fail("row for token '" + row.token + "' has " + std::to_string(row.values.size()) +
             " values, expected " + std::to_string(*rank));
      (tag == "p" ? user_rows : item_rows).push_back(std::move(row));
    } else {
      fail("unknown record tag '" + tag + "'");
    }
  }
  if (!rank) throw DataError("factor model: missing 'k' header");
  auto model = load_factors(user_rows, item_rows);
  model.rank = static_cast<std::uint32_t>(*rank);
  return model;
}

FactorModel remap_factors(const FactorModel& model, const IdMap& target_users,
                          const IdMap& target_items) {
  FactorModel out;
  out.rank = model.rank;
  out.users = target_users;
  out.items = target_items;
  if (model.bias) {
    BiasModel b;
    b.global_mean = model.bias->global_mean;
    b.alpha_item = model.bias->alpha_item;
    b.alpha_user = model.bias->alpha_user;
    b.users = target_users;
    b.items = target_items;
    b.user_offset.assign(target_users.size(), 0.0);
    b.item_offset.assign(target_items.size(), 0.0);
    for (UserIndex u = 0; u < target_users.size(); ++u)
      if (auto src = model.bias->users.find(target_users.token(u)))
        b.user_offset[u] = model.bias->user_offset_of(*src);
    for (ItemIndex i = 0; i < target_items.size(); ++i)
      if (auto src = model.bias->items.find(target_items.token(i)))
        b.item_offset[i] = model.bias->item_offset_of(*src);
    out.bias = std::move(b);
  }
  out.user_factors.assign(target_users.size() * model.rank, 0.0);
  out.item_factors.assign(target_items.size() * model.rank, 0.0);

  // Rows with no counterpart in the source stay zero; scoring treats them
  // as zero-information vectors.
  for (UserIndex u = 0; u < target_users.size(); ++u) {
    auto src = model.users.find(target_users.token(u));
    if (!src) continue;
    auto row = model.user_row(*src);
    std::copy(row.begin(), row.end(), out.user_factors.begin() + static_cast<std::size_t>(u) * model.rank);
  }
  for (ItemIndex i = 0; i < target_items.size(); ++i) {
    auto src = model.items.find(target_items.token(i));
    if (!src) continue;
    auto row = model.item_row(*src);
    std::copy(row.begin(), row.end(), out.item_factors.begin() + static_cast<std::size_t>(i) * model.rank);
  }
  return out;
}

}  // namespace cfkit
