#include "cfkit/knn.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "cfkit/text.hpp"

namespace cfkit {

namespace {

double row_norm(std::span<const Entry> row) {
  double sumsq = 0.0;
  for (const auto& e : row) sumsq += e.value * e.value;
  return std::sqrt(sumsq);
}

// Dot product over the shared ids of two index-sorted rows.
double merge_dot(std::span<const Entry> a, std::span<const Entry> b, std::size_t* n_common) {
  double dot = 0.0;
  std::size_t common = 0;
  std::size_t pa = 0;
  std::size_t pb = 0;
  while (pa < a.size() && pb < b.size()) {
    if (a[pa].id < b[pb].id)
      ++pa;
    else if (b[pb].id < a[pa].id)
      ++pb;
    else {
      dot += a[pa].value * b[pb].value;
      ++common;
      ++pa;
      ++pb;
    }
  }
  if (n_common) *n_common = common;
  return dot;
}

void require_item(const RatingsMatrix& m, ItemIndex i) {
  if (i >= m.item_count()) throw DataError("unknown item index " + std::to_string(i));
}

void require_user(const RatingsMatrix& m, UserIndex u) {
  if (u >= m.user_count()) throw DataError("unknown user index " + std::to_string(u));
}

bool neighbor_order(const Neighbor& a, const Neighbor& b) {
  if (a.weight != b.weight) return a.weight > b.weight;
  return a.id < b.id;
}

bool pool_order(const Neighbor& a, const Neighbor& b) {
  const double ma = std::fabs(a.weight);
  const double mb = std::fabs(b.weight);
  if (ma != mb) return ma > mb;
  return a.id < b.id;
}

}  // namespace

double item_weight(const RatingsMatrix& centered, ItemIndex i, ItemIndex j) {
  require_item(centered, i);
  require_item(centered, j);
  const auto ri = centered.users_of(i);
  const auto rj = centered.users_of(j);
  const double num = merge_dot(ri, rj, nullptr);
  const double den = row_norm(ri) * row_norm(rj);
  if (den == 0.0) return 0.0;
  return num / den;
}

double user_weight(const RatingsMatrix& m, const Stats& s, UserIndex u, UserIndex v,
                   WeightKind kind, std::uint32_t min_common) {
  require_user(m, u);
  require_user(m, v);
  const auto ru = m.items_of(u);
  const auto rv = m.items_of(v);

  // Collect co-rated values in ascending item order.
  std::vector<std::pair<double, double>> common;
  std::size_t pa = 0;
  std::size_t pb = 0;
  while (pa < ru.size() && pb < rv.size()) {
    if (ru[pa].id < rv[pb].id)
      ++pa;
    else if (rv[pb].id < ru[pa].id)
      ++pb;
    else {
      common.emplace_back(ru[pa].value, rv[pb].value);
      ++pa;
      ++pb;
    }
  }
  if (common.size() < min_common || common.empty()) return 0.0;

  if (kind == WeightKind::Pearson) {
    double mu = 0.0;
    double mv = 0.0;
    for (const auto& [a, b] : common) {
      mu += a;
      mv += b;
    }
    mu /= static_cast<double>(common.size());
    mv /= static_cast<double>(common.size());
    double num = 0.0;
    double su = 0.0;
    double sv = 0.0;
    for (const auto& [a, b] : common) {
      num += (a - mu) * (b - mv);
      su += (a - mu) * (a - mu);
      sv += (b - mv) * (b - mv);
    }
    const double den = std::sqrt(su) * std::sqrt(sv);
    if (den == 0.0) return 0.0;
    return num / den;
  }

  // CenteredCosine: center by each user's full mean; norms over full rows.
  const double mu = *s.user_mean(u);
  const double mv = *s.user_mean(v);
  double num = 0.0;
  for (const auto& [a, b] : common) num += (a - mu) * (b - mv);
  double su = 0.0;
  for (const auto& e : ru) su += (e.value - mu) * (e.value - mu);
  double sv = 0.0;
  for (const auto& e : rv) sv += (e.value - mv) * (e.value - mv);
  const double den = std::sqrt(su) * std::sqrt(sv);
  if (den == 0.0) return 0.0;
  return num / den;
}

std::vector<Neighbor> neighborhood_user(const RatingsMatrix& m, const Stats& s, UserIndex u,
                                        std::optional<ItemIndex> item, std::uint32_t k,
                                        const UserKnnConfig& cfg) {
  require_user(m, u);
  std::vector<Neighbor> candidates;
  if (k == 0) return candidates;

  auto consider = [&](UserIndex v) {
    if (v == u) return;
    const double w = user_weight(m, s, u, v, cfg.weight_kind, cfg.min_common);
    if (w == 0.0) return;
    if (!cfg.keep_negative && w < 0.0) return;
    candidates.push_back({v, w});
  };

  if (item) {
    require_item(m, *item);
    for (const auto& e : m.users_of(*item)) consider(e.id);
  } else {
    for (UserIndex v = 0; v < m.user_count(); ++v) consider(v);
  }

  std::sort(candidates.begin(), candidates.end(), neighbor_order);
  if (candidates.size() > k) candidates.resize(k);
  return candidates;
}

std::optional<double> score_user_knn(const RatingsMatrix& m, const Stats& s, UserIndex u,
                                     ItemIndex i, const UserKnnConfig& cfg) {
  if (u >= m.user_count() || i >= m.item_count()) return std::nullopt;
  const auto mean_u = s.user_mean(u);
  if (!mean_u) return std::nullopt;

  const auto nbrs = neighborhood_user(m, s, u, i, cfg.k, cfg);
  if (nbrs.empty()) return std::nullopt;

  double num = 0.0;
  double den = 0.0;
  for (const auto& nb : nbrs) {
    const double r_vi = *m.value(nb.id, i);  // neighbors were drawn from raters of i
    num += nb.weight * (r_vi - *s.user_mean(nb.id));
    den += std::fabs(nb.weight);
  }
  return *mean_u + num / den;
}

ItemKnnModel build_item_model(const RatingsMatrix& m, std::uint32_t pool, double min_weight,
                              std::uint32_t k, bool keep_negative) {
  if (pool == 0) throw std::invalid_argument("build_item_model: pool must be >= 1");
  const auto s = compute_stats(m);
  const auto centered = mean_center_items(m, s);

  ItemKnnModel model;
  model.k = k;
  model.min_weight = min_weight;
  model.items = m.items();
  model.item_mean.resize(m.item_count());
  for (ItemIndex i = 0; i < m.item_count(); ++i) model.item_mean[i] = s.item_mean(i);

  std::vector<double> norm(m.item_count(), 0.0);
  for (ItemIndex i = 0; i < m.item_count(); ++i) norm[i] = row_norm(centered.users_of(i));

  // One pass over users accumulates every pair numerator; per-pair additions
  // happen in ascending user order, matching the merge in item_weight.
  std::unordered_map<std::uint64_t, double> dot;
  for (UserIndex u = 0; u < centered.user_count(); ++u) {
    auto row = centered.items_of(u);
    for (std::size_t a = 0; a < row.size(); ++a)
      for (std::size_t b = a + 1; b < row.size(); ++b) {
        const auto key = (static_cast<std::uint64_t>(row[a].id) << 32) | row[b].id;
        dot[key] += row[a].value * row[b].value;
      }
  }

  model.neighbors.assign(m.item_count(), {});
  for (const auto& [key, num] : dot) {
    const auto i = static_cast<ItemIndex>(key >> 32);
    const auto j = static_cast<ItemIndex>(key & 0xffffffffu);
    const double den = norm[i] * norm[j];
    if (den == 0.0) continue;
    const double w = num / den;
    if (w == 0.0) continue;
    if (std::fabs(w) < min_weight) continue;
    if (!keep_negative && w < 0.0) continue;
    model.neighbors[i].push_back({j, w});
    model.neighbors[j].push_back({i, w});
  }
  for (auto& list : model.neighbors) {
    std::sort(list.begin(), list.end(), pool_order);
    if (list.size() > pool) list.resize(pool);
  }
  return model;
}

std::optional<double> score_item_knn(const ItemKnnModel& model, const RatingsMatrix& m,
                                     UserIndex u, ItemIndex i, std::uint32_t k) {
  if (i >= model.neighbors.size() || u >= m.user_count() || k == 0) return std::nullopt;
  const auto mean_i = model.item_mean[i];
  if (!mean_i) return std::nullopt;

  const auto rated = m.items_of(u);
  auto rating_of = [&](ItemIndex j) -> std::optional<double> {
    auto it = std::lower_bound(rated.begin(), rated.end(), j,
                               [](const Entry& e, ItemIndex key) { return e.id < key; });
    if (it == rated.end() || it->id != j) return std::nullopt;
    return it->value;
  };

  double num = 0.0;
  double den = 0.0;
  std::uint32_t used = 0;
  for (const auto& nb : model.neighbors[i]) {
    if (used == k) break;
    const auto r_uj = rating_of(nb.id);
    if (!r_uj) continue;
    num += nb.weight * (*r_uj - *model.item_mean[nb.id]);
    den += std::fabs(nb.weight);
    ++used;
  }
  if (used == 0) return std::nullopt;
  return *mean_i + num / den;
}

std::optional<double> score_item_knn(const ItemKnnModel& model, const RatingsMatrix& m,
                                     UserIndex u, ItemIndex i) {
  return score_item_knn(model, m, u, i, model.k);
}

void write_item_knn_model(std::ostream& out, const ItemKnnModel& model) {
  for (ItemIndex i = 0; i < model.item_mean.size(); ++i) {
    if (!model.item_mean[i]) continue;
    out << "m " << model.items.token(i) << " " << format_real(*model.item_mean[i]) << "\n";
  }
  for (ItemIndex i = 0; i < model.neighbors.size(); ++i)
    for (const auto& nb : model.neighbors[i])
      out << "w " << model.items.token(i) << " " << model.items.token(nb.id) << " "
          << format_real(nb.weight) << "\n";
}

ItemKnnModel read_item_knn_model(std::istream& in, std::uint32_t k, double min_weight) {
  ItemKnnModel model;
  model.k = k;
  model.min_weight = min_weight;
  std::vector<std::pair<ItemIndex, double>> means;
  std::vector<std::tuple<ItemIndex, ItemIndex, double>> weights;
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
      throw DataError("item model line " + std::to_string(lineno) + ": " + why);
    };
    if (tag == "m") {
      std::string token, v;
      if (!(ls >> token >> v)) fail("expected 'm <token> <mean>'");
      auto parsed = parse_real(v);
      if (!parsed) fail("bad real '" + v + "'");
      means.emplace_back(model.items.intern(token), *parsed);
    } else if (tag == "w") {
      std::string ti, tj, v;
      if (!(ls >> ti >> tj >> v)) fail("expected 'w <token> <token> <weight>'");
      auto parsed = parse_real(v);
      if (!parsed) fail("bad real '" + v + "'");
      weights.emplace_back(model.items.intern(ti), model.items.intern(tj), *parsed);
    } else {
      fail("unknown record tag '" + tag + "'");
    }
  }
  model.item_mean.resize(model.items.size());
  model.neighbors.assign(model.items.size(), {});
  for (const auto& [i, mean] : means) model.item_mean[i] = mean;
  for (const auto& [i, j, w] : weights) model.neighbors[i].push_back({j, w});
  for (auto& list : model.neighbors) std::sort(list.begin(), list.end(), pool_order);
  return model;
}

ItemKnnModel remap_items(const ItemKnnModel& model, const IdMap& target_items) {
  ItemKnnModel out;
  out.k = model.k;
  out.min_weight = model.min_weight;
  out.items = target_items;
  out.item_mean.resize(target_items.size());
  out.neighbors.assign(target_items.size(), {});

  std::vector<std::optional<ItemIndex>> to_target(model.items.size());
  for (ItemIndex i = 0; i < model.items.size(); ++i)
    to_target[i] = target_items.find(model.items.token(i));

  for (ItemIndex i = 0; i < model.items.size(); ++i) {
    if (!to_target[i]) continue;
    const auto ti = *to_target[i];
    out.item_mean[ti] = model.item_mean[i];
    for (const auto& nb : model.neighbors[i]) {
      if (!to_target[nb.id]) continue;
      out.neighbors[ti].push_back({*to_target[nb.id], nb.weight});
    }
    std::sort(out.neighbors[ti].begin(), out.neighbors[ti].end(), pool_order);
  }
  return out;
}

}  // namespace cfkit
