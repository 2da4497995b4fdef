#include "cfkit/scoring.hpp"

#include <algorithm>

namespace cfkit {

namespace {

void validate_request(const ScoreRequest& req) {
  if (!req.user && !req.query)
    throw std::invalid_argument("ScoreRequest: at least one of user/query must be present");
}

}  // namespace

std::optional<ScorerChain::Attributed> ScorerChain::try_score(const ScoreRequest& req,
                                                              ItemIndex item) const {
  validate_request(req);
  for (std::size_t stage = 0; stage < stages_.size(); ++stage) {
    if (auto v = stages_[stage]->score(req, item)) return Attributed{*v, stage};
  }
  return std::nullopt;
}

ScorerChain::Attributed ScorerChain::score_attributed(const ScoreRequest& req,
                                                      ItemIndex item) const {
  auto r = try_score(req, item);
  if (!r)
    throw DataError("ScorerChain: no scorer produced a defined score (chain is not total)");
  return *r;
}

double score(const ScorerChain& chain, const ScoreRequest& req, ItemIndex item) {
  return chain.score(req, item);
}

RankedList rank_top_n(const ScorerChain& chain, const RatingsMatrix& m, const ScoreRequest& req,
                      std::size_t n) {
  validate_request(req);

  std::vector<ItemIndex> candidates;
  if (req.candidates) {
    candidates = *req.candidates;
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    for (auto i : candidates)
      if (i >= m.item_count()) throw DataError("rank_top_n: unknown item index " + std::to_string(i));
  } else {
    candidates.resize(m.item_count());
    for (ItemIndex i = 0; i < m.item_count(); ++i) candidates[i] = i;
  }

  if (req.user && req.exclude_rated && *req.user < m.user_count()) {
    const auto rated = m.items_of(*req.user);
    std::erase_if(candidates, [&](ItemIndex i) {
      auto it = std::lower_bound(rated.begin(), rated.end(), i,
                                 [](const Entry& e, ItemIndex key) { return e.id < key; });
      return it != rated.end() && it->id == i;
    });
  }

  RankedList scored;
  scored.reserve(candidates.size());
  for (auto i : candidates)
    if (auto r = chain.try_score(req, i)) scored.push_back({i, r->value});

  const auto take = std::min(n, scored.size());
  auto order = [&m](const RankedItem& a, const RankedItem& b) {
    if (a.score != b.score) return a.score > b.score;
    return m.items().token(a.item) < m.items().token(b.item);
  };
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                    scored.end(), order);
  scored.resize(take);
  return scored;
}

std::optional<double> BiasScorer::score(const ScoreRequest& req, ItemIndex item) const {
  return model_.predict(req.user, item);
}

std::optional<double> PopularityScorer::score(const ScoreRequest&, ItemIndex item) const {
  return popularity_score(co_, item);
}

std::optional<double> LiftScorer::score(const ScoreRequest& req, ItemIndex item) const {
  if (!req.query) return std::nullopt;
  return lift_score(co_, item, *req.query);
}

std::optional<double> ItemSimilarityScorer::score(const ScoreRequest& req, ItemIndex item) const {
  if (!req.query) return std::nullopt;
  if (*req.query >= centered_.item_count() || item >= centered_.item_count())
    return std::nullopt;
  return item_weight(centered_, item, *req.query);
}

std::optional<double> UserKnnScorer::score(const ScoreRequest& req, ItemIndex item) const {
  if (!req.user) return std::nullopt;
  return score_user_knn(m_, s_, *req.user, item, cfg_);
}

std::optional<double> ItemKnnScorer::score(const ScoreRequest& req, ItemIndex item) const {
  if (!req.user) return std::nullopt;
  return score_item_knn(model_, m_, *req.user, item);
}

std::optional<double> MfScorer::score(const ScoreRequest& req, ItemIndex item) const {
  if (!req.user) return std::nullopt;
  if (!model_.bias) {
    const bool known_u = *req.user < model_.user_count();
    const bool known_i = item < model_.item_count();
    if (!known_u || !known_i) return std::nullopt;
  }
  return score_mf(model_, req.user, item);
}

}  // namespace cfkit
