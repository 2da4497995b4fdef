#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cfkit/bias.hpp"
#include "cfkit/cooccur.hpp"
#include "cfkit/factor.hpp"
#include "cfkit/knn.hpp"
#include "cfkit/ratings.hpp"

namespace cfkit {

/// The conditioning tuple for a score or ranking request. At least one of
/// user/query must be present. `query` is an item-identifier context (the
/// related-items case); `context` is accepted but not interpreted.
struct ScoreRequest {
  std::optional<UserIndex> user;
  std::optional<ItemIndex> query;
  std::optional<std::string> context;
  std::optional<std::vector<ItemIndex>> candidates;
  bool exclude_rated = true;  // drop the user's already-rated items from rankings
};

/// A scoring strategy. Returns nullopt when it cannot produce a score for
/// this request — distinct from any numeric value.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::optional<double> score(const ScoreRequest& req, ItemIndex item) const = 0;
};

/// Ordered fallback sequence: the first scorer producing a defined score
/// wins. A chain intended to be total should end with a scorer that is
/// defined everywhere (GlobalMeanScorer or BiasScorer).
class ScorerChain {
 public:
  ScorerChain() = default;

  ScorerChain& add(std::unique_ptr<Scorer> scorer) {
    stages_.push_back(std::move(scorer));
    return *this;
  }

  std::size_t size() const { return stages_.size(); }

  struct Attributed {
    double value = 0.0;
    std::size_t stage = 0;  // index of the scorer that produced the value
  };

  /// First defined score with its producing stage; nullopt if every stage
  /// declines.
  std::optional<Attributed> try_score(const ScoreRequest& req, ItemIndex item) const;

  /// As try_score but throws DataError when the chain is exhausted (a
  /// violation of the totality contract).
  Attributed score_attributed(const ScoreRequest& req, ItemIndex item) const;

  double score(const ScoreRequest& req, ItemIndex item) const {
    return score_attributed(req, item).value;
  }

 private:
  std::vector<std::unique_ptr<Scorer>> stages_;
};

double score(const ScorerChain& chain, const ScoreRequest& req, ItemIndex item);

struct RankedItem {
  ItemIndex item = 0;
  double score = 0.0;

  friend bool operator==(const RankedItem&, const RankedItem&) = default;
};

/// Scores non-increasing; ties resolved by ascending external item token.
using RankedList = std::vector<RankedItem>;

/// The top-n candidates under the deterministic total order (score
/// descending, then token ascending). Candidates default to every item of
/// m; the requesting user's rated items are excluded when the flag is set.
/// Candidates the chain cannot score are skipped, so a total chain ranks
/// the full candidate set.
RankedList rank_top_n(const ScorerChain& chain, const RatingsMatrix& m, const ScoreRequest& req,
                      std::size_t n);

// ---------------------------------------------------------------------------
// Concrete scorers. Each holds references; the referenced models/matrices
// must outlive the scorer.

/// Always-defined constant baseline; the conventional chain terminal.
class GlobalMeanScorer : public Scorer {
 public:
  explicit GlobalMeanScorer(double mean) : mean_(mean) {}
  std::optional<double> score(const ScoreRequest&, ItemIndex) const override { return mean_; }

 private:
  double mean_;
};

/// b + b_i + b_u with zero offsets for unknown ids; always defined.
class BiasScorer : public Scorer {
 public:
  explicit BiasScorer(const BiasModel& model) : model_(model) {}
  std::optional<double> score(const ScoreRequest& req, ItemIndex item) const override;

 private:
  const BiasModel& model_;
};

/// s(i) = share of users who rated i; ignores the user entirely.
class PopularityScorer : public Scorer {
 public:
  explicit PopularityScorer(const CoOccurrence& co) : co_(co) {}
  std::optional<double> score(const ScoreRequest& req, ItemIndex item) const override;

 private:
  const CoOccurrence& co_;
};

/// s(i|h): lift of the candidate given the query item. Undefined without a
/// query or when either item has no raters.
class LiftScorer : public Scorer {
 public:
  explicit LiftScorer(const CoOccurrence& co) : co_(co) {}
  std::optional<double> score(const ScoreRequest& req, ItemIndex item) const override;

 private:
  const CoOccurrence& co_;
};

/// s(i|h) by item-item cosine against the query item. `centered` must be an
/// item-mean-centered matrix.
class ItemSimilarityScorer : public Scorer {
 public:
  explicit ItemSimilarityScorer(const RatingsMatrix& centered) : centered_(centered) {}
  std::optional<double> score(const ScoreRequest& req, ItemIndex item) const override;

 private:
  const RatingsMatrix& centered_;
};

class UserKnnScorer : public Scorer {
 public:
  UserKnnScorer(const RatingsMatrix& m, const Stats& s, UserKnnConfig cfg)
      : m_(m), s_(s), cfg_(cfg) {}
  std::optional<double> score(const ScoreRequest& req, ItemIndex item) const override;

 private:
  const RatingsMatrix& m_;
  const Stats& s_;
  UserKnnConfig cfg_;
};

class ItemKnnScorer : public Scorer {
 public:
  ItemKnnScorer(const ItemKnnModel& model, const RatingsMatrix& m) : model_(model), m_(m) {}
  std::optional<double> score(const ScoreRequest& req, ItemIndex item) const override;

 private:
  const ItemKnnModel& model_;
  const RatingsMatrix& m_;
};

/// Defined whenever the model can say something: always, for models with a
/// bias component; for bias-less (loaded) models only when both ids have
/// factor rows.
class MfScorer : public Scorer {
 public:
  explicit MfScorer(const FactorModel& model) : model_(model) {}
  std::optional<double> score(const ScoreRequest& req, ItemIndex item) const override;

 private:
  const FactorModel& model_;
};

}  // namespace cfkit
