#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "qarank/corpus.hpp"
#include "qarank/embedding.hpp"
#include "qarank/lexical.hpp"

namespace qarank {

// Classifier abstraction shared by the topic model and the SVM baseline.
struct LabelScorer {
  std::vector<std::string> labels;
  std::function<Eigen::VectorXd(const Abstract&)> proba;
};

struct RankedEntry {
  std::string id;
  double score = 0.0;
  std::string predicted_label;
};
using RankedList = std::vector<RankedEntry>;

enum class RerankMode { None, Bm25Extra, Qar, Sum };

RerankMode rerank_mode_from_string(const std::string& s);
std::string to_string(RerankMode mode);

// Step 1: score each cluster member by the classifier probability of the
// cluster label; sort descending with stable, then lexicographic-id ties.
RankedList rank_by_confidence(const LabelScorer& scorer, const Cluster& cluster,
                              const Corpus& corpus);

struct RerankOptions {
  RerankMode mode = RerankMode::Bm25Extra;
  bool combine_with_confidence = false;  // non-default: min-max sum with input scores
  bool clamp_negative_attention = false;
};

// Step 2: replace the ordering with an unsupervised relevance score against
// the cluster label. `stats` must be built over the collection being ranked.
RankedList rerank(const RankedList& ranked, const RerankOptions& opts,
                  const std::string& cluster_label, const Corpus& corpus,
                  const EmbeddingTable& embeddings, const Bm25Stats& stats);

// BM25 statistics over the raw title+abstract streams of every document that
// appears in any of the given clusters.
Bm25Stats build_cluster_stats(const std::vector<Cluster>& clusters, const Corpus& corpus,
                              double k1, double b);

std::string ranked_list_tsv(const RankedList& list);

}  // namespace qarank
