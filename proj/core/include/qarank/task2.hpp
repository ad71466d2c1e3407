#pragma once

#include <Eigen/Core>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qarank/corpus.hpp"
#include "qarank/embedding.hpp"
#include "qarank/lexical.hpp"

namespace qarank {

enum class UnsupVersion { V1 = 1, V2 = 2 };
enum class NormKind { L1, L2 };

// version1: r_q^2 + r_t^2
// version2: r_q^2 + r'_t * r_t with r'_t = (r_t > r_q) ? |r_t - r_q| : 0
double unsup_combine(double r_q, double r_t, UnsupVersion version);

// Query/title relevance of one sentence via its query-aware representation:
//   r_q = cos(ESR(q), QAR(q, s)),  r_t = cos(ESR(t), QAR(q, s))
// The final score adds the summed BM25-Extra features of (query, sentence).
double unsup_relevance(const std::vector<std::string>& sentence_words,
                       const std::vector<std::string>& sentence_raw_terms,
                       const std::vector<std::string>& title_words,
                       const std::vector<std::string>& query_tokens, UnsupVersion version,
                       const EmbeddingTable& table, const Bm25Stats& stats,
                       bool clamp_negative = false);

struct SupRankerParams {
  Eigen::MatrixXd G;  // P x E shared projection
  double beta = 0.0;  // title weight in the distance
  NormKind norm = NormKind::L1;
  Eigen::VectorXd w;  // regression weights over [r_sup, bm25-extra(5), siamese?]
  double bias = 0.0;
  int feature_width() const { return static_cast<int>(w.size()); }

  void save(const std::string& path) const;
  static SupRankerParams load(const std::string& path);
};

// Distance-based relevance with residual-concatenated projections:
//   x^p = [G x; x],  delta = (phi^p - q^p) + beta (phi^p - t^p)
//   r_sup = exp(-||delta||)
double sup_relevance(const SupRankerParams& params, const Eigen::VectorXd& phi,
                     const Eigen::VectorXd& title_esr, const Eigen::VectorXd& query_esr);

// Final supervised score: sigmoid over the affine feature combination.
double sup_final_score(const SupRankerParams& params, const Eigen::VectorXd& features);

struct SupTrainExample {
  Eigen::VectorXd phi;
  Eigen::VectorXd title_esr;
  Eigen::VectorXd query_esr;
  Eigen::VectorXd lexical;  // 5 BM25-Extra features
  std::optional<double> siamese;
  double label = 0.0;  // 1 when the sentence is gold relevant
};

struct SupHyper {
  int projection_dim = 100;
  double beta = 0.0;
  NormKind norm = NormKind::L1;
  std::string optimizer = "adam";  // "adam" or "gd"
  double learning_rate = 0.01;
  int epochs = 300;
  uint64_t seed = 42;
};

struct SupTrainResult {
  SupRankerParams params;
  std::vector<double> epoch_mse;
};

// Joint full-batch training of G and the regressor on MSE against {0,1}.
SupTrainResult train_sup_ranker(const std::vector<SupTrainExample>& examples,
                                const SupHyper& hyper);

// Argmax sentence index; ties go to the lowest index.
int extract_most_relevant(const std::vector<double>& scores);

// Majority vote; ties resolved by the earliest model in priority (input) order
// among tied indices.
int ensemble_vote(const std::vector<int>& predictions);

// --- per-abstract scoring drivers ---

struct SentenceScores {
  std::string ranker;
  std::vector<double> scores;
};

struct Task2Options {
  double k1 = 1.2;
  double b = 0.75;
  bool clamp_negative_attention = false;
};

// BM25 statistics over the raw sentences of one abstract.
Bm25Stats abstract_sentence_stats(const Abstract& a, const Task2Options& opt);

SentenceScores score_sentences_bm25(const Abstract& a,
                                    const std::vector<std::string>& query,
                                    const Task2Options& opt);
SentenceScores score_sentences_unsup(const Abstract& a,
                                     const std::vector<std::string>& query,
                                     UnsupVersion version, const EmbeddingTable& table,
                                     const Task2Options& opt);

using SiameseScores = std::map<std::pair<std::string, int>, double>;
SiameseScores load_siamese_scores(const std::string& path);

SentenceScores score_sentences_sup(const Abstract& a, const std::vector<std::string>& query,
                                   const SupRankerParams& params,
                                   const EmbeddingTable& table, const Task2Options& opt,
                                   const SiameseScores* siamese = nullptr);

}  // namespace qarank
