#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "qarank/embedding.hpp"

namespace qarank {

// Sparse vectors keyed by vocabulary index, indices strictly increasing.
struct SparseCounts {
  int size = 0;  // Z
  std::vector<std::pair<int, int>> entries;
};

struct SparseVector {
  int size = 0;
  std::vector<std::pair<int, double>> entries;
};

// Cosine similarity with the convention that any zero vector has cosine 0.
double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

SparseCounts bow(const std::vector<int>& tokens, int vocab_size);

// Smoothed idf over tokenized documents: ln((1 + N) / (1 + df)) + 1.
Eigen::VectorXd compute_idf(const std::vector<std::vector<int>>& docs, int vocab_size);

// Raw term count times idf, no length normalization.
SparseVector tfidf(const std::vector<int>& tokens, int vocab_size,
                   const Eigen::VectorXd& idf);

// Embedding sum representation: componentwise sum of word vectors.
Eigen::VectorXd esr(const std::vector<std::string>& tokens, const EmbeddingTable& table);

// Per-position cosine of one query word against each target word.
std::vector<double> attention_histogram(const std::string& query_word,
                                        const std::vector<std::string>& target_tokens,
                                        const EmbeddingTable& table);

// Query-aware representation: sum over query words of the attention-weighted
// sum of target word vectors. clamp_negative zeroes negative cosines.
Eigen::VectorXd qar(const std::vector<std::string>& query_tokens,
                    const std::vector<std::string>& target_tokens,
                    const EmbeddingTable& table, bool clamp_negative = false);

}  // namespace qarank
