#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qarank/corpus.hpp"
#include "qarank/embedding.hpp"

namespace qarank {

enum class Activation { Sigmoid, Tanh };

struct TopicHyper {
  int hidden = 50;
  double lambda = 0.1;  // weight of the generative term in the hybrid loss
  double learning_rate = 1e-3;
  int epochs = 50;
  int patience = 10;
  uint64_t seed = 42;
  Activation activation = Activation::Sigmoid;
};

struct TopicEpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_accuracy = 0.0;
};

// Raw view of one trainable parameter block, for optimizers and gradient checks.
struct ParamBlock {
  std::string name;
  double* data;
  Eigen::Index size;
};

// Supervised autoregressive neural topic model with per-word attention
// aggregation and optional pretrained-embedding feature blocks.
//
// Document probability factorizes into per-word conditionals over bag-of-words
// prefixes:
//   p(v_i = w | v_<i) = softmax(b + U h_i)_w,   h_i = f(c + sum_{j<i} W[:,v_j])
// The classification head uses attention-aggregated representations
//   h(v)   = f(c + sum_i alpha_i W[:,v_i])
//   h_e(v) = [f(c_f + sum_i alpha_i e_fast(v_i)); f(c_w + sum_i alpha_i e_w2v(v_i))]
//   p(q|v) = softmax(d + S [h(v); h_e(v)])
// with alpha = softmax over positions of a learned per-vocabulary score a[v_i].
// Training minimizes -log p(q|v) + lambda * (-sum_i log p(v_i|v_<i)).
class TopicModel {
public:
  TopicModel() = default;

  static TopicModel init(const Vocabulary& vocab, const std::vector<std::string>& labels,
                         const EmbeddingTable& fasttext, const EmbeddingTable& w2v,
                         const TopicHyper& hyper);

  int vocab_size() const { return Z_; }
  int hidden_size() const { return H_; }
  int n_labels() const { return L_; }
  int e_fast() const { return Ef_; }
  int e_w2v() const { return Ew_; }
  int feature_size() const { return H_ + Ef_ + Ew_; }  // H'
  uint64_t vocab_hash() const { return vocab_hash_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const TopicHyper& hyper() const { return hyper_; }

  // Full conditional distributions, one Z-column per position.
  Eigen::MatrixXd conditionals(const std::vector<int>& doc) const;
  double conditionals_log_likelihood(const std::vector<int>& doc) const;

  // Attention weights over document positions: softmax of a[v_i].
  Eigen::VectorXd attention_weights(const std::vector<int>& doc) const;
  Eigen::VectorXd hidden_attention(const std::vector<int>& doc) const;
  Eigen::VectorXd embedding_features(const std::vector<int>& doc) const;

  // Label distribution; an empty document falls back to the bias-only
  // representation so inference never fails.
  Eigen::VectorXd predict_proba(const std::vector<int>& doc) const;
  int predict_label(const std::vector<int>& doc) const;

  struct Gradients {
    Eigen::MatrixXd W, U, S;
    Eigen::VectorXd b, c, attn, d, c_fast, c_w2v;
  };
  Gradients zero_gradients() const;

  double hybrid_loss(const std::vector<int>& doc, int label) const;
  // Accumulates into *grad; returns the per-document hybrid loss.
  double loss_and_gradients(const std::vector<int>& doc, int label, Gradients* grad) const;

  std::vector<TopicEpochStats> train(const Corpus& train_corpus, const Corpus& dev_corpus,
                                     const TopicHyper& hyper);

  double classification_accuracy(const Corpus& corpus) const;

  std::vector<ParamBlock> parameter_blocks();

  void save(const std::string& path) const;
  // Verifies the stored vocabulary hash when expected_vocab_hash is given.
  static TopicModel load(const std::string& path,
                         std::optional<uint64_t> expected_vocab_hash = std::nullopt);

private:
  double f(double x) const;
  Eigen::MatrixXd f_mat(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd f_prime_from_value(const Eigen::MatrixXd& h) const;
  Eigen::VectorXd supervised_features(const std::vector<int>& doc) const;

  int Z_ = 0, H_ = 0, L_ = 0, Ef_ = 0, Ew_ = 0;
  uint64_t vocab_hash_ = 0;
  TopicHyper hyper_;
  std::vector<std::string> labels_;

  Eigen::MatrixXd W_;       // H x Z encoder
  Eigen::MatrixXd U_;       // Z x H decoder
  Eigen::VectorXd b_;       // Z decoder bias
  Eigen::VectorXd c_;       // H encoder bias
  Eigen::VectorXd attn_;    // Z attention scores
  Eigen::MatrixXd S_;       // L x H' classifier
  Eigen::VectorXd d_;       // L classifier bias
  Eigen::VectorXd c_fast_;  // E_fast feature bias
  Eigen::VectorXd c_w2v_;   // E_w2v feature bias

  // Pretrained embedding columns gathered per vocabulary index (not trained).
  Eigen::MatrixXd emb_fast_;  // E_fast x Z
  Eigen::MatrixXd emb_w2v_;   // E_w2v x Z
};

}  // namespace qarank
