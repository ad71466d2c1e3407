#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "qarank/repr.hpp"

namespace qarank {

struct SvmHyper {
  double C = 1.0;
  double gamma = 0.0;  // 0 = auto: 1 / (n_features * mean feature variance)
  double tol = 1e-3;   // KKT tolerance
  int max_passes = 500;
  uint64_t seed = 42;  // kept for interface uniformity; the solver is deterministic
};

struct SmoResult {
  Eigen::VectorXd alpha;
  double bias = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Sequential minimal optimization for the binary soft-margin dual.
// K is the full kernel matrix, y in {-1, +1}. Pair selection is deterministic:
// second-choice by maximum |E1 - E2| with lowest-index tie-breaking.
SmoResult smo_solve(const Eigen::MatrixXd& K, const std::vector<double>& y, double C,
                    double tol, int max_passes);

struct PlattParams {
  double A = 0.0;
  double B = 0.0;
};

// Sigmoid fit p(y=1|f) = 1/(1 + exp(A f + B)) by Newton's method with
// prior-corrected targets.
PlattParams platt_fit(const std::vector<double>& decision_values,
                      const std::vector<double>& y);

double platt_apply(const PlattParams& p, double decision_value);

// One-vs-rest RBF-kernel SVM over sparse count vectors, with per-class Platt
// calibration normalized into a label distribution.
class SvmModel {
public:
  SvmModel() = default;

  static SvmModel train(const std::vector<SparseVector>& features,
                        const std::vector<int>& labels,
                        const std::vector<std::string>& label_names, int n_features,
                        uint64_t vocab_hash, const SvmHyper& hyper);

  Eigen::VectorXd decision_values(const SparseVector& x) const;
  Eigen::VectorXd predict_proba(const SparseVector& x) const;
  int predict_label(const SparseVector& x) const;

  const std::vector<std::string>& labels() const { return labels_; }
  uint64_t vocab_hash() const { return vocab_hash_; }
  double gamma() const { return gamma_; }
  const std::vector<SmoResult>& per_class() const { return problems_; }

  void save(const std::string& path) const;
  static SvmModel load(const std::string& path,
                       std::optional<uint64_t> expected_vocab_hash = std::nullopt);

private:
  double kernel(const SparseVector& a, double norm_a, const SparseVector& b,
                double norm_b) const;

  std::vector<std::string> labels_;
  uint64_t vocab_hash_ = 0;
  int n_features_ = 0;
  double gamma_ = 1.0;
  double C_ = 1.0;

  std::vector<SparseVector> support_vectors_;
  std::vector<double> sv_norms_;  // squared norms
  // per class: dual coefficients alpha_i * y_i over support_vectors_
  std::vector<Eigen::VectorXd> coef_;
  std::vector<double> bias_;
  std::vector<PlattParams> platt_;
  std::vector<SmoResult> problems_;  // solver diagnostics (not persisted)
};

SparseVector to_sparse_vector(const SparseCounts& counts);

}  // namespace qarank
