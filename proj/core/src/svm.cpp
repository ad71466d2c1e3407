#include "qarank/svm.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"
#include "qarank/util.hpp"

namespace qarank {

SparseVector to_sparse_vector(const SparseCounts& counts) {
  SparseVector v;
  v.size = counts.size;
  v.entries.reserve(counts.entries.size());
  for (const auto& [idx, c] : counts.entries)
    v.entries.emplace_back(idx, static_cast<double>(c));
  return v;
}

namespace {

double sparse_dot(const SparseVector& a, const SparseVector& b) {
  double dot = 0.0;
  size_t i = 0, j = 0;
  while (i < a.entries.size() && j < b.entries.size()) {
    int ia = a.entries[i].first, ib = b.entries[j].first;
    if (ia == ib) {
      dot += a.entries[i].second * b.entries[j].second;
      ++i;
      ++j;
    } else if (ia < ib) {
      ++i;
    } else {
      ++j;
    }
  }
  return dot;
}

double sparse_norm2(const SparseVector& a) {
  double n = 0.0;
  for (const auto& [idx, v] : a.entries) n += v * v;
  return n;
}

class SmoSolver {
public:
  SmoSolver(const Eigen::MatrixXd& K, const std::vector<double>& y, double C, double tol)
      : K_(K), y_(y), C_(C), tol_(tol), n_(static_cast<int>(y.size())),
        alpha_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(y.size()))), b_(0.0) {}

  SmoResult run(int max_passes) {
    bool examine_all = true;
    int changed = 0;
    int pass = 0;
    bool converged = false;
    while (pass < max_passes) {
      ++pass;
      changed = 0;
      for (int i = 0; i < n_; ++i) {
        if (!examine_all && (alpha_[i] <= 0.0 || alpha_[i] >= C_)) continue;
        changed += examine(i);
      }
      if (examine_all) {
        if (changed == 0) {
          converged = true;
          break;
        }
        examine_all = false;
      } else if (changed == 0) {
        examine_all = true;
      }
    }
    SmoResult r;
    r.alpha = alpha_;
    r.bias = b_;
    r.iterations = pass;
    r.converged = converged;
    return r;
  }

private:
  double decision(int i) const {
    double f = -b_;
    for (int j = 0; j < n_; ++j)
      if (alpha_[j] > 0.0) f += alpha_[j] * y_[j] * K_(j, i);
    return f;
  }

  int examine(int i2) {
    double y2 = y_[i2];
    double e2 = decision(i2) - y2;
    double r2 = e2 * y2;
    if (!((r2 < -tol_ && alpha_[i2] < C_) || (r2 > tol_ && alpha_[i2] > 0.0))) return 0;

    // best second choice by |E1 - E2| over non-bound examples
    int best = -1;
    double best_gap = -1.0;
    for (int i = 0; i < n_; ++i) {
      if (i == i2 || alpha_[i] <= 0.0 || alpha_[i] >= C_) continue;
      double gap = std::fabs(decision(i) - y_[i] - e2);
      if (gap > best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    if (best >= 0 && take_step(best, i2, e2)) return 1;
    for (int i = 0; i < n_; ++i) {
      if (i == i2 || alpha_[i] <= 0.0 || alpha_[i] >= C_) continue;
      if (take_step(i, i2, e2)) return 1;
    }
    for (int i = 0; i < n_; ++i) {
      if (i == i2) continue;
      if (take_step(i, i2, e2)) return 1;
    }
    return 0;
  }

  bool take_step(int i1, int i2, double e2) {
    if (i1 == i2) return false;
    double a1 = alpha_[i1], a2 = alpha_[i2];
    double y1 = y_[i1], y2 = y_[i2];
    double e1 = decision(i1) - y1;
    double s = y1 * y2;
    double lo, hi;
    if (s < 0.0) {
      lo = std::max(0.0, a2 - a1);
      hi = std::min(C_, C_ + a2 - a1);
    } else {
      lo = std::max(0.0, a1 + a2 - C_);
      hi = std::min(C_, a1 + a2);
    }
    if (lo >= hi) return false;
    double eta = K_(i1, i1) + K_(i2, i2) - 2.0 * K_(i1, i2);
    double a2_new;
    if (eta > 1e-12) {
      a2_new = a2 + y2 * (e1 - e2) / eta;
      a2_new = std::clamp(a2_new, lo, hi);
    } else {
      // flat objective along this pair: evaluate both ends
      double f1 = y1 * (e1 + b_) - a1 * K_(i1, i1) - s * a2 * K_(i1, i2);
      double f2 = y2 * (e2 + b_) - s * a1 * K_(i1, i2) - a2 * K_(i2, i2);
      double l1 = a1 + s * (a2 - lo);
      double h1 = a1 + s * (a2 - hi);
      double obj_lo = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * K_(i1, i1) +
                      0.5 * lo * lo * K_(i2, i2) + s * lo * l1 * K_(i1, i2);
      double obj_hi = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * K_(i1, i1) +
                      0.5 * hi * hi * K_(i2, i2) + s * hi * h1 * K_(i1, i2);
      if (obj_lo < obj_hi - 1e-12)
        a2_new = lo;
      else if (obj_hi < obj_lo - 1e-12)
        a2_new = hi;
      else
        return false;
    }
    if (std::fabs(a2_new - a2) < 1e-12 * (a2_new + a2 + 1e-12)) return false;
    double a1_new = a1 + s * (a2 - a2_new);

    double b1 = e1 + y1 * (a1_new - a1) * K_(i1, i1) + y2 * (a2_new - a2) * K_(i1, i2) + b_;
    double b2 = e2 + y1 * (a1_new - a1) * K_(i1, i2) + y2 * (a2_new - a2) * K_(i2, i2) + b_;
    if (a1_new > 0.0 && a1_new < C_)
      b_ = b1;
    else if (a2_new > 0.0 && a2_new < C_)
      b_ = b2;
    else
      b_ = 0.5 * (b1 + b2);

    alpha_[i1] = a1_new;
    alpha_[i2] = a2_new;
    return true;
  }

  const Eigen::MatrixXd& K_;
  const std::vector<double>& y_;
  double C_, tol_;
  int n_;
  Eigen::VectorXd alpha_;
  double b_;
};

}  // namespace

SmoResult smo_solve(const Eigen::MatrixXd& K, const std::vector<double>& y, double C,
                    double tol, int max_passes) {
  if (y.empty()) throw DataError("smo_solve on empty problem");
  SmoSolver solver(K, y, C, tol);
  return solver.run(max_passes);
}

PlattParams platt_fit(const std::vector<double>& decision_values,
                      const std::vector<double>& y) {
  // Platt scaling with the Newton iteration of Lin, Lin & Weng (2007).
  size_t n = decision_values.size();
  double prior1 = 0.0;
  for (double t : y) prior1 += t > 0.5 ? 1.0 : 0.0;
  double prior0 = static_cast<double>(n) - prior1;
  double hi_target = (prior1 + 1.0) / (prior1 + 2.0);
  double lo_target = 1.0 / (prior0 + 2.0);
  std::vector<double> t(n);
  for (size_t i = 0; i < n; ++i) t[i] = y[i] > 0.5 ? hi_target : lo_target;

  double a = 0.0;
  double b = std::log((prior0 + 1.0) / (prior1 + 1.0));
  auto objective = [&](double A, double B) {
    double obj = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double z = decision_values[i] * A + B;
      if (z >= 0)
        obj += t[i] * z + std::log1p(std::exp(-z));
      else
        obj += (t[i] - 1.0) * z + std::log1p(std::exp(z));
    }
    return obj;
  };
  double fval = objective(a, b);
  const int max_iter = 100;
  const double min_step = 1e-10, sigma = 1e-12, eps = 1e-5;
  for (int it = 0; it < max_iter; ++it) {
    double h11 = sigma, h22 = sigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double z = decision_values[i] * a + b;
      double p, q;
      if (z >= 0) {
        p = std::exp(-z) / (1.0 + std::exp(-z));
        q = 1.0 / (1.0 + std::exp(-z));
      } else {
        p = 1.0 / (1.0 + std::exp(z));
        q = std::exp(z) / (1.0 + std::exp(z));
      }
      double d2 = p * q;
      h11 += decision_values[i] * decision_values[i] * d2;
      h22 += d2;
      h21 += decision_values[i] * d2;
      double d1 = t[i] - p;
      g1 += decision_values[i] * d1;
      g2 += d1;
    }
    if (std::fabs(g1) < eps && std::fabs(g2) < eps) break;
    double det = h11 * h22 - h21 * h21;
    double da = -(h22 * g1 - h21 * g2) / det;
    double db = -(-h21 * g1 + h11 * g2) / det;
    double gd = g1 * da + g2 * db;
    double step = 1.0;
    while (step >= min_step) {
      double na = a + step * da, nb = b + step * db;
      double nf = objective(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        break;
      }
      step /= 2.0;
    }
    if (step < min_step) break;
  }
  return {a, b};
}

double platt_apply(const PlattParams& p, double decision_value) {
  double z = decision_value * p.A + p.B;
  if (z >= 0) return std::exp(-z) / (1.0 + std::exp(-z));
  return 1.0 / (1.0 + std::exp(z));
}

double SvmModel::kernel(const SparseVector& a, double norm_a, const SparseVector& b,
                        double norm_b) const {
  double d2 = norm_a + norm_b - 2.0 * sparse_dot(a, b);
  if (d2 < 0.0) d2 = 0.0;
  return std::exp(-gamma_ * d2);
}

SvmModel SvmModel::train(const std::vector<SparseVector>& features,
                         const std::vector<int>& labels,
                         const std::vector<std::string>& label_names, int n_features,
                         uint64_t vocab_hash, const SvmHyper& hyper) {
  if (features.size() != labels.size() || features.empty())
    throw DataError("svm training needs matching nonempty features/labels");
  std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) throw DataError("svm training needs at least 2 classes");

  SvmModel m;
  m.labels_ = label_names;
  m.vocab_hash_ = vocab_hash;
  m.n_features_ = n_features;
  m.C_ = hyper.C;

  const size_t n = features.size();
  if (hyper.gamma > 0.0) {
    m.gamma_ = hyper.gamma;
  } else {
    // 1 / (n_features * mean feature variance), population variance per feature
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(n_features);
    Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(n_features);
    for (const auto& x : features)
      for (const auto& [idx, v] : x.entries) {
        sum[idx] += v;
        sumsq[idx] += v * v;
      }
    double var_mean = 0.0;
    for (int f = 0; f < n_features; ++f) {
      double mean = sum[f] / static_cast<double>(n);
      var_mean += sumsq[f] / static_cast<double>(n) - mean * mean;
    }
    var_mean /= static_cast<double>(n_features);
    m.gamma_ = var_mean > 1e-12 ? 1.0 / (static_cast<double>(n_features) * var_mean) : 1.0;
  }

  std::vector<double> norms(n);
  for (size_t i = 0; i < n; ++i) norms[i] = sparse_norm2(features[i]);
  Eigen::MatrixXd K(n, n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i; j < n; ++j) {
      double k = m.kernel(features[i], norms[i], features[j], norms[j]);
      K(i, j) = k;
      K(j, i) = k;
    }
  }

  m.support_vectors_ = features;
  m.sv_norms_ = norms;
  int n_classes = static_cast<int>(label_names.size());
  for (int cls = 0; cls < n_classes; ++cls) {
    std::vector<double> y(n);
    for (size_t i = 0; i < n; ++i) y[i] = labels[i] == cls ? 1.0 : -1.0;
    SmoResult r = smo_solve(K, y, hyper.C, hyper.tol, hyper.max_passes);
    Eigen::VectorXd coef(n);
    std::vector<double> dec(n);
    for (size_t i = 0; i < n; ++i) coef[i] = r.alpha[i] * y[i];
    for (size_t i = 0; i < n; ++i) dec[i] = coef.dot(K.col(i)) - r.bias;
    std::vector<double> y01(n);
    for (size_t i = 0; i < n; ++i) y01[i] = y[i] > 0 ? 1.0 : 0.0;
    m.coef_.push_back(std::move(coef));
    m.bias_.push_back(r.bias);
    m.platt_.push_back(platt_fit(dec, y01));
    m.problems_.push_back(std::move(r));
  }
  return m;
}

Eigen::VectorXd SvmModel::decision_values(const SparseVector& x) const {
  double nx = sparse_norm2(x);
  Eigen::VectorXd k(static_cast<Eigen::Index>(support_vectors_.size()));
  for (size_t i = 0; i < support_vectors_.size(); ++i)
    k[static_cast<Eigen::Index>(i)] = kernel(support_vectors_[i], sv_norms_[i], x, nx);
  Eigen::VectorXd out(static_cast<Eigen::Index>(coef_.size()));
  for (size_t c = 0; c < coef_.size(); ++c)
    out[static_cast<Eigen::Index>(c)] = coef_[c].dot(k) - bias_[c];
  return out;
}

Eigen::VectorXd SvmModel::predict_proba(const SparseVector& x) const {
  Eigen::VectorXd dec = decision_values(x);
  Eigen::VectorXd p(dec.size());
  for (Eigen::Index c = 0; c < dec.size(); ++c) p[c] = platt_apply(platt_[c], dec[c]);
  double total = p.sum();
  if (total <= 0.0) return Eigen::VectorXd::Constant(p.size(), 1.0 / p.size());
  return p / total;
}

int SvmModel::predict_label(const SparseVector& x) const {
  Eigen::VectorXd p = predict_proba(x);
  Eigen::Index best;
  p.maxCoeff(&best);
  return static_cast<int>(best);
}

namespace {

using nlohmann::json;

json sparse_to_json(const SparseVector& v) {
  json idx = json::array(), val = json::array();
  for (const auto& [i, x] : v.entries) {
    idx.push_back(i);
    val.push_back(x);
  }
  return {{"size", v.size}, {"idx", idx}, {"val", val}};
}

SparseVector sparse_from_json(const json& j) {
  SparseVector v;
  v.size = j.at("size").get<int>();
  auto idx = j.at("idx").get<std::vector<int>>();
  auto val = j.at("val").get<std::vector<double>>();
  if (idx.size() != val.size()) throw DataError("checkpoint sparse vector mismatch");
  for (size_t i = 0; i < idx.size(); ++i) v.entries.emplace_back(idx[i], val[i]);
  return v;
}

}  // namespace

void SvmModel::save(const std::string& path) const {
  json j;
  j["format"] = "qarank-svm-v1";
  j["labels"] = labels_;
  j["vocab_hash"] = std::to_string(vocab_hash_);
  j["n_features"] = n_features_;
  j["gamma"] = gamma_;
  j["C"] = C_;
  json svs = json::array();
  for (const auto& sv : support_vectors_) svs.push_back(sparse_to_json(sv));
  j["support_vectors"] = svs;
  json classes = json::array();
  for (size_t c = 0; c < coef_.size(); ++c) {
    classes.push_back(
        {{"coef", std::vector<double>(coef_[c].data(), coef_[c].data() + coef_[c].size())},
         {"bias", bias_[c]},
         {"platt_a", platt_[c].A},
         {"platt_b", platt_[c].B}});
  }
  j["classes"] = classes;
  write_file_atomic(path, j.dump());
}

SvmModel SvmModel::load(const std::string& path,
                        std::optional<uint64_t> expected_vocab_hash) {
  json j = json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) throw DataError("malformed checkpoint: " + path);
  if (j.value("format", "") != "qarank-svm-v1")
    throw DataError("unrecognized checkpoint format: " + path);
  SvmModel m;
  m.labels_ = j["labels"].get<std::vector<std::string>>();
  m.vocab_hash_ = std::stoull(j["vocab_hash"].get<std::string>());
  m.n_features_ = j["n_features"].get<int>();
  m.gamma_ = j["gamma"].get<double>();
  m.C_ = j["C"].get<double>();
  for (const auto& sv : j["support_vectors"]) {
    m.support_vectors_.push_back(sparse_from_json(sv));
    m.sv_norms_.push_back(sparse_norm2(m.support_vectors_.back()));
  }
  for (const auto& cls : j["classes"]) {
    auto coef = cls.at("coef").get<std::vector<double>>();
    m.coef_.push_back(Eigen::Map<Eigen::VectorXd>(coef.data(), coef.size()));
    m.bias_.push_back(cls.at("bias").get<double>());
    m.platt_.push_back({cls.at("platt_a").get<double>(), cls.at("platt_b").get<double>()});
  }
  if (expected_vocab_hash && m.vocab_hash_ != *expected_vocab_hash)
    throw DataError("checkpoint/vocabulary mismatch: " + path);
  return m;
}

}  // namespace qarank
