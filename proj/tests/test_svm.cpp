#include "qarank/svm.hpp"

#include <cmath>

#include "doctest.h"
#include "qarank/util.hpp"
#include "test_helpers.hpp"

using namespace qarank;

namespace {

SparseVector dense2(double x, double y) {
  SparseVector v;
  v.size = 2;
  if (x != 0.0) v.entries.emplace_back(0, x);
  if (y != 0.0) v.entries.emplace_back(1, y);
  return v;
}

// two well-separated 2-D blobs
struct Blobs {
  std::vector<SparseVector> x;
  std::vector<int> y;
};

Blobs two_blobs(int per_class, uint64_t seed, double gap = 4.0) {
  Blobs b;
  Rng rng(seed);
  for (int cls = 0; cls < 2; ++cls) {
    double cx = cls == 0 ? 0.0 : gap;
    for (int i = 0; i < per_class; ++i) {
      b.x.push_back(dense2(cx + rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)));
      b.y.push_back(cls);
    }
  }
  return b;
}

}  // namespace

TEST_CASE("smo solves a separable problem to full training accuracy") {
  Blobs b = two_blobs(10, 3);
  SvmHyper hyper;
  SvmModel m = SvmModel::train(b.x, b.y, {"neg", "pos"}, 2, 0, hyper);
  for (size_t i = 0; i < b.x.size(); ++i) CHECK(m.predict_label(b.x[i]) == b.y[i]);
}

TEST_CASE("smo satisfies the KKT conditions within tolerance") {
  Blobs b = two_blobs(8, 7, 2.0);
  double gamma = 0.5, C = 1.0, tol = 1e-3;
  size_t n = b.x.size();
  Eigen::MatrixXd K(n, n);
  auto dot = [&](const SparseVector& a, const SparseVector& c) {
    double t = 0;
    for (auto& [i, v] : a.entries)
      for (auto& [j, w] : c.entries)
        if (i == j) t += v * w;
    return t;
  };
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      double d2 = dot(b.x[i], b.x[i]) + dot(b.x[j], b.x[j]) - 2 * dot(b.x[i], b.x[j]);
      K(i, j) = std::exp(-gamma * d2);
    }
  std::vector<double> y(n);
  for (size_t i = 0; i < n; ++i) y[i] = b.y[i] == 1 ? 1.0 : -1.0;
  SmoResult r = smo_solve(K, y, C, tol, 500);
  CHECK(r.converged);
  for (size_t i = 0; i < n; ++i) {
    double f = -r.bias;
    for (size_t j = 0; j < n; ++j) f += r.alpha[j] * y[j] * K(j, i);
    double margin = y[i] * f;
    if (r.alpha[i] < 1e-9)
      CHECK(margin >= 1.0 - tol - 1e-9);
    else if (r.alpha[i] > C - 1e-9)
      CHECK(margin <= 1.0 + tol + 1e-9);
    else
      CHECK(std::fabs(margin - 1.0) <= tol + 1e-9);
    CHECK(r.alpha[i] >= -1e-12);
    CHECK(r.alpha[i] <= C + 1e-12);
  }
}

TEST_CASE("conflicting duplicate points are absorbed by the C bound") {
  std::vector<SparseVector> x = {dense2(1, 1), dense2(1, 1), dense2(3, 3), dense2(0, 0)};
  std::vector<int> y = {0, 1, 1, 0};
  SvmHyper hyper;
  hyper.C = 1.0;
  SvmModel m = SvmModel::train(x, y, {"a", "b"}, 2, 0, hyper);
  Eigen::VectorXd p = m.predict_proba(dense2(1, 1));
  CHECK(std::isfinite(p[0]));
  CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("predicted distributions sum to one") {
  Blobs b = two_blobs(6, 11);
  SvmModel m = SvmModel::train(b.x, b.y, {"a", "b"}, 2, 0, SvmHyper{});
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd p = m.predict_proba(dense2(rng.uniform(-1, 5), rng.uniform(-1, 1)));
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(p.minCoeff() > 0.0);
  }
}

TEST_CASE("deep inside a class the calibrated probability peaks there") {
  Blobs b = two_blobs(10, 17);
  SvmModel m = SvmModel::train(b.x, b.y, {"a", "b"}, 2, 0, SvmHyper{});
  Eigen::VectorXd p0 = m.predict_proba(dense2(0, 0));
  Eigen::VectorXd p1 = m.predict_proba(dense2(4, 0));
  CHECK(p0[0] > p0[1]);
  CHECK(p1[1] > p1[0]);
}

TEST_CASE("calibrated argmax mostly agrees with the raw decision argmax") {
  // 3-class synthetic problem
  std::vector<SparseVector> x;
  std::vector<int> y;
  Rng rng(19);
  std::vector<std::pair<double, double>> centers = {{0, 0}, {5, 0}, {0, 5}};
  for (int cls = 0; cls < 3; ++cls)
    for (int i = 0; i < 12; ++i) {
      x.push_back(dense2(centers[cls].first + rng.uniform(-0.8, 0.8),
                         centers[cls].second + rng.uniform(-0.8, 0.8)));
      y.push_back(cls);
    }
  SvmModel m = SvmModel::train(x, y, {"a", "b", "c"}, 2, 0, SvmHyper{});
  int agree = 0, total = 0;
  for (int trial = 0; trial < 100; ++trial) {
    SparseVector q = dense2(rng.uniform(-1, 6), rng.uniform(-1, 6));
    Eigen::VectorXd dec = m.decision_values(q);
    Eigen::VectorXd prob = m.predict_proba(q);
    Eigen::Index bd, bp;
    dec.maxCoeff(&bd);
    prob.maxCoeff(&bp);
    agree += bd == bp ? 1 : 0;
    ++total;
  }
  CHECK(static_cast<double>(agree) / total >= 0.95);
}

TEST_CASE("training-order permutation leaves predictions essentially unchanged") {
  Blobs b = two_blobs(8, 23);
  SvmModel m1 = SvmModel::train(b.x, b.y, {"a", "b"}, 2, 0, SvmHyper{});
  std::vector<size_t> perm(b.x.size());
  for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  Rng rng(29);
  rng.shuffle(perm);
  std::vector<SparseVector> x2;
  std::vector<int> y2;
  for (size_t i : perm) {
    x2.push_back(b.x[i]);
    y2.push_back(b.y[i]);
  }
  SvmModel m2 = SvmModel::train(x2, y2, {"a", "b"}, 2, 0, SvmHyper{});
  for (int trial = 0; trial < 30; ++trial) {
    SparseVector q = dense2(rng.uniform(-1, 5), rng.uniform(-1, 1));
    CHECK(m1.predict_label(q) == m2.predict_label(q));
    CHECK((m1.predict_proba(q) - m2.predict_proba(q)).lpNorm<Eigen::Infinity>() < 0.02);
  }
}

TEST_CASE("single-class input is rejected") {
  std::vector<SparseVector> x = {dense2(1, 0), dense2(2, 0)};
  std::vector<int> y = {0, 0};
  CHECK_THROWS_AS(SvmModel::train(x, y, {"a", "b"}, 2, 0, SvmHyper{}), DataError);
}

TEST_CASE("svm checkpoints round-trip") {
  Blobs b = two_blobs(6, 31);
  SvmModel m = SvmModel::train(b.x, b.y, {"a", "b"}, 2, 99, SvmHyper{});
  qtest::TempDir dir("svm_ckpt");
  m.save(dir.file("svm.json"));
  SvmModel loaded = SvmModel::load(dir.file("svm.json"));
  CHECK(loaded.vocab_hash() == 99);
  for (size_t i = 0; i < b.x.size(); ++i) {
    CHECK((loaded.predict_proba(b.x[i]) - m.predict_proba(b.x[i])).norm() < 1e-12);
  }
}
