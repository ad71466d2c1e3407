#include "qarank/topic_model.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>

#include "json.hpp"
#include "qarank/util.hpp"

namespace qarank {

namespace {

Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
  Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}

void softmax_columns_inplace(Eigen::MatrixXd& y) {
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    Eigen::VectorXd col = y.col(j);
    double m = col.maxCoeff();
    col = (col.array() - m).exp();
    y.col(j) = col / col.sum();
  }
}

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& m, const std::vector<int>& idx) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(idx.size()));
  for (size_t i = 0; i < idx.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = m.col(idx[i]);
  return out;
}

void check_doc(const std::vector<int>& doc, int vocab_size) {
  if (doc.empty()) throw DataError("document has no tokens");
  for (int t : doc)
    if (t < 0 || t >= vocab_size) throw DataError("token index out of range");
}

}  // namespace

double TopicModel::f(double x) const {
  return hyper_.activation == Activation::Sigmoid ? 1.0 / (1.0 + std::exp(-x))
                                                  : std::tanh(x);
}

Eigen::MatrixXd TopicModel::f_mat(const Eigen::MatrixXd& x) const {
  if (hyper_.activation == Activation::Sigmoid)
    return (1.0 / (1.0 + (-x.array()).exp())).matrix();
  return x.array().tanh().matrix();
}

Eigen::MatrixXd TopicModel::f_prime_from_value(const Eigen::MatrixXd& h) const {
  if (hyper_.activation == Activation::Sigmoid)
    return (h.array() * (1.0 - h.array())).matrix();
  return (1.0 - h.array().square()).matrix();
}

TopicModel TopicModel::init(const Vocabulary& vocab, const std::vector<std::string>& labels,
                            const EmbeddingTable& fasttext, const EmbeddingTable& w2v,
                            const TopicHyper& hyper) {
  if (labels.size() < 2) throw DataError("topic model needs at least 2 labels");
  TopicModel m;
  m.hyper_ = hyper;
  m.Z_ = vocab.size();
  m.H_ = hyper.hidden;
  m.L_ = static_cast<int>(labels.size());
  m.Ef_ = fasttext.dim();
  m.Ew_ = w2v.dim();
  m.vocab_hash_ = vocab.hash();
  m.labels_ = labels;

  Rng rng(hyper.seed);
  auto uniform_mat = [&](Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd out(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) out(i, j) = rng.uniform(-0.05, 0.05);
    return out;
  };
  m.W_ = uniform_mat(m.H_, m.Z_);
  m.U_ = uniform_mat(m.Z_, m.H_);
  m.S_ = uniform_mat(m.L_, m.H_ + m.Ef_ + m.Ew_);
  m.b_ = Eigen::VectorXd::Zero(m.Z_);
  m.c_ = Eigen::VectorXd::Zero(m.H_);
  m.attn_ = Eigen::VectorXd::Zero(m.Z_);
  m.d_ = Eigen::VectorXd::Zero(m.L_);
  m.c_fast_ = Eigen::VectorXd::Zero(m.Ef_);
  m.c_w2v_ = Eigen::VectorXd::Zero(m.Ew_);

  m.emb_fast_.resize(m.Ef_, m.Z_);
  for (int w = 0; w < m.Z_; ++w)
    if (m.Ef_ > 0) m.emb_fast_.col(w) = fasttext.lookup(vocab.index_to_token[w]);
  m.emb_w2v_.resize(m.Ew_, m.Z_);
  for (int w = 0; w < m.Z_; ++w)
    if (m.Ew_ > 0) m.emb_w2v_.col(w) = w2v.lookup(vocab.index_to_token[w]);
  return m;
}

Eigen::MatrixXd TopicModel::conditionals(const std::vector<int>& doc) const {
  check_doc(doc, Z_);
  const Eigen::Index D = static_cast<Eigen::Index>(doc.size());
  Eigen::MatrixXd u(H_, D);
  u.col(0) = c_;
  for (Eigen::Index i = 1; i < D; ++i) u.col(i) = u.col(i - 1) + W_.col(doc[i - 1]);
  Eigen::MatrixXd h = f_mat(u);
  Eigen::MatrixXd y = (U_ * h).colwise() + b_;
  softmax_columns_inplace(y);
  return y;
}

double TopicModel::conditionals_log_likelihood(const std::vector<int>& doc) const {
  Eigen::MatrixXd p = conditionals(doc);
  double ll = 0.0;
  for (size_t i = 0; i < doc.size(); ++i)
    ll += std::log(p(doc[i], static_cast<Eigen::Index>(i)));
  return ll;
}

Eigen::VectorXd TopicModel::attention_weights(const std::vector<int>& doc) const {
  check_doc(doc, Z_);
  Eigen::VectorXd s(static_cast<Eigen::Index>(doc.size()));
  for (size_t i = 0; i < doc.size(); ++i) s[static_cast<Eigen::Index>(i)] = attn_[doc[i]];
  return softmax(s);
}

Eigen::VectorXd TopicModel::hidden_attention(const std::vector<int>& doc) const {
  Eigen::VectorXd alpha = attention_weights(doc);
  Eigen::MatrixXd wdoc = gather_columns(W_, doc);
  return f_mat(c_ + wdoc * alpha);
}

Eigen::VectorXd TopicModel::embedding_features(const std::vector<int>& doc) const {
  Eigen::VectorXd alpha = attention_weights(doc);
  Eigen::VectorXd out(Ef_ + Ew_);
  if (Ef_ > 0) out.head(Ef_) = f_mat(c_fast_ + gather_columns(emb_fast_, doc) * alpha);
  if (Ew_ > 0) out.tail(Ew_) = f_mat(c_w2v_ + gather_columns(emb_w2v_, doc) * alpha);
  return out;
}

Eigen::VectorXd TopicModel::supervised_features(const std::vector<int>& doc) const {
  Eigen::VectorXd feat(feature_size());
  if (doc.empty()) {
    feat.head(H_) = f_mat(c_);
    if (Ef_ > 0) feat.segment(H_, Ef_) = f_mat(c_fast_);
    if (Ew_ > 0) feat.tail(Ew_) = f_mat(c_w2v_);
    return feat;
  }
  feat.head(H_) = hidden_attention(doc);
  if (Ef_ + Ew_ > 0) feat.tail(Ef_ + Ew_) = embedding_features(doc);
  return feat;
}

Eigen::VectorXd TopicModel::predict_proba(const std::vector<int>& doc) const {
  return softmax(d_ + S_ * supervised_features(doc));
}

int TopicModel::predict_label(const std::vector<int>& doc) const {
  Eigen::VectorXd p = predict_proba(doc);
  Eigen::Index best;
  p.maxCoeff(&best);
  return static_cast<int>(best);
}

TopicModel::Gradients TopicModel::zero_gradients() const {
  Gradients g;
  g.W = Eigen::MatrixXd::Zero(H_, Z_);
  g.U = Eigen::MatrixXd::Zero(Z_, H_);
  g.S = Eigen::MatrixXd::Zero(L_, feature_size());
  g.b = Eigen::VectorXd::Zero(Z_);
  g.c = Eigen::VectorXd::Zero(H_);
  g.attn = Eigen::VectorXd::Zero(Z_);
  g.d = Eigen::VectorXd::Zero(L_);
  g.c_fast = Eigen::VectorXd::Zero(Ef_);
  g.c_w2v = Eigen::VectorXd::Zero(Ew_);
  return g;
}

double TopicModel::hybrid_loss(const std::vector<int>& doc, int label) const {
  Eigen::VectorXd p = predict_proba(doc);
  double loss = -std::log(p[label]);
  loss += hyper_.lambda * (-conditionals_log_likelihood(doc));
  return loss;
}

double TopicModel::loss_and_gradients(const std::vector<int>& doc, int label,
                                      Gradients* grad) const {
  check_doc(doc, Z_);
  if (label < 0 || label >= L_) throw DataError("label index out of range");
  const Eigen::Index D = static_cast<Eigen::Index>(doc.size());
  const double lambda = hyper_.lambda;

  // --- supervised head ---
  Eigen::VectorXd alpha = attention_weights(doc);
  Eigen::MatrixXd wdoc = gather_columns(W_, doc);
  Eigen::VectorXd h = f_mat(c_ + wdoc * alpha);
  Eigen::MatrixXd efdoc, ewdoc;
  Eigen::VectorXd hf, hw;
  if (Ef_ > 0) {
    efdoc = gather_columns(emb_fast_, doc);
    hf = f_mat(c_fast_ + efdoc * alpha);
  }
  if (Ew_ > 0) {
    ewdoc = gather_columns(emb_w2v_, doc);
    hw = f_mat(c_w2v_ + ewdoc * alpha);
  }
  Eigen::VectorXd feat(feature_size());
  feat.head(H_) = h;
  if (Ef_ > 0) feat.segment(H_, Ef_) = hf;
  if (Ew_ > 0) feat.tail(Ew_) = hw;

  Eigen::VectorXd p = softmax(d_ + S_ * feat);
  double loss = -std::log(p[label]);

  Eigen::VectorXd dz = p;
  dz[label] -= 1.0;
  grad->d += dz;
  grad->S += dz * feat.transpose();
  Eigen::VectorXd dfeat = S_.transpose() * dz;

  Eigen::VectorXd du_h =
      dfeat.head(H_).cwiseProduct(f_prime_from_value(h).col(0));
  grad->c += du_h;
  Eigen::VectorXd galpha = wdoc.transpose() * du_h;
  for (Eigen::Index i = 0; i < D; ++i) grad->W.col(doc[i]) += alpha[i] * du_h;
  if (Ef_ > 0) {
    Eigen::VectorXd du_f =
        dfeat.segment(H_, Ef_).cwiseProduct(f_prime_from_value(hf).col(0));
    grad->c_fast += du_f;
    galpha += efdoc.transpose() * du_f;
  }
  if (Ew_ > 0) {
    Eigen::VectorXd du_w = dfeat.tail(Ew_).cwiseProduct(f_prime_from_value(hw).col(0));
    grad->c_w2v += du_w;
    galpha += ewdoc.transpose() * du_w;
  }
  double inner = alpha.dot(galpha);
  for (Eigen::Index i = 0; i < D; ++i)
    grad->attn[doc[i]] += alpha[i] * (galpha[i] - inner);

  // --- autoregressive conditionals ---
  Eigen::MatrixXd u(H_, D);
  u.col(0) = c_;
  for (Eigen::Index i = 1; i < D; ++i) u.col(i) = u.col(i - 1) + W_.col(doc[i - 1]);
  Eigen::MatrixXd hmat = f_mat(u);
  Eigen::MatrixXd y = (U_ * hmat).colwise() + b_;
  // column-wise log-softmax pieces
  Eigen::VectorXd lse(D);
  for (Eigen::Index j = 0; j < D; ++j) {
    double m = y.col(j).maxCoeff();
    lse[j] = m + std::log((y.col(j).array() - m).exp().sum());
    loss += lambda * (lse[j] - y(doc[j], j));
  }
  Eigen::MatrixXd dy = y;
  for (Eigen::Index j = 0; j < D; ++j) {
    dy.col(j) = ((y.col(j).array() - lse[j]).exp()).matrix();
    dy(doc[j], j) -= 1.0;
  }
  grad->b += lambda * dy.rowwise().sum();
  grad->U += lambda * (dy * hmat.transpose());
  Eigen::MatrixXd du = (U_.transpose() * dy).cwiseProduct(f_prime_from_value(hmat));
  grad->c += lambda * du.rowwise().sum();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(H_);
  for (Eigen::Index i = D - 1; i >= 1; --i) {
    acc += du.col(i);
    grad->W.col(doc[i - 1]) += lambda * acc;
  }
  return loss;
}

std::vector<ParamBlock> TopicModel::parameter_blocks() {
  return {
      {"W", W_.data(), W_.size()},       {"U", U_.data(), U_.size()},
      {"b", b_.data(), b_.size()},       {"c", c_.data(), c_.size()},
      {"attn", attn_.data(), attn_.size()}, {"S", S_.data(), S_.size()},
      {"d", d_.data(), d_.size()},       {"c_fast", c_fast_.data(), c_fast_.size()},
      {"c_w2v", c_w2v_.data(), c_w2v_.size()},
  };
}

double TopicModel::classification_accuracy(const Corpus& corpus) const {
  int correct = 0, total = 0;
  for (const auto& a : corpus.abstracts) {
    if (!a.label) continue;
    auto it = std::find(labels_.begin(), labels_.end(), *a.label);
    if (it == labels_.end()) continue;
    int gold = static_cast<int>(it - labels_.begin());
    if (predict_label(a.word_sequence()) == gold) ++correct;
    ++total;
  }
  return total > 0 ? static_cast<double>(correct) / total : 0.0;
}

std::vector<TopicEpochStats> TopicModel::train(const Corpus& train_corpus,
                                               const Corpus& dev_corpus,
                                               const TopicHyper& hyper) {
  hyper_ = hyper;
  if (hyper.lambda < 0.0 || hyper.lambda > 1.0)
    throw ConfigError("lambda must be in [0, 1]");

  struct Example {
    std::vector<int> doc;
    int label;
    std::string id;
  };
  std::vector<Example> examples;
  for (const auto& a : train_corpus.abstracts) {
    if (!a.label) throw DataError("training abstract without label: id=" + a.id);
    auto it = std::find(labels_.begin(), labels_.end(), *a.label);
    if (it == labels_.end()) throw DataError("label not in model label set: " + *a.label);
    std::vector<int> doc = a.word_sequence();
    if (doc.empty()) {
      std::cerr << "warning: skipping empty training document id=" << a.id << "\n";
      continue;
    }
    examples.push_back({std::move(doc), static_cast<int>(it - labels_.begin()), a.id});
  }
  if (examples.empty()) throw DataError("no usable training documents");

  // Adam, batch size 1
  auto blocks = parameter_blocks();
  std::vector<Eigen::VectorXd> m_state, v_state;
  for (const auto& blk : blocks) {
    m_state.push_back(Eigen::VectorXd::Zero(blk.size));
    v_state.push_back(Eigen::VectorXd::Zero(blk.size));
  }
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long step = 0;

  Rng rng(hyper.seed);
  std::vector<size_t> order(examples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<TopicEpochStats> history;
  double best_dev = -1.0;
  std::vector<Eigen::VectorXd> best_params;
  int epochs_since_best = 0;

  Gradients g = zero_gradients();
  std::vector<std::pair<double*, Eigen::Index>> grad_blocks = {
      {g.W.data(), g.W.size()},       {g.U.data(), g.U.size()},
      {g.b.data(), g.b.size()},       {g.c.data(), g.c.size()},
      {g.attn.data(), g.attn.size()}, {g.S.data(), g.S.size()},
      {g.d.data(), g.d.size()},       {g.c_fast.data(), g.c_fast.size()},
      {g.c_w2v.data(), g.c_w2v.size()},
  };

  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (size_t oi = 0; oi < order.size(); ++oi) {
      const Example& ex = examples[order[oi]];
      for (auto& [ptr, n] : grad_blocks)
        Eigen::Map<Eigen::VectorXd>(ptr, n).setZero();
      double loss = loss_and_gradients(ex.doc, ex.label, &g);
      if (!std::isfinite(loss))
        throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) +
                             ", doc id=" + ex.id);
      loss_sum += loss;
      ++step;
      double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      for (size_t bi = 0; bi < blocks.size(); ++bi) {
        Eigen::Map<Eigen::VectorXd> theta(blocks[bi].data, blocks[bi].size);
        Eigen::Map<Eigen::VectorXd> gv(grad_blocks[bi].first, grad_blocks[bi].second);
        m_state[bi] = beta1 * m_state[bi] + (1.0 - beta1) * gv;
        v_state[bi] = beta2 * v_state[bi] + (1.0 - beta2) * gv.cwiseProduct(gv);
        theta.array() -= hyper.learning_rate * (m_state[bi].array() / bc1) /
                         ((v_state[bi].array() / bc2).sqrt() + eps);
      }
    }
    TopicEpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(examples.size());
    stats.dev_accuracy = classification_accuracy(dev_corpus);
    history.push_back(stats);

    if (stats.dev_accuracy > best_dev) {
      best_dev = stats.dev_accuracy;
      best_params.clear();
      for (const auto& blk : blocks)
        best_params.push_back(Eigen::Map<Eigen::VectorXd>(blk.data, blk.size));
      epochs_since_best = 0;
    } else if (++epochs_since_best >= hyper.patience) {
      break;
    }
  }
  if (!best_params.empty()) {
    for (size_t bi = 0; bi < blocks.size(); ++bi)
      Eigen::Map<Eigen::VectorXd>(blocks[bi].data, blocks[bi].size) = best_params[bi];
  }
  return history;
}

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["data"] = std::vector<double>(m.data(), m.data() + m.size());  // column-major
  return j;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw DataError("checkpoint matrix size mismatch");
  Eigen::MatrixXd m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::MatrixXd m = matrix_from_json(j);
  return Eigen::Map<Eigen::VectorXd>(m.data(), m.size());
}

}  // namespace

void TopicModel::save(const std::string& path) const {
  json j;
  j["format"] = "qarank-topic-v1";
  j["dims"] = {{"Z", Z_}, {"H", H_}, {"L", L_}, {"E_fast", Ef_}, {"E_w2v", Ew_}};
  j["vocab_hash"] = std::to_string(vocab_hash_);
  j["labels"] = labels_;
  j["hyper"] = {{"hidden", hyper_.hidden},
                {"lambda", hyper_.lambda},
                {"learning_rate", hyper_.learning_rate},
                {"epochs", hyper_.epochs},
                {"patience", hyper_.patience},
                {"seed", hyper_.seed},
                {"activation", hyper_.activation == Activation::Sigmoid ? "sigmoid" : "tanh"}};
  j["params"] = {{"W", matrix_to_json(W_)},
                 {"U", matrix_to_json(U_)},
                 {"b", matrix_to_json(b_)},
                 {"c", matrix_to_json(c_)},
                 {"attn", matrix_to_json(attn_)},
                 {"S", matrix_to_json(S_)},
                 {"d", matrix_to_json(d_)},
                 {"c_fast", matrix_to_json(c_fast_)},
                 {"c_w2v", matrix_to_json(c_w2v_)}};
  j["embeddings"] = {{"fast", matrix_to_json(emb_fast_)}, {"w2v", matrix_to_json(emb_w2v_)}};
  write_file_atomic(path, j.dump());
}

TopicModel TopicModel::load(const std::string& path,
                            std::optional<uint64_t> expected_vocab_hash) {
  json j = json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) throw DataError("malformed checkpoint: " + path);
  if (j.value("format", "") != "qarank-topic-v1")
    throw DataError("unrecognized checkpoint format: " + path);
  TopicModel m;
  m.Z_ = j["dims"]["Z"].get<int>();
  m.H_ = j["dims"]["H"].get<int>();
  m.L_ = j["dims"]["L"].get<int>();
  m.Ef_ = j["dims"]["E_fast"].get<int>();
  m.Ew_ = j["dims"]["E_w2v"].get<int>();
  m.vocab_hash_ = std::stoull(j["vocab_hash"].get<std::string>());
  m.labels_ = j["labels"].get<std::vector<std::string>>();
  const auto& h = j["hyper"];
  m.hyper_.hidden = h["hidden"].get<int>();
  m.hyper_.lambda = h["lambda"].get<double>();
  m.hyper_.learning_rate = h["learning_rate"].get<double>();
  m.hyper_.epochs = h["epochs"].get<int>();
  m.hyper_.patience = h["patience"].get<int>();
  m.hyper_.seed = h["seed"].get<uint64_t>();
  m.hyper_.activation =
      h["activation"].get<std::string>() == "tanh" ? Activation::Tanh : Activation::Sigmoid;
  const auto& p = j["params"];
  m.W_ = matrix_from_json(p["W"]);
  m.U_ = matrix_from_json(p["U"]);
  m.b_ = vector_from_json(p["b"]);
  m.c_ = vector_from_json(p["c"]);
  m.attn_ = vector_from_json(p["attn"]);
  m.S_ = matrix_from_json(p["S"]);
  m.d_ = vector_from_json(p["d"]);
  m.c_fast_ = vector_from_json(p["c_fast"]);
  m.c_w2v_ = vector_from_json(p["c_w2v"]);
  m.emb_fast_ = matrix_from_json(j["embeddings"]["fast"]);
  m.emb_w2v_ = matrix_from_json(j["embeddings"]["w2v"]);
  if (expected_vocab_hash && m.vocab_hash_ != *expected_vocab_hash)
    throw DataError("checkpoint/vocabulary mismatch: " + path);
  return m;
}

}  // namespace qarank
