#include "qarank/task2.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "qarank/repr.hpp"
#include "qarank/util.hpp"

namespace qarank {

double unsup_combine(double r_q, double r_t, UnsupVersion version) {
  if (version == UnsupVersion::V1) return r_q * r_q + r_t * r_t;
  double r_t_prime = r_t > r_q ? std::fabs(r_t - r_q) : 0.0;
  return r_q * r_q + r_t_prime * r_t;
}

double unsup_relevance(const std::vector<std::string>& sentence_words,
                       const std::vector<std::string>& sentence_raw_terms,
                       const std::vector<std::string>& title_words,
                       const std::vector<std::string>& query_tokens, UnsupVersion version,
                       const EmbeddingTable& table, const Bm25Stats& stats,
                       bool clamp_negative) {
  Eigen::VectorXd phi = qar(query_tokens, sentence_words, table, clamp_negative);
  double r_q = cosine(esr(query_tokens, table), phi);
  double r_t = cosine(esr(title_words, table), phi);
  double r = unsup_combine(r_q, r_t, version);
  return r + extra_sum(bm25_extra(query_tokens, sentence_raw_terms, stats));
}

namespace {

// delta = [G m; m] with m = (phi - q) + beta (phi - t)
double delta_norm(const SupRankerParams& p, const Eigen::VectorXd& m,
                  Eigen::VectorXd* gm_out = nullptr) {
  Eigen::VectorXd gm = p.G * m;
  if (gm_out) *gm_out = gm;
  if (p.norm == NormKind::L1) return gm.lpNorm<1>() + m.lpNorm<1>();
  return std::sqrt(gm.squaredNorm() + m.squaredNorm());
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

double sup_relevance(const SupRankerParams& params, const Eigen::VectorXd& phi,
                     const Eigen::VectorXd& title_esr, const Eigen::VectorXd& query_esr) {
  Eigen::VectorXd m = (phi - query_esr) + params.beta * (phi - title_esr);
  return std::exp(-delta_norm(params, m));
}

double sup_final_score(const SupRankerParams& params, const Eigen::VectorXd& features) {
  if (features.size() != params.w.size())
    throw DataError("supervised ranker feature width mismatch");
  return sigmoid(params.w.dot(features) + params.bias);
}

SupTrainResult train_sup_ranker(const std::vector<SupTrainExample>& examples,
                                const SupHyper& hyper) {
  if (examples.empty()) throw DataError("no training examples for supervised ranker");
  bool any_pos = false, any_neg = false;
  for (const auto& ex : examples) (ex.label > 0.5 ? any_pos : any_neg) = true;
  if (!any_pos || !any_neg)
    throw DataError("supervised ranker needs both positive and negative examples");
  const int E = static_cast<int>(examples[0].phi.size());
  const bool with_siamese = examples[0].siamese.has_value();
  const int width = 6 + (with_siamese ? 1 : 0);
  for (const auto& ex : examples)
    if (ex.siamese.has_value() != with_siamese)
      throw DataError("inconsistent siamese feature across training examples");

  SupRankerParams params;
  params.beta = hyper.beta;
  params.norm = hyper.norm;
  Rng rng(hyper.seed);
  params.G.resize(hyper.projection_dim, E);
  for (Eigen::Index i = 0; i < params.G.rows(); ++i)
    for (Eigen::Index j = 0; j < params.G.cols(); ++j)
      params.G(i, j) = rng.uniform(-0.05, 0.05);
  params.w = Eigen::VectorXd::Zero(width);
  params.bias = 0.0;

  // precompute the projection inputs
  std::vector<Eigen::VectorXd> ms(examples.size());
  for (size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    ms[i] = (ex.phi - ex.query_esr) + hyper.beta * (ex.phi - ex.title_esr);
  }

  const double n = static_cast<double>(examples.size());
  Eigen::MatrixXd g_G(params.G.rows(), params.G.cols());
  Eigen::VectorXd g_w(width);
  // Adam state
  Eigen::MatrixXd mG = Eigen::MatrixXd::Zero(params.G.rows(), params.G.cols());
  Eigen::MatrixXd vG = mG;
  Eigen::VectorXd mw = Eigen::VectorXd::Zero(width), vw = mw;
  double mb = 0.0, vb = 0.0;
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  const bool adam = hyper.optimizer != "gd";

  SupTrainResult result;
  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    g_G.setZero();
    g_w.setZero();
    double g_bias = 0.0;
    double mse = 0.0;
    for (size_t i = 0; i < examples.size(); ++i) {
      const auto& ex = examples[i];
      Eigen::VectorXd gm;
      double dist = delta_norm(params, ms[i], &gm);
      double r_sup = std::exp(-dist);
      Eigen::VectorXd x(width);
      x[0] = r_sup;
      x.segment(1, 5) = ex.lexical;
      if (with_siamese) x[6] = *ex.siamese;
      double z = params.w.dot(x) + params.bias;
      double yhat = sigmoid(z);
      double err = yhat - ex.label;
      mse += err * err;
      double dz = 2.0 * err * yhat * (1.0 - yhat) / n;
      g_w += dz * x;
      g_bias += dz;
      double dr = dz * params.w[0];
      // d r_sup / dG = -r_sup * d||delta||/dG
      if (params.norm == NormKind::L1) {
        Eigen::VectorXd sgn = gm.unaryExpr(
            [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
        g_G += (-dr * r_sup) * (sgn * ms[i].transpose());
      } else if (dist > 1e-12) {
        g_G += (-dr * r_sup / dist) * (gm * ms[i].transpose());
      }
    }
    mse /= n;
    result.epoch_mse.push_back(mse);
    if (!std::isfinite(mse)) throw NumericalError("non-finite loss in supervised ranker");

    if (adam) {
      double bc1 = 1.0 - std::pow(beta1, epoch);
      double bc2 = 1.0 - std::pow(beta2, epoch);
      mG = beta1 * mG + (1.0 - beta1) * g_G;
      vG = beta2 * vG + (1.0 - beta2) * g_G.cwiseProduct(g_G);
      params.G.array() -=
          hyper.learning_rate * (mG.array() / bc1) / ((vG.array() / bc2).sqrt() + eps);
      mw = beta1 * mw + (1.0 - beta1) * g_w;
      vw = beta2 * vw + (1.0 - beta2) * g_w.cwiseProduct(g_w);
      params.w.array() -=
          hyper.learning_rate * (mw.array() / bc1) / ((vw.array() / bc2).sqrt() + eps);
      mb = beta1 * mb + (1.0 - beta1) * g_bias;
      vb = beta2 * vb + (1.0 - beta2) * g_bias * g_bias;
      params.bias -= hyper.learning_rate * (mb / bc1) / (std::sqrt(vb / bc2) + eps);
    } else {
      params.G -= hyper.learning_rate * g_G;
      params.w -= hyper.learning_rate * g_w;
      params.bias -= hyper.learning_rate * g_bias;
    }
  }
  result.params = std::move(params);
  return result;
}

int extract_most_relevant(const std::vector<double>& scores) {
  if (scores.empty()) throw DataError("abstract has zero sentences");
  int best = 0;
  for (size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = static_cast<int>(i);
  return best;
}

int ensemble_vote(const std::vector<int>& predictions) {
  if (predictions.empty()) throw DataError("ensemble vote on empty prediction list");
  std::map<int, int> counts;
  for (int p : predictions) counts[p]++;
  int best_count = 0;
  for (const auto& [idx, c] : counts) best_count = std::max(best_count, c);
  for (int p : predictions)
    if (counts[p] == best_count) return p;
  return predictions[0];
}

Bm25Stats abstract_sentence_stats(const Abstract& a, const Task2Options& opt) {
  std::vector<std::vector<std::string>> docs;
  for (const auto& s : a.sentences_raw) docs.push_back(tokenize(s));
  return Bm25Stats::build(docs, opt.k1, opt.b);
}

SentenceScores score_sentences_bm25(const Abstract& a,
                                    const std::vector<std::string>& query,
                                    const Task2Options& opt) {
  Bm25Stats stats = abstract_sentence_stats(a, opt);
  SentenceScores out;
  out.ranker = "bm25_extra";
  for (const auto& s : a.sentences_raw)
    out.scores.push_back(extra_sum(bm25_extra(query, tokenize(s), stats)));
  return out;
}

SentenceScores score_sentences_unsup(const Abstract& a,
                                     const std::vector<std::string>& query,
                                     UnsupVersion version, const EmbeddingTable& table,
                                     const Task2Options& opt) {
  Bm25Stats stats = abstract_sentence_stats(a, opt);
  SentenceScores out;
  out.ranker = version == UnsupVersion::V1 ? "version1" : "version2";
  for (size_t j = 0; j < a.sentences_raw.size(); ++j)
    out.scores.push_back(unsup_relevance(a.sentence_words[j], tokenize(a.sentences_raw[j]),
                                         a.title_words, query, version, table, stats,
                                         opt.clamp_negative_attention));
  return out;
}

SentenceScores score_sentences_sup(const Abstract& a, const std::vector<std::string>& query,
                                   const SupRankerParams& params,
                                   const EmbeddingTable& table, const Task2Options& opt,
                                   const SiameseScores* siamese) {
  Bm25Stats stats = abstract_sentence_stats(a, opt);
  Eigen::VectorXd query_esr = esr(query, table);
  Eigen::VectorXd title_esr = esr(a.title_words, table);
  SentenceScores out;
  out.ranker = "supervised";
  for (size_t j = 0; j < a.sentences_raw.size(); ++j) {
    Eigen::VectorXd phi =
        qar(query, a.sentence_words[j], table, opt.clamp_negative_attention);
    double r_sup = sup_relevance(params, phi, title_esr, query_esr);
    ExtraRelevance lex = bm25_extra(query, tokenize(a.sentences_raw[j]), stats);
    Eigen::VectorXd x(params.feature_width());
    x[0] = r_sup;
    x[1] = lex.bm25;
    x[2] = lex.unigram_match_pct;
    x[3] = lex.bigram_match_pct;
    x[4] = lex.idf_weighted_unigram;
    x[5] = lex.idf_weighted_bigram;
    if (params.feature_width() == 7) {
      if (!siamese)
        throw DataError("model expects a siamese score but no score file was given");
      auto it = siamese->find({a.id, static_cast<int>(j)});
      if (it == siamese->end())
        throw DataError("missing siamese score for id=" + a.id + " sentence " +
                        std::to_string(j));
      x[6] = it->second;
    }
    out.scores.push_back(sup_final_score(params, x));
  }
  return out;
}

SiameseScores load_siamese_scores(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open siamese score file: " + path);
  SiameseScores scores;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3)
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected 'id<TAB>sentence<TAB>score'");
    try {
      scores[{fields[0], std::stoi(fields[1])}] = std::stod(fields[2]);
    } catch (const std::exception&) {
      throw DataError(path + ":" + std::to_string(line_no) + ": malformed numeric field");
    }
  }
  return scores;
}

void SupRankerParams::save(const std::string& path) const {
  nlohmann::json j;
  j["format"] = "qarank-sentranker-v1";
  j["beta"] = beta;
  j["norm"] = norm == NormKind::L1 ? "l1" : "l2";
  j["bias"] = bias;
  j["w"] = std::vector<double>(w.data(), w.data() + w.size());
  j["G"] = {{"rows", G.rows()},
            {"cols", G.cols()},
            {"data", std::vector<double>(G.data(), G.data() + G.size())}};
  write_file_atomic(path, j.dump());
}

SupRankerParams SupRankerParams::load(const std::string& path) {
  nlohmann::json j = nlohmann::json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) throw DataError("malformed checkpoint: " + path);
  if (j.value("format", "") != "qarank-sentranker-v1")
    throw DataError("unrecognized checkpoint format: " + path);
  SupRankerParams p;
  p.beta = j["beta"].get<double>();
  p.norm = j["norm"].get<std::string>() == "l2" ? NormKind::L2 : NormKind::L1;
  p.bias = j["bias"].get<double>();
  auto w = j["w"].get<std::vector<double>>();
  p.w = Eigen::Map<Eigen::VectorXd>(w.data(), w.size());
  auto rows = j["G"]["rows"].get<Eigen::Index>();
  auto cols = j["G"]["cols"].get<Eigen::Index>();
  auto data = j["G"]["data"].get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw DataError("checkpoint matrix size mismatch");
  p.G.resize(rows, cols);
  std::copy(data.begin(), data.end(), p.G.data());
  return p;
}

}  // namespace qarank
