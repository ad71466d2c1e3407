#include "qarank/task1.hpp"

#include <algorithm>
#include <set>

#include "qarank/repr.hpp"
#include "qarank/util.hpp"

namespace qarank {

RerankMode rerank_mode_from_string(const std::string& s) {
  if (s == "none") return RerankMode::None;
  if (s == "bm25_extra") return RerankMode::Bm25Extra;
  if (s == "qar") return RerankMode::Qar;
  if (s == "sum") return RerankMode::Sum;
  throw ConfigError("unknown rerank mode: " + s);
}

std::string to_string(RerankMode mode) {
  switch (mode) {
    case RerankMode::None: return "none";
    case RerankMode::Bm25Extra: return "bm25_extra";
    case RerankMode::Qar: return "qar";
    case RerankMode::Sum: return "sum";
  }
  return "none";
}

namespace {

// Stable sort by descending score; ties keep input order, then id.
void sort_ranked(RankedList& list) {
  std::stable_sort(list.begin(), list.end(), [](const RankedEntry& a, const RankedEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return false;
  });
}

std::vector<double> min_max_normalize(const std::vector<double>& v) {
  if (v.empty()) return v;
  double lo = *std::min_element(v.begin(), v.end());
  double hi = *std::max_element(v.begin(), v.end());
  std::vector<double> out(v.size(), 0.0);
  if (hi > lo)
    for (size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - lo) / (hi - lo);
  return out;
}

}  // namespace

RankedList rank_by_confidence(const LabelScorer& scorer, const Cluster& cluster,
                              const Corpus& corpus) {
  auto it = std::find(scorer.labels.begin(), scorer.labels.end(), cluster.label);
  if (it == scorer.labels.end())
    throw DataError("cluster label not known to classifier: " + cluster.label);
  Eigen::Index cid = it - scorer.labels.begin();

  RankedList list;
  for (const auto& id : cluster.ids) {
    const Abstract* a = corpus.find(id);
    if (!a) throw DataError("cluster member not found in corpus: " + id);
    Eigen::VectorXd p = scorer.proba(*a);
    Eigen::Index best;
    p.maxCoeff(&best);
    list.push_back({id, p[cid], scorer.labels[best]});
  }
  sort_ranked(list);
  return list;
}

RankedList rerank(const RankedList& ranked, const RerankOptions& opts,
                  const std::string& cluster_label, const Corpus& corpus,
                  const EmbeddingTable& embeddings, const Bm25Stats& stats) {
  if (opts.mode == RerankMode::None) return ranked;
  std::vector<std::string> query = query_tokens_from_label(cluster_label);
  Eigen::VectorXd query_esr = esr(query, embeddings);

  std::vector<double> lexical, semantic;
  for (const auto& e : ranked) {
    const Abstract* a = corpus.find(e.id);
    if (!a) throw DataError("ranked id not found in corpus: " + e.id);
    if (opts.mode == RerankMode::Bm25Extra || opts.mode == RerankMode::Sum)
      lexical.push_back(extra_sum(bm25_extra(query, tokenize(a->raw_text()), stats)));
    if (opts.mode == RerankMode::Qar || opts.mode == RerankMode::Sum) {
      Eigen::VectorXd doc_qar =
          qar(query, a->word_strings(), embeddings, opts.clamp_negative_attention);
      semantic.push_back(cosine(doc_qar, query_esr));
    }
  }

  std::vector<double> scores;
  switch (opts.mode) {
    case RerankMode::Bm25Extra: scores = lexical; break;
    case RerankMode::Qar: scores = semantic; break;
    case RerankMode::Sum: {
      auto a = min_max_normalize(lexical);
      auto b = min_max_normalize(semantic);
      for (size_t i = 0; i < a.size(); ++i) scores.push_back(a[i] + b[i]);
      break;
    }
    case RerankMode::None: break;
  }
  if (opts.combine_with_confidence) {
    std::vector<double> conf;
    for (const auto& e : ranked) conf.push_back(e.score);
    auto cn = min_max_normalize(conf);
    auto sn = min_max_normalize(scores);
    for (size_t i = 0; i < scores.size(); ++i) scores[i] = cn[i] + sn[i];
  }

  RankedList out = ranked;
  for (size_t i = 0; i < out.size(); ++i) out[i].score = scores[i];
  sort_ranked(out);
  return out;
}

Bm25Stats build_cluster_stats(const std::vector<Cluster>& clusters, const Corpus& corpus,
                              double k1, double b) {
  std::set<std::string> ids;
  for (const auto& c : clusters) ids.insert(c.ids.begin(), c.ids.end());
  std::vector<std::vector<std::string>> docs;
  for (const auto& id : ids) {
    const Abstract* a = corpus.find(id);
    if (!a) throw DataError("cluster member not found in corpus: " + id);
    docs.push_back(tokenize(a->raw_text()));
  }
  return Bm25Stats::build(docs, k1, b);
}

std::string ranked_list_tsv(const RankedList& list) {
  std::string out = "rank\tid\tscore\tpredicted_label\n";
  for (size_t i = 0; i < list.size(); ++i) {
    out += std::to_string(i + 1);
    out += '\t';
    out += list[i].id;
    out += '\t';
    out += format_score(list[i].score);
    out += '\t';
    out += list[i].predicted_label;
    out += '\n';
  }
  return out;
}

}  // namespace qarank
