#include "qarank/lexical.hpp"

#include <cmath>
#include <set>

#include "qarank/corpus.hpp"
#include "qarank/util.hpp"

namespace qarank {

namespace {

std::string bigram_key(const std::string& a, const std::string& b) {
  return a + '\x1f' + b;
}

}  // namespace

double extra_sum(const ExtraRelevance& v) {
  return v.bm25 + v.unigram_match_pct + v.bigram_match_pct + v.idf_weighted_unigram +
         v.idf_weighted_bigram;
}

Bm25Stats Bm25Stats::build(const std::vector<std::vector<std::string>>& docs, double k1,
                           double b) {
  if (k1 < 0.0) throw ConfigError("bm25 k1 must be >= 0");
  if (b < 0.0 || b > 1.0) throw ConfigError("bm25 b must be in [0, 1]");
  Bm25Stats stats;
  stats.k1_ = k1;
  stats.b_ = b;
  stats.n_docs_ = static_cast<int>(docs.size());
  size_t total_len = 0;
  for (const auto& doc : docs) {
    total_len += doc.size();
    std::set<std::string> terms(doc.begin(), doc.end());
    for (const auto& t : terms) stats.df_[t]++;
    std::set<std::string> bigrams;
    for (size_t i = 0; i + 1 < doc.size(); ++i) bigrams.insert(bigram_key(doc[i], doc[i + 1]));
    for (const auto& bg : bigrams) stats.bigram_df_[bg]++;
  }
  stats.avg_len_ = stats.n_docs_ > 0
                       ? static_cast<double>(total_len) / static_cast<double>(stats.n_docs_)
                       : 0.0;
  return stats;
}

int Bm25Stats::df(const std::string& term) const {
  auto it = df_.find(term);
  return it == df_.end() ? 0 : it->second;
}

int Bm25Stats::bigram_df(const std::string& first, const std::string& second) const {
  auto it = bigram_df_.find(bigram_key(first, second));
  return it == bigram_df_.end() ? 0 : it->second;
}

double Bm25Stats::idf(const std::string& term) const {
  double n = static_cast<double>(n_docs_);
  double d = static_cast<double>(df(term));
  return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

double Bm25Stats::bigram_idf(const std::string& first, const std::string& second) const {
  double n = static_cast<double>(n_docs_);
  double d = static_cast<double>(bigram_df(first, second));
  return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

double bm25_score(const std::vector<std::string>& query_terms,
                  const std::vector<std::string>& doc_terms, const Bm25Stats& stats) {
  if (stats.empty()) throw DataError("bm25 statistics are empty");
  std::map<std::string, int> tf;
  for (const auto& t : doc_terms) tf[t]++;
  double len_ratio = stats.avg_doc_len() > 0.0
                         ? static_cast<double>(doc_terms.size()) / stats.avg_doc_len()
                         : 0.0;
  double k1 = stats.k1(), b = stats.b();
  double score = 0.0;
  for (const auto& q : query_terms) {
    auto it = tf.find(q);
    if (it == tf.end()) continue;
    double f = static_cast<double>(it->second);
    score += stats.idf(q) * f * (k1 + 1.0) / (f + k1 * (1.0 - b + b * len_ratio));
  }
  return score;
}

ExtraRelevance bm25_extra(const std::vector<std::string>& query_terms,
                          const std::vector<std::string>& doc_terms,
                          const Bm25Stats& stats) {
  ExtraRelevance out;
  if (query_terms.empty()) return out;
  out.bm25 = bm25_score(query_terms, doc_terms, stats);

  std::set<std::string> doc_unigrams(doc_terms.begin(), doc_terms.end());
  std::set<std::string> doc_bigrams;
  for (size_t i = 0; i + 1 < doc_terms.size(); ++i)
    doc_bigrams.insert(doc_terms[i] + '\x1f' + doc_terms[i + 1]);

  double matched = 0.0, idf_matched = 0.0, idf_total = 0.0;
  for (const auto& q : query_terms) {
    double w = stats.idf(q);
    idf_total += w;
    if (doc_unigrams.count(q)) {
      matched += 1.0;
      idf_matched += w;
    }
  }
  out.unigram_match_pct = matched / static_cast<double>(query_terms.size());
  out.idf_weighted_unigram = idf_total > 0.0 ? idf_matched / idf_total : 0.0;

  size_t n_bigrams = query_terms.size() >= 2 ? query_terms.size() - 1 : 0;
  if (n_bigrams > 0) {
    double bg_matched = 0.0, bg_idf_matched = 0.0, bg_idf_total = 0.0;
    for (size_t i = 0; i + 1 < query_terms.size(); ++i) {
      const auto& a = query_terms[i];
      const auto& b = query_terms[i + 1];
      double w = stats.bigram_idf(a, b);
      bg_idf_total += w;
      if (doc_bigrams.count(a + '\x1f' + b)) {
        bg_matched += 1.0;
        bg_idf_matched += w;
      }
    }
    out.bigram_match_pct = bg_matched / static_cast<double>(n_bigrams);
    out.idf_weighted_bigram = bg_idf_total > 0.0 ? bg_idf_matched / bg_idf_total : 0.0;
  }
  return out;
}

ExtraRelevance bm25_extra_raw(const std::string& query_raw, const std::string& doc_raw,
                              const Bm25Stats& stats) {
  return bm25_extra(tokenize(query_raw), tokenize(doc_raw), stats);
}

}  // namespace qarank
