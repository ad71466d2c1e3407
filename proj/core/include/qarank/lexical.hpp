#pragma once

#include <map>
#include <string>
#include <vector>

namespace qarank {

// Five-score lexical relevance vector: BM25 plus unigram/bigram exact-match
// fractions and their idf-weighted variants.
struct ExtraRelevance {
  double bm25 = 0.0;
  double unigram_match_pct = 0.0;
  double bigram_match_pct = 0.0;
  double idf_weighted_unigram = 0.0;
  double idf_weighted_bigram = 0.0;
};

double extra_sum(const ExtraRelevance& v);

// Collection statistics for BM25 over raw-text token streams. Bigrams are
// adjacent token pairs within a document stream.
class Bm25Stats {
public:
  Bm25Stats() = default;

  static Bm25Stats build(const std::vector<std::vector<std::string>>& docs,
                         double k1 = 1.2, double b = 0.75);

  bool empty() const { return n_docs_ == 0; }
  int n_docs() const { return n_docs_; }
  double avg_doc_len() const { return avg_len_; }
  double k1() const { return k1_; }
  double b() const { return b_; }

  int df(const std::string& term) const;
  int bigram_df(const std::string& first, const std::string& second) const;

  // idf(w) = ln(1 + (N - df + 0.5) / (df + 0.5))
  double idf(const std::string& term) const;
  double bigram_idf(const std::string& first, const std::string& second) const;

private:
  int n_docs_ = 0;
  double avg_len_ = 0.0;
  double k1_ = 1.2;
  double b_ = 0.75;
  std::map<std::string, int> df_;
  std::map<std::string, int> bigram_df_;  // key: first + '\x1f' + second
};

double bm25_score(const std::vector<std::string>& query_terms,
                  const std::vector<std::string>& doc_terms, const Bm25Stats& stats);

ExtraRelevance bm25_extra(const std::vector<std::string>& query_terms,
                          const std::vector<std::string>& doc_terms,
                          const Bm25Stats& stats);

// Convenience over raw text; both sides are lower-cased pattern tokens with
// no stopword or frequency filtering.
ExtraRelevance bm25_extra_raw(const std::string& query_raw, const std::string& doc_raw,
                              const Bm25Stats& stats);

}  // namespace qarank
