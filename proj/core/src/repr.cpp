#include "qarank/repr.hpp"

#include <cmath>
#include <map>

#include "qarank/util.hpp"

namespace qarank {

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

SparseCounts bow(const std::vector<int>& tokens, int vocab_size) {
  std::map<int, int> counts;
  for (int t : tokens) {
    if (t < 0 || t >= vocab_size) throw DataError("token index out of range");
    counts[t]++;
  }
  SparseCounts out;
  out.size = vocab_size;
  out.entries.assign(counts.begin(), counts.end());
  return out;
}

Eigen::VectorXd compute_idf(const std::vector<std::vector<int>>& docs, int vocab_size) {
  if (docs.empty()) throw DataError("idf requires at least one document");
  Eigen::VectorXd df = Eigen::VectorXd::Zero(vocab_size);
  std::vector<char> seen(vocab_size);
  for (const auto& doc : docs) {
    std::fill(seen.begin(), seen.end(), 0);
    for (int t : doc)
      if (!seen[t]) {
        seen[t] = 1;
        df[t] += 1.0;
      }
  }
  double n = static_cast<double>(docs.size());
  Eigen::VectorXd idf(vocab_size);
  for (int w = 0; w < vocab_size; ++w)
    idf[w] = std::log((1.0 + n) / (1.0 + df[w])) + 1.0;
  return idf;
}

SparseVector tfidf(const std::vector<int>& tokens, int vocab_size,
                   const Eigen::VectorXd& idf) {
  SparseCounts counts = bow(tokens, vocab_size);
  SparseVector out;
  out.size = vocab_size;
  out.entries.reserve(counts.entries.size());
  for (const auto& [idx, c] : counts.entries)
    out.entries.emplace_back(idx, static_cast<double>(c) * idf[idx]);
  return out;
}

Eigen::VectorXd esr(const std::vector<std::string>& tokens, const EmbeddingTable& table) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(table.dim());
  for (const auto& t : tokens) sum += table.lookup(t);
  return sum;
}

std::vector<double> attention_histogram(const std::string& query_word,
                                        const std::vector<std::string>& target_tokens,
                                        const EmbeddingTable& table) {
  Eigen::VectorXd q = table.lookup(query_word);
  std::vector<double> weights;
  weights.reserve(target_tokens.size());
  for (const auto& t : target_tokens) weights.push_back(cosine(q, table.lookup(t)));
  return weights;
}

Eigen::VectorXd qar(const std::vector<std::string>& query_tokens,
                    const std::vector<std::string>& target_tokens,
                    const EmbeddingTable& table, bool clamp_negative) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(table.dim());
  std::vector<Eigen::VectorXd> target_vecs;
  target_vecs.reserve(target_tokens.size());
  for (const auto& t : target_tokens) target_vecs.push_back(table.lookup(t));
  for (const auto& qw : query_tokens) {
    Eigen::VectorXd qv = table.lookup(qw);
    for (const auto& dv : target_vecs) {
      double w = cosine(qv, dv);
      if (clamp_negative && w < 0.0) w = 0.0;
      out += w * dv;
    }
  }
  return out;
}

}  // namespace qarank
