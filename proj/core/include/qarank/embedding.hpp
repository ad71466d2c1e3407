#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <unordered_map>

namespace qarank {

// Token -> dense vector table loaded from text-format vector files.
// Lookups of absent tokens yield the zero vector.
class EmbeddingTable {
public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(int dimension, std::string name = "")
      : dim_(dimension), name_(std::move(name)) {}

  int dim() const { return dim_; }
  size_t size() const { return vectors_.size(); }
  bool empty() const { return dim_ == 0; }
  const std::string& name() const { return name_; }

  bool has(const std::string& token) const { return vectors_.count(token) > 0; }
  Eigen::VectorXd lookup(const std::string& token) const;
  void insert(const std::string& token, const Eigen::VectorXd& vec);
  std::vector<std::string> tokens_sorted() const;

private:
  int dim_ = 0;
  std::string name_;
  std::unordered_map<std::string, Eigen::VectorXd> vectors_;
};

// Text vector format: optional "count dim" header, then one line per word:
// token followed by dim floats, whitespace separated.
EmbeddingTable load_embeddings(const std::string& path,
                               std::optional<int> expected_dim = std::nullopt,
                               const std::string& name = "");

}  // namespace qarank
