#include "qarank/embedding.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "qarank/util.hpp"

namespace qarank {

Eigen::VectorXd EmbeddingTable::lookup(const std::string& token) const {
  auto it = vectors_.find(token);
  if (it != vectors_.end()) return it->second;
  return Eigen::VectorXd::Zero(dim_);
}

std::vector<std::string> EmbeddingTable::tokens_sorted() const {
  std::vector<std::string> tokens;
  tokens.reserve(vectors_.size());
  for (const auto& [tok, vec] : vectors_) tokens.push_back(tok);
  std::sort(tokens.begin(), tokens.end());
  return tokens;
}

void EmbeddingTable::insert(const std::string& token, const Eigen::VectorXd& vec) {
  if (dim_ == 0) dim_ = static_cast<int>(vec.size());
  if (vec.size() != dim_)
    throw DataError("embedding dimension mismatch for token '" + token + "'");
  vectors_[token] = vec;
}

namespace {

bool parse_double(const std::string& s, double* out) {
  const char* begin = s.c_str();
  char* end = nullptr;
  *out = std::strtod(begin, &end);
  return end == begin + s.size() && !s.empty();
}

std::vector<std::string> whitespace_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream ss(line);
  std::string f;
  while (ss >> f) fields.push_back(f);
  return fields;
}

}  // namespace

EmbeddingTable load_embeddings(const std::string& path, std::optional<int> expected_dim,
                               const std::string& name) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file: " + path);

  EmbeddingTable table(0, name.empty() ? path : name);
  std::string line;
  size_t line_no = 0;
  int dim = 0;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = whitespace_fields(line);
    if (fields.empty()) continue;
    if (first_content_line && fields.size() == 2) {
      // header "count dim"
      double c, d;
      if (parse_double(fields[0], &c) && parse_double(fields[1], &d)) {
        dim = static_cast<int>(d);
        first_content_line = false;
        continue;
      }
    }
    first_content_line = false;
    if (fields.size() < 2)
      throw DataError(path + ":" + std::to_string(line_no) + ": expected token and vector");
    int row_dim = static_cast<int>(fields.size()) - 1;
    if (dim == 0) dim = row_dim;
    if (row_dim != dim)
      throw DataError(path + ":" + std::to_string(line_no) + ": ragged line (got " +
                      std::to_string(row_dim) + " components, expected " +
                      std::to_string(dim) + ")");
    Eigen::VectorXd v(dim);
    for (int k = 0; k < dim; ++k) {
      double x;
      if (!parse_double(fields[k + 1], &x))
        throw DataError(path + ":" + std::to_string(line_no) + ": non-numeric component '" +
                        fields[k + 1] + "'");
      v[k] = x;
    }
    if (table.dim() == 0 && dim > 0) table = EmbeddingTable(dim, name.empty() ? path : name);
    table.insert(to_lower_ascii(fields[0]), v);
  }
  if (table.dim() == 0 && dim > 0) table = EmbeddingTable(dim, name.empty() ? path : name);
  if (expected_dim && table.dim() != *expected_dim)
    throw DataError(path + ": dimension " + std::to_string(table.dim()) +
                    " does not match expected " + std::to_string(*expected_dim));
  return table;
}

}  // namespace qarank
