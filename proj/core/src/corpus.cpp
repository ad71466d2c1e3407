#include "qarank/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include "json.hpp"
#include "qarank/util.hpp"

namespace qarank {

std::vector<int> Abstract::word_sequence() const {
  std::vector<int> seq = title_tokens;
  for (const auto& s : sentence_tokens) seq.insert(seq.end(), s.begin(), s.end());
  return seq;
}

std::vector<std::string> Abstract::word_strings() const {
  std::vector<std::string> seq = title_words;
  for (const auto& s : sentence_words) seq.insert(seq.end(), s.begin(), s.end());
  return seq;
}

std::string Abstract::raw_text() const {
  std::string out = title_raw;
  for (const auto& s : sentences_raw) {
    if (!out.empty() && !s.empty()) out += ' ';
    out += s;
  }
  return out;
}

int Vocabulary::index_of(const std::string& token) const {
  auto it = token_to_index.find(token);
  return it == token_to_index.end() ? -1 : it->second;
}

uint64_t Vocabulary::hash() const {
  std::string blob;
  for (const auto& t : index_to_token) {
    blob += t;
    blob += '\n';
  }
  return fnv1a64(blob);
}

std::vector<std::string> tokenize(const std::string& text, const std::string& pattern) {
  std::vector<std::string> tokens;
  if (pattern == kDefaultTokenPattern) {
    // fast path for the default pattern
    std::string cur;
    for (char c : text) {
      bool word = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                  (c >= '0' && c <= '9') || c == '_';
      if (word) {
        cur.push_back(c);
      } else if (!cur.empty()) {
        tokens.push_back(to_lower_ascii(cur));
        cur.clear();
      }
    }
    if (!cur.empty()) tokens.push_back(to_lower_ascii(cur));
    return tokens;
  }
  try {
    std::regex re(pattern);
    auto begin = std::sregex_iterator(text.begin(), text.end(), re);
    for (auto it = begin; it != std::sregex_iterator(); ++it)
      tokens.push_back(to_lower_ascii(it->str()));
  } catch (const std::regex_error& e) {
    throw ConfigError("invalid token pattern '" + pattern + "': " + e.what());
  }
  return tokens;
}

std::vector<std::string> query_tokens_from_label(const std::string& label) {
  std::vector<std::string> out;
  for (const auto& part : split(label, '_'))
    if (!part.empty()) out.push_back(to_lower_ascii(part));
  return out;
}

void Corpus::rebuild_label_set() {
  std::set<std::string> labels;
  for (const auto& a : abstracts)
    if (a.label) labels.insert(*a.label);
  label_set.assign(labels.begin(), labels.end());
}

const Abstract* Corpus::find(const std::string& id) const {
  for (const auto& a : abstracts)
    if (a.id == id) return &a;
  return nullptr;
}

void Corpus::index_with(const Vocabulary& vocab, const std::string& pattern) {
  for (auto& a : abstracts) {
    a.title_words.clear();
    a.title_tokens.clear();
    for (const auto& tok : tokenize(a.title_raw, pattern)) {
      int idx = vocab.index_of(tok);
      if (idx < 0) continue;
      a.title_words.push_back(tok);
      a.title_tokens.push_back(idx);
    }
    a.sentence_words.assign(a.sentences_raw.size(), {});
    a.sentence_tokens.assign(a.sentences_raw.size(), {});
    for (size_t j = 0; j < a.sentences_raw.size(); ++j) {
      for (const auto& tok : tokenize(a.sentences_raw[j], pattern)) {
        int idx = vocab.index_of(tok);
        if (idx < 0) continue;
        a.sentence_words[j].push_back(tok);
        a.sentence_tokens[j].push_back(idx);
      }
    }
  }
}

Vocabulary build_vocabulary(const Corpus& corpus, int min_doc_freq,
                            const std::set<std::string>& stopwords,
                            const std::string& pattern) {
  if (min_doc_freq < 1) throw ConfigError("min_doc_freq must be >= 1");
  std::map<std::string, int> df;
  for (const auto& a : corpus.abstracts) {
    std::set<std::string> seen;
    for (const auto& tok : tokenize(a.title_raw, pattern)) seen.insert(tok);
    for (const auto& s : a.sentences_raw)
      for (const auto& tok : tokenize(s, pattern)) seen.insert(tok);
    for (const auto& tok : seen) df[tok]++;
  }
  Vocabulary vocab;
  for (const auto& [tok, freq] : df) {
    if (freq < min_doc_freq) continue;
    if (stopwords.count(tok)) continue;
    vocab.token_to_index[tok] = static_cast<int>(vocab.index_to_token.size());
    vocab.index_to_token.push_back(tok);
    vocab.doc_frequency.push_back(freq);
  }
  if (vocab.index_to_token.empty())
    throw DataError("vocabulary is empty after filtering");
  return vocab;
}

std::pair<Corpus, Corpus> split_train_dev(const Corpus& corpus, double dev_fraction,
                                          uint64_t seed) {
  if (!(dev_fraction > 0.0 && dev_fraction < 1.0))
    throw ConfigError("dev_fraction must be in (0, 1)");
  std::map<std::string, std::vector<size_t>> by_label;
  for (size_t i = 0; i < corpus.abstracts.size(); ++i) {
    const auto& a = corpus.abstracts[i];
    if (!a.label) throw DataError("split requires a label on every abstract; missing on id=" + a.id);
    by_label[*a.label].push_back(i);
  }
  std::vector<bool> in_dev(corpus.abstracts.size(), false);
  for (const auto& [label, members] : by_label) {
    if (members.size() < 2)
      throw DataError("label '" + label + "' has fewer than 2 abstracts");
    size_t n_dev = static_cast<size_t>(
        std::ceil(dev_fraction * static_cast<double>(members.size())));
    std::vector<size_t> order = members;
    Rng rng(seed ^ fnv1a64(label));
    rng.shuffle(order);
    for (size_t k = 0; k < n_dev; ++k) in_dev[order[k]] = true;
  }
  Corpus train, dev;
  for (size_t i = 0; i < corpus.abstracts.size(); ++i)
    (in_dev[i] ? dev : train).abstracts.push_back(corpus.abstracts[i]);
  train.rebuild_label_set();
  dev.rebuild_label_set();
  return {std::move(train), std::move(dev)};
}

namespace {

using nlohmann::json;

json parse_line(const std::string& line, const std::string& path, size_t line_no) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw DataError(path + ":" + std::to_string(line_no) + ": malformed JSON object");
  return j;
}

}  // namespace

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path);
  Corpus corpus;
  std::set<std::string> ids;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = parse_line(line, path, line_no);
    Abstract a;
    if (!j.contains("id") || !j["id"].is_string())
      throw DataError(path + ":" + std::to_string(line_no) + ": missing string field 'id'");
    if (!j.contains("title") || !j["title"].is_string())
      throw DataError(path + ":" + std::to_string(line_no) + ": missing string field 'title'");
    if (!j.contains("sentences") || !j["sentences"].is_array())
      throw DataError(path + ":" + std::to_string(line_no) + ": missing array field 'sentences'");
    a.id = j["id"].get<std::string>();
    a.title_raw = j["title"].get<std::string>();
    for (const auto& s : j["sentences"]) {
      if (!s.is_string())
        throw DataError(path + ":" + std::to_string(line_no) + ": non-string sentence");
      a.sentences_raw.push_back(s.get<std::string>());
    }
    if (j.contains("label") && !j["label"].is_null()) {
      if (!j["label"].is_string())
        throw DataError(path + ":" + std::to_string(line_no) + ": 'label' must be a string");
      a.label = j["label"].get<std::string>();
    }
    if (j.contains("relevant") && !j["relevant"].is_null()) {
      if (!j["relevant"].is_array())
        throw DataError(path + ":" + std::to_string(line_no) + ": 'relevant' must be an array");
      for (const auto& r : j["relevant"]) {
        if (!r.is_number_integer())
          throw DataError(path + ":" + std::to_string(line_no) + ": non-integer relevant index");
        int idx = r.get<int>();
        if (idx < 0 || idx >= static_cast<int>(a.sentences_raw.size()))
          throw DataError(path + ":" + std::to_string(line_no) +
                          ": relevant index out of range: " + std::to_string(idx));
        a.gold_relevant.insert(idx);
      }
    }
    if (!ids.insert(a.id).second)
      throw DataError(path + ":" + std::to_string(line_no) + ": duplicate id '" + a.id + "'");
    corpus.abstracts.push_back(std::move(a));
  }
  corpus.rebuild_label_set();
  return corpus;
}

std::vector<Cluster> load_clusters(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open clusters file: " + path);
  std::vector<Cluster> clusters;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = parse_line(line, path, line_no);
    if (!j.contains("cluster_label") || !j["cluster_label"].is_string())
      throw DataError(path + ":" + std::to_string(line_no) + ": missing 'cluster_label'");
    if (!j.contains("ids") || !j["ids"].is_array())
      throw DataError(path + ":" + std::to_string(line_no) + ": missing 'ids' array");
    Cluster c;
    c.label = j["cluster_label"].get<std::string>();
    std::set<std::string> seen;
    for (const auto& id : j["ids"]) {
      if (!id.is_string())
        throw DataError(path + ":" + std::to_string(line_no) + ": non-string id");
      std::string s = id.get<std::string>();
      if (!seen.insert(s).second)
        throw DataError(path + ":" + std::to_string(line_no) + ": duplicate id in cluster: " + s);
      c.ids.push_back(std::move(s));
    }
    clusters.push_back(std::move(c));
  }
  return clusters;
}

std::set<std::string> load_stopwords(const std::string& path) {
  std::set<std::string> words;
  if (path.empty()) return words;
  std::ifstream in(path);
  if (!in) throw DataError("cannot open stopword file: " + path);
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    words.insert(to_lower_ascii(line));
  }
  return words;
}

}  // namespace qarank
