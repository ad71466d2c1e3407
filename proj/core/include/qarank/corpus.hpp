#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace qarank {

// Default token pattern: maximal runs of alphanumeric/underscore characters.
inline constexpr const char* kDefaultTokenPattern = "[A-Za-z0-9_]+";

// One document: a title plus pre-split sentences, optionally labeled with a
// query label and the indices of its gold relevant sentences.
struct Abstract {
  std::string id;
  std::string title_raw;
  std::vector<std::string> sentences_raw;

  // Lower-cased pattern tokens retained by the vocabulary, aligned with the
  // index lists below (same tokens, as strings). Filled by Corpus::index_with.
  std::vector<std::string> title_words;
  std::vector<std::vector<std::string>> sentence_words;
  std::vector<int> title_tokens;
  std::vector<std::vector<int>> sentence_tokens;

  std::optional<std::string> label;
  std::set<int> gold_relevant;

  // Title tokens followed by sentence tokens in document order.
  std::vector<int> word_sequence() const;
  std::vector<std::string> word_strings() const;
  std::string raw_text() const;  // title + sentences joined by single spaces
};

struct Vocabulary {
  std::map<std::string, int> token_to_index;
  std::vector<std::string> index_to_token;
  std::vector<int> doc_frequency;  // per retained token

  int size() const { return static_cast<int>(index_to_token.size()); }
  int index_of(const std::string& token) const;  // -1 if absent
  uint64_t hash() const;
};

struct Corpus {
  std::vector<Abstract> abstracts;
  std::vector<std::string> label_set;  // distinct labels, lexicographic

  // Fills token index/word lists on every abstract, dropping tokens the
  // vocabulary does not retain.
  void index_with(const Vocabulary& vocab, const std::string& pattern);
  void rebuild_label_set();
  const Abstract* find(const std::string& id) const;
};

struct Cluster {
  std::string label;
  std::vector<std::string> ids;
};

std::vector<std::string> tokenize(const std::string& text,
                                  const std::string& pattern = kDefaultTokenPattern);

// Query tokens for a label: split on underscores and lower-case.
std::vector<std::string> query_tokens_from_label(const std::string& label);

Vocabulary build_vocabulary(const Corpus& corpus, int min_doc_freq,
                            const std::set<std::string>& stopwords,
                            const std::string& pattern = kDefaultTokenPattern);

// Per-label stratified split; dev takes ceil(dev_fraction * n) of each label.
std::pair<Corpus, Corpus> split_train_dev(const Corpus& corpus, double dev_fraction,
                                          uint64_t seed);

// JSON Lines, one object per abstract:
//   {"id": ..., "title": ..., "sentences": [...], "label": ..., "relevant": [...]}
Corpus load_corpus(const std::string& path);

// JSON Lines: {"cluster_label": ..., "ids": [...]}
std::vector<Cluster> load_clusters(const std::string& path);

// UTF-8 text, one token per line; '#' lines and blanks ignored.
std::set<std::string> load_stopwords(const std::string& path);

}  // namespace qarank
