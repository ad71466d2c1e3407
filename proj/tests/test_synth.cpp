#include "qarank/synth.hpp"

#include <map>
#include <set>

#include "doctest.h"
#include "qarank/util.hpp"
#include "test_helpers.hpp"

using namespace qarank;

namespace {

SynthConfig small_config(uint64_t seed = 5) {
  SynthConfig c;
  c.n_labels = 3;
  c.docs_per_label = 6;
  c.vocab_size = 120;
  c.keywords_per_label = 8;
  c.intruder_fraction = 0.2;
  c.embedding_dim = 12;
  c.seed = seed;
  return c;
}

int keyword_count(const std::string& sentence, const std::string& label_prefix) {
  int n = 0;
  for (const auto& tok : tokenize(sentence))
    if (tok.rfind(label_prefix, 0) == 0) ++n;
  return n;
}

}  // namespace

TEST_CASE("default config yields 320 documents in 8 clusters of 44") {
  SynthOutput out = generate(SynthConfig{});
  CHECK(out.corpus.abstracts.size() == 320);
  CHECK(out.clusters.size() == 8);
  for (const auto& c : out.clusters) CHECK(c.ids.size() == 44);  // 40 + 10% intruders
  CHECK(out.corpus.label_set.size() == 8);
  CHECK(out.embeddings.dim() == 50);
  CHECK(static_cast<int>(out.embeddings.size()) == 2000);
}

TEST_CASE("regeneration with the same seed is byte-identical") {
  SynthOutput a = generate(small_config());
  SynthOutput b = generate(small_config());
  CHECK(corpus_to_jsonl(a.corpus) == corpus_to_jsonl(b.corpus));
  CHECK(clusters_to_jsonl(a.clusters) == clusters_to_jsonl(b.clusters));
  CHECK(embeddings_to_text(a.embeddings) == embeddings_to_text(b.embeddings));
  SynthOutput c = generate(small_config(6));
  CHECK(corpus_to_jsonl(a.corpus) != corpus_to_jsonl(c.corpus));
}

TEST_CASE("the gold sentence is the unique keyword-count argmax") {
  SynthOutput out = generate(small_config());
  for (const auto& a : out.corpus.abstracts) {
    REQUIRE(a.gold_relevant.size() == 1);
    int gold = *a.gold_relevant.begin();
    // keywords of label l start with "tNN"
    std::string prefix = a.label->substr(0, a.label->find('w'));
    int gold_count = keyword_count(a.sentences_raw[gold], prefix);
    CHECK(gold_count >= 3);
    for (size_t j = 0; j < a.sentences_raw.size(); ++j) {
      if (static_cast<int>(j) == gold) continue;
      CHECK(keyword_count(a.sentences_raw[j], prefix) <= 1);
      CHECK(keyword_count(a.sentences_raw[j], prefix) <
            gold_count);
    }
  }
}

TEST_CASE("keywords are disjoint across labels") {
  SynthOutput out = generate(small_config());
  std::map<std::string, std::set<std::string>> by_label;
  for (const auto& a : out.corpus.abstracts)
    for (const auto& tok : tokenize(a.raw_text()))
      if (tok[0] == 't') by_label[*a.label].insert(tok.substr(0, 3));
  // label prefix tNN appears only in documents of that label's prefix
  for (const auto& a : out.corpus.abstracts) {
    std::string own = a.label->substr(0, 3);
    for (const auto& tok : tokenize(a.raw_text()))
      if (tok[0] == 't') CHECK(tok.substr(0, 3) == own);
  }
}

TEST_CASE("intruder_fraction=0 gives pure clusters") {
  SynthConfig cfg = small_config();
  cfg.intruder_fraction = 0.0;
  SynthOutput out = generate(cfg);
  std::map<std::string, std::string> gold;
  for (const auto& a : out.corpus.abstracts) gold[a.id] = *a.label;
  for (const auto& c : out.clusters) {
    CHECK(c.ids.size() == 6);
    for (const auto& id : c.ids) CHECK(gold.at(id) == c.label);
  }
}

TEST_CASE("clusters contain the planted intruder count") {
  SynthOutput out = generate(small_config());
  std::map<std::string, std::string> gold;
  for (const auto& a : out.corpus.abstracts) gold[a.id] = *a.label;
  for (const auto& c : out.clusters) {
    int intruders = 0;
    for (const auto& id : c.ids) intruders += gold.at(id) != c.label ? 1 : 0;
    CHECK(intruders == 1);  // round(0.2 * 6)
  }
}

TEST_CASE("invalid configurations are rejected") {
  SynthConfig c = small_config();
  c.keywords_per_label = 2;
  CHECK_THROWS_AS(generate(c), ConfigError);
  c = small_config();
  c.vocab_size = 10;
  CHECK_THROWS_AS(generate(c), ConfigError);
  c = small_config();
  c.intruder_fraction = 1.0;
  CHECK_THROWS_AS(generate(c), ConfigError);
  c = small_config();
  c.sentences_min = 5;
  c.sentences_max = 3;
  CHECK_THROWS_AS(generate(c), ConfigError);
}

TEST_CASE("generated files round-trip through the loaders") {
  qtest::TempDir dir("synth_io");
  SynthOutput out = generate(small_config());
  qtest::write_file(dir.file("corpus.jsonl"), corpus_to_jsonl(out.corpus));
  qtest::write_file(dir.file("clusters.jsonl"), clusters_to_jsonl(out.clusters));
  qtest::write_file(dir.file("embeddings.txt"), embeddings_to_text(out.embeddings));

  Corpus loaded = load_corpus(dir.file("corpus.jsonl"));
  CHECK(loaded.abstracts.size() == out.corpus.abstracts.size());
  CHECK(loaded.label_set == out.corpus.label_set);
  for (size_t i = 0; i < loaded.abstracts.size(); ++i) {
    CHECK(loaded.abstracts[i].id == out.corpus.abstracts[i].id);
    CHECK(loaded.abstracts[i].gold_relevant == out.corpus.abstracts[i].gold_relevant);
  }
  auto clusters = load_clusters(dir.file("clusters.jsonl"));
  CHECK(clusters.size() == out.clusters.size());
  auto emb = load_embeddings(dir.file("embeddings.txt"), 12);
  CHECK(emb.size() == out.embeddings.size());
  // vectors survive the 8-decimal text round trip
  for (const auto& tok : {std::string("t0w00"), std::string("bg0000")})
    CHECK((emb.lookup(tok) - out.embeddings.lookup(tok)).lpNorm<Eigen::Infinity>() < 1e-7);
}
