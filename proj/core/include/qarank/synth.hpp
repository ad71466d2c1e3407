#pragma once

#include <string>
#include <vector>

#include "qarank/corpus.hpp"
#include "qarank/embedding.hpp"

namespace qarank {

// Deterministic corpus generator for desk-scale end-to-end runs. Each label
// owns a disjoint keyword set whose embeddings sit near a per-label anchor
// direction; one keyword-dense sentence per document is marked gold relevant.
struct SynthConfig {
  int n_labels = 8;
  int docs_per_label = 40;
  int vocab_size = 2000;
  int keywords_per_label = 20;
  double intruder_fraction = 0.1;
  int sentences_min = 3;
  int sentences_max = 8;
  int embedding_dim = 50;
  uint64_t seed = 42;
};

struct SynthOutput {
  Corpus corpus;
  EmbeddingTable embeddings;
  std::vector<Cluster> clusters;
};

SynthOutput generate(const SynthConfig& config);

// Serializers matching the corpus/cluster/embedding file formats.
std::string corpus_to_jsonl(const Corpus& corpus);
std::string clusters_to_jsonl(const std::vector<Cluster>& clusters);
std::string embeddings_to_text(const EmbeddingTable& table);

}  // namespace qarank
