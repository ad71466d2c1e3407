#include <benchmark/benchmark.h>

#include "qarank/lexical.hpp"
#include "qarank/repr.hpp"
#include "qarank/synth.hpp"
#include "qarank/topic_model.hpp"
#include "qarank/util.hpp"

namespace {

using namespace qarank;

EmbeddingTable random_table(int n_tokens, int dim, uint64_t seed) {
  EmbeddingTable t(dim, "bench");
  Rng rng(seed);
  for (int i = 0; i < n_tokens; ++i) {
    Eigen::VectorXd v(dim);
    for (int k = 0; k < dim; ++k) v[k] = rng.normal();
    t.insert("w" + std::to_string(i), v);
  }
  return t;
}

std::vector<std::string> random_words(int n, int n_tokens, uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> words;
  for (int i = 0; i < n; ++i)
    words.push_back("w" + std::to_string(rng.uniform_int(0, n_tokens - 1)));
  return words;
}

void BM_qar(benchmark::State& state) {
  auto table = random_table(500, 50, 1);
  auto query = random_words(3, 500, 2);
  auto doc = random_words(static_cast<int>(state.range(0)), 500, 3);
  for (auto _ : state) benchmark::DoNotOptimize(qar(query, doc, table));
}
BENCHMARK(BM_qar)->Arg(50)->Arg(200);

void BM_bm25_extra(benchmark::State& state) {
  Rng rng(5);
  std::vector<std::vector<std::string>> docs;
  for (int d = 0; d < 300; ++d) docs.push_back(random_words(40, 800, rng.next_u64()));
  auto stats = Bm25Stats::build(docs);
  auto query = random_words(3, 800, 7);
  for (auto _ : state) {
    for (int d = 0; d < 50; ++d)
      benchmark::DoNotOptimize(bm25_extra(query, docs[d], stats));
  }
}
BENCHMARK(BM_bm25_extra);

void BM_docnade_loglik(benchmark::State& state) {
  Corpus corpus;
  for (int w = 0; w < 2000; ++w) {
    Abstract a;
    a.id = "f" + std::to_string(w);
    a.title_raw = "tok" + std::to_string(w);
    corpus.abstracts.push_back(a);
  }
  auto vocab = build_vocabulary(corpus, 1, {});
  TopicHyper hyper;
  hyper.hidden = 50;
  TopicModel model =
      TopicModel::init(vocab, {"a", "b"}, EmbeddingTable(), EmbeddingTable(), hyper);
  Rng rng(11);
  std::vector<int> doc;
  for (int i = 0; i < 50; ++i) doc.push_back(rng.uniform_int(0, 1999));
  for (auto _ : state) benchmark::DoNotOptimize(model.conditionals_log_likelihood(doc));
}
BENCHMARK(BM_docnade_loglik);

void BM_topic_gradient_step(benchmark::State& state) {
  Corpus corpus;
  for (int w = 0; w < 2000; ++w) {
    Abstract a;
    a.id = "f" + std::to_string(w);
    a.title_raw = "tok" + std::to_string(w);
    corpus.abstracts.push_back(a);
  }
  auto vocab = build_vocabulary(corpus, 1, {});
  TopicHyper hyper;
  hyper.hidden = 50;
  TopicModel model =
      TopicModel::init(vocab, {"a", "b", "c"}, EmbeddingTable(), EmbeddingTable(), hyper);
  Rng rng(13);
  std::vector<int> doc;
  for (int i = 0; i < 40; ++i) doc.push_back(rng.uniform_int(0, 1999));
  auto grads = model.zero_gradients();
  for (auto _ : state)
    benchmark::DoNotOptimize(model.loss_and_gradients(doc, 1, &grads));
}
BENCHMARK(BM_topic_gradient_step);

}  // namespace

BENCHMARK_MAIN();
