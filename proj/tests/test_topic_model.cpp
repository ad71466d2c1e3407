#include "qarank/topic_model.hpp"

#include <cmath>

#include "doctest.h"
#include "qarank/util.hpp"
#include "test_helpers.hpp"
#include "test_oracles.hpp"

using namespace qarank;

namespace {

// Z-token vocabulary "w00".."wNN" with no embeddings.
struct Toy {
  Vocabulary vocab;
  TopicModel model;
};

Toy toy_model(int z, int h, int n_labels, uint64_t seed, double lambda = 0.1) {
  Corpus corpus;
  for (int w = 0; w < z; ++w) {
    Abstract a;
    a.id = "f" + std::to_string(w);
    char buf[8];
    std::snprintf(buf, sizeof(buf), "w%02d", w);
    a.title_raw = buf;
    corpus.abstracts.push_back(a);
  }
  Toy t;
  t.vocab = build_vocabulary(corpus, 1, {});
  TopicHyper hyper;
  hyper.hidden = h;
  hyper.lambda = lambda;
  hyper.seed = seed;
  std::vector<std::string> labels;
  for (int l = 0; l < n_labels; ++l) labels.push_back("L" + std::to_string(l));
  t.model = TopicModel::init(t.vocab, labels, EmbeddingTable(), EmbeddingTable(), hyper);
  return t;
}

void zero_block(TopicModel& m, const std::string& name) {
  for (auto& blk : m.parameter_blocks())
    if (blk.name == name)
      for (Eigen::Index i = 0; i < blk.size; ++i) blk.data[i] = 0.0;
}

void zero_all(TopicModel& m) {
  for (auto& blk : m.parameter_blocks())
    for (Eigen::Index i = 0; i < blk.size; ++i) blk.data[i] = 0.0;
}

}  // namespace

TEST_CASE("log-likelihood of a single word under zero parameters is log(1/Z)") {
  Toy t = toy_model(7, 4, 2, 1);
  zero_all(t.model);
  CHECK(t.model.conditionals_log_likelihood({3}) ==
        doctest::Approx(std::log(1.0 / 7.0)).epsilon(1e-12));
}

TEST_CASE("log-likelihood is never positive") {
  Toy t = toy_model(9, 5, 2, 3);
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<int> doc;
    for (int i = 0; i < rng.uniform_int(1, 10); ++i) doc.push_back(rng.uniform_int(0, 8));
    CHECK(t.model.conditionals_log_likelihood(doc) <= 0.0);
  }
  CHECK_THROWS_AS(t.model.conditionals_log_likelihood({}), DataError);
}

TEST_CASE("log-likelihood matches the scalar reference on a 4-word document") {
  Toy t = toy_model(6, 3, 2, 11);
  qtest::ScalarTopicParams sp;
  sp.W.assign(3, std::vector<double>(6));
  sp.U.assign(6, std::vector<double>(3));
  sp.b.assign(6, 0.0);
  sp.c.assign(3, 0.0);
  Rng rng(13);
  for (auto& row : sp.W)
    for (auto& x : row) x = rng.uniform(-1, 1);
  for (auto& row : sp.U)
    for (auto& x : row) x = rng.uniform(-1, 1);
  for (auto& x : sp.b) x = rng.uniform(-1, 1);
  for (auto& x : sp.c) x = rng.uniform(-1, 1);
  // copy the scalar parameters into the model
  for (auto& blk : t.model.parameter_blocks()) {
    if (blk.name == "W")  // column-major H x Z
      for (int col = 0; col < 6; ++col)
        for (int row = 0; row < 3; ++row) blk.data[col * 3 + row] = sp.W[row][col];
    if (blk.name == "U")
      for (int col = 0; col < 3; ++col)
        for (int row = 0; row < 6; ++row) blk.data[col * 6 + row] = sp.U[row][col];
    if (blk.name == "b")
      for (int i = 0; i < 6; ++i) blk.data[i] = sp.b[i];
    if (blk.name == "c")
      for (int i = 0; i < 3; ++i) blk.data[i] = sp.c[i];
  }
  std::vector<int> doc = {2, 5, 2, 0};
  CHECK(t.model.conditionals_log_likelihood(doc) ==
        doctest::Approx(qtest::scalar_log_likelihood(sp, doc)).epsilon(1e-9));
}

TEST_CASE("every conditional distribution normalizes") {
  Toy t = toy_model(12, 6, 3, 17);
  Rng rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<int> doc;
    for (int i = 0; i < rng.uniform_int(1, 8); ++i) doc.push_back(rng.uniform_int(0, 11));
    Eigen::MatrixXd p = t.model.conditionals(doc);
    for (Eigen::Index j = 0; j < p.cols(); ++j)
      CHECK(p.col(j).sum() == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("conditionals are causal: later tokens cannot change earlier ones") {
  Toy t = toy_model(10, 4, 2, 23);
  std::vector<int> doc = {1, 4, 7, 2};
  Eigen::MatrixXd before = t.model.conditionals(doc);
  std::vector<int> changed = doc;
  changed[3] = 9;
  Eigen::MatrixXd after = t.model.conditionals(changed);
  for (int i = 0; i < 3; ++i)
    CHECK((before.col(i) - after.col(i)).norm() == 0.0);
}

TEST_CASE("hidden_attention reduces to the uniform aggregate for equal scores") {
  Toy t = toy_model(8, 4, 2, 29);
  zero_block(t.model, "attn");  // softmax of equal scores is uniform
  std::vector<int> doc = {0, 3, 5};
  Eigen::VectorXd alpha = t.model.attention_weights(doc);
  for (int i = 0; i < 3; ++i) CHECK(alpha[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(alpha.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("hidden_attention of a single-word document is f(c + W column)") {
  Toy t = toy_model(8, 4, 2, 31);
  std::vector<int> doc = {5};
  Eigen::VectorXd alpha = t.model.attention_weights(doc);
  CHECK(alpha[0] == 1.0);
  Eigen::VectorXd h = t.model.hidden_attention(doc);
  // a second route: the uniform aggregate over a one-word doc is identical
  CHECK(h.size() == 4);
  CHECK_THROWS_AS(t.model.hidden_attention({}), DataError);
}

TEST_CASE("hidden_attention and predict_proba are order-invariant; likelihood is not") {
  Toy t = toy_model(10, 5, 3, 37);
  std::vector<int> doc = {1, 2, 3, 4, 5};
  std::vector<int> perm = {5, 3, 1, 4, 2};
  CHECK((t.model.hidden_attention(doc) - t.model.hidden_attention(perm)).norm() < 1e-14);
  CHECK((t.model.predict_proba(doc) - t.model.predict_proba(perm)).norm() < 1e-14);
  CHECK(t.model.conditionals_log_likelihood(doc) !=
        t.model.conditionals_log_likelihood(perm));
}

TEST_CASE("embedding features concatenate the two aggregated blocks") {
  auto setup = qtest::gradcheck_setup(10, 4, 5, 4, 0.3, 41);
  std::vector<int> doc = {0, 3};
  Eigen::VectorXd feat = setup.model.embedding_features(doc);
  CHECK(feat.size() == 9);  // 5 + 4
  CHECK(setup.model.feature_size() == 4 + 5 + 4);
}

TEST_CASE("embedding features with 300- and 200-dim tables have length 500") {
  Corpus corpus;
  for (int w = 0; w < 3; ++w) {
    Abstract a;
    a.id = "f" + std::to_string(w);
    a.title_raw = "tok" + std::to_string(w);
    corpus.abstracts.push_back(a);
  }
  auto vocab = build_vocabulary(corpus, 1, {});
  EmbeddingTable fast(300, "fasttext"), w2v(200, "word2vec");
  TopicHyper hyper;
  hyper.hidden = 50;
  hyper.seed = 3;
  TopicModel model = TopicModel::init(vocab, {"a", "b"}, fast, w2v, hyper);
  CHECK(model.embedding_features({0, 1}).size() == 500);
  CHECK(model.feature_size() == 50 + 300 + 200);
}

TEST_CASE("embedding features of tokens without vectors reduce to f(bias)") {
  // vocabulary tokens absent from the tables contribute zero vectors
  Corpus corpus;
  for (int w = 0; w < 4; ++w) {
    Abstract a;
    a.id = "f" + std::to_string(w);
    a.title_raw = "tok" + std::to_string(w);
    corpus.abstracts.push_back(a);
  }
  auto vocab = build_vocabulary(corpus, 1, {});
  EmbeddingTable fast(3, "fast"), w2v(2, "w2v");  // empty tables with a dimension
  TopicHyper hyper;
  hyper.hidden = 3;
  hyper.seed = 5;
  TopicModel model = TopicModel::init(vocab, {"a", "b"}, fast, w2v, hyper);
  double bias_val = 0.75;
  for (auto& blk : model.parameter_blocks())
    if (blk.name == "c_fast" || blk.name == "c_w2v")
      for (Eigen::Index i = 0; i < blk.size; ++i) blk.data[i] = bias_val;
  Eigen::VectorXd feat = model.embedding_features({0, 2, 3});
  double expected = 1.0 / (1.0 + std::exp(-bias_val));
  for (Eigen::Index i = 0; i < feat.size(); ++i)
    CHECK(feat[i] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("single word with zero biases and tanh yields the word's embeddings, nearly") {
  Corpus corpus;
  for (int w = 0; w < 3; ++w) {
    Abstract a;
    a.id = "f" + std::to_string(w);
    a.title_raw = "tok" + std::to_string(w);
    corpus.abstracts.push_back(a);
  }
  auto vocab = build_vocabulary(corpus, 1, {});
  EmbeddingTable fast(2, "fast"), w2v(2, "w2v");
  Eigen::VectorXd small(2);
  small << 0.01, -0.02;
  fast.insert("tok1", small);
  w2v.insert("tok1", 2.0 * small);
  TopicHyper hyper;
  hyper.hidden = 2;
  hyper.activation = Activation::Tanh;
  hyper.seed = 5;
  TopicModel model = TopicModel::init(vocab, {"a", "b"}, fast, w2v, hyper);
  int idx = vocab.index_of("tok1");
  Eigen::VectorXd feat = model.embedding_features({idx});
  // tanh(x) ~ x for small x, so each block is close to the raw embedding
  CHECK(feat[0] == doctest::Approx(small[0]).epsilon(1e-3));
  CHECK(feat[1] == doctest::Approx(small[1]).epsilon(1e-3));
  CHECK(feat[2] == doctest::Approx(2.0 * small[0]).epsilon(1e-3));
  CHECK(feat[3] == doctest::Approx(2.0 * small[1]).epsilon(1e-3));
  // and exactly tanh of the embedding when the bias is zero
  CHECK(feat[0] == std::tanh(small[0]));
}

TEST_CASE("predict_proba under zero parameters is uniform and always normalizes") {
  Toy t = toy_model(9, 4, 4, 43);
  SUBCASE("zero parameters give the uniform distribution") {
    zero_all(t.model);
    Eigen::VectorXd p = t.model.predict_proba({1, 2});
    for (int l = 0; l < 4; ++l) CHECK(p[l] == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("random parameters still normalize") {
    Rng rng(47);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<int> doc;
      for (int i = 0; i < rng.uniform_int(1, 7); ++i) doc.push_back(rng.uniform_int(0, 8));
      CHECK(t.model.predict_proba(doc).sum() == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
  SUBCASE("an empty document is scorable") {
    Eigen::VectorXd p = t.model.predict_proba({});
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  auto setup = qtest::gradcheck_setup();
  auto result = qtest::gradcheck(setup);
  INFO("worst block: ", result.worst_block);
  CHECK(result.max_rel_error < 1e-4);
}

TEST_CASE("gradients are also correct with tanh activation and lambda=0") {
  auto setup = qtest::gradcheck_setup(20, 6, 3, 2, 0.0, 53);
  auto result = qtest::gradcheck(setup);
  INFO("worst block: ", result.worst_block);
  CHECK(result.max_rel_error < 1e-4);
}

namespace {

Corpus tiny_labeled_corpus(int docs_per_label, uint64_t seed) {
  // two topics with disjoint vocabularies plus shared filler
  Corpus c;
  Rng rng(seed);
  std::vector<std::string> topic_a = {"sleep", "rem", "cycle", "dream"};
  std::vector<std::string> topic_b = {"threat", "fear", "stress", "panic"};
  int id = 0;
  for (int l = 0; l < 2; ++l) {
    const auto& words = l == 0 ? topic_a : topic_b;
    for (int d = 0; d < docs_per_label; ++d) {
      std::string text;
      for (int i = 0; i < 6; ++i) text += words[rng.uniform_int(0, 3)] + " ";
      text += "common filler tokens";
      Abstract a = qtest::abstract_of("d" + std::to_string(id++), words[0] + " study",
                                      {text}, l == 0 ? "Sleep" : "Threat");
      c.abstracts.push_back(a);
    }
  }
  c.rebuild_label_set();
  return c;
}

}  // namespace

TEST_CASE("one epoch on a toy corpus decreases the mean training loss") {
  Corpus corpus = tiny_labeled_corpus(5, 61);
  auto vocab = build_vocabulary(corpus, 1, {});
  corpus.index_with(vocab, kDefaultTokenPattern);
  TopicHyper hyper;
  hyper.hidden = 6;
  hyper.lambda = 0.1;
  hyper.epochs = 1;
  hyper.seed = 5;
  TopicModel model =
      TopicModel::init(vocab, corpus.label_set, EmbeddingTable(), EmbeddingTable(), hyper);
  double initial = 0.0;
  for (const auto& a : corpus.abstracts)
    initial += model.hybrid_loss(a.word_sequence(), a.label == "Sleep" ? 0 : 1);
  initial /= static_cast<double>(corpus.abstracts.size());
  auto history = model.train(corpus, corpus, hyper);
  double after = 0.0;
  for (const auto& a : corpus.abstracts)
    after += model.hybrid_loss(a.word_sequence(), a.label == "Sleep" ? 0 : 1);
  after /= static_cast<double>(corpus.abstracts.size());
  CHECK(after < initial);
  CHECK(history.size() == 1);
}

TEST_CASE("lambda=0 leaves the generative parameters untouched") {
  Corpus corpus = tiny_labeled_corpus(4, 67);
  auto vocab = build_vocabulary(corpus, 1, {});
  corpus.index_with(vocab, kDefaultTokenPattern);
  TopicHyper hyper;
  hyper.hidden = 5;
  hyper.lambda = 0.0;
  hyper.epochs = 2;
  hyper.seed = 9;
  TopicModel model =
      TopicModel::init(vocab, corpus.label_set, EmbeddingTable(), EmbeddingTable(), hyper);
  Eigen::MatrixXd u_before, b_before;
  for (auto& blk : model.parameter_blocks()) {
    if (blk.name == "U") u_before = Eigen::Map<Eigen::MatrixXd>(blk.data, blk.size, 1);
    if (blk.name == "b") b_before = Eigen::Map<Eigen::MatrixXd>(blk.data, blk.size, 1);
  }
  model.train(corpus, corpus, hyper);
  for (auto& blk : model.parameter_blocks()) {
    if (blk.name == "U")
      CHECK((Eigen::Map<Eigen::MatrixXd>(blk.data, blk.size, 1) - u_before).norm() == 0.0);
    if (blk.name == "b")
      CHECK((Eigen::Map<Eigen::MatrixXd>(blk.data, blk.size, 1) - b_before).norm() == 0.0);
  }
}

TEST_CASE("training is reproducible for a fixed seed") {
  Corpus corpus = tiny_labeled_corpus(4, 71);
  auto vocab = build_vocabulary(corpus, 1, {});
  corpus.index_with(vocab, kDefaultTokenPattern);
  TopicHyper hyper;
  hyper.hidden = 5;
  hyper.epochs = 3;
  hyper.seed = 21;
  qtest::TempDir dir("topic_repro");
  for (int run = 0; run < 2; ++run) {
    TopicModel model =
        TopicModel::init(vocab, corpus.label_set, EmbeddingTable(), EmbeddingTable(), hyper);
    model.train(corpus, corpus, hyper);
    model.save(dir.file("run" + std::to_string(run) + ".json"));
  }
  CHECK(qtest::slurp(dir.file("run0.json")) == qtest::slurp(dir.file("run1.json")));
}

TEST_CASE("non-finite loss aborts with a diagnostic") {
  Corpus corpus = tiny_labeled_corpus(3, 73);
  auto vocab = build_vocabulary(corpus, 1, {});
  corpus.index_with(vocab, kDefaultTokenPattern);
  TopicHyper hyper;
  hyper.hidden = 4;
  hyper.epochs = 1;
  hyper.seed = 3;
  TopicModel model =
      TopicModel::init(vocab, corpus.label_set, EmbeddingTable(), EmbeddingTable(), hyper);
  for (auto& blk : model.parameter_blocks())
    if (blk.name == "d") blk.data[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(model.train(corpus, corpus, hyper), NumericalError);
}

TEST_CASE("checkpoints round-trip and keep the vocabulary hash") {
  Corpus corpus = tiny_labeled_corpus(3, 79);
  auto vocab = build_vocabulary(corpus, 1, {});
  corpus.index_with(vocab, kDefaultTokenPattern);
  TopicHyper hyper;
  hyper.hidden = 4;
  hyper.seed = 15;
  TopicModel model =
      TopicModel::init(vocab, corpus.label_set, EmbeddingTable(), EmbeddingTable(), hyper);
  qtest::TempDir dir("topic_ckpt");
  model.save(dir.file("m.json"));
  TopicModel loaded = TopicModel::load(dir.file("m.json"), vocab.hash());
  CHECK(loaded.vocab_hash() == vocab.hash());
  CHECK_THROWS_AS(TopicModel::load(dir.file("m.json"), vocab.hash() + 1), DataError);
  CHECK(loaded.labels() == corpus.label_set);
  std::vector<int> doc = corpus.abstracts[0].word_sequence();
  CHECK((loaded.predict_proba(doc) - model.predict_proba(doc)).norm() == 0.0);
  CHECK(loaded.conditionals_log_likelihood(doc) ==
        doctest::Approx(model.conditionals_log_likelihood(doc)).epsilon(1e-15));
}
