#include "qarank/config.hpp"

#include <filesystem>

#include "json.hpp"
#include "qarank/util.hpp"

namespace qarank {

namespace {

using nlohmann::json;

std::string resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return p;
  std::filesystem::path fp(p);
  if (fp.is_absolute()) return fp.lexically_normal().string();
  return (base / fp).lexically_normal().string();
}

template <typename T>
void get_if_present(const json& j, const char* key, T* out) {
  if (j.contains(key)) *out = j.at(key).get<T>();
}

}  // namespace

TopicHyper RunConfig::topic_hyper() const {
  TopicHyper h;
  h.hidden = topic.hidden;
  h.lambda = topic.lambda;
  h.learning_rate = topic.learning_rate;
  h.epochs = topic.epochs;
  h.patience = topic.patience;
  h.seed = seed;
  if (topic.activation == "sigmoid")
    h.activation = Activation::Sigmoid;
  else if (topic.activation == "tanh")
    h.activation = Activation::Tanh;
  else
    throw ConfigError("unknown activation: " + topic.activation);
  return h;
}

RunConfig load_run_config(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw ConfigError("malformed config file: " + path);
  RunConfig c;
  if (!j.contains("seed"))
    throw ConfigError(path + ": config must set an explicit 'seed'");
  c.seed = j.at("seed").get<uint64_t>();

  std::filesystem::path base = std::filesystem::absolute(path).parent_path();
  if (j.contains("paths")) {
    const auto& p = j["paths"];
    get_if_present(p, "corpus", &c.paths.corpus);
    get_if_present(p, "clusters", &c.paths.clusters);
    get_if_present(p, "fasttext", &c.paths.fasttext);
    get_if_present(p, "word2vec", &c.paths.word2vec);
    get_if_present(p, "stopwords", &c.paths.stopwords);
    get_if_present(p, "siamese_scores", &c.paths.siamese_scores);
    get_if_present(p, "model_dir", &c.paths.model_dir);
    get_if_present(p, "output_dir", &c.paths.output_dir);
  }
  for (auto* p : {&c.paths.corpus, &c.paths.clusters, &c.paths.fasttext, &c.paths.word2vec,
                  &c.paths.stopwords, &c.paths.siamese_scores, &c.paths.model_dir,
                  &c.paths.output_dir})
    *p = resolve(base, *p);

  if (j.contains("corpus")) {
    const auto& p = j["corpus"];
    get_if_present(p, "token_pattern", &c.corpus.token_pattern);
    get_if_present(p, "min_doc_freq", &c.corpus.min_doc_freq);
    get_if_present(p, "dev_fraction", &c.corpus.dev_fraction);
  }
  if (j.contains("topic")) {
    const auto& p = j["topic"];
    get_if_present(p, "hidden", &c.topic.hidden);
    get_if_present(p, "lambda", &c.topic.lambda);
    get_if_present(p, "learning_rate", &c.topic.learning_rate);
    get_if_present(p, "epochs", &c.topic.epochs);
    get_if_present(p, "patience", &c.topic.patience);
    get_if_present(p, "activation", &c.topic.activation);
  }
  if (j.contains("svm")) {
    const auto& p = j["svm"];
    get_if_present(p, "C", &c.svm.C);
    get_if_present(p, "gamma", &c.svm.gamma);
    get_if_present(p, "tol", &c.svm.tol);
    get_if_present(p, "max_passes", &c.svm.max_passes);
  }
  if (j.contains("bm25")) {
    const auto& p = j["bm25"];
    get_if_present(p, "k1", &c.bm25.k1);
    get_if_present(p, "b", &c.bm25.b);
  }
  if (j.contains("repr"))
    get_if_present(j["repr"], "clamp_negative_attention", &c.repr.clamp_negative_attention);
  if (j.contains("task1")) {
    const auto& p = j["task1"];
    get_if_present(p, "model", &c.task1.model);
    get_if_present(p, "rerank", &c.task1.rerank);
    get_if_present(p, "combine_with_confidence", &c.task1.combine_with_confidence);
  }
  if (j.contains("task2")) {
    const auto& p = j["task2"];
    get_if_present(p, "rankers", &c.task2.rankers);
    get_if_present(p, "ensemble", &c.task2.ensemble);
    get_if_present(p, "beta", &c.task2.beta);
    get_if_present(p, "beta_candidates", &c.task2.beta_candidates);
    get_if_present(p, "projection_dim", &c.task2.projection_dim);
    get_if_present(p, "norm", &c.task2.norm);
    get_if_present(p, "optimizer", &c.task2.optimizer);
    get_if_present(p, "learning_rate", &c.task2.learning_rate);
    get_if_present(p, "epochs", &c.task2.epochs);
    get_if_present(p, "eval_split", &c.task2.eval_split);
  }
  if (j.contains("evaluate")) {
    const auto& p = j["evaluate"];
    get_if_present(p, "rankings_dir", &c.evaluate.rankings_dir);
    get_if_present(p, "sentences_file", &c.evaluate.sentences_file);
    c.evaluate.rankings_dir = resolve(base, c.evaluate.rankings_dir);
    c.evaluate.sentences_file = resolve(base, c.evaluate.sentences_file);
  }
  if (j.contains("synth")) {
    const auto& p = j["synth"];
    get_if_present(p, "n_labels", &c.synth.n_labels);
    get_if_present(p, "docs_per_label", &c.synth.docs_per_label);
    get_if_present(p, "vocab_size", &c.synth.vocab_size);
    get_if_present(p, "keywords_per_label", &c.synth.keywords_per_label);
    get_if_present(p, "intruder_fraction", &c.synth.intruder_fraction);
    get_if_present(p, "sentences_min", &c.synth.sentences_min);
    get_if_present(p, "sentences_max", &c.synth.sentences_max);
    get_if_present(p, "embedding_dim", &c.synth.embedding_dim);
  }
  c.synth.seed = c.seed;
  return c;
}

std::string dump_run_config(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["paths"] = {{"corpus", c.paths.corpus},
                {"clusters", c.paths.clusters},
                {"fasttext", c.paths.fasttext},
                {"word2vec", c.paths.word2vec},
                {"stopwords", c.paths.stopwords},
                {"siamese_scores", c.paths.siamese_scores},
                {"model_dir", c.paths.model_dir},
                {"output_dir", c.paths.output_dir}};
  j["corpus"] = {{"token_pattern", c.corpus.token_pattern},
                 {"min_doc_freq", c.corpus.min_doc_freq},
                 {"dev_fraction", c.corpus.dev_fraction}};
  j["topic"] = {{"hidden", c.topic.hidden},
                {"lambda", c.topic.lambda},
                {"learning_rate", c.topic.learning_rate},
                {"epochs", c.topic.epochs},
                {"patience", c.topic.patience},
                {"activation", c.topic.activation}};
  j["svm"] = {{"C", c.svm.C}, {"gamma", c.svm.gamma}, {"tol", c.svm.tol},
              {"max_passes", c.svm.max_passes}};
  j["bm25"] = {{"k1", c.bm25.k1}, {"b", c.bm25.b}};
  j["repr"] = {{"clamp_negative_attention", c.repr.clamp_negative_attention}};
  j["task1"] = {{"model", c.task1.model},
                {"rerank", c.task1.rerank},
                {"combine_with_confidence", c.task1.combine_with_confidence}};
  j["task2"] = {{"rankers", c.task2.rankers},
                {"ensemble", c.task2.ensemble},
                {"beta", c.task2.beta},
                {"beta_candidates", c.task2.beta_candidates},
                {"projection_dim", c.task2.projection_dim},
                {"norm", c.task2.norm},
                {"optimizer", c.task2.optimizer},
                {"learning_rate", c.task2.learning_rate},
                {"epochs", c.task2.epochs},
                {"eval_split", c.task2.eval_split}};
  j["evaluate"] = {{"rankings_dir", c.evaluate.rankings_dir},
                   {"sentences_file", c.evaluate.sentences_file}};
  j["synth"] = {{"n_labels", c.synth.n_labels},
                {"docs_per_label", c.synth.docs_per_label},
                {"vocab_size", c.synth.vocab_size},
                {"keywords_per_label", c.synth.keywords_per_label},
                {"intruder_fraction", c.synth.intruder_fraction},
                {"sentences_min", c.synth.sentences_min},
                {"sentences_max", c.synth.sentences_max},
                {"embedding_dim", c.synth.embedding_dim},
                {"seed", c.synth.seed}};
  return j.dump(2) + "\n";
}

}  // namespace qarank
