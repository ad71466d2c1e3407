#include "qarank/commands.hpp"

#include <filesystem>

#include "doctest.h"
#include "json.hpp"
#include "qarank/util.hpp"
#include "test_helpers.hpp"

using namespace qarank;
namespace fs = std::filesystem;

namespace {

// A tiny synthetic setup that runs the whole pipeline in a few seconds.
RunConfig tiny_run(const qtest::TempDir& dir) {
  RunConfig cfg;
  cfg.seed = 11;
  cfg.synth.n_labels = 3;
  cfg.synth.docs_per_label = 8;
  cfg.synth.vocab_size = 150;
  cfg.synth.keywords_per_label = 6;
  cfg.synth.intruder_fraction = 0.25;
  cfg.synth.embedding_dim = 16;
  cfg.synth.sentences_min = 3;
  cfg.synth.sentences_max = 5;
  cfg.synth.seed = cfg.seed;
  cfg.paths.output_dir = dir.file("synth");
  cfg.paths.model_dir = dir.file("models");
  cmd_synth(cfg);

  RunConfig run = load_run_config((fs::path(cfg.paths.output_dir) / "run_config.json").string());
  run.paths.output_dir = dir.file("out");
  run.paths.model_dir = dir.file("models");
  run.corpus.min_doc_freq = 1;
  run.topic.hidden = 12;
  run.topic.epochs = 12;
  run.topic.patience = 12;
  run.task2.epochs = 120;
  run.task2.eval_split = "dev";
  return run;
}

nlohmann::json read_json(const std::string& path) {
  return nlohmann::json::parse(qtest::slurp(path));
}

}  // namespace

TEST_CASE("the full command pipeline runs on a tiny synthetic corpus") {
  qtest::TempDir dir("cmd_pipeline");
  RunConfig run = tiny_run(dir);

  cmd_prepare(run);
  CHECK(fs::exists(fs::path(run.paths.output_dir) / "vocab.tsv"));
  CHECK(fs::exists(fs::path(run.paths.output_dir) / "train.jsonl"));
  auto prep = read_json((fs::path(run.paths.output_dir) / "prepare_report.json").string());
  CHECK(prep["n_abstracts"] == 24);
  CHECK(prep["labels"].size() == 3);

  cmd_train(run, "topic");
  CHECK(fs::exists(fs::path(run.paths.model_dir) / "topic.json"));
  auto hist = read_json((fs::path(run.paths.output_dir) / "topic_history.json").string());
  CHECK(hist["dev_accuracy"].get<double>() >= 0.0);

  cmd_train(run, "svm");
  CHECK(fs::exists(fs::path(run.paths.model_dir) / "svm.json"));

  cmd_train(run, "sentranker");
  CHECK(fs::exists(fs::path(run.paths.model_dir) / "sentranker.json"));

  cmd_rank_docs(run);
  auto report = read_json((fs::path(run.paths.output_dir) / "rank_docs_report.json").string());
  CHECK(report["gold_available"] == true);
  CHECK(report["map_reranked"].get<double>() > 0.5);
  for (const auto& label : prep["labels"])
    CHECK(fs::exists(fs::path(run.paths.output_dir) / "rankings" /
                     (label.get<std::string>() + ".tsv")));

  RunConfig svm_run = run;
  svm_run.task1.model = "svm";
  svm_run.paths.output_dir = dir.file("out_svm");
  cmd_rank_docs(svm_run);
  auto svm_report =
      read_json((fs::path(svm_run.paths.output_dir) / "rank_docs_report.json").string());
  CHECK(svm_report["model"] == "svm");
  CHECK(svm_report["map_reranked"].get<double>() > 0.5);

  cmd_rank_sents(run);
  auto sents = read_json((fs::path(run.paths.output_dir) / "rank_sents_report.json").string());
  CHECK(sents["gold_available"] == true);
  CHECK(sents["metrics"].contains("ensemble"));

  RunConfig eval = run;
  eval.evaluate.rankings_dir = (fs::path(run.paths.output_dir) / "rankings").string();
  eval.evaluate.sentences_file = (fs::path(run.paths.output_dir) / "sentences.tsv").string();
  eval.paths.output_dir = dir.file("eval_out");
  cmd_evaluate(eval);
  auto er = read_json((fs::path(eval.paths.output_dir) / "eval_report.json").string());
  CHECK(er.contains("task1"));
  CHECK(er["task2"]["metrics"].contains("version1"));
  // the evaluate command recomputes exactly the pipeline's numbers
  CHECK(er["task1"]["map"].get<double>() ==
        doctest::Approx(report["map_reranked"].get<double>()));
}

TEST_CASE("pure clusters rank at mAP 1.0") {
  qtest::TempDir dir("cmd_pure");
  RunConfig run = tiny_run(dir);
  // regenerate without intruders
  RunConfig synth_cfg = run;
  synth_cfg.synth.intruder_fraction = 0.0;
  synth_cfg.paths.output_dir = dir.file("synth_pure");
  cmd_synth(synth_cfg);
  RunConfig pure =
      load_run_config((fs::path(synth_cfg.paths.output_dir) / "run_config.json").string());
  pure.paths.output_dir = dir.file("out_pure");
  pure.paths.model_dir = dir.file("models_pure");
  pure.corpus.min_doc_freq = 1;
  pure.topic.hidden = 10;
  pure.topic.epochs = 5;
  pure.topic.patience = 5;
  cmd_train(pure, "topic");
  cmd_rank_docs(pure);
  auto report =
      read_json((fs::path(pure.paths.output_dir) / "rank_docs_report.json").string());
  CHECK(report["map_confidence"].get<double>() == 1.0);
  CHECK(report["map_reranked"].get<double>() == 1.0);
}

TEST_CASE("rerank mode only changes the post-rerank report section") {
  qtest::TempDir dir("cmd_rerank_flag");
  RunConfig run = tiny_run(dir);
  cmd_train(run, "topic");

  run.task1.rerank = "bm25_extra";
  run.paths.output_dir = dir.file("out_bm25");
  cmd_rank_docs(run);
  auto a = read_json((fs::path(run.paths.output_dir) / "rank_docs_report.json").string());

  run.task1.rerank = "qar";
  run.paths.output_dir = dir.file("out_qar");
  cmd_rank_docs(run);
  auto b = read_json((fs::path(run.paths.output_dir) / "rank_docs_report.json").string());

  CHECK(a["map_confidence"] == b["map_confidence"]);
  CHECK(a["rerank"] != b["rerank"]);
}

TEST_CASE("an ensemble of identical rankers equals the single ranker") {
  qtest::TempDir dir("cmd_ensemble_dup");
  RunConfig run = tiny_run(dir);
  run.task2.rankers = {"version1"};
  run.task2.ensemble = {"version1", "version1", "version1"};
  cmd_rank_sents(run);
  std::string tsv = qtest::slurp((fs::path(run.paths.output_dir) / "sentences.tsv").string());
  std::map<std::string, std::pair<std::string, std::string>> by_id;  // id -> (v1, ensemble)
  bool header = true;
  for (const auto& line : split(tsv, '\n')) {
    if (header || line.empty()) {
      header = false;
      continue;
    }
    auto f = split(line, '\t');
    REQUIRE(f.size() == 4);
    if (f[3] == "version1") by_id[f[0]].first = f[1];
    if (f[3] == "ensemble") by_id[f[0]].second = f[1];
  }
  CHECK(!by_id.empty());
  for (const auto& [id, pair] : by_id) CHECK(pair.first == pair.second);
}

TEST_CASE("config and data errors carry the right exception types") {
  qtest::TempDir dir("cmd_errors");
  SUBCASE("missing seed is a config error") {
    qtest::write_file(dir.file("noseed.json"), "{}");
    CHECK_THROWS_AS(load_run_config(dir.file("noseed.json")), ConfigError);
  }
  SUBCASE("missing corpus path is a config error") {
    RunConfig cfg;
    cfg.paths.output_dir = dir.file("o");
    CHECK_THROWS_AS(cmd_prepare(cfg), ConfigError);
  }
  SUBCASE("unlabeled corpus cannot be trained on") {
    qtest::write_file(dir.file("u.jsonl"),
                      R"({"id":"1","title":"t one","sentences":["a b c."]})"
                      "\n"
                      R"({"id":"2","title":"t two","sentences":["d e f."]})"
                      "\n");
    RunConfig cfg;
    cfg.paths.corpus = dir.file("u.jsonl");
    cfg.paths.output_dir = dir.file("o2");
    cfg.paths.model_dir = dir.file("m2");
    cfg.corpus.min_doc_freq = 1;
    CHECK_THROWS_AS(cmd_train(cfg, "topic"), DataError);
  }
  SUBCASE("checkpoint/vocabulary mismatch is detected") {
    RunConfig run = tiny_run(dir);
    cmd_train(run, "topic");
    // shrink the corpus so the vocabulary hash changes
    RunConfig changed = run;
    changed.corpus.min_doc_freq = 3;
    CHECK_THROWS_WITH_AS(cmd_rank_docs(changed), doctest::Contains("mismatch"), DataError);
  }
  SUBCASE("unknown model name is a config error") {
    RunConfig run = tiny_run(dir);
    CHECK_THROWS_AS(cmd_train(run, "bogus"), ConfigError);
  }
}

TEST_CASE("training with a siamese score file widens the supervised features") {
  qtest::TempDir dir("cmd_siamese");
  RunConfig run = tiny_run(dir);
  // a constant score for every (id, sentence) pair
  Corpus corpus = load_corpus(run.paths.corpus);
  std::string tsv;
  for (const auto& a : corpus.abstracts)
    for (size_t j = 0; j < a.sentences_raw.size(); ++j)
      tsv += a.id + "\t" + std::to_string(j) + "\t0.5\n";
  qtest::write_file(dir.file("siamese.tsv"), tsv);
  run.paths.siamese_scores = dir.file("siamese.tsv");
  cmd_train(run, "sentranker");
  auto hist =
      read_json((fs::path(run.paths.output_dir) / "sentranker_history.json").string());
  CHECK(hist["feature_width"] == 7);
}
