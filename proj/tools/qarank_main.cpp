#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qarank/commands.hpp"
#include "qarank/util.hpp"

// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numerical failure.
int main(int argc, char** argv) {
  CLI::App app{"qarank: cluster document ranking and relevant-sentence extraction"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> model;
  std::optional<std::string> rerank;
  std::optional<std::string> ensemble;
  std::optional<uint64_t> seed;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "run config JSON")->required();
    cmd->add_option("--seed", seed, "override the config seed");
  };

  CLI::App* prepare = app.add_subcommand("prepare", "tokenize, build vocabulary, split");
  add_common(prepare);
  CLI::App* train = app.add_subcommand("train", "train a model");
  add_common(train);
  train->add_option("--model", model, "topic | svm | sentranker");
  CLI::App* rank_docs = app.add_subcommand("rank-docs", "rank cluster documents");
  add_common(rank_docs);
  rank_docs->add_option("--model", model, "topic | svm");
  rank_docs->add_option("--rerank", rerank, "bm25_extra | qar | sum | none");
  CLI::App* rank_sents = app.add_subcommand("rank-sents", "extract most relevant sentences");
  add_common(rank_sents);
  rank_sents->add_option("--ensemble", ensemble, "comma-separated ranker list");
  CLI::App* evaluate = app.add_subcommand("evaluate", "score ranking/prediction files");
  add_common(evaluate);
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  add_common(synth);

  CLI11_PARSE(app, argc, argv);

  try {
    qarank::RunConfig config = qarank::load_run_config(config_path);
    if (seed) {
      config.seed = *seed;
      config.synth.seed = *seed;
    }
    if (rerank) config.task1.rerank = *rerank;
    if (ensemble) config.task2.ensemble = qarank::split(*ensemble, ',');

    if (app.got_subcommand(prepare)) {
      qarank::cmd_prepare(config);
    } else if (app.got_subcommand(train)) {
      qarank::cmd_train(config, model.value_or("topic"));
    } else if (app.got_subcommand(rank_docs)) {
      if (model) config.task1.model = *model;
      qarank::cmd_rank_docs(config);
    } else if (app.got_subcommand(rank_sents)) {
      qarank::cmd_rank_sents(config);
    } else if (app.got_subcommand(evaluate)) {
      qarank::cmd_evaluate(config);
    } else if (app.got_subcommand(synth)) {
      qarank::cmd_synth(config);
    }
  } catch (const qarank::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const qarank::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const qarank::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
