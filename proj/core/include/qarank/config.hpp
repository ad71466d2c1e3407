#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qarank/synth.hpp"
#include "qarank/topic_model.hpp"

namespace qarank {

// One JSON document drives every command; all defaults are materialized into
// the output directory for provenance. Relative paths resolve against the
// directory containing the config file.
struct RunConfig {
  uint64_t seed = 42;

  struct {
    std::string corpus;
    std::string clusters;
    std::string fasttext;
    std::string word2vec;
    std::string stopwords;
    std::string siamese_scores;
    std::string model_dir = "out/models";
    std::string output_dir = "out";
  } paths;

  struct {
    std::string token_pattern = kDefaultTokenPattern;
    int min_doc_freq = 3;
    double dev_fraction = 0.2;
  } corpus;

  struct {
    int hidden = 50;
    double lambda = 0.1;
    double learning_rate = 1e-3;
    int epochs = 100;
    int patience = 15;
    std::string activation = "sigmoid";
  } topic;

  struct {
    double C = 1.0;
    double gamma = 0.0;  // 0 = auto
    double tol = 1e-3;
    int max_passes = 500;
  } svm;

  struct {
    double k1 = 1.2;
    double b = 0.75;
  } bm25;

  struct {
    bool clamp_negative_attention = false;
  } repr;

  struct {
    std::string model = "topic";  // topic | svm
    std::string rerank = "bm25_extra";
    bool combine_with_confidence = false;
  } task1;

  struct {
    std::vector<std::string> rankers = {"bm25_extra", "version1", "version2", "supervised"};
    std::vector<std::string> ensemble = {"bm25_extra", "version1", "supervised"};
    double beta = 0.0;
    std::vector<double> beta_candidates;  // when nonempty, picked by dev accuracy
    int projection_dim = 100;
    std::string norm = "l1";
    std::string optimizer = "adam";
    double learning_rate = 0.01;
    int epochs = 300;
    std::string eval_split = "all";  // all | train | dev
  } task2;

  struct {
    std::string rankings_dir;
    std::string sentences_file;
  } evaluate;

  SynthConfig synth;

  TopicHyper topic_hyper() const;
};

RunConfig load_run_config(const std::string& path);
std::string dump_run_config(const RunConfig& config);

}  // namespace qarank
