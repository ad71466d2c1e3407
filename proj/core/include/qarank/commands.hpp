#pragma once

#include <string>

#include "qarank/config.hpp"

namespace qarank {

// Every command is a pure function of (config, input files, seed); outputs go
// under config.paths.output_dir / model_dir and are written atomically.
void cmd_prepare(const RunConfig& config);
void cmd_train(const RunConfig& config, const std::string& model);  // topic|svm|sentranker
void cmd_rank_docs(const RunConfig& config);
void cmd_rank_sents(const RunConfig& config);
void cmd_evaluate(const RunConfig& config);
void cmd_synth(const RunConfig& config);

}  // namespace qarank
