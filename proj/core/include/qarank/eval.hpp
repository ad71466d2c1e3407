#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace qarank {

// Mean over relevant positions k of precision@k. Errors when no item is
// relevant (AP undefined).
double average_precision(const std::vector<int>& relevance);

struct ClusterRankingEval {
  std::string label;
  std::vector<std::string> ranked_ids;  // descending relevance order
};

// Relevant within a cluster means the gold label equals the cluster label.
// Clusters without any relevant member are skipped (reported in `skipped`).
double mean_average_precision(const std::vector<ClusterRankingEval>& clusters,
                              const std::map<std::string, std::string>& gold_labels,
                              std::map<std::string, double>* per_cluster = nullptr,
                              std::vector<std::string>* skipped = nullptr);

struct Task2Gold {
  std::string label;
  std::set<int> relevant;
};

struct Task2Metrics {
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  double macro_avg_accuracy = 0.0;
  std::map<std::string, double> per_label_accuracy;
};

// Top-1 sentence predictions scored against (possibly multi-sentence) gold
// sets; macro average is over labels.
Task2Metrics task2_metrics(const std::map<std::string, int>& predictions,
                           const std::map<std::string, Task2Gold>& gold);

}  // namespace qarank
