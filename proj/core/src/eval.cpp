#include "qarank/eval.hpp"

#include <iostream>

#include "qarank/util.hpp"

namespace qarank {

double average_precision(const std::vector<int>& relevance) {
  if (relevance.empty()) throw DataError("average precision of an empty list");
  int relevant_seen = 0;
  double sum = 0.0;
  for (size_t k = 0; k < relevance.size(); ++k) {
    if (relevance[k]) {
      ++relevant_seen;
      sum += static_cast<double>(relevant_seen) / static_cast<double>(k + 1);
    }
  }
  if (relevant_seen == 0) throw DataError("average precision undefined: no relevant items");
  return sum / static_cast<double>(relevant_seen);
}

double mean_average_precision(const std::vector<ClusterRankingEval>& clusters,
                              const std::map<std::string, std::string>& gold_labels,
                              std::map<std::string, double>* per_cluster,
                              std::vector<std::string>* skipped) {
  double total = 0.0;
  int counted = 0;
  for (const auto& c : clusters) {
    std::vector<int> relevance;
    relevance.reserve(c.ranked_ids.size());
    for (const auto& id : c.ranked_ids) {
      auto it = gold_labels.find(id);
      if (it == gold_labels.end()) throw DataError("no gold label for id '" + id + "'");
      relevance.push_back(it->second == c.label ? 1 : 0);
    }
    bool any_relevant = false;
    for (int r : relevance)
      if (r) any_relevant = true;
    if (!any_relevant) {
      std::cerr << "warning: cluster '" << c.label << "' has no relevant member; skipped\n";
      if (skipped) skipped->push_back(c.label);
      continue;
    }
    double ap = average_precision(relevance);
    if (per_cluster) (*per_cluster)[c.label] = ap;
    total += ap;
    ++counted;
  }
  if (counted == 0) throw DataError("no cluster with relevant members");
  return total / static_cast<double>(counted);
}

Task2Metrics task2_metrics(const std::map<std::string, int>& predictions,
                           const std::map<std::string, Task2Gold>& gold) {
  Task2Metrics m;
  std::map<std::string, std::pair<int, int>> label_counts;  // label -> (correct, total)
  int correct = 0;
  int total_gold_sentences = 0;
  for (const auto& [id, g] : gold) total_gold_sentences += static_cast<int>(g.relevant.size());
  for (const auto& [id, pred] : predictions) {
    auto it = gold.find(id);
    if (it == gold.end()) throw DataError("prediction for unknown id '" + id + "'");
    bool hit = it->second.relevant.count(pred) > 0;
    if (hit) ++correct;
    auto& lc = label_counts[it->second.label];
    lc.first += hit ? 1 : 0;
    lc.second += 1;
  }
  if (predictions.empty()) throw DataError("no predictions to evaluate");
  double acc_sum = 0.0;
  for (const auto& [label, lc] : label_counts) {
    double acc = static_cast<double>(lc.first) / static_cast<double>(lc.second);
    m.per_label_accuracy[label] = acc;
    acc_sum += acc;
  }
  m.macro_avg_accuracy = acc_sum / static_cast<double>(label_counts.size());
  m.precision = static_cast<double>(correct) / static_cast<double>(predictions.size());
  m.recall = total_gold_sentences > 0
                 ? static_cast<double>(correct) / static_cast<double>(total_gold_sentences)
                 : 0.0;
  m.f1 = (m.precision + m.recall) > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

}  // namespace qarank
