#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "raglab/types.hpp"

namespace raglab::metrics {

using Relevant = std::set<std::string>;

// |relevant ∩ top-k| / |relevant|; 1 when nothing is relevant.
double recall_at_k(const Relevant& relevant, std::span<const ScoredChunk> ranking, std::size_t k);

// 1 / rank of the first relevant item; 0 when none is retrieved.
double reciprocal_rank(const Relevant& relevant, std::span<const ScoredChunk> ranking);

// Mean of precision@p over relevant positions, divided by |relevant| so that
// unretrieved relevant items count as 0; 1 when nothing is relevant.
double average_precision(const Relevant& relevant, std::span<const ScoredChunk> ranking);

enum class Metric { accuracy, recall, mrr, map };
std::string_view metric_name(Metric m);
Metric parse_metric(std::string_view name);  // Error{"invalid_metric"}

struct MetricReport {
  std::string config_id;
  double accuracy = 0.0;
  double recall_at_k = 0.0;
  double mrr = 0.0;
  double map = 0.0;
  std::int64_t n_questions = 0;
  std::int64_t n_errors = 0;
  bool operator==(const MetricReport&) const = default;

  double value(Metric m) const;
};

void to_json(json& j, const MetricReport& v);
void from_json(const json& j, MetricReport& v);

enum class RankingStage { post_rerank, pre_rerank };

// Means over non-error records. Throws Error{"invalid_argument"} on empty
// input or mixed config ids.
MetricReport aggregate(std::span<const RunRecord> records, std::size_t k,
                       RankingStage stage = RankingStage::post_rerank);

// One header line plus one row per report.
std::string reports_to_csv(std::span<const MetricReport> reports);

}  // namespace raglab::metrics
