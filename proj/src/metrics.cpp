#include "raglab/metrics.hpp"

#include <algorithm>
#include <sstream>

namespace raglab::metrics {

double recall_at_k(const Relevant& relevant, std::span<const ScoredChunk> ranking, std::size_t k) {
  if (relevant.empty()) return 1.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < std::min(k, ranking.size()); ++i) {
    hits += relevant.contains(ranking[i].chunk_id);
  }
  return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

double reciprocal_rank(const Relevant& relevant, std::span<const ScoredChunk> ranking) {
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    if (relevant.contains(ranking[i].chunk_id)) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

double average_precision(const Relevant& relevant, std::span<const ScoredChunk> ranking) {
  if (relevant.empty()) return 1.0;
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    if (relevant.contains(ranking[i].chunk_id)) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(relevant.size());
}

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::accuracy: return "accuracy";
    case Metric::recall: return "recall";
    case Metric::mrr: return "mrr";
    case Metric::map: return "map";
  }
  return "accuracy";
}

Metric parse_metric(std::string_view name) {
  for (auto m : {Metric::accuracy, Metric::recall, Metric::mrr, Metric::map})
    if (metric_name(m) == name) return m;
  throw Error("invalid_metric", "unknown metric '" + std::string(name) +
                                    "' (expected accuracy, recall, mrr or map)");
}

double MetricReport::value(Metric m) const {
  switch (m) {
    case Metric::accuracy: return accuracy;
    case Metric::recall: return recall_at_k;
    case Metric::mrr: return mrr;
    case Metric::map: return map;
  }
  return accuracy;
}

void to_json(json& j, const MetricReport& v) {
  j = json{{"config_id", v.config_id}, {"accuracy", v.accuracy},     {"recall_at_k", v.recall_at_k},
           {"mrr", v.mrr},             {"map", v.map},               {"n_questions", v.n_questions},
           {"n_errors", v.n_errors}};
}

void from_json(const json& j, MetricReport& v) {
  j.at("config_id").get_to(v.config_id);
  j.at("accuracy").get_to(v.accuracy);
  j.at("recall_at_k").get_to(v.recall_at_k);
  j.at("mrr").get_to(v.mrr);
  j.at("map").get_to(v.map);
  j.at("n_questions").get_to(v.n_questions);
  j.at("n_errors").get_to(v.n_errors);
}

MetricReport aggregate(std::span<const RunRecord> records, std::size_t k, RankingStage stage) {
  if (records.empty()) throw Error("invalid_argument", "cannot aggregate an empty record list");
  MetricReport r;
  r.config_id = records.front().config_id;
  r.n_questions = static_cast<std::int64_t>(records.size());
  std::size_t correct = 0;
  double recall = 0.0, rr = 0.0, ap = 0.0;
  for (const auto& rec : records) {
    if (rec.config_id != r.config_id) {
      throw Error("invalid_argument", "records from several configs passed to aggregate");
    }
    if (!rec.ok()) {
      ++r.n_errors;
      continue;
    }
    const Relevant relevant(rec.relevant_chunk_ids.begin(), rec.relevant_chunk_ids.end());
    const auto& ranking = stage == RankingStage::pre_rerank ? rec.retrieved : rec.final_ranking();
    recall += recall_at_k(relevant, ranking, k);
    rr += reciprocal_rank(relevant, ranking);
    ap += average_precision(relevant, ranking);
    correct += rec.judge_verdict.correct;
  }
  const auto n = r.n_questions - r.n_errors;
  if (n > 0) {
    const auto d = static_cast<double>(n);
    r.accuracy = static_cast<double>(correct) / d;
    r.recall_at_k = recall / d;
    r.mrr = rr / d;
    r.map = ap / d;
  }
  return r;
}

std::string reports_to_csv(std::span<const MetricReport> reports) {
  std::ostringstream os;
  os.precision(17);
  os << "config_id,accuracy,recall_at_k,mrr,map,n_questions,n_errors\n";
  for (const auto& r : reports) {
    os << r.config_id << ',' << r.accuracy << ',' << r.recall_at_k << ',' << r.mrr << ',' << r.map
       << ',' << r.n_questions << ',' << r.n_errors << '\n';
  }
  return os.str();
}

}  // namespace raglab::metrics
