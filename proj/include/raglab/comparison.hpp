#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "raglab/corpus.hpp"
#include "raglab/metrics.hpp"
#include "raglab/types.hpp"

namespace raglab::comparison {

inline constexpr double kDefaultPairingThreshold = 0.3;

// Unique-word Jaccard index over normalized tokens; 1 when both are empty.
double jaccard_words(std::string_view a, std::string_view b);

struct ChunkPair {
  std::string chunk_id_a;
  std::string chunk_id_b;
  double jaccard = 0.0;
  bool operator==(const ChunkPair&) const = default;
};

struct ChunkPairing {
  std::vector<ChunkPair> pairs;  // jaccard desc, then (id_a, id_b)
  double threshold = kDefaultPairingThreshold;
};

// Every cross pair with jaccard >= threshold. threshold must be in (0, 1].
ChunkPairing match_chunks(std::span<const Chunk> chunks_a, std::span<const Chunk> chunks_b,
                          double threshold);

using LabelHistogram = std::array<std::int64_t, kLabelCount>;

struct TransitionMatrix {
  std::string config_a;
  std::string config_b;
  std::array<std::array<std::int64_t, kLabelCount>, kLabelCount> counts{};
  std::map<std::pair<OutcomeLabel, OutcomeLabel>, std::vector<std::string>> question_ids;

  std::int64_t total() const;
  LabelHistogram row_sums() const;
  LabelHistogram column_sums() const;
  const std::vector<std::string>& flow(OutcomeLabel from, OutcomeLabel to) const;
};

// Counts over question ids present without error in both lists. Throws
// Error{"invalid_argument"} when that intersection is empty.
TransitionMatrix transition_matrix(std::span<const RunRecord> records_a,
                                   std::span<const RunRecord> records_b);

LabelHistogram label_histogram(std::span<const RunRecord> records);

struct ComponentAggregate {
  std::string component_field;
  std::string option_value;
  double mean_metric = 0.0;
  std::int64_t n_configs = 0;
  bool operator==(const ComponentAggregate&) const = default;
};

struct ConfigResult {
  RagConfig config;
  metrics::MetricReport report;
};

// Field names in RagConfig declaration order.
inline constexpr std::array<std::string_view, 7> kComponentFields = {
    "embedding_model", "rerank_model", "response_model", "chunk_size",
    "chunk_overlap",   "retrieval_depth", "top_k"};

// Option value of `field` in `config` rendered as it appears in a ConfigSpace.
std::string option_value(const RagConfig& config, std::string_view field);
std::vector<std::string> space_options(const ConfigSpace& space, std::string_view field);

// One entry per (field, option) of the space that at least one result uses.
std::vector<ComponentAggregate> component_aggregates(const ConfigSpace& space,
                                                     std::span<const ConfigResult> results,
                                                     metrics::Metric metric);

struct Span {
  std::int64_t start = 0;
  std::int64_t end = 0;
  std::size_t source_index = 0;  // evidence or supporting-sentence index
  bool operator==(const Span&) const = default;
};

struct TrackChunk {
  std::string chunk_id;
  std::string doc_id;
  std::size_t rank = 0;  // 1-based in the final ranking
  double score = 0.0;
  bool in_top_k = false;
  std::string text;
  std::vector<Span> evidence_spans;    // orange
  std::vector<Span> supporting_spans;  // blue
};

struct Track {
  std::string config_id;
  std::vector<TrackChunk> chunks;
  double glyph_fraction = 1.0;
  std::string final_answer;
  bool correct = false;
  OutcomeLabel outcome = OutcomeLabel::Unknown;
};

struct DualTrackPayload {
  std::string question_id;
  Track a;
  Track b;
  ChunkPairing links;
};

Track build_track(const RunRecord& record, const Question& question,
                  const corpus::EvidenceLocator& chunks);

// Requires both records to answer the same question.
DualTrackPayload dual_track_payload(const RunRecord& record_a, const RunRecord& record_b,
                                    const Question& question, const corpus::EvidenceLocator& chunks_a,
                                    const corpus::EvidenceLocator& chunks_b, double threshold);

void to_json(json& j, const ChunkPairing& v);
void to_json(json& j, const TransitionMatrix& v);
void to_json(json& j, const ComponentAggregate& v);
void to_json(json& j, const Span& v);
void to_json(json& j, const TrackChunk& v);
void to_json(json& j, const Track& v);
void to_json(json& j, const DualTrackPayload& v);

}  // namespace raglab::comparison
