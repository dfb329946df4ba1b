#include "raglab/comparison.hpp"

#include <algorithm>
#include <set>

#include "raglab/text.hpp"

namespace raglab::comparison {

namespace {

double jaccard_sets(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++inter;
      ++i;
      ++j;
    }
  }
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

}  // namespace

double jaccard_words(std::string_view a, std::string_view b) {
  return jaccard_sets(text::word_set(a), text::word_set(b));
}

ChunkPairing match_chunks(std::span<const Chunk> chunks_a, std::span<const Chunk> chunks_b,
                          double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error("invalid_argument", "pairing threshold must be in (0, 1]");
  }
  std::vector<std::set<std::string>> words_b;
  words_b.reserve(chunks_b.size());
  for (const auto& c : chunks_b) words_b.push_back(text::word_set(c.text));

  ChunkPairing out;
  out.threshold = threshold;
  for (const auto& ca : chunks_a) {
    const auto wa = text::word_set(ca.text);
    for (std::size_t j = 0; j < chunks_b.size(); ++j) {
      const double s = jaccard_sets(wa, words_b[j]);
      if (s >= threshold) out.pairs.push_back({ca.chunk_id, chunks_b[j].chunk_id, s});
    }
  }
  std::sort(out.pairs.begin(), out.pairs.end(), [](const ChunkPair& x, const ChunkPair& y) {
    if (x.jaccard != y.jaccard) return x.jaccard > y.jaccard;
    if (x.chunk_id_a != y.chunk_id_a) return x.chunk_id_a < y.chunk_id_a;
    return x.chunk_id_b < y.chunk_id_b;
  });
  return out;
}

std::int64_t TransitionMatrix::total() const {
  std::int64_t t = 0;
  for (const auto& row : counts)
    for (auto c : row) t += c;
  return t;
}

LabelHistogram TransitionMatrix::row_sums() const {
  LabelHistogram h{};
  for (std::size_t i = 0; i < kLabelCount; ++i)
    for (std::size_t j = 0; j < kLabelCount; ++j) h[i] += counts[i][j];
  return h;
}

LabelHistogram TransitionMatrix::column_sums() const {
  LabelHistogram h{};
  for (std::size_t i = 0; i < kLabelCount; ++i)
    for (std::size_t j = 0; j < kLabelCount; ++j) h[j] += counts[i][j];
  return h;
}

const std::vector<std::string>& TransitionMatrix::flow(OutcomeLabel from, OutcomeLabel to) const {
  static const std::vector<std::string> empty;
  auto it = question_ids.find({from, to});
  return it == question_ids.end() ? empty : it->second;
}

TransitionMatrix transition_matrix(std::span<const RunRecord> records_a,
                                   std::span<const RunRecord> records_b) {
  TransitionMatrix m;
  if (!records_a.empty()) m.config_a = records_a.front().config_id;
  if (!records_b.empty()) m.config_b = records_b.front().config_id;

  std::map<std::string, OutcomeLabel> b_labels;
  for (const auto& r : records_b)
    if (r.ok()) b_labels[r.question_id] = r.outcome;

  std::set<std::string> seen;
  for (const auto& r : records_a) {
    if (!r.ok() || !seen.insert(r.question_id).second) continue;
    auto it = b_labels.find(r.question_id);
    if (it == b_labels.end()) continue;
    ++m.counts[label_index(r.outcome)][label_index(it->second)];
    m.question_ids[{r.outcome, it->second}].push_back(r.question_id);
  }
  if (m.total() == 0) {
    throw Error("invalid_argument", "the two record sets share no successfully run question");
  }
  for (auto& [_, ids] : m.question_ids) std::sort(ids.begin(), ids.end());
  return m;
}

LabelHistogram label_histogram(std::span<const RunRecord> records) {
  LabelHistogram h{};
  for (const auto& r : records)
    if (r.ok()) ++h[label_index(r.outcome)];
  return h;
}

std::string option_value(const RagConfig& c, std::string_view field) {
  if (field == "embedding_model") return c.embedding_model;
  if (field == "rerank_model") return c.rerank_model.value_or(std::string(kNoReranker));
  if (field == "response_model") return c.response_model;
  if (field == "chunk_size") return std::to_string(c.chunk_size);
  if (field == "chunk_overlap") return std::to_string(c.chunk_overlap);
  if (field == "retrieval_depth") return std::to_string(c.retrieval_depth);
  if (field == "top_k") return std::to_string(c.top_k);
  throw Error("invalid_argument", "unknown component field '" + std::string(field) + "'");
}

std::vector<std::string> space_options(const ConfigSpace& s, std::string_view field) {
  auto nums = [](const std::vector<std::int64_t>& v) {
    std::vector<std::string> out;
    for (auto x : v) out.push_back(std::to_string(x));
    return out;
  };
  if (field == "embedding_model") return s.embedding_model;
  if (field == "rerank_model") return s.rerank_model;
  if (field == "response_model") return s.response_model;
  if (field == "chunk_size") return nums(s.chunk_size);
  if (field == "chunk_overlap") return nums(s.chunk_overlap);
  if (field == "retrieval_depth") return nums(s.retrieval_depth);
  if (field == "top_k") return nums(s.top_k);
  throw Error("invalid_argument", "unknown component field '" + std::string(field) + "'");
}

std::vector<ComponentAggregate> component_aggregates(const ConfigSpace& space,
                                                     std::span<const ConfigResult> results,
                                                     metrics::Metric metric) {
  std::vector<ComponentAggregate> out;
  for (auto field : kComponentFields) {
    for (const auto& option : space_options(space, field)) {
      ComponentAggregate agg{std::string(field), option, 0.0, 0};
      double sum = 0.0;
      for (const auto& r : results) {
        if (option_value(r.config, field) != option) continue;
        sum += r.report.value(metric);
        ++agg.n_configs;
      }
      if (agg.n_configs == 0) continue;
      agg.mean_metric = sum / static_cast<double>(agg.n_configs);
      out.push_back(std::move(agg));
    }
  }
  return out;
}

Track build_track(const RunRecord& record, const Question& question,
                  const corpus::EvidenceLocator& chunks) {
  Track t;
  t.config_id = record.config_id;
  t.glyph_fraction = record.coverage.glyph_fraction();
  t.final_answer = record.response.final_answer;
  t.correct = record.judge_verdict.correct;
  t.outcome = record.outcome;
  const std::set<std::string> top_k(record.context_chunk_ids.begin(), record.context_chunk_ids.end());
  const auto& ranking = record.final_ranking();
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    const auto* c = chunks.find(ranking[i].chunk_id);
    if (!c) throw Error("not_found", "unknown chunk '" + ranking[i].chunk_id + "'");
    TrackChunk tc;
    tc.chunk_id = c->chunk_id;
    tc.doc_id = c->doc_id;
    tc.rank = i + 1;
    tc.score = ranking[i].score;
    tc.in_top_k = top_k.contains(c->chunk_id);
    tc.text = c->text;
    for (std::size_t e = 0; e < question.evidence.size(); ++e) {
      if (auto span = corpus::find_evidence_in_chunk(question.evidence[e], *c)) {
        tc.evidence_spans.push_back({span->first, span->second, e});
      }
    }
    const auto& sentences = record.response.supporting_sentences;
    for (std::size_t s = 0; s < sentences.size(); ++s) {
      for (const auto& [b, e] : corpus::find_sentence_spans(sentences[s], c->text)) {
        tc.supporting_spans.push_back({b, e, s});
      }
    }
    t.chunks.push_back(std::move(tc));
  }
  return t;
}

DualTrackPayload dual_track_payload(const RunRecord& record_a, const RunRecord& record_b,
                                    const Question& question, const corpus::EvidenceLocator& chunks_a,
                                    const corpus::EvidenceLocator& chunks_b, double threshold) {
  if (record_a.question_id != record_b.question_id || record_a.question_id != question.question_id) {
    throw Error("invalid_argument", "dual-track records must answer the same question");
  }
  DualTrackPayload p;
  p.question_id = question.question_id;
  p.a = build_track(record_a, question, chunks_a);
  p.b = build_track(record_b, question, chunks_b);
  auto gather = [](const RunRecord& r, const corpus::EvidenceLocator& loc) {
    std::vector<Chunk> out;
    for (const auto& item : r.final_ranking()) out.push_back(*loc.find(item.chunk_id));
    return out;
  };
  const auto range_a = gather(record_a, chunks_a);
  const auto range_b = gather(record_b, chunks_b);
  p.links = match_chunks(range_a, range_b, threshold);
  return p;
}

void to_json(json& j, const ChunkPairing& v) {
  json pairs = json::array();
  for (const auto& p : v.pairs) {
    pairs.push_back({{"chunk_id_a", p.chunk_id_a}, {"chunk_id_b", p.chunk_id_b}, {"jaccard", p.jaccard}});
  }
  j = json{{"threshold", v.threshold}, {"pairs", pairs}};
}

void to_json(json& j, const TransitionMatrix& v) {
  json labels = json::array();
  for (auto l : kAllLabels) labels.push_back(label_code(l));
  json flows = json::array();
  for (auto from : kAllLabels) {
    for (auto to : kAllLabels) {
      const auto c = v.counts[label_index(from)][label_index(to)];
      if (c == 0) continue;
      flows.push_back({{"from", label_code(from)},
                       {"to", label_code(to)},
                       {"count", c},
                       {"question_ids", v.flow(from, to)}});
    }
  }
  json rows = json::array();
  for (const auto& row : v.counts) rows.push_back(row);
  j = json{{"config_a", v.config_a}, {"config_b", v.config_b}, {"labels", labels},
           {"counts", rows},         {"flows", flows},         {"total", v.total()}};
}

void to_json(json& j, const ComponentAggregate& v) {
  j = json{{"component_field", v.component_field},
           {"option_value", v.option_value},
           {"mean_metric", v.mean_metric},
           {"n_configs", v.n_configs}};
}

void to_json(json& j, const Span& v) {
  j = json{{"start", v.start}, {"end", v.end}, {"source_index", v.source_index}};
}

void to_json(json& j, const TrackChunk& v) {
  j = json{{"chunk_id", v.chunk_id},   {"doc_id", v.doc_id},
           {"rank", v.rank},           {"score", v.score},
           {"in_top_k", v.in_top_k},   {"text", v.text},
           {"evidence_spans", v.evidence_spans}, {"supporting_spans", v.supporting_spans}};
}

void to_json(json& j, const Track& v) {
  j = json{{"config_id", v.config_id},         {"chunks", v.chunks},
           {"glyph_fraction", v.glyph_fraction}, {"final_answer", v.final_answer},
           {"correct", v.correct},             {"outcome", v.outcome}};
}

void to_json(json& j, const DualTrackPayload& v) {
  j = json{{"question_id", v.question_id}, {"a", v.a}, {"b", v.b}, {"links", v.links}};
}

}  // namespace raglab::comparison
