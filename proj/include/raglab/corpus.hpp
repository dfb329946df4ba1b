#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "raglab/types.hpp"

namespace raglab::corpus {

// Offsets and sizes are in Unicode code points of the document body.
struct ChunkingParams {
  std::int64_t chunk_size = 0;
  std::int64_t chunk_overlap = 0;
  bool snap_to_whitespace = false;
};

inline constexpr std::int64_t kSnapWindow = 50;

// Throws Error{"empty_document"} for an empty body and Error{"invalid_argument"}
// for overlap >= size.
std::vector<Chunk> chunk_document(const Document& doc, const ChunkingParams& params);
std::vector<Chunk> chunk_corpus(std::span<const Document> docs, const ChunkingParams& params);

struct EvidenceMatch {
  std::size_t evidence_index = 0;
  std::string chunk_id;
  std::int64_t char_start = 0;  // relative to chunk text, code points
  std::int64_t char_end = 0;
};

// Span (chunk-relative, code points) of the first contiguous occurrence of the
// evidence's normalized token sequence in the chunk. Evidence carrying a doc_id
// only matches chunks of that document.
std::optional<std::pair<std::int64_t, std::int64_t>> find_evidence_in_chunk(
    const EvidenceRef& evidence, const Chunk& chunk);

// Spans of an arbitrary sentence inside text (no document restriction); used
// for supporting-sentence highlighting. Returns every non-overlapping match.
std::vector<std::pair<std::int64_t, std::int64_t>> find_sentence_spans(std::string_view sentence,
                                                                       std::string_view text);

std::set<std::string> relevant_chunks(const Question& question, std::span<const Chunk> chunks);

// Pre-tokenized view over one chunk store, answering evidence-location queries
// for many questions without re-tokenizing chunks. Results per question are
// memoized.
class EvidenceLocator {
 public:
  explicit EvidenceLocator(std::vector<Chunk> chunks);

  const std::vector<Chunk>& chunks() const { return chunks_; }
  const Chunk* find(const std::string& chunk_id) const;

  // For each evidence index, the set of chunk ids containing it.
  const std::vector<std::set<std::string>>& evidence_chunks(const Question& q) const;
  std::set<std::string> relevant_chunks(const Question& q) const;

  // Number of evidence sentences found in at least one chunk of `ids`.
  std::int64_t evidence_found_in(const Question& q, std::span<const std::string> ids) const;

 private:
  std::vector<Chunk> chunks_;
  std::map<std::string, std::size_t> by_id_;
  std::vector<std::vector<std::string>> tokens_;
  mutable std::map<std::string, std::vector<std::set<std::string>>> memo_;
  mutable std::mutex memo_mutex_;
};

// Digest identifying a corpus's content (doc order and bodies).
std::string corpus_digest(std::span<const Document> docs);
// Digest identifying a chunk store: corpus digest plus chunking params.
std::string chunk_store_digest(const std::string& corpus_digest, const ChunkingParams& params);

void write_chunk_store(const std::string& path, std::span<const Chunk> chunks);
std::vector<Chunk> read_chunk_store(const std::string& path);

// Code point count and code point -> byte index table (size = count + 1).
std::vector<std::size_t> codepoint_byte_offsets(std::string_view utf8);

}  // namespace raglab::corpus
