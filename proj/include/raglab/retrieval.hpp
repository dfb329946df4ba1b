#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "raglab/providers.hpp"
#include "raglab/types.hpp"

namespace raglab::retrieval {

using providers::Vector;

enum class Stage { retrieved, reranked };

// Scores non-increasing, ties by chunk_id ascending, ids distinct.
struct RankedList {
  Stage stage = Stage::retrieved;
  std::vector<ScoredChunk> items;
  bool operator==(const RankedList&) const = default;
};

struct IndexEntry {
  std::string chunk_id;
  Vector vector;
  bool operator==(const IndexEntry&) const = default;
};

struct VectorIndex {
  std::string chunk_store_digest;
  std::string embedder;
  std::size_t dimension = 0;
  std::vector<IndexEntry> entries;  // chunk_id order
  bool operator==(const VectorIndex&) const = default;
};

// Embeds every chunk in batches. When `checkpoint_path` is given, completed
// batches are appended there and reused on the next call, so a provider
// failure mid-build keeps partial progress. The checkpoint is removed on
// success.
VectorIndex build_index(std::span<const Chunk> chunks, providers::Embedder& embedder,
                        const std::string& embedder_name, const std::string& chunk_store_digest,
                        const std::optional<std::string>& checkpoint_path = std::nullopt,
                        std::size_t batch_size = 64);

// Exact cosine search over unit vectors. Throws Error{"dimension_mismatch"}.
RankedList knn_search(const VectorIndex& index, const Vector& query, std::size_t depth);

// With no reranker the items are copied and relabeled. Otherwise `chunks`
// must hold the text of every retrieved item (any order).
RankedList apply_rerank(const std::string& query, const RankedList& retrieved,
                        providers::Reranker* reranker, std::span<const Chunk> chunks);

std::vector<std::string> take_top_k(const RankedList& ranked, std::size_t k);

// `<path>` holds JSONL entries; `<path>.manifest.json` the sidecar.
void save_index(const VectorIndex& index, const std::string& path);
VectorIndex load_index(const std::string& path);

}  // namespace raglab::retrieval
