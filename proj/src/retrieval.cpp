#include "raglab/retrieval.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>

namespace raglab::retrieval {

namespace fs = std::filesystem;

namespace {

bool ranks_before(const ScoredChunk& a, const ScoredChunk& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.chunk_id < b.chunk_id;
}

}  // namespace

VectorIndex build_index(std::span<const Chunk> chunks, providers::Embedder& embedder,
                        const std::string& embedder_name, const std::string& chunk_store_digest,
                        const std::optional<std::string>& checkpoint_path, std::size_t batch_size) {
  if (chunks.empty()) throw Error("invalid_argument", "cannot index an empty chunk set");
  std::vector<const Chunk*> ordered;
  for (const auto& c : chunks) ordered.push_back(&c);
  std::sort(ordered.begin(), ordered.end(),
            [](const Chunk* a, const Chunk* b) { return a->chunk_id < b->chunk_id; });

  std::map<std::string, Vector> done;
  if (checkpoint_path && fs::exists(*checkpoint_path)) {
    std::ifstream in(*checkpoint_path);
    std::string line;
    while (std::getline(in, line)) {
      try {
        auto j = json::parse(line);
        done[j.at("chunk_id").get<std::string>()] = j.at("vector").get<Vector>();
      } catch (const json::exception&) {
        break;  // torn trailing write
      }
    }
  }

  std::ofstream checkpoint;
  if (checkpoint_path) checkpoint.open(*checkpoint_path, std::ios::app | std::ios::binary);

  std::vector<const Chunk*> pending;
  for (const auto* c : ordered)
    if (!done.contains(c->chunk_id)) pending.push_back(c);

  for (std::size_t b = 0; b < pending.size(); b += batch_size) {
    const auto e = std::min(pending.size(), b + batch_size);
    std::vector<std::string> texts;
    for (auto i = b; i < e; ++i) texts.push_back(pending[i]->text);
    auto vectors = embedder.embed(texts);
    for (auto i = b; i < e; ++i) {
      if (checkpoint) {
        checkpoint << to_jsonl_line(json{{"chunk_id", pending[i]->chunk_id}, {"vector", vectors[i - b]}});
      }
      done[pending[i]->chunk_id] = std::move(vectors[i - b]);
    }
    if (checkpoint) checkpoint.flush();
  }

  VectorIndex index;
  index.chunk_store_digest = chunk_store_digest;
  index.embedder = embedder_name;
  index.dimension = embedder.dimension();
  for (const auto* c : ordered) {
    auto& v = done.at(c->chunk_id);
    if (index.dimension == 0) index.dimension = v.size();
    if (v.size() != index.dimension) throw Error("dimension_mismatch", "embedder returned mixed dimensions");
    index.entries.push_back({c->chunk_id, std::move(v)});
  }
  if (checkpoint_path) {
    checkpoint.close();
    fs::remove(*checkpoint_path);
  }
  return index;
}

RankedList knn_search(const VectorIndex& index, const Vector& query, std::size_t depth) {
  if (depth == 0) throw Error("invalid_argument", "search depth must be >= 1");
  if (query.size() != index.dimension) {
    throw Error("dimension_mismatch", "query has dimension " + std::to_string(query.size()) +
                                          ", index has " + std::to_string(index.dimension));
  }
  std::vector<ScoredChunk> scored;
  scored.reserve(index.entries.size());
  for (const auto& e : index.entries) scored.push_back({e.chunk_id, providers::dot(e.vector, query)});
  const auto n = std::min(depth, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(),
                    ranks_before);
  scored.resize(n);
  return {Stage::retrieved, std::move(scored)};
}

RankedList apply_rerank(const std::string& query, const RankedList& retrieved,
                        providers::Reranker* reranker, std::span<const Chunk> chunks) {
  if (retrieved.stage != Stage::retrieved) {
    throw Error("invalid_argument", "apply_rerank expects a retrieved-stage list");
  }
  if (!reranker) return {Stage::reranked, retrieved.items};

  std::map<std::string, const Chunk*> by_id;
  for (const auto& c : chunks) by_id.emplace(c.chunk_id, &c);
  std::vector<Chunk> candidates;
  candidates.reserve(retrieved.items.size());
  for (const auto& item : retrieved.items) {
    auto it = by_id.find(item.chunk_id);
    if (it == by_id.end()) throw Error("not_found", "no text for chunk '" + item.chunk_id + "'");
    candidates.push_back(*it->second);
  }
  auto rescored = reranker->rerank(query, candidates);
  if (rescored.size() != candidates.size()) {
    throw Error("provider_error", "reranker changed the candidate set");
  }
  std::sort(rescored.begin(), rescored.end(), ranks_before);
  return {Stage::reranked, std::move(rescored)};
}

std::vector<std::string> take_top_k(const RankedList& ranked, std::size_t k) {
  if (k == 0) throw Error("invalid_argument", "k must be >= 1");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(k, ranked.items.size()); ++i) {
    out.push_back(ranked.items[i].chunk_id);
  }
  return out;
}

void save_index(const VectorIndex& index, const std::string& path) {
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io_error", "cannot write " + path);
    for (const auto& e : index.entries) {
      out << to_jsonl_line(json{{"chunk_id", e.chunk_id}, {"vector", e.vector}});
    }
  }
  std::ofstream manifest(path + ".manifest.json", std::ios::binary | std::ios::trunc);
  if (!manifest) throw Error("io_error", "cannot write " + path + ".manifest.json");
  manifest << json{{"chunk_store_digest", index.chunk_store_digest},
                   {"embedder", index.embedder},
                   {"dimension", index.dimension},
                   {"count", index.entries.size()}}
                  .dump(2)
           << "\n";
}

VectorIndex load_index(const std::string& path) {
  std::ifstream in(path + ".manifest.json");
  if (!in) throw Error("io_error", "missing index manifest for " + path);
  const auto m = json::parse(in);
  VectorIndex index;
  m.at("chunk_store_digest").get_to(index.chunk_store_digest);
  m.at("embedder").get_to(index.embedder);
  m.at("dimension").get_to(index.dimension);
  for (const auto& j : read_jsonl(path)) {
    index.entries.push_back({j.at("chunk_id").get<std::string>(), j.at("vector").get<Vector>()});
  }
  if (index.entries.size() != m.at("count").get<std::size_t>()) {
    throw Error("parse_error", path + ": entry count disagrees with manifest");
  }
  return index;
}

}  // namespace raglab::retrieval
