#include "raglab/corpus.hpp"

#include <algorithm>
#include <fstream>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "raglab/digest.hpp"
#include "raglab/text.hpp"

namespace raglab::corpus {

std::vector<std::size_t> codepoint_byte_offsets(std::string_view utf8) {
  std::vector<std::size_t> offsets;
  offsets.reserve(utf8.size() + 1);
  const auto* bytes = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto length = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  while (i < length) {
    offsets.push_back(static_cast<std::size_t>(i));
    UChar32 c = 0;
    U8_NEXT(bytes, i, length, c);
  }
  offsets.push_back(utf8.size());
  return offsets;
}

namespace {

bool is_space_at(std::string_view body, std::size_t byte_pos) {
  const auto* bytes = reinterpret_cast<const uint8_t*>(body.data());
  auto i = static_cast<int32_t>(byte_pos);
  UChar32 c = 0;
  U8_NEXT(bytes, i, static_cast<int32_t>(body.size()), c);
  return c >= 0 && u_isUWhiteSpace(c);
}

// Code point index for a byte offset that lies on a code point boundary.
std::int64_t to_codepoint(const std::vector<std::size_t>& offsets, std::size_t byte) {
  auto it = std::lower_bound(offsets.begin(), offsets.end(), byte);
  return static_cast<std::int64_t>(it - offsets.begin());
}

}  // namespace

std::vector<Chunk> chunk_document(const Document& doc, const ChunkingParams& params) {
  if (doc.body.empty()) throw Error("empty_document", "document '" + doc.doc_id + "' has an empty body");
  if (params.chunk_size <= 0 || params.chunk_overlap < 0 ||
      params.chunk_overlap >= params.chunk_size) {
    throw Error("invalid_argument", "chunking requires 0 <= overlap < size");
  }
  const auto offsets = codepoint_byte_offsets(doc.body);
  const auto n = static_cast<std::int64_t>(offsets.size()) - 1;
  const auto stride = params.chunk_size - params.chunk_overlap;

  std::vector<Chunk> chunks;
  for (std::int64_t start = 0;; start += stride) {
    std::int64_t end = std::min(start + params.chunk_size, n);
    if (params.snap_to_whitespace && end < n) {
      const auto limit = std::min(end + kSnapWindow, n);
      for (auto p = end; p < limit; ++p) {
        if (is_space_at(doc.body, offsets[static_cast<std::size_t>(p)])) {
          end = p;
          break;
        }
      }
    }
    const auto b = offsets[static_cast<std::size_t>(start)];
    const auto e = offsets[static_cast<std::size_t>(end)];
    chunks.push_back(Chunk{make_chunk_id(doc.doc_id, start), doc.doc_id, doc.body.substr(b, e - b),
                           start, end});
    if (end >= n) break;
  }
  return chunks;
}

std::vector<Chunk> chunk_corpus(std::span<const Document> docs, const ChunkingParams& params) {
  std::vector<Chunk> out;
  for (const auto& d : docs) {
    auto cs = chunk_document(d, params);
    out.insert(out.end(), std::make_move_iterator(cs.begin()), std::make_move_iterator(cs.end()));
  }
  return out;
}

namespace {

std::optional<std::pair<std::int64_t, std::int64_t>> locate(
    const std::vector<text::Token>& needle, std::string_view haystack_text,
    const std::vector<text::Token>& haystack) {
  if (needle.empty() || needle.size() > haystack.size()) return std::nullopt;
  auto eq = [](const text::Token& a, const text::Token& b) { return a.folded == b.folded; };
  auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end(), eq);
  if (it == haystack.end()) return std::nullopt;
  const auto first = it->begin;
  const auto last = (it + static_cast<std::ptrdiff_t>(needle.size()) - 1)->end;
  const auto offsets = codepoint_byte_offsets(haystack_text);
  return std::pair{to_codepoint(offsets, first), to_codepoint(offsets, last)};
}

}  // namespace

std::optional<std::pair<std::int64_t, std::int64_t>> find_evidence_in_chunk(
    const EvidenceRef& evidence, const Chunk& chunk) {
  if (!evidence.doc_id.empty() && evidence.doc_id != chunk.doc_id) return std::nullopt;
  return locate(text::tokenize(evidence.sentence), chunk.text, text::tokenize(chunk.text));
}

std::vector<std::pair<std::int64_t, std::int64_t>> find_sentence_spans(std::string_view sentence,
                                                                       std::string_view body) {
  std::vector<std::pair<std::int64_t, std::int64_t>> spans;
  const auto needle = text::tokenize(sentence);
  const auto hay = text::tokenize(body);
  if (needle.empty()) return spans;
  const auto offsets = codepoint_byte_offsets(body);
  auto eq = [](const text::Token& a, const text::Token& b) { return a.folded == b.folded; };
  auto from = hay.begin();
  while (true) {
    auto it = std::search(from, hay.end(), needle.begin(), needle.end(), eq);
    if (it == hay.end()) break;
    auto last = it + static_cast<std::ptrdiff_t>(needle.size()) - 1;
    spans.emplace_back(to_codepoint(offsets, it->begin), to_codepoint(offsets, last->end));
    from = last + 1;
  }
  return spans;
}

std::set<std::string> relevant_chunks(const Question& question, std::span<const Chunk> chunks) {
  std::set<std::string> out;
  for (const auto& c : chunks) {
    for (const auto& e : question.evidence) {
      if (find_evidence_in_chunk(e, c)) {
        out.insert(c.chunk_id);
        break;
      }
    }
  }
  return out;
}

EvidenceLocator::EvidenceLocator(std::vector<Chunk> chunks) : chunks_(std::move(chunks)) {
  tokens_.reserve(chunks_.size());
  for (std::size_t i = 0; i < chunks_.size(); ++i) {
    by_id_.emplace(chunks_[i].chunk_id, i);
    tokens_.push_back(text::normalized_tokens(chunks_[i].text));
  }
}

const Chunk* EvidenceLocator::find(const std::string& chunk_id) const {
  auto it = by_id_.find(chunk_id);
  return it == by_id_.end() ? nullptr : &chunks_[it->second];
}

const std::vector<std::set<std::string>>& EvidenceLocator::evidence_chunks(const Question& q) const {
  {
    std::lock_guard lock(memo_mutex_);
    if (auto it = memo_.find(q.question_id); it != memo_.end()) return it->second;
  }
  std::vector<std::set<std::string>> found(q.evidence.size());
  for (std::size_t e = 0; e < q.evidence.size(); ++e) {
    const auto needle = text::normalized_tokens(q.evidence[e].sentence);
    for (std::size_t c = 0; c < chunks_.size(); ++c) {
      if (!q.evidence[e].doc_id.empty() && q.evidence[e].doc_id != chunks_[c].doc_id) continue;
      if (text::find_token_sequence(tokens_[c], needle)) found[e].insert(chunks_[c].chunk_id);
    }
  }
  std::lock_guard lock(memo_mutex_);
  // std::map never invalidates references on insert.
  return memo_.emplace(q.question_id, std::move(found)).first->second;
}

std::set<std::string> EvidenceLocator::relevant_chunks(const Question& q) const {
  std::set<std::string> out;
  for (const auto& s : evidence_chunks(q)) out.insert(s.begin(), s.end());
  return out;
}

std::int64_t EvidenceLocator::evidence_found_in(const Question& q,
                                                std::span<const std::string> ids) const {
  const std::set<std::string> wanted(ids.begin(), ids.end());
  std::int64_t found = 0;
  for (const auto& holders : evidence_chunks(q)) {
    if (std::any_of(holders.begin(), holders.end(),
                    [&](const std::string& id) { return wanted.contains(id); })) {
      ++found;
    }
  }
  return found;
}

std::string corpus_digest(std::span<const Document> docs) {
  std::string buf;
  for (const auto& d : docs) {
    buf += d.doc_id;
    buf.push_back('\0');
    buf += d.body;
    buf.push_back('\0');
  }
  return short_digest(buf);
}

std::string chunk_store_digest(const std::string& corpus_digest, const ChunkingParams& params) {
  return short_digest(corpus_digest + "|size=" + std::to_string(params.chunk_size) +
                      "|overlap=" + std::to_string(params.chunk_overlap) +
                      "|snap=" + (params.snap_to_whitespace ? "1" : "0"));
}

void write_chunk_store(const std::string& path, std::span<const Chunk> chunks) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io_error", "cannot write " + path);
  for (const auto& c : chunks) out << to_jsonl_line(json(c));
}

std::vector<Chunk> read_chunk_store(const std::string& path) {
  std::vector<Chunk> out;
  for (const auto& j : read_jsonl(path)) out.push_back(j.get<Chunk>());
  return out;
}

}  // namespace raglab::corpus
