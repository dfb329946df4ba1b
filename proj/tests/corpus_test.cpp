#include <gtest/gtest.h>

#include <set>

#include "raglab/corpus.hpp"
#include "raglab/text.hpp"
#include "support.hpp"

using namespace raglab;
using namespace raglab::corpus;

namespace {

// Code point view of a UTF-8 string, for checking offsets independently.
std::vector<std::string> code_points(const std::string& s) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    const std::size_t len = c < 0x80 ? 1 : c < 0xE0 ? 2 : c < 0xF0 ? 3 : 4;
    out.push_back(s.substr(i, len));
    i += len;
  }
  return out;
}

std::string join(const std::vector<std::string>& cps, std::int64_t b, std::int64_t e) {
  std::string out;
  for (auto i = b; i < e; ++i) out += cps[static_cast<std::size_t>(i)];
  return out;
}

}  // namespace

TEST(Chunking, SlidingWindowOffsets) {
  Document d{"doc", "", std::string(25, 'a'), {}};
  const auto chunks = chunk_document(d, {10, 3, false});
  ASSERT_EQ(chunks.size(), 4u);
  const std::vector<std::int64_t> starts{0, 7, 14, 21};
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    EXPECT_EQ(chunks[i].char_start, starts[i]);
    EXPECT_EQ(chunks[i].chunk_id, "doc:" + std::to_string(starts[i]));
  }
  EXPECT_EQ(chunks.back().char_end, 25);
  EXPECT_EQ(chunks[0].char_end, 10);
}

TEST(Chunking, ShortDocumentIsOneChunk) {
  Document d{"d", "", "tiny", {}};
  const auto chunks = chunk_document(d, {100, 10, false});
  ASSERT_EQ(chunks.size(), 1u);
  EXPECT_EQ(chunks[0].text, "tiny");
}

TEST(Chunking, Errors) {
  Document empty{"d", "", "", {}};
  try {
    chunk_document(empty, {10, 2, false});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "empty_document");
  }
  Document d{"d", "", "abc", {}};
  EXPECT_THROW(chunk_document(d, {10, 10, false}), Error);
  EXPECT_THROW(chunk_document(d, {0, 0, false}), Error);
}

TEST(Chunking, CountsCodePointsNotBytes) {
  Document d{"d", "", "äöüßéèêëïî", {}};  // 10 code points, 20 bytes
  const auto chunks = chunk_document(d, {4, 0, false});
  ASSERT_EQ(chunks.size(), 3u);
  EXPECT_EQ(chunks[0].text, "äöüß");
  EXPECT_EQ(chunks[1].text, "éèêë");
  EXPECT_EQ(chunks[2].text, "ïî");
  EXPECT_EQ(chunks[2].char_end, 10);
}

TEST(Chunking, SnapExtendsToWhitespace) {
  Document d{"d", "", "abcdefgh ijk lmnop", {}};
  const auto chunks = chunk_document(d, {5, 0, true});
  ASSERT_FALSE(chunks.empty());
  EXPECT_EQ(chunks[0].text, "abcdefgh");
  EXPECT_EQ(chunks[0].char_end, 8);
  EXPECT_EQ(chunks[1].char_start, 5);
}

TEST(ChunkingProperty, ChunksReproduceTheBody) {
  raglab::testing::WordGen g(7);
  const std::vector<std::string> alphabet{"a", "b", " ", "é", "中", "😀", "\n", "z"};
  for (int iter = 0; iter < 300; ++iter) {
    std::string body;
    const auto len = 1 + g.pick(120);
    for (std::size_t i = 0; i < len; ++i) body += alphabet[g.pick(alphabet.size())];
    const auto size = static_cast<std::int64_t>(1 + g.pick(30));
    const auto overlap = static_cast<std::int64_t>(g.pick(static_cast<std::size_t>(size)));
    const bool snap = g.coin();
    const auto cps = code_points(body);
    const auto n = static_cast<std::int64_t>(cps.size());

    const auto chunks = chunk_document({"d", "", body, {}}, {size, overlap, snap});
    ASSERT_FALSE(chunks.empty());
    EXPECT_EQ(chunks.front().char_start, 0);
    EXPECT_EQ(chunks.back().char_end, n);
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      const auto& c = chunks[i];
      EXPECT_EQ(c.text, join(cps, c.char_start, c.char_end));
      EXPECT_GE(c.char_end - c.char_start, 1);
      EXPECT_LE(c.char_end - c.char_start, size + (snap ? kSnapWindow : 0));
      if (i > 0) {
        EXPECT_EQ(c.char_start - chunks[i - 1].char_start, size - overlap);
        EXPECT_LE(c.char_start, chunks[i - 1].char_end);  // no gaps
      }
    }
  }
}

TEST(Evidence, FoundAcrossCaseAndPunctuation) {
  Chunk c{"d:0", "d", "Intro. The Varn Point lighthouse, designed by Tomas Leid!", 0, 57};
  EvidenceRef e{"d", "the varn point LIGHTHOUSE designed by Tomas Leid"};
  auto span = find_evidence_in_chunk(e, c);
  ASSERT_TRUE(span.has_value());
  EXPECT_EQ(span->first, 7);
  EXPECT_EQ(span->second, 56);
}

TEST(Evidence, DocIdRestrictsMatches) {
  Chunk c{"x:0", "x", "alpha beta gamma", 0, 16};
  EXPECT_FALSE(find_evidence_in_chunk({"y", "alpha beta"}, c).has_value());
  EXPECT_TRUE(find_evidence_in_chunk({"", "alpha beta"}, c).has_value());
  EXPECT_FALSE(find_evidence_in_chunk({"x", "beta alpha"}, c).has_value());
}

TEST(Evidence, SpansAreCodePointOffsets) {
  Chunk c{"d:0", "d", "ééé target word", 0, 15};
  auto span = find_evidence_in_chunk({"d", "target word"}, c);
  ASSERT_TRUE(span.has_value());
  EXPECT_EQ(*span, (std::pair<std::int64_t, std::int64_t>{4, 15}));
}

TEST(Evidence, LocatorMatchesDirectSearch) {
  const auto docs = load_corpus((raglab::testing::desk_dir() / "corpus.jsonl").string());
  const auto qs = load_questions((raglab::testing::desk_dir() / "questions.jsonl").string());
  auto chunks = chunk_corpus(docs, {160, 40, false});
  EvidenceLocator loc(chunks);
  for (const auto& q : qs) {
    EXPECT_EQ(loc.relevant_chunks(q), relevant_chunks(q, chunks)) << q.question_id;
    const auto& per = loc.evidence_chunks(q);
    ASSERT_EQ(per.size(), q.evidence.size());
    for (std::size_t i = 0; i < per.size(); ++i) {
      // A sentence cut by a chunk boundary may be found nowhere.
      std::set<std::string> direct;
      for (const auto& c : chunks)
        if (find_evidence_in_chunk(q.evidence[i], c)) direct.insert(c.chunk_id);
      EXPECT_EQ(std::set<std::string>(per[i].begin(), per[i].end()), direct)
          << q.question_id << " evidence " << i;
    }
  }
}

TEST(Evidence, FoundInCountsEachSentenceOnce) {
  std::vector<Chunk> chunks{{"d:0", "d", "one two three", 0, 13}, {"d:5", "d", "one two four", 5, 17}};
  EvidenceLocator loc(chunks);
  Question q{"q", "t", "g", {{"d", "one two"}, {"d", "four"}, {"d", "absent"}}};
  std::vector<std::string> both{"d:0", "d:5"};
  std::vector<std::string> first{"d:0"};
  EXPECT_EQ(loc.evidence_found_in(q, both), 2);
  EXPECT_EQ(loc.evidence_found_in(q, first), 1);
}

TEST(ChunkStore, RoundTripAndDigests) {
  raglab::testing::TempDir dir;
  std::vector<Chunk> chunks{{"d:0", "d", "héllo\nworld", 0, 11}};
  const auto path = (dir / "store.jsonl").string();
  write_chunk_store(path, chunks);
  EXPECT_EQ(read_chunk_store(path), chunks);

  std::vector<Document> docs{{"d", "", "body", {}}};
  const auto cd = corpus_digest(docs);
  EXPECT_NE(chunk_store_digest(cd, {100, 10, false}), chunk_store_digest(cd, {100, 20, false}));
  EXPECT_NE(chunk_store_digest(cd, {100, 10, false}), chunk_store_digest(cd, {100, 10, true}));
  docs[0].body = "other";
  EXPECT_NE(corpus_digest(docs), cd);
}
