#include <gtest/gtest.h>

#include "raglab/digest.hpp"
#include "raglab/types.hpp"
#include "support.hpp"

using namespace raglab;
using raglab::testing::TempDir;
using raglab::testing::write_file;

namespace {

RagConfig sample_config() {
  return RagConfig{"emb-a", std::string("rr-a"), "gen-a", 400, 40, 20, 5};
}

}  // namespace

TEST(Config, IdIsDigestOfCanonicalString) {
  const auto c = sample_config();
  const std::string expected_canon =
      "embedding_model=emb-a\x1frerank_model=rr-a\x1fresponse_model=gen-a\x1f"
      "chunk_size=400\x1f"
      "chunk_overlap=40\x1fretrieval_depth=20\x1ftop_k=5";
  EXPECT_EQ(canonical_config_string(c), expected_canon);
  EXPECT_EQ(canonical_config_id(c), "cfg-" + sha256_hex(expected_canon).substr(0, 16));
}

TEST(Config, NoRerankerRendersAsNone) {
  auto c = sample_config();
  c.rerank_model.reset();
  EXPECT_NE(canonical_config_string(c).find("rerank_model=none"), std::string::npos);
  EXPECT_NE(canonical_config_id(c), canonical_config_id(sample_config()));
}

TEST(Config, EveryFieldChangesTheId) {
  const auto base = canonical_config_id(sample_config());
  std::vector<RagConfig> variants(7, sample_config());
  variants[0].embedding_model = "emb-b";
  variants[1].rerank_model = "rr-b";
  variants[2].response_model = "gen-b";
  variants[3].chunk_size = 401;
  variants[4].chunk_overlap = 41;
  variants[5].retrieval_depth = 21;
  variants[6].top_k = 6;
  std::set<std::string> ids{base};
  for (const auto& v : variants) ids.insert(canonical_config_id(v));
  EXPECT_EQ(ids.size(), 8u);
}

TEST(Config, Violations) {
  EXPECT_TRUE(config_violations(sample_config()).empty());
  auto c = sample_config();
  c.chunk_overlap = 400;
  c.top_k = 30;
  EXPECT_EQ(config_violations(c).size(), 2u);
  c = sample_config();
  c.chunk_size = 0;
  EXPECT_FALSE(config_violations(c).empty());
  c = sample_config();
  c.top_k = 0;
  EXPECT_FALSE(config_violations(c).empty());
}

TEST(Config, JsonRoundTrip) {
  auto c = sample_config();
  EXPECT_EQ(json(c).get<RagConfig>(), c);
  c.rerank_model.reset();
  const json j = c;
  EXPECT_TRUE(j.at("rerank_model").is_null());
  EXPECT_EQ(j.get<RagConfig>(), c);
}

TEST(ConfigSpace, ValidationListsEveryViolation) {
  ConfigSpace s{{"e"}, {"none"}, {"g"}, {100, 200}, {150}, {5}, {3, 10}};
  const auto v = validate_config_space(s);
  // overlap 150 >= size 100 once; top_k 10 > depth 5 once.
  EXPECT_EQ(v.size(), 2u);
  s.chunk_overlap = {50};
  s.top_k = {3};
  EXPECT_TRUE(validate_config_space(s).empty());
  s.top_k = {};
  EXPECT_FALSE(validate_config_space(s).empty());
}

TEST(Labels, CodesRoundTrip) {
  for (auto l : kAllLabels) EXPECT_EQ(parse_label(label_code(l)), l);
  EXPECT_EQ(label_code(OutcomeLabel::FP3_NotInContext), "FP3");
  EXPECT_EQ(label_display(OutcomeLabel::FP2_MissedTopRanked), "FP2: Missed Top Ranked");
  EXPECT_THROW(parse_label("FP9"), Error);
}

TEST(Questions, SentinelDetection) {
  EXPECT_TRUE(is_unanswerable("Insufficient information"));
  EXPECT_TRUE(is_unanswerable("  INSUFFICIENT INFORMATION "));
  EXPECT_FALSE(is_unanswerable("Paris"));
}

TEST(RunRecordJson, RoundTripPreservesOptionalFields) {
  RunRecord r;
  r.config_id = "cfg-1";
  r.question_id = "q1";
  r.retrieved = {{"d1#0", 0.5}, {"d2#0", 0.25}};
  r.reranked = std::vector<ScoredChunk>{{"d2#0", 0.9}};
  r.context_chunk_ids = {"d2#0"};
  r.relevant_chunk_ids = {"d1#0"};
  r.response = {{"s1"}, "ans", true, "{raw}"};
  r.judge_verdict = {false, std::nullopt, "no"};
  r.adjudication = JudgeVerdict{false, JudgeCategory::FP7, "partial"};
  r.outcome = OutcomeLabel::FP7_Incomplete;
  r.coverage = {2, 2, 1, false};
  EXPECT_EQ(json(r).get<RunRecord>(), r);
  r.reranked.reset();
  r.adjudication.reset();
  r.error = "provider_error: boom";
  EXPECT_EQ(json(r).get<RunRecord>(), r);
}

TEST(Loaders, CorpusReportsLineNumbers) {
  TempDir dir;
  write_file(dir / "c.jsonl", "{\"doc_id\":\"a\",\"body\":\"x\"}\n{broken\n");
  try {
    load_corpus((dir / "c.jsonl").string());
    FAIL() << "expected parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "parse_error");
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
}

TEST(Loaders, RejectsEmptyAndDuplicate) {
  TempDir dir;
  write_file(dir / "empty.jsonl", "");
  EXPECT_THROW(load_corpus((dir / "empty.jsonl").string()), Error);
  write_file(dir / "dup.jsonl",
             "{\"doc_id\":\"a\",\"body\":\"x\"}\n{\"doc_id\":\"a\",\"body\":\"y\"}\n");
  EXPECT_THROW(load_corpus((dir / "dup.jsonl").string()), Error);
  write_file(dir / "q.jsonl",
             "{\"question_id\":\"q\",\"text\":\"t\",\"ground_truth\":\"g\",\"evidence\":[]}\n");
  EXPECT_THROW(load_questions((dir / "q.jsonl").string()), Error);
  write_file(dir / "q2.jsonl",
             "{\"question_id\":\"q\",\"text\":\"t\",\"ground_truth\":\"Insufficient "
             "information\",\"evidence\":[]}\n");
  EXPECT_EQ(load_questions((dir / "q2.jsonl").string()).size(), 1u);
}

TEST(Loaders, DeskFixtureLoads) {
  const auto docs = load_corpus((raglab::testing::desk_dir() / "corpus.jsonl").string());
  const auto qs = load_questions((raglab::testing::desk_dir() / "questions.jsonl").string());
  EXPECT_EQ(docs.size(), 20u);
  EXPECT_EQ(qs.size(), 30u);
}
