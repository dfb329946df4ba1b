#include "raglab/perturbation.hpp"

#include <filesystem>
#include <fstream>
#include <mutex>

#include "raglab/digest.hpp"
#include "raglab/pipeline.hpp"

namespace raglab::perturbation {

std::string perturbation_id(const PerturbationRequest& req) {
  std::string buf = req.config_id + "|" + req.question_id;
  for (const auto& id : req.context_chunk_ids) buf += "|" + id;
  return "pert-" + short_digest(buf);
}

PerturbationResult perturb_and_regenerate(const PerturbationRequest& req, const RunRecord& base,
                                          const Question& question, const ChunkResolver& resolve,
                                          providers::Generator& generator, providers::Judge& judge,
                                          const attribution::AttributionPolicy& policy) {
  if (base.config_id != req.config_id || base.question_id != req.question_id ||
      question.question_id != req.question_id) {
    throw Error("invalid_argument", "perturbation request does not match its base record");
  }
  if (req.context_chunk_ids.empty() && !req.empty_context) {
    throw Error("invalid_argument", "empty curated context must be requested explicitly");
  }

  PerturbationResult out;
  out.stored_id = perturbation_id(req);
  out.config_id = req.config_id;
  out.question_id = req.question_id;
  out.note = req.note;
  out.answer_orig = base.response.final_answer;
  out.raw_orig = base.response.raw;
  out.verdict_orig = base.judge_verdict.correct;

  std::vector<Chunk> context;
  for (const auto& id : req.context_chunk_ids) {
    auto resolved = resolve(id);
    if (!resolved) throw Error("unresolvable_chunk", "cannot resolve chunk '" + id + "'");
    out.context.push_back({id, resolved->source});
    context.push_back(std::move(resolved->chunk));
  }

  const auto prompt = pipeline::assemble_prompt(question, context);
  out.raw_pert = generator.generate({question.question_id, question.text, context, prompt});
  const auto parsed = pipeline::parse_response_lenient(out.raw_pert);
  out.answer_pert = parsed.final_answer;
  const auto verdict = judge.judge(providers::JudgeRequest{question.text, question.ground_truth,
                                                           parsed.final_answer, out.raw_pert, false});
  out.verdict_pert = verdict.correct;

  std::vector<std::string> ids = req.context_chunk_ids;
  const auto fractions = attribution::coverage_fractions(question, ids, ids, context);
  attribution::CascadeFacts facts;
  facts.verdict_correct = verdict.correct;
  facts.unanswerable = attribution::is_sentinel_ground_truth(question.ground_truth, policy);
  facts.answer_is_sentinel = attribution::is_sentinel_answer(parsed.final_answer, policy);
  facts.strict_parse_ok = parsed.strict_parse_ok;
  facts.f_range = fractions.range;
  facts.f_context = fractions.context;
  auto attributed = attribution::classify_curated(facts, policy, [&] {
    return judge.judge(providers::JudgeRequest{question.text, question.ground_truth,
                                               parsed.final_answer, out.raw_pert, true});
  });
  out.context_label = attributed.label;
  out.adjudication = std::move(attributed.adjudication);
  return out;
}

void to_json(json& j, const PerturbationRequest& v) {
  j = json{{"config_id", v.config_id},
           {"question_id", v.question_id},
           {"context_chunk_ids", v.context_chunk_ids},
           {"note", v.note},
           {"empty_context", v.empty_context}};
}

void from_json(const json& j, PerturbationRequest& v) {
  j.at("config_id").get_to(v.config_id);
  j.at("question_id").get_to(v.question_id);
  j.at("context_chunk_ids").get_to(v.context_chunk_ids);
  v.note = j.value("note", std::string{});
  v.empty_context = j.value("empty_context", false);
}

void to_json(json& j, const PerturbationResult& v) {
  json ctx = json::array();
  for (const auto& c : v.context) ctx.push_back({{"chunk_id", c.chunk_id}, {"source", c.source}});
  j = json{{"stored_id", v.stored_id},
           {"config_id", v.config_id},
           {"question_id", v.question_id},
           {"note", v.note},
           {"context", ctx},
           {"answer_orig", v.answer_orig},
           {"answer_pert", v.answer_pert},
           {"raw_orig", v.raw_orig},
           {"raw_pert", v.raw_pert},
           {"verdict_orig", v.verdict_orig},
           {"verdict_pert", v.verdict_pert},
           {"context_label", v.context_label},
           {"adjudication", v.adjudication ? json(*v.adjudication) : json(nullptr)}};
}

void from_json(const json& j, PerturbationResult& v) {
  j.at("stored_id").get_to(v.stored_id);
  j.at("config_id").get_to(v.config_id);
  j.at("question_id").get_to(v.question_id);
  v.note = j.value("note", std::string{});
  v.context.clear();
  for (const auto& c : j.at("context")) {
    v.context.push_back({c.at("chunk_id").get<std::string>(), c.at("source").get<std::string>()});
  }
  j.at("answer_orig").get_to(v.answer_orig);
  j.at("answer_pert").get_to(v.answer_pert);
  j.at("raw_orig").get_to(v.raw_orig);
  j.at("raw_pert").get_to(v.raw_pert);
  j.at("verdict_orig").get_to(v.verdict_orig);
  j.at("verdict_pert").get_to(v.verdict_pert);
  j.at("context_label").get_to(v.context_label);
  v.adjudication.reset();
  if (auto it = j.find("adjudication"); it != j.end() && !it->is_null()) {
    v.adjudication = it->get<JudgeVerdict>();
  }
}

namespace {
std::mutex log_mutex;
}

void append_to_log(const std::string& path, const PerturbationResult& result) {
  std::lock_guard lock(log_mutex);
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw Error("io_error", "cannot append to " + path);
  out << to_jsonl_line(json(result));
}

std::vector<PerturbationResult> read_log(const std::string& path) {
  std::vector<PerturbationResult> out;
  if (!std::filesystem::exists(path)) return out;
  for (const auto& j : read_jsonl(path)) out.push_back(j.get<PerturbationResult>());
  return out;
}

}  // namespace raglab::perturbation
