#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "copkit/core/io.hpp"
#include "copkit/gateway/request.hpp"

namespace copkit {

/// Emitted instead of a next step when the image shows the final step.
inline constexpr const char* kProcedureComplete = "__PROCEDURE_COMPLETE__";

struct Prediction {
  std::string next_step_text;
  std::optional<int> next_step_index;
  std::optional<int> current_step_index;
  std::string selected_procedure_id;
  /// 0-based candidate position of the selected procedure, when one was selected.
  std::optional<int> selected_position;

  bool operator==(const Prediction&) const = default;
};

/// One provider exchange inside a pipeline run.
struct PhaseRecord {
  std::string phase;
  ModelRequest request;
  std::string response_text;
  TokenUsage usage;
  bool cached = false;
  nlohmann::json parsed;

  bool operator==(const PhaseRecord&) const = default;
};

/// Append-only log of a run: provider exchanges, selected artifacts, warnings.
struct PhaseTrace {
  std::vector<PhaseRecord> records;
  nlohmann::json artifacts = nlohmann::json::object();
  std::vector<std::string> warnings;

  bool operator==(const PhaseTrace&) const = default;
};

struct RunError {
  std::string phase;
  std::string code;
  std::string message;

  bool operator==(const RunError&) const = default;
};

struct RunResult {
  std::string instance_id;
  std::string mode;
  std::string config_hash;
  Prediction prediction;
  PhaseTrace trace;
  std::optional<RunError> error;

  std::size_t request_count() const { return trace.records.size(); }

  TokenUsage total_usage() const {
    TokenUsage u;
    for (const auto& r : trace.records) u += r.usage;
    return u;
  }

  std::map<std::string, TokenUsage> usage_by_phase() const {
    std::map<std::string, TokenUsage> m;
    for (const auto& r : trace.records) m[r.phase] += r.usage;
    return m;
  }

  bool operator==(const RunResult&) const = default;
};

inline void to_json(nlohmann::json& j, const Prediction& p) {
  j = nlohmann::json{{"next_step_text", p.next_step_text}, {"selected_procedure_id", p.selected_procedure_id}};
  j["next_step_index"] = p.next_step_index ? nlohmann::json(*p.next_step_index) : nlohmann::json(nullptr);
  j["current_step_index"] = p.current_step_index ? nlohmann::json(*p.current_step_index) : nlohmann::json(nullptr);
  j["selected_position"] = p.selected_position ? nlohmann::json(*p.selected_position) : nlohmann::json(nullptr);
}

inline void from_json(const nlohmann::json& j, Prediction& p) {
  p.next_step_text = j.value("next_step_text", std::string{});
  p.selected_procedure_id = j.value("selected_procedure_id", std::string{});
  auto opt = [&](const char* key) -> std::optional<int> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<int>();
  };
  p.next_step_index = opt("next_step_index");
  p.current_step_index = opt("current_step_index");
  p.selected_position = opt("selected_position");
}

/// `cached` is not persisted so traces read the same with or without a cache.
inline void to_json(nlohmann::json& j, const PhaseRecord& r) {
  j = nlohmann::json{{"phase", r.phase},
                     {"request", r.request},
                     {"response", r.response_text},
                     {"usage", r.usage},
                     {"parsed", r.parsed}};
}

inline void from_json(const nlohmann::json& j, PhaseRecord& r) {
  r.phase = j.at("phase").get<std::string>();
  r.request = j.at("request").get<ModelRequest>();
  r.response_text = j.at("response").get<std::string>();
  r.usage = j.value("usage", TokenUsage{});
  r.cached = j.value("cached", false);
  r.parsed = j.value("parsed", nlohmann::json{});
}

inline void to_json(nlohmann::json& j, const PhaseTrace& t) {
  j = nlohmann::json{{"records", t.records}, {"artifacts", t.artifacts}, {"warnings", t.warnings}};
}

inline void from_json(const nlohmann::json& j, PhaseTrace& t) {
  t.records = j.value("records", std::vector<PhaseRecord>{});
  t.artifacts = j.value("artifacts", nlohmann::json::object());
  t.warnings = j.value("warnings", std::vector<std::string>{});
}

inline nlohmann::json tokens_json(const RunResult& r) {
  const TokenUsage total = r.total_usage();
  nlohmann::json per_phase = nlohmann::json::object();
  for (const auto& [phase, u] : r.usage_by_phase()) per_phase[phase] = u;
  return {{"input", total.input_tokens}, {"output", total.output_tokens}, {"total", total.total()},
          {"requests", r.request_count()}, {"per_phase", per_phase}};
}

inline std::string trace_hash(const PhaseTrace& trace) { return io::sha256_hex(nlohmann::json(trace).dump()); }

/// Results-file record; the trace itself is stored separately under `trace_ref`.
inline nlohmann::json result_record(const RunResult& r) {
  nlohmann::json j{{"instance_id", r.instance_id},
                   {"mode", r.mode},
                   {"config_hash", r.config_hash},
                   {"prediction", r.prediction},
                   {"trace_ref", trace_hash(r.trace)},
                   {"tokens", tokens_json(r)}};
  j["error"] = r.error ? nlohmann::json{{"phase", r.error->phase}, {"code", r.error->code}, {"message", r.error->message}}
                       : nlohmann::json(nullptr);
  return j;
}

/// Lightweight view of a results-file line, enough for evaluation and token reports.
struct ResultRecord {
  std::string instance_id;
  std::string mode;
  std::string config_hash;
  Prediction prediction;
  std::string trace_ref;
  TokenUsage usage;
  std::map<std::string, TokenUsage> per_phase;
  std::size_t requests = 0;
  std::optional<RunError> error;
};

inline ResultRecord to_record(const RunResult& r) {
  ResultRecord rec;
  rec.instance_id = r.instance_id;
  rec.mode = r.mode;
  rec.config_hash = r.config_hash;
  rec.prediction = r.prediction;
  rec.trace_ref = trace_hash(r.trace);
  rec.usage = r.total_usage();
  rec.per_phase = r.usage_by_phase();
  rec.requests = r.request_count();
  rec.error = r.error;
  return rec;
}

inline ResultRecord parse_result_record(const nlohmann::json& j) {
  ResultRecord rec;
  rec.instance_id = j.at("instance_id").get<std::string>();
  rec.mode = j.value("mode", std::string{});
  rec.config_hash = j.value("config_hash", std::string{});
  rec.prediction = j.value("prediction", Prediction{});
  rec.trace_ref = j.value("trace_ref", std::string{});
  const nlohmann::json t = j.value("tokens", nlohmann::json::object());
  rec.usage.input_tokens = t.value("input", std::int64_t{0});
  rec.usage.output_tokens = t.value("output", std::int64_t{0});
  rec.requests = t.value("requests", std::size_t{0});
  const nlohmann::json phases = t.value("per_phase", nlohmann::json::object());
  for (const auto& [phase, u] : phases.items()) {
    rec.per_phase[phase] = u.get<TokenUsage>();
  }
  if (j.contains("error") && !j["error"].is_null()) {
    rec.error = RunError{j["error"].value("phase", std::string{}), j["error"].value("code", std::string{}),
                         j["error"].value("message", std::string{})};
  }
  return rec;
}

inline std::vector<ResultRecord> load_results(const std::filesystem::path& path) {
  std::vector<ResultRecord> out;
  io::for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t line) {
    try {
      out.push_back(parse_result_record(j));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

}  // namespace copkit
