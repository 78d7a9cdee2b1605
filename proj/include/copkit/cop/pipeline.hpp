#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "copkit/core/parse.hpp"
#include "copkit/core/step_label.hpp"
#include "copkit/cop/result.hpp"
#include "copkit/cop/templates.hpp"
#include "copkit/forge/instance.hpp"
#include "copkit/gateway/provider.hpp"

namespace copkit {

enum class RetrievalMode { kSingleShot, kPerCandidateScore };

inline std::string to_string(RetrievalMode m) {
  return m == RetrievalMode::kSingleShot ? "single_shot" : "per_candidate_score";
}

inline RetrievalMode parse_retrieval_mode(const std::string& s) {
  if (s == "single_shot") return RetrievalMode::kSingleShot;
  if (s == "per_candidate_score") return RetrievalMode::kPerCandidateScore;
  throw Error(ErrorCode::kConfigError, "retrieval_mode must be single_shot or per_candidate_score, got '" + s + "'");
}

/// Minimum token F1 between an original step and the decomposed steps that replace it.
inline constexpr double kDecompositionMinF1 = 0.5;
/// Each original step must keep this share of its tokens across its children.
inline constexpr double kDecompositionMinRecall = 0.6;

struct PipelineConfig {
  std::set<int> phases{1, 2, 3};
  RetrievalMode retrieval_mode = RetrievalMode::kSingleShot;
  int score_scale_max = 10;
  TemplateSet templates = TemplateSet::defaults();
  Decoding decoding;
  /// Baseline only: chain-of-thought phrasing instead of zero-shot.
  bool chain_of_thought = false;

  void validate() const {
    if (phases.empty()) throw Error(ErrorCode::kConfigError, "phase set is empty");
    for (int p : phases) {
      if (p < 1 || p > 3) throw Error(ErrorCode::kConfigError, "unknown phase " + std::to_string(p));
    }
    if (score_scale_max < 1) throw Error(ErrorCode::kConfigError, "score_scale_max must be >= 1");
  }

  bool has(int phase) const { return phases.count(phase) != 0; }

  std::string phases_label() const {
    std::string s;
    for (int p : phases) s += (s.empty() ? "" : ",") + std::to_string(p);
    return s;
  }

  std::string hash() const {
    nlohmann::json j{{"phases", phases},
                     {"retrieval_mode", to_string(retrieval_mode)},
                     {"score_scale_max", score_scale_max},
                     {"templates", templates.hash()},
                     {"decoding", decoding},
                     {"chain_of_thought", chain_of_thought}};
    return io::sha256_hex(j.dump());
  }
};

inline std::set<int> parse_phase_set(const std::string& s) {
  std::set<int> out;
  for (long v : integers_in(s)) out.insert(static_cast<int>(v));
  if (out.empty()) throw Error(ErrorCode::kConfigError, "cannot parse phase set '" + s + "'");
  return out;
}

/// Sends requests and appends every exchange to a trace.
class TraceRecorder {
 public:
  TraceRecorder(Provider& provider, PhaseTrace& trace, Decoding decoding)
      : provider_(provider), trace_(trace), decoding_(decoding) {}

  PhaseRecord& call(const std::string& phase, std::string instruction, std::vector<std::string> images) {
    ModelRequest request{std::move(instruction), std::move(images), decoding_};
    ModelResponse response = provider_.complete(request);
    PhaseRecord rec;
    rec.phase = phase;
    rec.request = std::move(request);
    rec.response_text = std::move(response.text);
    rec.usage = response.usage;
    rec.cached = response.cached;
    trace_.records.push_back(std::move(rec));
    return trace_.records.back();
  }

  PhaseTrace& trace() { return trace_; }

 private:
  Provider& provider_;
  PhaseTrace& trace_;
  Decoding decoding_;
};

struct RetrievalResult {
  int position = 0;
  /// Per-candidate scores; empty in single-shot mode.
  std::vector<std::optional<int>> scores;
};

namespace detail {

inline std::vector<std::string> image_list(const VisualState& v) { return {v.image_id}; }

inline RetrievalResult retrieve_by_scores(const VisualState& visual, const std::vector<Procedure>& candidates,
                                          TraceRecorder& rec, const PipelineConfig& config) {
  RetrievalResult result;
  std::optional<int> best;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const std::string prompt = config.templates.render(
        template_name::kPhase1Score,
        {{"STEPS", render_steps(candidates[k])}, {"SCALE_MAX", std::to_string(config.score_scale_max)}});
    PhaseRecord& r = rec.call("phase1", prompt, image_list(visual));
    std::optional<int> score = parse_score(r.response_text, config.score_scale_max);
    r.parsed = {{"candidate", k + 1}, {"score", score ? nlohmann::json(*score) : nlohmann::json(nullptr)}};
    result.scores.push_back(score);
    if (score && (!best || *score > *result.scores[static_cast<std::size_t>(*best)])) best = static_cast<int>(k);
  }
  if (!best) throw Error(ErrorCode::kUnparseableSelection, "no candidate received a parseable score");
  result.position = *best;
  return result;
}

}  // namespace detail

/// Phase 1: pick the candidate procedure the image belongs to.
inline RetrievalResult phase1_retrieve(const VisualState& visual, const std::vector<Procedure>& candidates,
                                       TraceRecorder& rec, const PipelineConfig& config) {
  if (candidates.empty()) throw Error(ErrorCode::kInvalidArgument, "phase 1 needs at least one candidate");
  RetrievalResult result;
  if (config.retrieval_mode == RetrievalMode::kPerCandidateScore) {
    result = detail::retrieve_by_scores(visual, candidates, rec, config);
  } else {
    const std::string prompt =
        config.templates.render(template_name::kPhase1Select, {{"STEPS", render_candidates(candidates)}});
    PhaseRecord& r = rec.call("phase1", prompt, detail::image_list(visual));
    std::optional<long> id = last_integer(r.response_text);
    if (id && *id >= 1 && *id <= static_cast<long>(candidates.size())) {
      r.parsed = {{"instruction_id", *id}};
      result.position = static_cast<int>(*id - 1);
    } else {
      r.parsed = {{"instruction_id", nullptr}};
      rec.trace().warnings.push_back("phase1: unparseable selection '" + r.response_text +
                                     "'; falling back to per-candidate scoring");
      result = detail::retrieve_by_scores(visual, candidates, rec, config);
    }
  }
  nlohmann::json scores = nlohmann::json::array();
  for (const auto& s : result.scores) scores.push_back(s ? nlohmann::json(*s) : nlohmann::json(nullptr));
  rec.trace().artifacts["selected_position"] = result.position;
  rec.trace().artifacts["selected_procedure"] = candidates[static_cast<std::size_t>(result.position)].id;
  if (!result.scores.empty()) rec.trace().artifacts["scores"] = scores;
  return result;
}

struct Decomposition {
  Procedure original;
  Procedure working;
  /// map[i] = 1-based original step of working step i+1.
  std::vector<int> map;
  bool accepted = false;
};

/// Monotone grouping of decomposed steps onto original steps, each group
/// covering its original with token F1 >= kDecompositionMinF1 and recall >=
/// kDecompositionMinRecall. nullopt when no such grouping exists (reordered,
/// dropped or invented content).
inline std::optional<std::vector<int>> align_decomposition(const std::vector<std::string>& original,
                                                           const std::vector<std::string>& decomposed) {
  const std::size_t L = original.size();
  const std::size_t M = decomposed.size();
  if (M < L || L == 0) return std::nullopt;
  std::vector<std::vector<std::string>> orig_tokens, out_tokens;
  for (const auto& s : original) orig_tokens.push_back(text::word_tokens(s));
  for (const auto& s : decomposed) out_tokens.push_back(text::word_tokens(s));

  constexpr double kNone = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best(L + 1, std::vector<double>(M + 1, kNone));
  std::vector<std::vector<std::size_t>> from(L + 1, std::vector<std::size_t>(M + 1, 0));
  best[0][0] = 0.0;
  for (std::size_t i = 1; i <= L; ++i) {
    for (std::size_t j = i; j <= M - (L - i); ++j) {
      std::vector<std::string> group;
      for (std::size_t s = j; s-- > i - 1;) {
        // group = decomposed[s .. j-1]
        group.insert(group.begin(), out_tokens[s].begin(), out_tokens[s].end());
        if (best[i - 1][s] == kNone) continue;
        const double f1 = token_overlap_f1(group, orig_tokens[i - 1]);
        if (f1 < kDecompositionMinF1 || token_recall(group, orig_tokens[i - 1]) < kDecompositionMinRecall) continue;
        if (best[i - 1][s] + f1 > best[i][j]) {
          best[i][j] = best[i - 1][s] + f1;
          from[i][j] = s;
        }
      }
    }
  }
  if (best[L][M] == kNone) return std::nullopt;
  std::vector<int> map(M, 0);
  std::size_t j = M;
  for (std::size_t i = L; i >= 1; --i) {
    const std::size_t s = from[i][j];
    for (std::size_t k = s; k < j; ++k) map[k] = static_cast<int>(i);
    j = s;
  }
  return map;
}

/// Working procedure from accepted decomposed texts. A split step whose child
/// count equals its atomic coverage assigns atoms to children one-to-one.
inline Procedure assemble_decomposition(const Procedure& original, const std::vector<std::string>& texts,
                                        const std::vector<int>& map) {
  Procedure out = original;
  out.steps.clear();
  for (std::size_t k = 0; k < texts.size(); ++k) {
    const Step& parent = original.steps[static_cast<std::size_t>(map[k] - 1)];
    const auto children = static_cast<std::size_t>(std::count(map.begin(), map.end(), map[k]));
    const std::size_t ordinal = k - static_cast<std::size_t>(std::find(map.begin(), map.end(), map[k]) - map.begin());
    const std::vector<int> atoms = source_of(parent);
    Step s;
    s.index = static_cast<int>(k + 1);
    s.text = texts[k];
    if (children == 1) {
      s.image_refs = parent.image_refs;
      s.atomic = parent.atomic;
      s.source = atoms;
    } else if (children == atoms.size()) {
      s.source = {atoms[ordinal]};
      s.atomic = true;
    } else {
      s.source = atoms;
      s.atomic = false;
    }
    out.steps.push_back(std::move(s));
  }
  return out;
}

inline Decomposition identity_decomposition(const Procedure& procedure) {
  Decomposition d;
  d.original = procedure;
  d.working = procedure;
  for (std::size_t i = 0; i < procedure.steps.size(); ++i) d.map.push_back(static_cast<int>(i + 1));
  return d;
}

/// Phase 2: split composite steps. Invalid output leaves the procedure unchanged.
inline Decomposition phase2_decompose(const Procedure& procedure, TraceRecorder& rec, const PipelineConfig& config) {
  if (procedure.steps.empty()) throw Error(ErrorCode::kInvalidArgument, "phase 2 needs a non-empty procedure");
  Decomposition d = identity_decomposition(procedure);

  const std::string prompt =
      config.templates.render(template_name::kPhase2Decompose, {{"STEPS", render_steps(procedure)}});
  PhaseRecord& r = rec.call("phase2", prompt, {});
  const std::vector<StepLabel> labels = parse_step_list(r.response_text);

  std::string reason;
  std::vector<std::string> texts;
  for (std::size_t i = 0; i < labels.size() && reason.empty(); ++i) {
    if (labels[i].index != static_cast<int>(i + 1)) reason = "step labels are not 1..M in order";
    if (labels[i].content.empty()) reason = "empty step content";
    texts.push_back(labels[i].content);
  }
  if (labels.empty()) reason = "no step_<n> lines";
  std::vector<std::string> originals;
  for (const Step& s : procedure.steps) originals.push_back(s.text);
  std::optional<std::vector<int>> map;
  if (reason.empty()) {
    if (texts.size() < originals.size()) {
      reason = "fewer steps than the input";
    } else {
      map = align_decomposition(originals, texts);
      if (!map) reason = "steps are reordered or content was dropped";
    }
  }

  if (!reason.empty()) {
    rec.trace().warnings.push_back("phase2: decomposition rejected (" + reason + "); using original procedure");
    r.parsed = {{"accepted", false}, {"reason", reason}};
  } else {
    d.working = assemble_decomposition(procedure, texts, *map);
    d.map = *map;
    d.accepted = true;
    r.parsed = {{"accepted", true}, {"map", d.map}};
  }
  nlohmann::json steps = nlohmann::json::array();
  for (const Step& s : d.working.steps) steps.push_back(s.text);
  rec.trace().artifacts["decomposed_steps"] = steps;
  rec.trace().artifacts["decomposition_map"] = d.map;
  return d;
}

/// Successor of a 1-based current step in the working sequence, or the
/// completion sentinel. The successor is lifted through the map: an unsplit
/// original step is reported with its original text, a split one with its
/// first decomposed child.
inline Prediction successor_prediction(const Decomposition& d, int current) {
  const int m = static_cast<int>(d.working.steps.size());
  if (current < 1 || current > m) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "current step " + std::to_string(current) + " outside 1.." + std::to_string(m));
  }
  Prediction p;
  p.current_step_index = current;
  p.selected_procedure_id = d.working.id;
  if (current == m) {
    p.next_step_text = kProcedureComplete;
    return p;
  }
  p.next_step_index = current + 1;
  const auto c = static_cast<std::size_t>(current);
  p.next_step_text = d.working.steps[c].text;
  if (d.map.size() == d.working.steps.size()) {
    const int parent = d.map[c];
    const bool unsplit = std::count(d.map.begin(), d.map.end(), parent) == 1;
    if (unsplit && parent >= 1 && static_cast<std::size_t>(parent) <= d.original.steps.size()) {
      p.next_step_text = d.original.steps[static_cast<std::size_t>(parent - 1)].text;
    }
  }
  return p;
}

inline Prediction successor_prediction(const Procedure& working, int current) {
  return successor_prediction(identity_decomposition(working), current);
}

/// Phase 3: identify the current step, then resolve the next step locally.
inline Prediction phase3_predict(const VisualState& visual, const Decomposition& d, TraceRecorder& rec,
                                 const PipelineConfig& config) {
  const Procedure& working = d.working;
  if (working.steps.size() < 2) throw Error(ErrorCode::kInvalidArgument, "phase 3 needs at least 2 steps");
  const std::string prompt =
      config.templates.render(template_name::kPhase3Identify, {{"STEPS", render_steps(working)}});
  PhaseRecord& r = rec.call("phase3", prompt, detail::image_list(visual));
  std::optional<StepLabel> label = try_parse_step_label(r.response_text);
  if (!label) {
    r.parsed = {{"current_step", nullptr}};
    throw Error(ErrorCode::kUnparseableCurrentStep, "phase 3 response has no step label");
  }
  r.parsed = {{"current_step", label->index}};
  Prediction p = successor_prediction(d, label->index);
  rec.trace().artifacts["current_step"] = label->index;
  return p;
}

/// Free-form next-step prompt over a single procedure (ablations without phase 3).
inline Prediction direct_next_step(const VisualState& visual, const Procedure& working, TraceRecorder& rec,
                                   const PipelineConfig& config) {
  const std::string prompt =
      config.templates.render(template_name::kDirectNext, {{"STEPS", render_candidates({working})}});
  PhaseRecord& r = rec.call("direct", prompt, detail::image_list(visual));
  StepLabel label = parse_step_label(r.response_text);
  r.parsed = {{"step", label.index}, {"content", label.content}};
  Prediction p;
  p.selected_procedure_id = working.id;
  p.next_step_index = label.index;
  if (!label.content.empty()) {
    p.next_step_text = label.content;
  } else if (label.index >= 1 && label.index <= static_cast<int>(working.steps.size())) {
    p.next_step_text = working.steps[static_cast<std::size_t>(label.index - 1)].text;
  } else {
    throw Error(ErrorCode::kIndexOutOfRange, "direct prompt named step " + std::to_string(label.index));
  }
  return p;
}

namespace detail {

template <typename Body>
RunResult guarded_run(const Instance& instance, std::string mode, std::string config_hash, Body body) {
  RunResult result;
  result.instance_id = instance.id;
  result.mode = std::move(mode);
  result.config_hash = std::move(config_hash);
  std::string phase = "setup";
  try {
    body(result, phase);
  } catch (const Error& e) {
    result.prediction.next_step_text.clear();
    result.error = RunError{phase, std::string(e.name()), e.what()};
  }
  return result;
}

}  // namespace detail

inline std::string cop_mode_name(const PipelineConfig& config) {
  return config.phases == std::set<int>{1, 2, 3} ? "cop" : "ablation:" + config.phases_label();
}

/// Runs the configured phase subset on one instance. Without phase 1 the
/// positive candidate is used as the provided procedure; without phase 3 a
/// direct next-step prompt follows.
inline RunResult run_cop(const Instance& instance, const PipelineConfig& config, Provider& provider) {
  config.validate();
  return detail::guarded_run(instance, cop_mode_name(config), config.hash(), [&](RunResult& result, std::string& phase) {
    TraceRecorder rec(provider, result.trace, config.decoding);
    int position = instance.label;
    if (config.has(1)) {
      phase = "phase1";
      position = phase1_retrieve(instance.visual, instance.candidates, rec, config).position;
    } else {
      result.trace.artifacts["selected_position"] = position;
      result.trace.artifacts["selected_procedure"] = instance.positive().id;
      result.trace.warnings.push_back("phase1 disabled: using the provided procedure");
    }
    const Procedure& selected = instance.candidates.at(static_cast<std::size_t>(position));
    Decomposition d = identity_decomposition(selected);
    if (config.has(2)) {
      phase = "phase2";
      d = phase2_decompose(selected, rec, config);
    }
    if (config.has(3)) {
      phase = "phase3";
      result.prediction = phase3_predict(instance.visual, d, rec, config);
    } else {
      phase = "direct";
      result.prediction = direct_next_step(instance.visual, d.working, rec, config);
    }
    result.prediction.selected_procedure_id = selected.id;
    result.prediction.selected_position = position;
  });
}

/// Single-prompt baseline over all candidates.
inline RunResult baseline_direct(const Instance& instance, Provider& provider, const PipelineConfig& config = {}) {
  const std::string mode = config.chain_of_thought ? "baseline:cot" : "baseline";
  return detail::guarded_run(instance, mode, config.hash(), [&](RunResult& result, std::string& phase) {
    phase = "baseline";
    TraceRecorder rec(provider, result.trace, config.decoding);
    const char* tpl = config.chain_of_thought ? template_name::kBaselineCot : template_name::kBaseline;
    const std::string prompt = config.templates.render(tpl, {{"STEPS", render_candidates(instance.candidates)}});
    PhaseRecord& r = rec.call("baseline", prompt, detail::image_list(instance.visual));
    StepLabel label = parse_step_label(r.response_text);
    r.parsed = {{"step", label.index}, {"content", label.content}};
    if (label.content.empty()) throw Error(ErrorCode::kNoStepLabel, "step label carries no content");
    result.prediction.next_step_text = label.content;
    result.prediction.next_step_index = label.index;
  });
}

}  // namespace copkit
