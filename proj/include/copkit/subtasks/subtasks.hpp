#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "copkit/core/permutation.hpp"
#include "copkit/core/rng.hpp"
#include "copkit/core/step_label.hpp"
#include "copkit/cop/templates.hpp"
#include "copkit/forge/instance.hpp"
#include "copkit/gateway/provider.hpp"

namespace copkit {

enum class SubTaskKind { kSiv, kCsi, kNsp, kDpa, kCpm };

inline constexpr std::array<SubTaskKind, 5> kAllSubTasks{SubTaskKind::kSiv, SubTaskKind::kCsi, SubTaskKind::kNsp,
                                                         SubTaskKind::kDpa, SubTaskKind::kCpm};

inline std::string to_string(SubTaskKind k) {
  switch (k) {
    case SubTaskKind::kSiv: return "SIV";
    case SubTaskKind::kCsi: return "CSI";
    case SubTaskKind::kNsp: return "NSP";
    case SubTaskKind::kDpa: return "DPA";
    case SubTaskKind::kCpm: return "CPM";
  }
  return "SIV";
}

inline SubTaskKind parse_subtask_kind(const std::string& s) {
  for (SubTaskKind k : kAllSubTasks) {
    if (text::to_lower(to_string(k)) == text::to_lower(s)) return k;
  }
  throw Error(ErrorCode::kConfigError, "unknown sub-task '" + s + "'");
}

inline const char* template_for(SubTaskKind k) {
  switch (k) {
    case SubTaskKind::kSiv: return template_name::kSiv;
    case SubTaskKind::kCsi: return template_name::kCsi;
    case SubTaskKind::kNsp: return template_name::kNsp;
    case SubTaskKind::kDpa: return template_name::kDpa;
    case SubTaskKind::kCpm: return template_name::kCpm;
  }
  return template_name::kSiv;
}

/// Boolean kinds answer True/False; CSI and NSP answer a step index; DPA a step text.
inline bool is_boolean_kind(SubTaskKind k) { return k == SubTaskKind::kSiv || k == SubTaskKind::kCpm; }

struct SubTaskItem {
  SubTaskKind kind = SubTaskKind::kSiv;
  std::string id;
  std::string instruction;
  std::optional<std::string> image_id;
  Procedure procedure;
  std::optional<Permutation> permutation;
  /// SIV: true = ordered. CPM: true = matches. CSI/NSP: 1-based index. DPA: step text.
  nlohmann::json gold;
  std::string instance_id;
  std::uint64_t seed = 0;
};

inline void to_json(nlohmann::json& j, const SubTaskItem& item) {
  j = {{"id", item.id},
       {"kind", to_string(item.kind)},
       {"instruction", item.instruction},
       {"image", item.image_id ? nlohmann::json(*item.image_id) : nlohmann::json(nullptr)},
       {"procedure", item.procedure},
       {"gold", item.gold},
       {"provenance", {{"instance_id", item.instance_id}, {"seed", item.seed}}}};
  if (item.permutation) j["permutation"] = *item.permutation;
}

inline void from_json(const nlohmann::json& j, SubTaskItem& item) {
  item.id = j.at("id").get<std::string>();
  item.kind = parse_subtask_kind(j.at("kind").get<std::string>());
  item.instruction = j.at("instruction").get<std::string>();
  item.image_id.reset();
  if (j.contains("image") && !j.at("image").is_null()) item.image_id = j.at("image").get<std::string>();
  item.procedure = j.at("procedure").get<Procedure>();
  item.permutation.reset();
  if (j.contains("permutation")) item.permutation = j.at("permutation").get<Permutation>();
  item.gold = j.at("gold");
  item.instance_id = j.at("provenance").at("instance_id").get<std::string>();
  item.seed = j.at("provenance").at("seed").get<std::uint64_t>();
}

namespace detail {

inline SubTaskItem subtask_shell(SubTaskKind kind, const std::string& instance_id, std::uint64_t seed) {
  SubTaskItem item;
  item.kind = kind;
  item.id = instance_id + "/" + to_string(kind);
  item.instance_id = instance_id;
  item.seed = seed;
  return item;
}

inline void render_item(SubTaskItem& item, const TemplateSet& templates) {
  item.instruction = templates.render(template_for(item.kind), {{"STEPS", render_steps(item.procedure)}});
}

inline void require_successor(const Instance& in) {
  if (in.visual.after_step < 1 || static_cast<std::size_t>(in.visual.after_step) >= in.step_length()) {
    throw Error(ErrorCode::kIndexOutOfRange, "instance '" + in.id + "' has no next step after step " +
                                                 std::to_string(in.visual.after_step));
  }
}

}  // namespace detail

/// Shuffled-or-not detection. Text only.
inline SubTaskItem make_siv(const Procedure& procedure, std::uint64_t seed, const std::string& instance_id = {},
                            const TemplateSet& templates = TemplateSet::defaults()) {
  if (procedure.steps.size() < 2) {
    throw Error(ErrorCode::kCannotShuffle, "procedure '" + procedure.id + "' has fewer than 2 steps");
  }
  SubTaskItem item = detail::subtask_shell(SubTaskKind::kSiv, instance_id.empty() ? procedure.id : instance_id, seed);
  Rng rng(derive_seed(seed, "siv"));
  if (rng.bernoulli(0.5)) {
    auto [shuffled, perm] = permute(procedure, derive_seed(seed, "siv/permutation"), true);
    item.procedure = std::move(shuffled);
    item.permutation = perm;
    item.gold = false;
  } else {
    item.procedure = procedure;
    item.gold = true;
  }
  detail::render_item(item, templates);
  return item;
}

/// Current-step identification over the atomic positive procedure.
inline SubTaskItem make_csi(const Instance& in, const TemplateSet& templates = TemplateSet::defaults()) {
  SubTaskItem item = detail::subtask_shell(SubTaskKind::kCsi, in.id, in.seed);
  item.procedure = in.source_procedure();
  item.image_id = in.visual.image_id;
  item.gold = in.visual.after_step;
  detail::render_item(item, templates);
  return item;
}

inline SubTaskItem make_nsp(const Instance& in, const TemplateSet& templates = TemplateSet::defaults()) {
  detail::require_successor(in);
  SubTaskItem item = detail::subtask_shell(SubTaskKind::kNsp, in.id, in.seed);
  item.procedure = in.source_procedure();
  item.image_id = in.visual.image_id;
  item.gold = in.visual.after_step + 1;
  detail::render_item(item, templates);
  return item;
}

/// Next step over a shuffled presentation; gold stays the original successor.
inline SubTaskItem make_dpa(const Instance& in, std::uint64_t seed,
                            const TemplateSet& templates = TemplateSet::defaults()) {
  detail::require_successor(in);
  SubTaskItem item = detail::subtask_shell(SubTaskKind::kDpa, in.id, seed);
  auto [shuffled, perm] = permute(in.source_procedure(), derive_seed(seed, "dpa/permutation"), true);
  item.procedure = std::move(shuffled);
  item.permutation = perm;
  item.image_id = in.visual.image_id;
  item.gold = in.source_steps[static_cast<std::size_t>(in.visual.after_step)];
  detail::render_item(item, templates);
  return item;
}

/// Image paired with its own procedure or a sampled negative.
inline SubTaskItem make_cpm(const Instance& in, std::uint64_t seed,
                            const TemplateSet& templates = TemplateSet::defaults()) {
  if (in.candidates.size() < 2) throw Error(ErrorCode::kInsufficientPool, "instance '" + in.id + "' has no negative");
  SubTaskItem item = detail::subtask_shell(SubTaskKind::kCpm, in.id, seed);
  Rng rng(derive_seed(seed, "cpm"));
  item.image_id = in.visual.image_id;
  if (rng.bernoulli(0.5)) {
    item.procedure = in.positive();
    item.gold = true;
  } else {
    std::size_t pick = rng.uniform_index(in.candidates.size() - 1);
    if (pick >= static_cast<std::size_t>(in.label)) ++pick;
    item.procedure = in.candidates[pick];
    item.gold = false;
  }
  detail::render_item(item, templates);
  return item;
}

/// One item per (instance, kind). Item seeds derive from `seed` and the instance id;
/// instances without a successor are skipped for NSP and DPA.
inline std::vector<SubTaskItem> generate_subtasks(const std::vector<Instance>& instances,
                                                  const std::vector<SubTaskKind>& kinds, std::uint64_t seed,
                                                  const TemplateSet& templates = TemplateSet::defaults()) {
  std::vector<SubTaskItem> out;
  for (SubTaskKind kind : kinds) {
    for (const Instance& in : instances) {
      const std::uint64_t item_seed = derive_seed(seed, to_string(kind) + "/" + in.id);
      const bool has_next = static_cast<std::size_t>(in.visual.after_step) < in.step_length();
      switch (kind) {
        case SubTaskKind::kSiv: out.push_back(make_siv(in.source_procedure(), item_seed, in.id, templates)); break;
        case SubTaskKind::kCsi: out.push_back(make_csi(in, templates)); break;
        case SubTaskKind::kNsp:
          if (has_next) out.push_back(make_nsp(in, templates));
          break;
        case SubTaskKind::kDpa:
          if (has_next) out.push_back(make_dpa(in, item_seed, templates));
          break;
        case SubTaskKind::kCpm:
          if (in.candidates.size() >= 2) out.push_back(make_cpm(in, item_seed, templates));
          break;
      }
    }
  }
  return out;
}

inline ModelRequest subtask_request(const SubTaskItem& item, const Decoding& decoding = {}) {
  ModelRequest r;
  r.instruction = item.instruction;
  if (item.image_id) r.image_ids.push_back(*item.image_id);
  r.decoding = decoding;
  return r;
}

/// First true/false word in the response.
inline std::optional<bool> parse_boolean_answer(std::string_view response) {
  for (const std::string& t : text::word_tokens(response)) {
    if (t == "true") return true;
    if (t == "false") return false;
  }
  return std::nullopt;
}

struct SubTaskOutcome {
  std::string id;
  SubTaskKind kind = SubTaskKind::kSiv;
  bool correct = false;
  bool parsed = false;
  nlohmann::json answer;
};

inline SubTaskOutcome score_subtask(const SubTaskItem& item, std::string_view response) {
  SubTaskOutcome o{item.id, item.kind, false, false, nullptr};
  switch (item.kind) {
    case SubTaskKind::kSiv:
    case SubTaskKind::kCpm: {
      std::optional<bool> b = parse_boolean_answer(response);
      if (!b) break;
      // SIV asks "has it been shuffled?", gold records "is it ordered?".
      const bool answer = item.kind == SubTaskKind::kSiv ? !*b : *b;
      o.parsed = true;
      o.answer = answer;
      o.correct = answer == item.gold.get<bool>();
      break;
    }
    case SubTaskKind::kCsi:
    case SubTaskKind::kNsp: {
      std::optional<StepLabel> label = try_parse_step_label(response);
      if (!label) break;
      o.parsed = true;
      o.answer = label->index;
      o.correct = label->index == item.gold.get<int>();
      break;
    }
    case SubTaskKind::kDpa: {
      std::optional<StepLabel> label = try_parse_step_label(response);
      if (!label) break;
      std::string answer = label->content;
      if (answer.empty()) {
        if (label->index > static_cast<int>(item.procedure.steps.size())) break;
        answer = item.procedure.steps[static_cast<std::size_t>(label->index - 1)].text;
      }
      o.parsed = true;
      o.answer = answer;
      o.correct = text::answers_match(answer, item.gold.get<std::string>());
      break;
    }
  }
  return o;
}

struct SubTaskTally {
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t unparseable = 0;
  double accuracy() const { return total == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(total); }
};

struct SubTaskReport {
  std::map<std::string, SubTaskTally> per_kind;
  std::vector<SubTaskOutcome> outcomes;
};

inline SubTaskReport score_subtasks(const std::vector<SubTaskItem>& items, const std::vector<std::string>& responses) {
  if (items.size() != responses.size()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(items.size()) + " items but " +
                                                std::to_string(responses.size()) + " responses");
  }
  SubTaskReport report;
  for (std::size_t i = 0; i < items.size(); ++i) {
    SubTaskOutcome o = score_subtask(items[i], responses[i]);
    SubTaskTally& t = report.per_kind[to_string(o.kind)];
    ++t.total;
    if (o.correct) ++t.correct;
    if (!o.parsed) ++t.unparseable;
    report.outcomes.push_back(std::move(o));
  }
  return report;
}

inline nlohmann::json to_json(const SubTaskReport& r) {
  nlohmann::json kinds = nlohmann::json::object();
  for (const auto& [kind, t] : r.per_kind) {
    kinds[kind] = {{"total", t.total}, {"correct", t.correct}, {"unparseable", t.unparseable},
                   {"accuracy", t.accuracy()}};
  }
  nlohmann::json outcomes = nlohmann::json::array();
  for (const auto& o : r.outcomes) {
    outcomes.push_back({{"id", o.id}, {"kind", to_string(o.kind)}, {"correct", o.correct}, {"parsed", o.parsed},
                        {"answer", o.answer}});
  }
  return {{"per_kind", kinds}, {"outcomes", outcomes}};
}

}  // namespace copkit
