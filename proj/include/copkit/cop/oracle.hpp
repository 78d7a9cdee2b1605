#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "copkit/core/parse.hpp"
#include "copkit/cop/templates.hpp"
#include "copkit/forge/fusion.hpp"
#include "copkit/forge/instance.hpp"
#include "copkit/gateway/scripted.hpp"

namespace copkit {

/// The `{STEPS}` payload of `prompt` if it was rendered from template `name`.
inline std::optional<std::string> match_template(const TemplateSet& templates, const std::string& name,
                                                 const std::string& prompt) {
  const std::string& tpl = templates.get(name);
  const std::size_t at = tpl.find("{STEPS}");
  if (at == std::string::npos) return std::nullopt;
  const std::string prefix = tpl.substr(0, at);
  std::string suffix = tpl.substr(at + 7);
  suffix = suffix.substr(0, suffix.find('{'));
  if (prompt.compare(0, prefix.size(), prefix) != 0) return std::nullopt;
  const std::size_t end = prompt.rfind(suffix);
  if (end == std::string::npos || end < prefix.size()) return std::nullopt;
  return prompt.substr(prefix.size(), end - prefix.size());
}

/// Step texts per `### Instruction k` block; a payload without headers is one block.
inline std::vector<std::vector<std::string>> parse_rendered_procedures(std::string_view block) {
  std::vector<std::vector<std::string>> out;
  for (std::string_view line : text::split_lines(block)) {
    const std::string t = text::trim(line);
    if (t.rfind("###", 0) == 0) {
      out.emplace_back();
      continue;
    }
    if (auto label = detail::match_step_line(t)) {
      if (out.empty()) out.emplace_back();
      out.back().push_back(label->content);
    }
  }
  return out;
}

struct OracleOptions {
  /// Direct next-step prompts answer with the step the image shows instead of its successor.
  bool direct_answers_current = false;
};

namespace detail {

inline std::vector<std::string> step_texts(const Procedure& p) {
  std::vector<std::string> out;
  for (const Step& s : p.steps) out.push_back(s.text);
  return out;
}

/// Atomic coverage of each presented step, recovered from exact or fused text.
inline std::vector<std::vector<int>> recover_atoms(const std::vector<std::string>& presented,
                                                   const std::vector<std::string>& atomic) {
  std::vector<std::vector<int>> out;
  std::size_t j = 0;
  for (const std::string& s : presented) {
    if (j + 1 < atomic.size() && s == fuse_texts(atomic[j], atomic[j + 1]) && s != atomic[j]) {
      out.push_back({static_cast<int>(j + 1), static_cast<int>(j + 2)});
      j += 2;
    } else {
      out.push_back({static_cast<int>(j + 1)});
      ++j;
    }
  }
  return out;
}

inline int presented_step_of(const std::vector<std::vector<int>>& atoms, int atom) {
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (std::find(atoms[i].begin(), atoms[i].end(), atom) != atoms[i].end()) return static_cast<int>(i + 1);
  }
  return static_cast<int>(atoms.size());
}

class Oracle {
 public:
  Oracle(const std::vector<Instance>& instances, TemplateSet templates, OracleOptions options)
      : templates_(std::move(templates)), options_(options) {
    for (const Instance& in : instances) {
      by_image_.emplace(in.visual.image_id, in);
      by_positive_.emplace(step_texts(in.positive()), in);
      std::vector<std::string> sorted = in.source_steps;
      std::sort(sorted.begin(), sorted.end());
      by_atomic_set_.emplace(sorted, in);
    }
  }

  std::string answer(const ModelRequest& r) const {
    const Instance* in = nullptr;
    if (!r.image_ids.empty()) {
      auto it = by_image_.find(r.image_ids.front());
      if (it != by_image_.end()) in = &it->second;
    }
    namespace tn = template_name;
    if (auto j = judge(r.instruction)) return *j;
    if (auto b = match_template(templates_, tn::kPhase2Decompose, r.instruction)) return decompose(*b);
    if (auto b = match_template(templates_, tn::kSiv, r.instruction)) return siv(*b);
    if (!in) return "";
    if (auto b = match_template(templates_, tn::kPhase1Select, r.instruction)) return select(*in, *b);
    if (auto b = match_template(templates_, tn::kPhase1Score, r.instruction)) return score(*in, *b);
    if (auto b = match_template(templates_, tn::kPhase3Identify, r.instruction)) return identify(*in, *b);
    if (auto b = match_template(templates_, tn::kCsi, r.instruction)) {
      return "step_" + std::to_string(in->visual.after_step);
    }
    if (auto b = match_template(templates_, tn::kNsp, r.instruction)) {
      return "step_" + std::to_string(in->visual.after_step + 1);
    }
    if (auto b = match_template(templates_, tn::kDpa, r.instruction)) return dpa(*in, *b);
    if (auto b = match_template(templates_, tn::kCpm, r.instruction)) return cpm(*in, *b);
    if (auto b = match_template(templates_, tn::kBaselineCot, r.instruction)) return next_step(*in, *b, false);
    if (auto b = match_template(templates_, tn::kBaseline, r.instruction)) return next_step(*in, *b, true);
    return "";
  }

 private:
  std::string select(const Instance& in, const std::string& block) const {
    const auto procs = parse_rendered_procedures(block);
    const auto positive = step_texts(in.positive());
    for (std::size_t k = 0; k < procs.size(); ++k) {
      if (procs[k] == positive) return "[" + std::to_string(k + 1) + "]";
    }
    return "[0]";
  }

  std::string score(const Instance& in, const std::string& block) const {
    const auto procs = parse_rendered_procedures(block);
    return !procs.empty() && procs.front() == step_texts(in.positive()) ? "10" : "0";
  }

  std::string decompose(const std::string& block) const {
    const auto procs = parse_rendered_procedures(block);
    if (procs.empty()) return "";
    std::vector<std::string> out = procs.front();
    auto it = by_positive_.find(procs.front());
    if (it != by_positive_.end()) {
      out.clear();
      for (const Step& s : it->second.positive().steps) {
        for (int atom : source_of(s)) out.push_back(it->second.source_steps[static_cast<std::size_t>(atom - 1)]);
      }
    }
    std::string reply;
    for (std::size_t i = 0; i < out.size(); ++i) reply += format_step_label(static_cast<int>(i + 1), out[i]) + "\n";
    return reply;
  }

  std::string identify(const Instance& in, const std::string& block) const {
    const auto procs = parse_rendered_procedures(block);
    if (procs.empty()) return "";
    const auto atoms = recover_atoms(procs.front(), in.source_steps);
    const int i = presented_step_of(atoms, in.visual.after_step);
    return format_step_label(i, procs.front()[static_cast<std::size_t>(i - 1)]);
  }

  /// Next step at the granularity the procedure is presented in.
  std::string next_step(const Instance& in, const std::string& block, bool allow_direct_rig) const {
    const auto procs = parse_rendered_procedures(block);
    const auto positive = step_texts(in.positive());
    const std::vector<std::string>* chosen = nullptr;
    if (procs.size() == 1) {
      chosen = &procs.front();
    } else {
      for (const auto& p : procs) {
        if (p == positive) chosen = &p;
      }
    }
    if (!chosen || chosen->empty()) return "";
    const auto atoms = recover_atoms(*chosen, in.source_steps);
    int i = presented_step_of(atoms, in.visual.after_step);
    if (!(allow_direct_rig && procs.size() == 1 && options_.direct_answers_current)) {
      i = std::min(i + 1, static_cast<int>(chosen->size()));
    }
    return "Reasoning omitted.\n" + format_step_label(i, (*chosen)[static_cast<std::size_t>(i - 1)]);
  }

  std::string siv(const std::string& block) const {
    const auto procs = parse_rendered_procedures(block);
    if (procs.empty()) return "";
    std::vector<std::string> sorted = procs.front();
    std::sort(sorted.begin(), sorted.end());
    auto it = by_atomic_set_.find(sorted);
    if (it == by_atomic_set_.end()) return "";
    return procs.front() == it->second.source_steps ? "False" : "True";
  }

  std::string dpa(const Instance& in, const std::string& block) const {
    const auto procs = parse_rendered_procedures(block);
    if (procs.empty()) return "";
    const std::string& gold = in.gold_next_step;
    for (std::size_t k = 0; k < procs.front().size(); ++k) {
      if (procs.front()[k] == gold) return "step_" + std::to_string(k + 1);
    }
    return "";
  }

  std::string cpm(const Instance& in, const std::string& block) const {
    const auto procs = parse_rendered_procedures(block);
    return !procs.empty() && procs.front() == step_texts(in.positive()) ? "True" : "False";
  }

  std::optional<std::string> judge(const std::string& prompt) const {
    const std::string& tpl = templates_.get(template_name::kJudge);
    const std::size_t l_at = tpl.find("{LABEL}");
    const std::size_t p_at = tpl.find("{PREDICT}");
    if (l_at == std::string::npos || p_at == std::string::npos || p_at < l_at) return std::nullopt;
    const std::string head = tpl.substr(0, l_at);
    if (prompt.compare(0, head.size(), head) != 0) return std::nullopt;
    const std::string mid = tpl.substr(l_at + 7, p_at - l_at - 7);
    const std::string tail = tpl.substr(p_at + 9);
    const std::size_t m = prompt.find(mid, head.size());
    const std::size_t t = prompt.rfind(tail);
    if (m == std::string::npos || t == std::string::npos || t < m + mid.size()) return std::nullopt;
    const std::string label = prompt.substr(head.size(), m - head.size());
    const std::string pred = prompt.substr(m + mid.size(), t - m - mid.size());
    if (text::answers_match(label, pred)) return std::string("10");
    const double f1 = token_overlap_f1(text::word_tokens(label), text::word_tokens(pred));
    return std::to_string(static_cast<int>(std::lround(10.0 * f1)));
  }

  TemplateSet templates_;
  OracleOptions options_;
  std::map<std::string, Instance> by_image_;
  std::map<std::vector<std::string>, Instance> by_positive_;
  std::map<std::vector<std::string>, Instance> by_atomic_set_;
};

}  // namespace detail

/// Scripted provider that answers every default prompt from the instances'
/// ground truth, at the granularity the prompt presents. Unknown prompts get
/// an empty reply.
inline std::shared_ptr<ScriptedProvider> make_oracle_provider(const std::vector<Instance>& instances,
                                                              OracleOptions options = {},
                                                              TemplateSet templates = TemplateSet::defaults(),
                                                              std::string id = "oracle") {
  auto oracle = std::make_shared<detail::Oracle>(instances, std::move(templates), options);
  auto provider = std::make_shared<ScriptedProvider>(std::move(id));
  provider->add_rule({"oracle", [](const ModelRequest&) { return true; },
                      [oracle](const ModelRequest& r) { return oracle->answer(r); }});
  return provider;
}

}  // namespace copkit
