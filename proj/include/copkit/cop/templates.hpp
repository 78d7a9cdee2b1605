#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "copkit/core/error.hpp"
#include "copkit/core/io.hpp"
#include "copkit/core/step_label.hpp"
#include "copkit/core/types.hpp"

namespace copkit {

namespace template_name {
inline constexpr const char* kBaseline = "baseline";
inline constexpr const char* kBaselineCot = "baseline_cot";
inline constexpr const char* kDirectNext = "direct_next";
inline constexpr const char* kPhase1Select = "phase1_select";
inline constexpr const char* kPhase1Score = "phase1_score";
inline constexpr const char* kPhase2Decompose = "phase2_decompose";
inline constexpr const char* kPhase3Identify = "phase3_identify";
inline constexpr const char* kSiv = "siv";
inline constexpr const char* kCsi = "csi";
inline constexpr const char* kNsp = "nsp";
inline constexpr const char* kDpa = "dpa";
inline constexpr const char* kCpm = "cpm";
inline constexpr const char* kJudge = "judge";
}  // namespace template_name

namespace detail {

inline constexpr std::string_view kBaselineCotText =
    "## Instruction Manuals:\n"
    "{STEPS}\n"
    "\n"
    "##Instructions:\n"
    "- Several instructions are provided, each containing steps in sequential order (with no shuffling).\n"
    "- Some steps may combine multiple actions into a single step.\n"
    "- Based on the given image, identify the corresponding instruction manual and determine the next step.\n"
    "- Please think step-by-step and make sure the last line of the output should be the following format:\n"
    "step_X: [content of the next step]";

inline constexpr std::string_view kBaselineText =
    "## Instruction Manuals:\n"
    "{STEPS}\n"
    "\n"
    "##Instructions:\n"
    "- Several instructions are provided, each containing steps in sequential order (with no shuffling).\n"
    "- Some steps may combine multiple actions into a single step.\n"
    "- Based on the given image, identify the corresponding instruction manual and determine the next step.\n"
    "- Please make sure the last line of the output should be the following format:\n"
    "step_X: [content of the next step]";

inline constexpr std::string_view kPhase1SelectText =
    "<Image></Image>\n"
    "\n"
    "## Task: Identify which instruction manual the image belongs to.\n"
    "\n"
    "##Instructions:\n"
    "{STEPS}\n"
    "\n"
    "- Several instructions are provided (start with ###), each containing steps in sequential order (with no "
    "shuffling).\n"
    "- Based on the given image, identify the corresponding instruction among the provided candidate instructions.\n"
    "- Ensure that your response includes only the instruction ID.\n"
    "- Output your result in the following format: [Instruction id]\n"
    "- Do not include any explanations, reasoning, or additional information in your response.";

inline constexpr std::string_view kPhase1ScoreText =
    "<Image></Image>\n"
    "\n"
    "## Task: Does this procedure accurately reflect the image's content?\n"
    "\n"
    "## Instruction:\n"
    "{STEPS}\n"
    "\n"
    "- The instruction contains steps in sequential order (with no shuffling).\n"
    "- Based on the given image, score how well this procedure matches the image from 0 to {SCALE_MAX}.\n"
    "- Output only the score as an integer.\n"
    "- Do not include any explanations, reasoning, or additional information in your response.";

inline constexpr std::string_view kPhase2Text =
    "## Task: Identify and split the combined steps in the instruction manual.\n"
    "\n"
    "## Instruction:\n"
    "{STEPS}\n"
    "\n"
    "- The instruction contains steps in strict sequential order (no shuffling or reordering).\n"
    "- Some steps may combine two distinct actions into a single step.\n"
    "- Split if the actions are clearly separate (unrelated tools, different targets, or independent operations).\n"
    "- Do not split if the actions are part of a continuous process (same tool/object, sequential dependencies, or "
    "a single logical operation).\n"
    "- Output the modified instruction with only the necessary splits applied, keeping all other steps and the step "
    "description unchanged.\n"
    "- Output your result in the following format:\n"
    "step_1: [content of step_1]\n"
    "step_2: [content of step_2]\n"
    "...\n"
    "step_X: [content of step_X]\n"
    "- Do not include any explanations, reasoning, or additional information in your response.";

inline constexpr std::string_view kPhase3Text =
    "<Image></Image>\n"
    "\n"
    "## Task: Identify which step in the instruction the input image belongs to.\n"
    "\n"
    "## Instruction:\n"
    "{STEPS}\n"
    "\n"
    "- The instruction contains steps in sequential order (with no shuffling).\n"
    "- Based on the given image, identify which step this image belongs to.\n"
    "- Ensure that your response includes only the step of the image.\n"
    "- Output your result in the following format:\n"
    "step_X: [content of the current step]\n"
    "- Do not include any explanations, reasoning, or additional information in your response.";

inline constexpr std::string_view kCsiText =
    "<Image></Image>\n"
    "\n"
    "## Instructions:\n"
    "{STEPS}\n"
    "\n"
    "- Please identify which step the image corresponds to, based on the given instruction.\n"
    "- You should only output text in the form of 'step_X', without any other explanations or descriptions.";

inline constexpr std::string_view kNspText =
    "<Image></Image>\n"
    "\n"
    "## Instructions:\n"
    "{STEPS}\n"
    "\n"
    "- Please identify the next step after the step shown in the given image, based on the given instruction.\n"
    "- You should only output text in the form of 'step_X', without any other explanations or descriptions.";

inline constexpr std::string_view kSivText =
    "## Instructions:\n"
    "{STEPS}\n"
    "\n"
    "- Please determine whether the operational procedure in the instructions has been shuffled.\n"
    "- You should only output 'True' or 'False', without any other introduction or explanation.";

inline constexpr std::string_view kDpaText =
    "<Image></Image>\n"
    "\n"
    "## Instructions:\n"
    "{STEPS}\n"
    "\n"
    "- Given the shuffled instructions, please identify the next step after the step shown in the given image.\n"
    "- You should only output text in the form of \"step_X\", without any other introduction or explanation.";

inline constexpr std::string_view kCpmText =
    "<Image></Image>\n"
    "\n"
    "## Instructions:\n"
    "{STEPS}\n"
    "\n"
    "- Please determine whether the content of the image corresponds to any step described in the given "
    "instruction.\n"
    "- You should only output 'True' if the image corresponds to the instruction, or 'False', without any other "
    "introduction or explanation.";

// "Correcct" is kept as published so judge prompts reproduce byte-for-byte.
inline constexpr std::string_view kJudgeText =
    "## Correct Next Step:\n"
    "{LABEL}\n"
    "\n"
    "## Predict Next Step:\n"
    "{PREDICT}\n"
    "\n"
    "##Instructions:\n"
    "- The \"Correcct Next Step\" is the ground truth of the next step.\n"
    "- The \"Predict Next Step\" is the model output of the next step.\n"
    "- Score the predicted next step (0-10) based on how concisely and accurately it covers all essential "
    "operations from the correct next step, without omissions or extra information.\n"
    "- The score should be between 0 to 10.\n"
    "- Please output the score directly without any introduction or explanation.";

}  // namespace detail

/// Named prompt templates with `{NAME}` placeholders.
class TemplateSet {
 public:
  static TemplateSet defaults() {
    TemplateSet t;
    t.templates_ = {
        {template_name::kBaseline, std::string(detail::kBaselineText)},
        {template_name::kBaselineCot, std::string(detail::kBaselineCotText)},
        {template_name::kDirectNext, std::string(detail::kBaselineText)},
        {template_name::kPhase1Select, std::string(detail::kPhase1SelectText)},
        {template_name::kPhase1Score, std::string(detail::kPhase1ScoreText)},
        {template_name::kPhase2Decompose, std::string(detail::kPhase2Text)},
        {template_name::kPhase3Identify, std::string(detail::kPhase3Text)},
        {template_name::kSiv, std::string(detail::kSivText)},
        {template_name::kCsi, std::string(detail::kCsiText)},
        {template_name::kNsp, std::string(detail::kNspText)},
        {template_name::kDpa, std::string(detail::kDpaText)},
        {template_name::kCpm, std::string(detail::kCpmText)},
        {template_name::kJudge, std::string(detail::kJudgeText)},
    };
    return t;
  }

  /// Defaults overridden by every `<name>.txt` in `dir`; unknown names are rejected.
  static TemplateSet from_directory(const std::filesystem::path& dir) {
    TemplateSet t = defaults();
    if (!std::filesystem::is_directory(dir)) {
      throw Error(ErrorCode::kIoError, "template directory not found: " + dir.string());
    }
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (entry.path().extension() != ".txt") continue;
      const std::string name = entry.path().stem().string();
      if (!t.templates_.count(name)) throw Error(ErrorCode::kConfigError, "unknown template '" + name + "'");
      std::string body = io::read_file(entry.path());
      while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
      t.templates_[name] = std::move(body);
    }
    return t;
  }

  const std::string& get(const std::string& name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) throw Error(ErrorCode::kConfigError, "unknown template '" + name + "'");
    return it->second;
  }

  void set(const std::string& name, std::string body) { templates_[name] = std::move(body); }

  std::string render(const std::string& name, const std::map<std::string, std::string>& values) const {
    std::string out;
    const std::string& tpl = get(name);
    std::size_t i = 0;
    while (i < tpl.size()) {
      if (tpl[i] == '{') {
        std::size_t close = tpl.find('}', i);
        if (close != std::string::npos) {
          auto it = values.find(tpl.substr(i + 1, close - i - 1));
          if (it != values.end()) {
            out += it->second;
            i = close + 1;
            continue;
          }
        }
      }
      out.push_back(tpl[i++]);
    }
    return out;
  }

  std::string hash() const {
    std::string blob;
    for (const auto& [name, body] : templates_) blob += name + '\0' + body + '\0';
    return io::sha256_hex(blob);
  }

  const std::map<std::string, std::string>& all() const { return templates_; }

 private:
  std::map<std::string, std::string> templates_;
};

/// `step_i: text` lines for one procedure.
inline std::string render_steps(const Procedure& p) {
  std::string out;
  for (std::size_t i = 0; i < p.steps.size(); ++i) {
    if (i) out.push_back('\n');
    out += format_step_label(static_cast<int>(i + 1), p.steps[i].text);
  }
  return out;
}

/// `### Instruction k` blocks, 1-based.
inline std::string render_candidates(const std::vector<Procedure>& candidates) {
  std::string out;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (k) out += "\n\n";
    out += "### Instruction " + std::to_string(k + 1) + "\n" + render_steps(candidates[k]);
  }
  return out;
}

}  // namespace copkit
