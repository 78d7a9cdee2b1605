#pragma once

#include <optional>
#include <string>
#include <vector>

#include "copkit/core/parse.hpp"
#include "copkit/cop/templates.hpp"
#include "copkit/gateway/provider.hpp"

namespace copkit {

struct JudgePanel {
  std::vector<Provider*> judges;
  TemplateSet templates = TemplateSet::defaults();
  int scale_max = 10;
  Decoding decoding;
};

struct LlmScore {
  double score_percent = 0.0;
  /// nullopt for a judge that was excluded.
  std::vector<std::optional<int>> per_judge;
  std::vector<std::string> warnings;
  std::size_t requests = 0;
  TokenUsage usage;
};

/// Mean judge score scaled to 0-100. An unparseable judge is asked once more,
/// then excluded.
inline LlmScore llm_score(const std::string& prediction, const std::string& reference, const JudgePanel& panel) {
  if (panel.judges.empty()) throw Error(ErrorCode::kConfigError, "judge panel is empty");
  const std::string prompt =
      panel.templates.render(template_name::kJudge, {{"LABEL", reference}, {"PREDICT", prediction}});
  LlmScore out;
  double sum = 0.0;
  std::size_t valid = 0;
  for (std::size_t j = 0; j < panel.judges.size(); ++j) {
    std::optional<int> score;
    std::string last;
    for (int attempt = 0; attempt < 2 && !score; ++attempt) {
      try {
        ModelResponse r = panel.judges[j]->complete({prompt, {}, panel.decoding});
        ++out.requests;
        out.usage += r.usage;
        last = r.text;
        score = parse_score(r.text, panel.scale_max);
      } catch (const Error& e) {
        last = e.what();
      }
    }
    if (!score) {
      out.warnings.push_back("judge " + std::to_string(j + 1) + " (" + panel.judges[j]->id() +
                             ") excluded: unparseable score '" + last + "'");
    } else {
      sum += *score;
      ++valid;
    }
    out.per_judge.push_back(score);
  }
  if (valid == 0) throw Error(ErrorCode::kAllJudgesFailed, "no judge returned a parseable score");
  out.score_percent = sum / static_cast<double>(valid) / panel.scale_max * 100.0;
  return out;
}

}  // namespace copkit
