#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "copkit/core/error.hpp"
#include "copkit/core/text.hpp"

namespace copkit {

struct StepLabel {
  int index = 0;
  std::string content;

  bool operator==(const StepLabel&) const = default;
};

namespace detail {

// Grammar: optional leading whitespace, "step_" (any case), digits, optional
// whitespace, optional ':', optional whitespace, content (may be empty).
inline std::optional<StepLabel> match_step_line(std::string_view line) {
  std::string_view s = text::trim_view(line);
  constexpr std::string_view kPrefix = "step_";
  if (s.size() <= kPrefix.size()) return std::nullopt;
  for (std::size_t i = 0; i < kPrefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != kPrefix[i]) return std::nullopt;
  }
  s.remove_prefix(kPrefix.size());
  std::size_t digits = 0;
  while (digits < s.size() && std::isdigit(static_cast<unsigned char>(s[digits]))) ++digits;
  if (digits == 0 || digits > 9) return std::nullopt;
  int index = std::stoi(std::string(s.substr(0, digits)));
  if (index < 1) return std::nullopt;
  s.remove_prefix(digits);
  if (!s.empty() && !text::is_space(s.front()) && s.front() != ':') return std::nullopt;
  s = text::trim_view(s);
  if (!s.empty() && s.front() == ':') s.remove_prefix(1);
  return StepLabel{index, text::trim(s)};
}

}  // namespace detail

/// Extracts the last `step_<n>[:] <content>` line of a model response.
inline StepLabel parse_step_label(std::string_view response) {
  std::optional<StepLabel> last;
  for (std::string_view line : text::split_lines(response)) {
    if (auto m = detail::match_step_line(line)) last = std::move(m);
  }
  if (!last) throw Error(ErrorCode::kNoStepLabel, "no step_<n> line in response");
  return *last;
}

inline std::optional<StepLabel> try_parse_step_label(std::string_view response) {
  std::optional<StepLabel> last;
  for (std::string_view line : text::split_lines(response)) {
    if (auto m = detail::match_step_line(line)) last = std::move(m);
  }
  return last;
}

/// Every labelled line, in order of appearance.
inline std::vector<StepLabel> parse_step_list(std::string_view response) {
  std::vector<StepLabel> out;
  for (std::string_view line : text::split_lines(response)) {
    if (auto m = detail::match_step_line(line)) out.push_back(std::move(*m));
  }
  return out;
}

inline std::string format_step_label(int index, std::string_view content) {
  std::string out = "step_" + std::to_string(index) + ":";
  if (!content.empty()) {
    out.push_back(' ');
    out.append(content);
  }
  return out;
}

}  // namespace copkit
