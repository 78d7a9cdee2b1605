#pragma once

#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "copkit/core/text.hpp"

namespace copkit {

/// All non-negative integers appearing in `s`, in order.
inline std::vector<long> integers_in(std::string_view s) {
  std::vector<long> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (std::isdigit(static_cast<unsigned char>(s[i]))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      if (j - i <= 9) out.push_back(std::stol(std::string(s.substr(i, j - i))));
      i = j;
    } else {
      ++i;
    }
  }
  return out;
}

inline std::optional<long> last_integer(std::string_view s) {
  auto all = integers_in(s);
  if (all.empty()) return std::nullopt;
  return all.back();
}

/// Bare score in [0, max]. Trailing-integer rule, except "n/max" reads as n.
inline std::optional<int> parse_score(std::string_view s, int max) {
  auto all = integers_in(s);
  if (all.empty()) return std::nullopt;
  long value = all.back();
  if (all.size() >= 2 && all.back() == max) {
    const std::size_t slash = s.rfind('/');
    if (slash != std::string_view::npos && s.find_first_of("0123456789", slash) != std::string_view::npos) {
      value = all[all.size() - 2];
    }
  }
  if (value < 0 || value > max) return std::nullopt;
  return static_cast<int>(value);
}

/// Tokens shared by `a` and `b`, counted as a multiset intersection.
inline std::size_t token_overlap_count(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::map<std::string, int> counts;
  for (const auto& t : a) ++counts[t];
  std::size_t common = 0;
  for (const auto& t : b) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  return common;
}

/// Multiset F1 over word tokens; 1.0 when both sides are empty.
inline double token_overlap_f1(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  const std::size_t common = token_overlap_count(a, b);
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(a.size());
  const double recall = static_cast<double>(common) / static_cast<double>(b.size());
  return 2.0 * precision * recall / (precision + recall);
}

/// Share of `reference` tokens that `candidate` covers; 1.0 for an empty reference.
inline double token_recall(const std::vector<std::string>& candidate, const std::vector<std::string>& reference) {
  if (reference.empty()) return 1.0;
  return static_cast<double>(token_overlap_count(candidate, reference)) / static_cast<double>(reference.size());
}

}  // namespace copkit
