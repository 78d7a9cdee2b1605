#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "copkit/core/error.hpp"
#include "copkit/core/text.hpp"

namespace copkit {

/// items x categories rating counts; every row sums to the same annotator count.
using AnnotationMatrix = std::vector<std::vector<int>>;

inline double fleiss_kappa(const AnnotationMatrix& m) {
  if (m.size() < 2) throw Error(ErrorCode::kInvalidArgument, "fleiss kappa needs at least 2 items");
  const std::size_t k = m.front().size();
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "annotation matrix has no categories");
  long n = -1;
  for (const auto& row : m) {
    if (row.size() != k) throw Error(ErrorCode::kInvalidArgument, "ragged annotation matrix");
    long sum = 0;
    for (int c : row) {
      if (c < 0) throw Error(ErrorCode::kInvalidArgument, "negative rating count");
      sum += c;
    }
    if (n < 0) n = sum;
    if (sum != n) throw Error(ErrorCode::kInvalidArgument, "rows must all sum to the annotator count");
  }
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "fleiss kappa needs at least 2 annotators");

  const double items = static_cast<double>(m.size());
  const double raters = static_cast<double>(n);
  double p_bar = 0.0;
  std::vector<double> p_j(k, 0.0);
  for (const auto& row : m) {
    double sq = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      sq += static_cast<double>(row[j]) * row[j];
      p_j[j] += row[j];
    }
    p_bar += (sq - raters) / (raters * (raters - 1.0));
  }
  p_bar /= items;
  double p_e = 0.0;
  for (double c : p_j) {
    const double p = c / (items * raters);
    p_e += p * p;
  }
  if (std::abs(1.0 - p_e) < 1e-12) {
    if (std::abs(1.0 - p_bar) < 1e-12) return 1.0;
    throw Error(ErrorCode::kDegenerateAgreement, "expected agreement is 1");
  }
  return (p_bar - p_e) / (1.0 - p_e);
}

enum class Judgment { kBetter, kEquivalent, kWorse };

inline Judgment parse_judgment(const std::string& s) {
  const std::string l = text::to_lower(text::trim(s));
  if (l == "better" || l == "win") return Judgment::kBetter;
  if (l == "equivalent" || l == "equal" || l == "tie") return Judgment::kEquivalent;
  if (l == "worse" || l == "loss") return Judgment::kWorse;
  throw Error(ErrorCode::kParseError, "unknown judgment '" + s + "'");
}

struct Tally {
  double win = 0.0;
  double equal = 0.0;
  double loss = 0.0;
};

inline Tally pairwise_tally(const std::vector<Judgment>& judgments) {
  if (judgments.empty()) throw Error(ErrorCode::kInvalidArgument, "no judgments to tally");
  std::array<std::size_t, 3> counts{};
  for (Judgment j : judgments) ++counts[static_cast<std::size_t>(j)];
  const double total = static_cast<double>(judgments.size());
  return {100.0 * counts[0] / total, 100.0 * counts[1] / total, 100.0 * counts[2] / total};
}

/// Per-item category counts from one label per (item, annotator).
inline AnnotationMatrix annotation_matrix(const std::vector<std::vector<Judgment>>& per_item) {
  AnnotationMatrix m;
  for (const auto& item : per_item) {
    std::vector<int> row(3, 0);
    for (Judgment j : item) ++row[static_cast<std::size_t>(j)];
    m.push_back(std::move(row));
  }
  return m;
}

}  // namespace copkit
