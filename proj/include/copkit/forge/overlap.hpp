#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "copkit/embedding/store.hpp"

namespace copkit {

struct OverlapReport {
  double median_cosine = 0.0;
  /// Max cosine to the train set, one entry per test item, in input order.
  std::vector<double> per_item;
  /// Counts over `bins` equal-width bins spanning [-1, 1].
  std::vector<std::size_t> histogram;
};

inline double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// For each test id, the best cosine against any train id; median and histogram of those.
inline OverlapReport semantic_overlap(const std::vector<std::string>& train_ids,
                                      const std::vector<std::string>& test_ids, const EmbeddingStore& text_store,
                                      std::size_t bins = 20) {
  for (const auto* ids : {&train_ids, &test_ids}) {
    for (const auto& id : *ids) {
      if (!text_store.contains(id)) throw Error(ErrorCode::kMissingEmbedding, "no text embedding for '" + id + "'");
    }
  }
  if (train_ids.empty()) throw Error(ErrorCode::kInvalidArgument, "semantic overlap needs a non-empty train set");
  OverlapReport report;
  report.histogram.assign(bins, 0);
  for (const auto& t : test_ids) {
    double best = -1.0;
    for (const auto& r : train_ids) best = std::max(best, text_store.similarity(t, r));
    report.per_item.push_back(best);
    auto bin = static_cast<std::size_t>((best + 1.0) / 2.0 * static_cast<double>(bins));
    report.histogram[std::min(bin, bins - 1)]++;
  }
  report.median_cosine = median_of(report.per_item);
  return report;
}

inline nlohmann::json to_json(const OverlapReport& r) {
  return {{"median_cosine", r.median_cosine}, {"count", r.per_item.size()}, {"histogram", r.histogram}};
}

}  // namespace copkit
