#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "copkit/core/error.hpp"

namespace copkit {

enum class GroupBy { kNone, kDomain, kStepLength };

inline std::string to_string(GroupBy g) {
  switch (g) {
    case GroupBy::kNone: return "none";
    case GroupBy::kDomain: return "domain";
    case GroupBy::kStepLength: return "step_length_bucket";
  }
  return "none";
}

inline GroupBy parse_group_by(const std::string& s) {
  if (s == "none" || s.empty()) return GroupBy::kNone;
  if (s == "domain") return GroupBy::kDomain;
  if (s == "step_length_bucket" || s == "step_length") return GroupBy::kStepLength;
  throw Error(ErrorCode::kUnknownGroupKey, "unknown group key '" + s + "'");
}

/// Inclusive length range; no upper bound when `hi` is empty.
struct LengthBucket {
  std::string name;
  std::size_t lo = 0;
  std::optional<std::size_t> hi;
};

inline std::vector<LengthBucket> default_length_buckets() { return {{"3-5", 3, 5}, {"6-9", 6, 9}, {"10+", 10, {}}}; }

inline const LengthBucket& length_bucket(std::size_t length, const std::vector<LengthBucket>& buckets) {
  for (const auto& b : buckets) {
    if (length >= b.lo && (!b.hi || length <= *b.hi)) return b;
  }
  throw Error(ErrorCode::kUnknownGroupKey, "no step-length bucket holds length " + std::to_string(length));
}

/// One scored instance with its grouping metadata.
struct EvalRow {
  std::string instance_id;
  std::string domain;
  std::size_t step_length = 0;
  double value = 0.0;
};

struct GroupRow {
  std::string group;
  std::size_t count = 0;
  double value = 0.0;
};

struct Breakdown {
  std::string metric;
  GroupBy group_by = GroupBy::kNone;
  std::vector<GroupRow> groups;
  GroupRow overall{"overall", 0, 0.0};
};

/// Mean metric per group; overall is the count-weighted mean of the group means.
inline Breakdown breakdown_report(const std::vector<EvalRow>& rows, GroupBy group_by, std::string metric,
                                  const std::vector<LengthBucket>& buckets = default_length_buckets()) {
  Breakdown out;
  out.metric = std::move(metric);
  out.group_by = group_by;
  std::vector<std::string> order;
  std::map<std::string, std::pair<std::size_t, double>> acc;
  if (group_by == GroupBy::kStepLength) {
    for (const auto& b : buckets) order.push_back(b.name);
  }
  for (const auto& r : rows) {
    std::string key = "all";
    if (group_by == GroupBy::kDomain) key = r.domain;
    if (group_by == GroupBy::kStepLength) key = length_bucket(r.step_length, buckets).name;
    auto [it, fresh] = acc.try_emplace(key, 0, 0.0);
    if (fresh && group_by != GroupBy::kStepLength) order.push_back(key);
    ++it->second.first;
    it->second.second += r.value;
  }
  if (group_by == GroupBy::kDomain) std::sort(order.begin(), order.end());
  double weighted = 0.0;
  for (const auto& key : order) {
    auto it = acc.find(key);
    if (it == acc.end()) continue;
    const auto [n, sum] = it->second;
    const double mean = sum / static_cast<double>(n);
    out.groups.push_back({key, n, mean});
    out.overall.count += n;
    weighted += static_cast<double>(n) * mean;
  }
  if (out.overall.count) out.overall.value = weighted / static_cast<double>(out.overall.count);
  return out;
}

inline nlohmann::json to_json(const Breakdown& b) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : b.groups) groups.push_back({{"group", g.group}, {"count", g.count}, {"value", g.value}});
  return {{"metric", b.metric},
          {"group_by", to_string(b.group_by)},
          {"groups", groups},
          {"overall", {{"count", b.overall.count}, {"value", b.overall.value}}}};
}

}  // namespace copkit
