#pragma once

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "copkit/core/rng.hpp"
#include "copkit/forge/instance.hpp"

namespace copkit {

struct SplitSpec {
  std::set<std::string> ood_domains{"work"};
  /// Fraction of each in-domain stratum assigned to train.
  double train_ratio = 0.5;
  /// Strata smaller than this are merged into a neighbouring stratum.
  std::size_t min_stratum_size = 2;
};

struct SplitResult {
  std::vector<Instance> train;
  std::vector<Instance> test;
  std::vector<std::string> warnings;
};

inline void from_json(const nlohmann::json& j, SplitSpec& s) {
  SplitSpec d;
  s.ood_domains = j.value("ood_domains", d.ood_domains);
  s.train_ratio = j.value("train_ratio", d.train_ratio);
  s.min_stratum_size = j.value("min_stratum_size", d.min_stratum_size);
}

inline void to_json(nlohmann::json& j, const SplitSpec& s) {
  j = nlohmann::json{
      {"ood_domains", s.ood_domains}, {"train_ratio", s.train_ratio}, {"min_stratum_size", s.min_stratum_size}};
}

/// OOD domains go wholly to test; the rest is stratified by positive step length
/// and split per stratum.
inline SplitResult split_dataset(const std::vector<Instance>& instances, const SplitSpec& spec, std::uint64_t seed) {
  if (!(spec.train_ratio >= 0.0 && spec.train_ratio <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "train_ratio must be in [0, 1]");
  }
  SplitResult result;
  std::set<std::string> seen_domains;
  std::map<std::size_t, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    seen_domains.insert(instances[i].domain);
    if (!spec.ood_domains.count(instances[i].domain)) strata[instances[i].step_length()].push_back(i);
  }
  for (const std::string& d : spec.ood_domains) {
    if (!seen_domains.count(d)) result.warnings.push_back("OOD domain '" + d + "' has no instances");
  }

  // Merge undersized strata into the next longer one (or the previous for the last).
  std::vector<std::pair<std::string, std::vector<std::size_t>>> merged;
  std::vector<std::size_t> carry;
  std::string carry_label;
  for (auto& [length, members] : strata) {
    std::vector<std::size_t> group = std::move(carry);
    group.insert(group.end(), members.begin(), members.end());
    std::string label = carry_label.empty() ? std::to_string(length) : carry_label + "+" + std::to_string(length);
    if (group.size() < spec.min_stratum_size) {
      result.warnings.push_back("EmptyStratum: step length " + std::to_string(length) + " has " +
                                std::to_string(members.size()) + " instance(s); merged with neighbour");
      carry = std::move(group);
      carry_label = label;
      continue;
    }
    carry.clear();
    carry_label.clear();
    merged.emplace_back(label, std::move(group));
  }
  if (!carry.empty()) {
    if (merged.empty()) {
      merged.emplace_back(carry_label, std::move(carry));
    } else {
      auto& last = merged.back().second;
      last.insert(last.end(), carry.begin(), carry.end());
    }
  }

  std::vector<char> in_train(instances.size(), 0);
  for (auto& [label, members] : merged) {
    std::sort(members.begin(), members.end(),
              [&](std::size_t a, std::size_t b) { return instances[a].id < instances[b].id; });
    Rng rng(derive_seed(seed, "split/" + label));
    rng.shuffle(members);
    const auto n_train = static_cast<std::size_t>(std::llround(spec.train_ratio * static_cast<double>(members.size())));
    for (std::size_t k = 0; k < n_train && k < members.size(); ++k) in_train[members[k]] = 1;
  }
  for (std::size_t i = 0; i < instances.size(); ++i) {
    (in_train[i] ? result.train : result.test).push_back(instances[i]);
  }
  return result;
}

}  // namespace copkit
