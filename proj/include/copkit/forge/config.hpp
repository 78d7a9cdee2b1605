#pragma once

#include <cstdint>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "copkit/core/error.hpp"

namespace copkit {

enum class NegativeStrategy { kTopK, kRandom };

inline NegativeStrategy parse_negative_strategy(const std::string& s) {
  if (s == "topk") return NegativeStrategy::kTopK;
  if (s == "random") return NegativeStrategy::kRandom;
  throw Error(ErrorCode::kConfigError, "negative_strategy must be 'topk' or 'random', got '" + s + "'");
}

inline std::string to_string(NegativeStrategy s) { return s == NegativeStrategy::kTopK ? "topk" : "random"; }

struct ForgeConfig {
  double fusion_probability = 0.5;
  int num_candidates = 3;
  NegativeStrategy negative_strategy = NegativeStrategy::kTopK;
  /// Nearest images examined before lifting to procedures; 0 scans the whole domain.
  int mining_k = 0;
  std::uint64_t seed = 0;
  std::set<std::string> ood_domains{"work"};
  /// Apply fusion to distractor procedures as well as the positive.
  bool fuse_negatives = true;
  /// Query images drawn per procedure.
  int visuals_per_procedure = 1;

  void validate() const {
    if (!(fusion_probability >= 0.0 && fusion_probability <= 1.0)) {
      throw Error(ErrorCode::kConfigError, "fusion_probability must be in [0, 1]");
    }
    if (num_candidates < 2) throw Error(ErrorCode::kConfigError, "num_candidates must be >= 2");
    if (mining_k < 0) throw Error(ErrorCode::kConfigError, "mining_k must be >= 0");
    if (visuals_per_procedure < 1) throw Error(ErrorCode::kConfigError, "visuals_per_procedure must be >= 1");
  }
};

inline void to_json(nlohmann::json& j, const ForgeConfig& c) {
  j = nlohmann::json{{"fusion_probability", c.fusion_probability},
                     {"num_candidates", c.num_candidates},
                     {"negative_strategy", to_string(c.negative_strategy)},
                     {"mining_k", c.mining_k},
                     {"seed", c.seed},
                     {"ood_domains", c.ood_domains},
                     {"fuse_negatives", c.fuse_negatives},
                     {"visuals_per_procedure", c.visuals_per_procedure}};
}

inline void from_json(const nlohmann::json& j, ForgeConfig& c) {
  ForgeConfig d;
  c.fusion_probability = j.value("fusion_probability", d.fusion_probability);
  c.num_candidates = j.value("num_candidates", d.num_candidates);
  c.negative_strategy = parse_negative_strategy(j.value("negative_strategy", to_string(d.negative_strategy)));
  c.mining_k = j.value("mining_k", d.mining_k);
  c.seed = j.value("seed", d.seed);
  c.ood_domains = j.value("ood_domains", d.ood_domains);
  c.fuse_negatives = j.value("fuse_negatives", d.fuse_negatives);
  c.visuals_per_procedure = j.value("visuals_per_procedure", d.visuals_per_procedure);
}

}  // namespace copkit
