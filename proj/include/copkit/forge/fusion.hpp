#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "copkit/core/error.hpp"
#include "copkit/core/rng.hpp"
#include "copkit/core/text.hpp"
#include "copkit/core/types.hpp"

namespace copkit {

/// alignment[i] lists the input step indices that fused step i+1 covers.
using Alignment = std::vector<std::vector<int>>;

/// Named fusion-probability settings used by the sensitivity harness.
struct FusionSetting {
  const char* name;
  double probability;
};
inline constexpr FusionSetting kFusionSettings[] = {{"low", 0.25}, {"balanced", 0.5}, {"high", 0.75}};

inline std::string fuse_texts(std::string_view first, std::string_view second) {
  return text::trim_terminal_periods(first) + ". " + text::trim_terminal_periods(second);
}

/// Greedy left-to-right scan: at each unconsumed position, merge it with its
/// successor with probability p and skip both, else keep it. Merged steps never re-merge.
inline std::pair<Procedure, Alignment> fuse_steps(const Procedure& procedure, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "fusion probability must be in [0, 1]");
  Procedure fused = procedure;
  fused.steps.clear();
  Alignment alignment;
  Rng rng(seed);
  const auto& steps = procedure.steps;
  std::size_t i = 0;
  while (i < steps.size()) {
    const bool can_merge = i + 1 < steps.size();
    if (can_merge && rng.bernoulli(p)) {
      const Step& a = steps[i];
      const Step& b = steps[i + 1];
      Step merged;
      merged.text = fuse_texts(a.text, b.text);
      merged.image_refs = a.image_refs;
      merged.image_refs.insert(merged.image_refs.end(), b.image_refs.begin(), b.image_refs.end());
      merged.atomic = false;
      merged.source = source_of(a);
      for (int s : source_of(b)) merged.source.push_back(s);
      alignment.push_back({a.index, b.index});
      fused.steps.push_back(std::move(merged));
      i += 2;
    } else {
      Step kept = steps[i];
      kept.source = source_of(steps[i]);
      alignment.push_back({steps[i].index});
      fused.steps.push_back(std::move(kept));
      i += 1;
    }
  }
  for (std::size_t k = 0; k < fused.steps.size(); ++k) fused.steps[k].index = static_cast<int>(k + 1);
  return {std::move(fused), std::move(alignment)};
}

}  // namespace copkit
