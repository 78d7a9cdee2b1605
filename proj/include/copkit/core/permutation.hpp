#pragma once

#include <cstdint>
#include <utility>

#include "copkit/core/error.hpp"
#include "copkit/core/rng.hpp"
#include "copkit/core/types.hpp"

namespace copkit {

/// Uniform permutation of the steps. Presented steps are renumbered 1..L and keep
/// their original atomic coverage in `source`.
inline std::pair<Procedure, Permutation> permute(const Procedure& procedure, std::uint64_t seed,
                                                 bool force_nonidentity) {
  const std::size_t n = procedure.steps.size();
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "cannot permute an empty procedure");
  if (force_nonidentity && n < 2) {
    throw Error(ErrorCode::kCannotShuffle, "procedure '" + procedure.id + "' has fewer than 2 steps");
  }

  Rng rng(seed);
  Permutation perm;
  perm.seed = seed;
  perm.mapping.resize(n);
  do {
    for (std::size_t i = 0; i < n; ++i) perm.mapping[i] = static_cast<int>(i + 1);
    rng.shuffle(perm.mapping);
  } while (force_nonidentity && perm.is_identity());

  Procedure out = procedure;
  for (std::size_t i = 0; i < n; ++i) {
    const Step& original = procedure.steps[perm.mapping[i] - 1];
    Step s = original;
    s.source = source_of(original);
    s.index = static_cast<int>(i + 1);
    out.steps[i] = std::move(s);
  }
  return {std::move(out), std::move(perm)};
}

/// Restores original order from a permuted presentation.
inline Procedure unpermute(const Procedure& presented, const Permutation& perm) {
  if (presented.steps.size() != perm.size()) {
    throw Error(ErrorCode::kLengthMismatch, "permutation size differs from procedure length");
  }
  std::vector<int> inv = perm.inverse();
  Procedure out = presented;
  for (std::size_t orig = 0; orig < inv.size(); ++orig) {
    Step s = presented.steps[inv[orig] - 1];
    s.index = static_cast<int>(orig + 1);
    out.steps[orig] = std::move(s);
  }
  return out;
}

}  // namespace copkit
