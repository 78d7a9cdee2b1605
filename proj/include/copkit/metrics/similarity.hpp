#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "copkit/core/parse.hpp"
#include "copkit/core/text.hpp"
#include "copkit/embedding/store.hpp"

namespace copkit {

/// Lowercase token-overlap F1. Needs no embeddings.
inline double similarity_fallback(std::string_view prediction, std::string_view reference) {
  return token_overlap_f1(text::word_tokens(prediction), text::word_tokens(reference));
}

/// Greedy max-cosine token matching in both directions, harmonic mean of the
/// two directions. `tokens` maps lowercase word tokens to vectors.
inline double similarity_embedding(std::string_view prediction, std::string_view reference,
                                   const EmbeddingStore& tokens) {
  const auto pred = text::word_tokens(prediction);
  const auto ref = text::word_tokens(reference);
  if (pred.empty() || ref.empty()) return pred.empty() && ref.empty() ? 1.0 : 0.0;
  auto lookup = [&](const std::string& t) -> const EmbeddingVector& {
    if (!tokens.contains(t)) throw Error(ErrorCode::kMissingEmbedding, "no token embedding for '" + t + "'");
    return tokens.at(t);
  };
  auto directional = [&](const std::vector<std::string>& from, const std::vector<std::string>& to) {
    double sum = 0.0;
    for (const auto& a : from) {
      double best = -1.0;
      for (const auto& b : to) best = std::max(best, a == b ? 1.0 : cosine_similarity(lookup(a), lookup(b)));
      sum += best;
    }
    return sum / static_cast<double>(from.size());
  };
  for (const auto& t : pred) lookup(t);
  for (const auto& t : ref) lookup(t);
  const double precision = directional(pred, ref);
  const double recall = directional(ref, pred);
  if (precision + recall <= 0.0) return 0.0;
  return std::clamp(2.0 * precision * recall / (precision + recall), 0.0, 1.0);
}

/// Pluggable similarity: embedding mode when a token store is attached, else fallback.
class SimilarityScorer {
 public:
  SimilarityScorer() = default;
  explicit SimilarityScorer(const EmbeddingStore* tokens) : tokens_(tokens) {}

  double operator()(std::string_view prediction, std::string_view reference) const {
    if (text::trim_view(prediction).empty() || text::trim_view(reference).empty()) {
      throw Error(ErrorCode::kInvalidArgument, "similarity needs non-empty texts");
    }
    return tokens_ ? similarity_embedding(prediction, reference, *tokens_)
                   : similarity_fallback(prediction, reference);
  }

  std::string mode() const { return tokens_ ? "embedding" : "fallback"; }

 private:
  const EmbeddingStore* tokens_ = nullptr;
};

}  // namespace copkit
