#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "copkit/core/corpus.hpp"
#include "copkit/core/rng.hpp"
#include "copkit/embedding/store.hpp"
#include "copkit/forge/config.hpp"

namespace copkit {

namespace detail {

// Images that may act as distractors: known to the corpus, same domain as the
// positive, from a different procedure.
inline EmbeddingStore::Filter distractor_filter(const Corpus& corpus, const std::string& positive_id,
                                                const std::string& domain) {
  return [&corpus, positive_id, domain](const std::string& image_id) {
    const ImageLocation* loc = corpus.locate_image(image_id);
    if (loc == nullptr || loc->procedure_id == positive_id) return false;
    return corpus.at(loc->procedure_id).domain == domain;
  };
}

}  // namespace detail

/// Distractor procedure ids for a query image, N-1 of them.
inline std::vector<std::string> mine_negatives(const VisualState& visual, const EmbeddingStore& store,
                                               const Corpus& corpus, const ForgeConfig& config) {
  if (!store.contains(visual.image_id)) {
    throw Error(ErrorCode::kMissingEmbedding, "query image '" + visual.image_id + "' is not in the store");
  }
  const std::size_t wanted = static_cast<std::size_t>(config.num_candidates - 1);
  const std::string& domain = corpus.at(visual.source_procedure).domain;
  const auto filter = detail::distractor_filter(corpus, visual.source_procedure, domain);

  std::vector<std::string> chosen;
  if (config.negative_strategy == NegativeStrategy::kTopK) {
    const std::size_t depth = config.mining_k > 0 ? static_cast<std::size_t>(config.mining_k) : store.size();
    std::set<std::string> seen;
    for (const ScoredId& hit : store.top_k_similar(visual.image_id, depth, filter)) {
      const std::string& pid = corpus.locate_image(hit.id)->procedure_id;
      if (seen.insert(pid).second) chosen.push_back(pid);
      if (chosen.size() == wanted) break;
    }
  } else {
    std::set<std::string> eligible;
    for (const auto& e : store.entries()) {
      if (filter(e.id)) eligible.insert(corpus.locate_image(e.id)->procedure_id);
    }
    std::vector<std::string> pool(eligible.begin(), eligible.end());
    Rng rng(derive_seed(config.seed, "negatives/" + visual.image_id));
    for (std::size_t i : rng.sample_indices(pool.size(), wanted)) chosen.push_back(pool[i]);
  }

  if (chosen.size() < wanted) {
    throw Error(ErrorCode::kInsufficientPool, "image '" + visual.image_id + "' has " + std::to_string(chosen.size()) +
                                                  " eligible distractor procedures, need " + std::to_string(wanted));
  }
  return chosen;
}

}  // namespace copkit
