#pragma once

#include <string>

#include "copkit/cop/pipeline.hpp"
#include "copkit/embedding/store.hpp"

namespace copkit {

/// Which phases are replaced by embedding retrieval.
enum class ClipMode { kP1, kP3, kFull };

inline std::string to_string(ClipMode m) {
  switch (m) {
    case ClipMode::kP1: return "p1";
    case ClipMode::kP3: return "p3";
    case ClipMode::kFull: return "full";
  }
  return "full";
}

inline ClipMode parse_clip_mode(const std::string& s) {
  const std::string l = text::to_lower(s);
  if (l == "p1") return ClipMode::kP1;
  if (l == "p3") return ClipMode::kP3;
  if (l == "full") return ClipMode::kFull;
  throw Error(ErrorCode::kConfigError, "clip mode must be p1, p3 or full, got '" + s + "'");
}

/// Image and step-text embeddings. Both may refer to the same store.
struct ClipStores {
  const EmbeddingStore& images;
  const EmbeddingStore& steps;
};

/// Cosine between an image and a step; fused steps take the max over their atoms.
inline double clip_step_score(const std::string& image_id, const std::string& procedure_id, const Step& step,
                              const ClipStores& stores) {
  if (!stores.images.contains(image_id)) {
    throw Error(ErrorCode::kMissingEmbedding, "no image embedding for '" + image_id + "'");
  }
  const EmbeddingVector& image = stores.images.at(image_id);
  double best = -2.0;
  for (int atom : source_of(step)) {
    const std::string key = step_embedding_key(procedure_id, atom);
    if (!stores.steps.contains(key)) throw Error(ErrorCode::kMissingEmbedding, "no step embedding for '" + key + "'");
    best = std::max(best, cosine_similarity(image, stores.steps.at(key)));
  }
  return best;
}

/// Index (0-based) of the best-scoring step; ties go to the earliest.
inline std::size_t clip_best_step(const std::string& image_id, const Procedure& p, const ClipStores& stores,
                                  double* score = nullptr) {
  if (p.steps.empty()) throw Error(ErrorCode::kInvalidArgument, "procedure '" + p.id + "' has no steps");
  std::size_t best = 0;
  double best_score = -2.0;
  for (std::size_t i = 0; i < p.steps.size(); ++i) {
    const double s = clip_step_score(image_id, p.id, p.steps[i], stores);
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  if (score) *score = best_score;
  return best;
}

/// Candidate whose best step is closest to the image; ties go to the lowest position.
inline RetrievalResult clip_retrieve(const VisualState& visual, const std::vector<Procedure>& candidates,
                                     const ClipStores& stores, PhaseTrace& trace) {
  if (candidates.empty()) throw Error(ErrorCode::kInvalidArgument, "retrieval needs at least one candidate");
  RetrievalResult result;
  double best = -3.0;
  nlohmann::json scores = nlohmann::json::array();
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    double s = 0.0;
    clip_best_step(visual.image_id, candidates[k], stores, &s);
    scores.push_back(s);
    if (s > best) {
      best = s;
      result.position = static_cast<int>(k);
    }
  }
  trace.artifacts["selected_position"] = result.position;
  trace.artifacts["selected_procedure"] = candidates[static_cast<std::size_t>(result.position)].id;
  trace.artifacts["clip_scores"] = scores;
  return result;
}

/// Embedding-retrieval variants. P1 replaces procedure retrieval, P3 replaces
/// current-step identification, Full replaces both and never calls a provider.
inline RunResult clip_variant(const Instance& instance, ClipMode mode, const ClipStores& stores, Provider* provider,
                              const PipelineConfig& config = {}) {
  if (mode != ClipMode::kFull && provider == nullptr) {
    throw Error(ErrorCode::kConfigError, "clip mode " + to_string(mode) + " needs a provider");
  }
  nlohmann::json hash_input{{"pipeline", config.hash()}, {"clip", to_string(mode)}};
  return detail::guarded_run(
      instance, "clip:" + to_string(mode), io::sha256_hex(hash_input.dump()), [&](RunResult& result, std::string& phase) {
        PhaseTrace& trace = result.trace;
        int position = 0;
        std::optional<TraceRecorder> rec;
        if (provider) rec.emplace(*provider, trace, config.decoding);

        phase = "phase1";
        if (mode == ClipMode::kP3) {
          position = phase1_retrieve(instance.visual, instance.candidates, *rec, config).position;
        } else {
          position = clip_retrieve(instance.visual, instance.candidates, stores, trace).position;
        }
        const Procedure& selected = instance.candidates.at(static_cast<std::size_t>(position));

        Decomposition d = identity_decomposition(selected);
        if (mode != ClipMode::kFull) {
          phase = "phase2";
          d = phase2_decompose(selected, *rec, config);
        }

        phase = "phase3";
        if (mode == ClipMode::kP1) {
          result.prediction = phase3_predict(instance.visual, d, *rec, config);
        } else {
          double score = 0.0;
          const std::size_t current = clip_best_step(instance.visual.image_id, d.working, stores, &score);
          trace.artifacts["current_step"] = current + 1;
          trace.artifacts["current_step_score"] = score;
          result.prediction = successor_prediction(d, static_cast<int>(current + 1));
        }
        result.prediction.selected_procedure_id = selected.id;
        result.prediction.selected_position = position;
      });
}

}  // namespace copkit
