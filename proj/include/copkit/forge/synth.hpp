#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "copkit/core/corpus.hpp"
#include "copkit/core/rng.hpp"
#include "copkit/embedding/store.hpp"

namespace copkit {

struct SynthConfig {
  std::uint64_t seed = 0;
  int procedures_per_domain = 20;
  int min_steps = 3;
  int max_steps = 12;
  std::size_t dim = kDefaultEmbeddingDim;
  std::vector<std::string> domains{"cars", "computers", "hobbies", "sports", "work"};
};

inline void from_json(const nlohmann::json& j, SynthConfig& c) {
  SynthConfig d;
  c.seed = j.value("seed", d.seed);
  c.procedures_per_domain = j.value("procedures_per_domain", d.procedures_per_domain);
  c.min_steps = j.value("min_steps", d.min_steps);
  c.max_steps = j.value("max_steps", d.max_steps);
  c.dim = j.value("dim", d.dim);
  c.domains = j.value("domains", d.domains);
}

/// Generated corpus with deterministic pseudo-embeddings.
/// image_store: one vector per step image, tagged with the domain.
/// step_store:  step-text vectors keyed "<procedure>#<step>".
/// text_store:  one whole-procedure text vector keyed by procedure id.
struct SynthCorpus {
  Corpus corpus;
  EmbeddingStore image_store;
  EmbeddingStore step_store;
  EmbeddingStore text_store;
  /// Counts the generator itself recorded, independent of any statistics code.
  nlohmann::json ledger;
};

namespace detail {

inline std::vector<double> gaussian_vector(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  for (std::size_t i = 0; i < dim; i += 2) {
    double u1 = rng.uniform01();
    double u2 = rng.uniform01();
    if (u1 < 1e-300) u1 = 1e-300;
    const double r = std::sqrt(-2.0 * std::log(u1));
    v[i] = r * std::cos(2.0 * M_PI * u2);
    if (i + 1 < dim) v[i + 1] = r * std::sin(2.0 * M_PI * u2);
  }
  return v;
}

inline std::vector<double> mix(std::initializer_list<std::pair<double, const std::vector<double>*>> parts) {
  std::vector<double> out(parts.begin()->second->size(), 0.0);
  for (const auto& [w, v] : parts) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * (*v)[i];
  }
  double n = 0.0;
  for (double x : out) n += x * x;
  n = std::sqrt(n);
  for (double& x : out) x /= n;
  return out;
}

inline const std::vector<std::string>& domain_objects(const std::string& domain) {
  static const std::map<std::string, std::vector<std::string>> kObjects{
      {"cars", {"radiator cap", "coolant reservoir", "oil dipstick", "brake pedal", "spare tire", "lug nuts",
                "air filter", "wiper blade", "battery terminal", "fuse box", "jack stand", "hood latch"}},
      {"computers", {"command prompt", "power cable", "hard drive", "settings menu", "backup folder",
                     "network adapter", "keyboard shortcut", "system update", "browser cache", "USB port",
                     "graphics driver", "recovery disk"}},
      {"hobbies", {"frisket film", "watercolor paper", "paint brush", "craft knife", "glue gun", "yarn skein",
                   "sketch outline", "clay block", "stencil sheet", "bead string", "sewing needle", "canvas frame"}},
      {"sports", {"ski boots", "ski poles", "yoga mat", "jump rope", "tennis racket", "resistance band",
                  "running shoes", "water bottle", "helmet strap", "warm-up routine", "knee pads", "dumbbell set"}},
      {"work", {"meeting agenda", "feedback notes", "status report", "calendar invite", "project brief",
                "team roster", "expense form", "follow-up email", "job description", "interview questions",
                "task board", "review checklist"}},
  };
  static const std::vector<std::string> kGeneric{"main part", "side panel", "top cover", "base plate",
                                                 "front edge", "rear section", "inner layer", "outer shell",
                                                 "left handle", "right handle", "small piece", "large piece"};
  auto it = kObjects.find(domain);
  return it == kObjects.end() ? kGeneric : it->second;
}

inline const std::vector<std::string>& verbs() {
  static const std::vector<std::string> kVerbs{"Open", "Check", "Remove", "Attach", "Clean", "Inspect", "Adjust",
                                               "Tighten", "Replace", "Prepare", "Secure", "Measure", "Mark",
                                               "Lift", "Align", "Test"};
  return kVerbs;
}

}  // namespace detail

/// Deterministic corpus: procedures with random lengths in [min_steps, max_steps],
/// one image per step. Same-domain vectors share a domain direction, so hard
/// negatives are meaningful; a step's text vector sits close to its image vector.
inline SynthCorpus generate_synthetic_corpus(const SynthConfig& config) {
  if (config.min_steps < 1 || config.max_steps < config.min_steps) {
    throw Error(ErrorCode::kConfigError, "synthetic step range is invalid");
  }
  if (config.dim < 2) throw Error(ErrorCode::kConfigError, "embedding dim must be >= 2");
  SynthCorpus out;
  std::vector<Procedure> procedures;
  nlohmann::json domain_counts = nlohmann::json::object();
  std::map<int, int> length_counts;
  std::size_t images = 0;

  for (const std::string& domain : config.domains) {
    Rng domain_rng(derive_seed(config.seed, "domain/" + domain));
    const std::vector<double> domain_dir = detail::gaussian_vector(domain_rng, config.dim);
    const auto& objects = detail::domain_objects(domain);
    const auto& verbs = detail::verbs();
    for (int k = 0; k < config.procedures_per_domain; ++k) {
      Procedure p;
      p.id = domain + "-" + std::to_string(k + 1);
      p.domain = domain;
      Rng rng(derive_seed(config.seed, "procedure/" + p.id));
      const int length =
          config.min_steps + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(config.max_steps - config.min_steps + 1)));
      const std::string& topic = objects[rng.uniform_index(objects.size())];
      p.title = "How to service the " + topic + " (" + p.id + ")";
      const std::vector<double> proc_dir = detail::gaussian_vector(rng, config.dim);
      const std::vector<double> text_noise = detail::gaussian_vector(rng, config.dim);
      out.text_store.add({p.id, detail::mix({{0.6, &domain_dir}, {0.5, &proc_dir}, {0.3, &text_noise}})}, domain);

      const auto pairs = rng.sample_indices(verbs.size() * objects.size(), static_cast<std::size_t>(length));
      for (int s = 1; s <= length; ++s) {
        const std::size_t pair = pairs[static_cast<std::size_t>(s - 1)];
        Step step;
        step.index = s;
        step.text = verbs[pair / objects.size()] + " the " + objects[pair % objects.size()] + " for part " +
                    std::to_string(k + 1) + "-" + std::to_string(s) + ".";
        const std::string image_id = "img-" + p.id + "-" + std::to_string(s);
        step.image_refs.push_back(image_id);

        const std::vector<double> step_dir = detail::gaussian_vector(rng, config.dim);
        const std::vector<double> img_noise = detail::gaussian_vector(rng, config.dim);
        const std::vector<double> txt_noise = detail::gaussian_vector(rng, config.dim);
        out.image_store.add(
            {image_id, detail::mix({{0.6, &domain_dir}, {0.5, &proc_dir}, {0.6, &step_dir}, {0.15, &img_noise}})},
            domain);
        out.step_store.add({step_embedding_key(p.id, s),
                            detail::mix({{0.6, &domain_dir}, {0.5, &proc_dir}, {0.6, &step_dir}, {0.15, &txt_noise}})},
                           domain);
        ++images;
        p.steps.push_back(std::move(step));
      }
      domain_counts[domain] = domain_counts.value(domain, 0) + 1;
      ++length_counts[length];
      procedures.push_back(std::move(p));
    }
  }
  out.corpus = Corpus(std::move(procedures));
  nlohmann::json lengths = nlohmann::json::object();
  for (const auto& [len, n] : length_counts) lengths[std::to_string(len)] = n;
  out.ledger = {{"seed", config.seed},
                {"procedures", out.corpus.size()},
                {"images", images},
                {"domains", domain_counts},
                {"lengths", lengths}};
  return out;
}

}  // namespace copkit
