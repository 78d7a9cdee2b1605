#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "copkit/core/corpus.hpp"
#include "copkit/core/io.hpp"
#include "copkit/core/rng.hpp"
#include "copkit/core/validate.hpp"
#include "copkit/embedding/store.hpp"
#include "copkit/forge/config.hpp"
#include "copkit/forge/fusion.hpp"
#include "copkit/forge/mining.hpp"

namespace copkit {

/// One benchmark item: query image v_t, candidate procedures C, label y.
struct Instance {
  std::string id;
  VisualState visual;
  std::vector<Procedure> candidates;
  int label = 0;
  std::string gold_next_step;
  std::string domain;
  /// Atomic (pre-fusion) step texts of the positive procedure.
  std::vector<std::string> source_steps;
  /// slots[i] is the pre-shuffle slot of candidate i (0 = positive).
  std::vector<int> slots;
  std::uint64_t seed = 0;

  const Procedure& positive() const { return candidates.at(static_cast<std::size_t>(label)); }
  std::size_t step_length() const { return source_steps.size(); }

  /// Atomic positive procedure rebuilt from `source_steps`.
  Procedure source_procedure() const {
    Procedure p;
    p.id = visual.source_procedure;
    p.domain = domain;
    p.title = positive().title;
    for (std::size_t i = 0; i < source_steps.size(); ++i) {
      Step s;
      s.index = static_cast<int>(i + 1);
      s.text = source_steps[i];
      p.steps.push_back(std::move(s));
    }
    return p;
  }

  /// Fused step -> atomic steps of the positive.
  Alignment alignment() const {
    Alignment out;
    for (const Step& s : positive().steps) out.push_back(source_of(s));
    return out;
  }
};

inline void to_json(nlohmann::json& j, const Instance& in) {
  nlohmann::json candidates = nlohmann::json::array();
  for (const Procedure& c : in.candidates) {
    candidates.push_back({{"procedure_id", c.id}, {"title", c.title}, {"domain", c.domain}, {"steps", c.steps}});
  }
  j = nlohmann::json{{"id", in.id},
                     {"image", in.visual.image_id},
                     {"after_step", in.visual.after_step},
                     {"candidates", candidates},
                     {"label", in.label},
                     {"gold_next_step", in.gold_next_step},
                     {"meta",
                      {{"source_procedure", in.visual.source_procedure},
                       {"domain", in.domain},
                       {"step_length", in.source_steps.size()},
                       {"source_steps", in.source_steps},
                       {"slots", in.slots},
                       {"seed", in.seed}}}};
}

inline void from_json(const nlohmann::json& j, Instance& in) {
  in.id = j.at("id").get<std::string>();
  in.visual.image_id = j.at("image").get<std::string>();
  in.visual.after_step = j.at("after_step").get<int>();
  in.candidates.clear();
  for (const auto& c : j.at("candidates")) {
    Procedure p;
    p.id = c.at("procedure_id").get<std::string>();
    p.title = c.value("title", std::string{});
    p.domain = c.value("domain", std::string{});
    p.steps = c.at("steps").get<std::vector<Step>>();
    in.candidates.push_back(std::move(p));
  }
  in.label = j.at("label").get<int>();
  in.gold_next_step = j.at("gold_next_step").get<std::string>();
  const auto& meta = j.value("meta", nlohmann::json::object());
  in.domain = meta.value("domain", std::string{});
  in.source_steps = meta.value("source_steps", std::vector<std::string>{});
  in.slots = meta.value("slots", std::vector<int>{});
  in.seed = meta.value("seed", std::uint64_t{0});
  in.visual.source_procedure =
      meta.value("source_procedure", in.label >= 0 && static_cast<std::size_t>(in.label) < in.candidates.size()
                                         ? in.candidates[static_cast<std::size_t>(in.label)].id
                                         : std::string{});
  if (in.label < 0 || static_cast<std::size_t>(in.label) >= in.candidates.size()) {
    throw Error(ErrorCode::kParseError, "instance '" + in.id + "' label out of range");
  }
}

inline std::vector<Instance> load_instances(const std::filesystem::path& path) {
  std::vector<Instance> out;
  io::for_each_jsonl(path, [&](const nlohmann::json& r, std::size_t line) {
    try {
      out.push_back(r.get<Instance>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

inline std::string instance_id(const VisualState& v) {
  return v.source_procedure + ":" + std::to_string(v.after_step) + ":" + v.image_id;
}

/// Fused form of a procedure; seeded per procedure so it is stable across instances.
inline Procedure fused_candidate(const Procedure& p, const ForgeConfig& config) {
  return fuse_steps(p, config.fusion_probability, derive_seed(config.seed, "fuse/" + p.id)).first;
}

inline Instance build_instance(const VisualState& visual, const Corpus& corpus, const EmbeddingStore& store,
                               const ForgeConfig& config) {
  const Procedure& source = corpus.at(visual.source_procedure);
  const int length = static_cast<int>(source.steps.size());
  if (visual.after_step < 1 || visual.after_step >= length) {
    throw Error(ErrorCode::kIndexOutOfRange, "after_step " + std::to_string(visual.after_step) +
                                                 " has no next step in '" + source.id + "' (L=" +
                                                 std::to_string(length) + ")");
  }

  std::vector<Procedure> slots;
  slots.push_back(fused_candidate(source, config));
  for (const std::string& pid : mine_negatives(visual, store, corpus, config)) {
    const Procedure& neg = corpus.at(pid);
    slots.push_back(config.fuse_negatives ? fused_candidate(neg, config) : neg);
  }

  Instance in;
  in.id = instance_id(visual);
  in.visual = visual;
  in.domain = source.domain;
  in.seed = derive_seed(config.seed, "instance/" + in.id);
  for (const Step& s : source.steps) in.source_steps.push_back(s.text);
  in.gold_next_step = source.steps[static_cast<std::size_t>(visual.after_step)].text;

  in.slots.resize(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i) in.slots[i] = static_cast<int>(i);
  Rng rng(derive_seed(in.seed, "order"));
  rng.shuffle(in.slots);
  for (std::size_t i = 0; i < in.slots.size(); ++i) {
    in.candidates.push_back(slots[static_cast<std::size_t>(in.slots[i])]);
    if (in.slots[i] == 0) in.label = static_cast<int>(i);
  }
  return in;
}

struct SkippedVisual {
  VisualState visual;
  std::string reason;
};

struct ForgeOutput {
  std::vector<Instance> instances;
  std::vector<SkippedVisual> skipped;
  std::vector<std::string> invalid_procedures;
};

/// Query images for one procedure: up to `visuals_per_procedure` distinct steps
/// t < L whose image is embedded, sampled with a per-procedure seed.
inline std::vector<VisualState> select_visuals(const Procedure& p, const EmbeddingStore& store,
                                               const ForgeConfig& config) {
  std::vector<VisualState> pool;
  for (std::size_t i = 0; i + 1 < p.steps.size(); ++i) {
    for (const std::string& img : p.steps[i].image_refs) {
      if (store.contains(img)) {
        pool.push_back({img, p.id, p.steps[i].index});
        break;
      }
    }
  }
  Rng rng(derive_seed(config.seed, "visual/" + p.id));
  std::vector<VisualState> chosen;
  for (std::size_t i : rng.sample_indices(pool.size(), static_cast<std::size_t>(config.visuals_per_procedure))) {
    chosen.push_back(pool[i]);
  }
  std::sort(chosen.begin(), chosen.end(), [](const auto& a, const auto& b) { return a.after_step < b.after_step; });
  return chosen;
}

inline ForgeOutput forge_dataset(const Corpus& corpus, const EmbeddingStore& store, const ForgeConfig& config) {
  config.validate();
  ForgeOutput out;
  for (const Procedure& p : corpus.procedures()) {
    if (!validate_procedure(p).ok()) {
      out.invalid_procedures.push_back(p.id);
      continue;
    }
    for (const VisualState& v : select_visuals(p, store, config)) {
      try {
        out.instances.push_back(build_instance(v, corpus, store, config));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kInsufficientPool) throw;
        out.skipped.push_back({v, e.what()});
      }
    }
  }
  return out;
}

}  // namespace copkit
