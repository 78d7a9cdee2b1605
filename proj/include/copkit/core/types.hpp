#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "copkit/core/error.hpp"

namespace copkit {

using json = nlohmann::json;

/// One instruction of a procedure. `source` lists the atomic step indices a
/// (possibly fused or decomposed) step covers; empty means {index}.
struct Step {
  int index = 1;
  std::string text;
  std::vector<std::string> image_refs;
  bool atomic = true;
  std::vector<int> source;

  bool operator==(const Step&) const = default;
};

/// An ordered workflow S_1..S_L. "Procedure", "instruction" and "manual" name the same thing here.
struct Procedure {
  std::string id;
  std::string domain;
  std::string title;
  std::vector<Step> steps;

  std::size_t length() const { return steps.size(); }
  bool operator==(const Procedure&) const = default;
};

/// Image of the state right after step `after_step` of `source_procedure`.
struct VisualState {
  std::string image_id;
  std::string source_procedure;
  int after_step = 1;

  bool operator==(const VisualState&) const = default;
};

/// 1-based bijection: presented position i shows original step mapping[i-1].
struct Permutation {
  std::vector<int> mapping;
  std::uint64_t seed = 0;

  std::size_t size() const { return mapping.size(); }

  bool is_identity() const {
    for (std::size_t i = 0; i < mapping.size(); ++i) {
      if (mapping[i] != static_cast<int>(i + 1)) return false;
    }
    return true;
  }

  /// inverse()[original-1] = presented position.
  std::vector<int> inverse() const {
    std::vector<int> inv(mapping.size(), 0);
    for (std::size_t i = 0; i < mapping.size(); ++i) {
      int target = mapping[i];
      if (target < 1 || target > static_cast<int>(mapping.size()) || inv[target - 1] != 0) {
        throw Error(ErrorCode::kInvalidArgument, "permutation is not a bijection");
      }
      inv[target - 1] = static_cast<int>(i + 1);
    }
    return inv;
  }

  bool operator==(const Permutation&) const = default;
};

inline void to_json(json& j, const Step& s) {
  j = json{{"index", s.index}, {"text", s.text}, {"image_refs", s.image_refs}};
  if (!s.atomic) j["atomic"] = false;
  if (!s.source.empty()) j["source"] = s.source;
}

inline void from_json(const json& j, Step& s) {
  s.index = j.at("index").get<int>();
  s.text = j.at("text").get<std::string>();
  s.image_refs = j.value("image_refs", std::vector<std::string>{});
  s.atomic = j.value("atomic", true);
  s.source = j.value("source", std::vector<int>{});
}

inline void to_json(json& j, const Procedure& p) {
  j = json{{"id", p.id}, {"domain", p.domain}, {"title", p.title}, {"steps", p.steps}};
}

inline void from_json(const json& j, Procedure& p) {
  p.id = j.at("id").get<std::string>();
  p.domain = j.value("domain", std::string{});
  p.title = j.value("title", std::string{});
  p.steps = j.at("steps").get<std::vector<Step>>();
}

inline void to_json(json& j, const VisualState& v) {
  j = json{{"image_id", v.image_id}, {"source_procedure", v.source_procedure}, {"after_step", v.after_step}};
}

inline void from_json(const json& j, VisualState& v) {
  v.image_id = j.at("image_id").get<std::string>();
  v.source_procedure = j.at("source_procedure").get<std::string>();
  v.after_step = j.at("after_step").get<int>();
}

inline void to_json(json& j, const Permutation& p) { j = json{{"mapping", p.mapping}, {"seed", p.seed}}; }

inline void from_json(const json& j, Permutation& p) {
  p.mapping = j.at("mapping").get<std::vector<int>>();
  p.seed = j.value("seed", std::uint64_t{0});
}

/// Atomic indices covered by a step.
inline std::vector<int> source_of(const Step& s) {
  return s.source.empty() ? std::vector<int>{s.index} : s.source;
}

}  // namespace copkit
