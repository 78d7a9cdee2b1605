#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace copkit {

struct Decoding {
  double temperature = 0.0;
  int max_output_tokens = 512;

  bool operator==(const Decoding&) const = default;
};

struct ModelRequest {
  std::string instruction;
  std::vector<std::string> image_ids;
  Decoding decoding;

  bool operator==(const ModelRequest&) const = default;
};

struct TokenUsage {
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;

  std::int64_t total() const { return input_tokens + output_tokens; }
  TokenUsage& operator+=(const TokenUsage& o) {
    input_tokens += o.input_tokens;
    output_tokens += o.output_tokens;
    return *this;
  }
  bool operator==(const TokenUsage&) const = default;
};

struct ModelResponse {
  std::string text;
  TokenUsage usage;
  std::string provider_id;
  bool cached = false;

  bool operator==(const ModelResponse&) const = default;
};

inline void to_json(nlohmann::json& j, const Decoding& d) {
  j = nlohmann::json{{"temperature", d.temperature}, {"max_output_tokens", d.max_output_tokens}};
}
inline void from_json(const nlohmann::json& j, Decoding& d) {
  d.temperature = j.value("temperature", 0.0);
  d.max_output_tokens = j.value("max_output_tokens", 512);
}

inline void to_json(nlohmann::json& j, const ModelRequest& r) {
  j = nlohmann::json{{"instruction", r.instruction}, {"image_ids", r.image_ids}, {"decoding", r.decoding}};
}
inline void from_json(const nlohmann::json& j, ModelRequest& r) {
  r.instruction = j.at("instruction").get<std::string>();
  r.image_ids = j.value("image_ids", std::vector<std::string>{});
  r.decoding = j.value("decoding", Decoding{});
}

inline void to_json(nlohmann::json& j, const TokenUsage& u) {
  j = nlohmann::json{{"input_tokens", u.input_tokens}, {"output_tokens", u.output_tokens}};
}
inline void from_json(const nlohmann::json& j, TokenUsage& u) {
  u.input_tokens = j.value("input_tokens", std::int64_t{0});
  u.output_tokens = j.value("output_tokens", std::int64_t{0});
}

inline void to_json(nlohmann::json& j, const ModelResponse& r) {
  j = nlohmann::json{{"text", r.text}, {"usage", r.usage}, {"provider_id", r.provider_id}, {"cached", r.cached}};
}
inline void from_json(const nlohmann::json& j, ModelResponse& r) {
  r.text = j.at("text").get<std::string>();
  r.usage = j.value("usage", TokenUsage{});
  r.provider_id = j.value("provider_id", std::string{});
  r.cached = j.value("cached", false);
}

}  // namespace copkit
