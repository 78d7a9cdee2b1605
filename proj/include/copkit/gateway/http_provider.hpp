#pragma once

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <string>

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "copkit/core/io.hpp"
#include "copkit/gateway/provider.hpp"

namespace copkit {

struct HttpProviderConfig {
  std::string id;
  /// Scheme + host (+ port), e.g. "https://api.openai.com".
  std::string base_url;
  std::string path = "/v1/chat/completions";
  std::string model;
  /// Directory that image ids resolve against.
  std::filesystem::path image_root;
  int timeout_seconds = 120;
  /// Overrides the key lookup; normally read from COPKIT_API_KEY_<ID>.
  std::string api_key;
};

/// `COPKIT_API_KEY_<PROVIDER>` with the provider id upper-cased and non-alphanumerics mapped to '_'.
inline std::string api_key_variable(const std::string& provider_id) {
  std::string name = "COPKIT_API_KEY_";
  for (char c : provider_id) {
    unsigned char u = static_cast<unsigned char>(c);
    name.push_back(std::isalnum(u) ? static_cast<char>(std::toupper(u)) : '_');
  }
  return name;
}

inline std::string image_mime(const std::filesystem::path& p) {
  std::string ext = text::to_lower(p.extension().string());
  if (ext == ".png") return "image/png";
  if (ext == ".webp") return "image/webp";
  if (ext == ".gif") return "image/gif";
  return "image/jpeg";
}

/// OpenAI-compatible chat-completions client; images are sent inline as base64 data URLs.
class HttpProvider : public Provider {
 public:
  explicit HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {
    if (config_.id.empty() || config_.base_url.empty() || config_.model.empty()) {
      throw Error(ErrorCode::kConfigError, "http provider needs id, base_url and model");
    }
    if (config_.api_key.empty()) {
      const std::string var = api_key_variable(config_.id);
      if (const char* v = std::getenv(var.c_str())) config_.api_key = v;
    }
  }

  std::string id() const override { return config_.id; }

  nlohmann::json build_body(const ModelRequest& request) const {
    nlohmann::json content = nlohmann::json::array();
    content.push_back({{"type", "text"}, {"text", request.instruction}});
    for (const std::string& image : request.image_ids) {
      const std::filesystem::path path = resolve_image(image);
      content.push_back({{"type", "image_url"},
                         {"image_url", {{"url", "data:" + image_mime(path) + ";base64," +
                                                    io::base64_encode(io::read_file(path))}}}});
    }
    return {{"model", config_.model},
            {"temperature", request.decoding.temperature},
            {"max_tokens", request.decoding.max_output_tokens},
            {"messages", nlohmann::json::array({{{"role", "user"}, {"content", content}}})}};
  }

  ModelResponse complete(const ModelRequest& request) override {
    const std::string body = build_body(request).dump();
    httplib::Client client(config_.base_url);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    auto result = client.Post(config_.path, headers, body, "application/json");
    if (!result) {
      throw Error(ErrorCode::kTransportError, config_.id + ": " + httplib::to_string(result.error()));
    }
    const int status = result->status;
    if (status == 429 || status >= 500) {
      throw Error(ErrorCode::kTransportError, config_.id + ": HTTP " + std::to_string(status));
    }
    if (status == 401 || status == 403) {
      throw Error(ErrorCode::kConfigError, config_.id + ": HTTP " + std::to_string(status) + " (check " +
                                               api_key_variable(config_.id) + ")");
    }
    if (status >= 400) {
      throw Error(ErrorCode::kProviderRefusal, config_.id + ": HTTP " + std::to_string(status) + ": " + result->body);
    }
    return parse_response(result->body);
  }

  ModelResponse parse_response(const std::string& body) const {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kTransportError, config_.id + ": malformed response body: " + e.what());
    }
    if (!j.contains("choices") || j["choices"].empty()) {
      throw Error(ErrorCode::kTransportError, config_.id + ": response has no choices");
    }
    const auto& choice = j["choices"][0];
    const auto& message = choice.value("message", nlohmann::json::object());
    if (message.contains("refusal") && message["refusal"].is_string()) {
      throw Error(ErrorCode::kProviderRefusal, config_.id + ": " + message["refusal"].get<std::string>());
    }
    if (choice.value("finish_reason", std::string{}) == "content_filter") {
      throw Error(ErrorCode::kProviderRefusal, config_.id + ": content filtered");
    }
    ModelResponse response;
    response.provider_id = config_.id;
    if (message.contains("content") && message["content"].is_string()) {
      response.text = message["content"].get<std::string>();
    }
    if (j.contains("usage")) {
      response.usage.input_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
      response.usage.output_tokens = j["usage"].value("completion_tokens", std::int64_t{0});
    }
    return response;
  }

 private:
  std::filesystem::path resolve_image(const std::string& image_id) const {
    std::filesystem::path base = config_.image_root / image_id;
    if (std::filesystem::exists(base)) return base;
    for (const char* ext : {".jpg", ".jpeg", ".png", ".webp"}) {
      std::filesystem::path candidate = base;
      candidate += ext;
      if (std::filesystem::exists(candidate)) return candidate;
    }
    throw Error(ErrorCode::kIoError, "image '" + image_id + "' not found under " + config_.image_root.string());
  }

  HttpProviderConfig config_;
};

}  // namespace copkit
