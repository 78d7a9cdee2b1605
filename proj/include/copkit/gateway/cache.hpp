#pragma once

#include <array>
#include <atomic>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "copkit/core/io.hpp"
#include "copkit/gateway/provider.hpp"

namespace copkit {

/// Content address of a request for a given provider.
inline std::string cache_key(const std::string& provider_id, const ModelRequest& request) {
  nlohmann::json key{{"provider", provider_id},
                     {"instruction", request.instruction},
                     {"image_ids", request.image_ids},
                     {"temperature", request.decoding.temperature},
                     {"max_output_tokens", request.decoding.max_output_tokens}};
  return io::sha256_hex(key.dump());
}

/// Replays stored responses by key; one file per key named `<hex>.json`.
class CachingProvider : public Provider {
 public:
  CachingProvider(ProviderPtr inner, std::filesystem::path dir) : inner_(std::move(inner)), dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_)) {
      throw Error(ErrorCode::kCacheIoError, "cannot create cache directory " + dir_.string());
    }
  }

  std::string id() const override { return inner_->id(); }

  ModelResponse complete(const ModelRequest& request) override {
    const std::string key = cache_key(inner_->id(), request);
    const std::filesystem::path file = dir_ / (key + ".json");
    std::lock_guard lock(stripe(key));
    if (auto hit = read_entry(file)) {
      ++hits_;
      hit->cached = true;
      return *hit;
    }
    ++misses_;
    ModelResponse response = inner_->complete(request);
    response.cached = false;
    try {
      nlohmann::json entry = response;
      entry["key"] = key;
      io::write_atomic(file, entry.dump());
    } catch (const Error& e) {
      throw Error(ErrorCode::kCacheIoError, e.what());
    }
    return response;
  }

  std::int64_t hits() const { return hits_.load(); }
  std::int64_t misses() const { return misses_.load(); }
  const std::filesystem::path& directory() const { return dir_; }

 private:
  // Corrupt or unreadable entries count as misses and get rewritten.
  static std::optional<ModelResponse> read_entry(const std::filesystem::path& file) {
    std::error_code ec;
    if (!std::filesystem::exists(file, ec)) return std::nullopt;
    try {
      return nlohmann::json::parse(io::read_file(file)).get<ModelResponse>();
    } catch (...) {
      return std::nullopt;
    }
  }

  std::mutex& stripe(const std::string& key) {
    std::size_t h = std::hash<std::string>{}(key);
    return stripes_[h % stripes_.size()];
  }

  ProviderPtr inner_;
  std::filesystem::path dir_;
  std::array<std::mutex, 64> stripes_;
  std::atomic<std::int64_t> hits_{0};
  std::atomic<std::int64_t> misses_{0};
};

inline ProviderPtr with_cache(ProviderPtr provider, const std::filesystem::path& cache_dir) {
  return std::make_shared<CachingProvider>(std::move(provider), cache_dir);
}

}  // namespace copkit
