#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <thread>

#include "copkit/core/error.hpp"
#include "copkit/core/text.hpp"
#include "copkit/gateway/request.hpp"

namespace copkit {

/// A vision-language model endpoint. Implementations must be callable from several threads.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual std::string id() const = 0;
  virtual ModelResponse complete(const ModelRequest& request) = 0;
};

using ProviderPtr = std::shared_ptr<Provider>;

struct GatewayOptions {
  int max_in_flight = 4;
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  /// Total token ceiling across all requests; nullopt means unlimited.
  std::optional<std::int64_t> token_ceiling;
};

/// Request validation, bounded concurrency, retry with exponential backoff and a token budget.
class Gateway : public Provider {
 public:
  explicit Gateway(ProviderPtr inner, GatewayOptions options = {})
      : inner_(std::move(inner)), options_(options), slots_(options.max_in_flight < 1 ? 1 : options.max_in_flight) {
    if (!inner_) throw Error(ErrorCode::kInvalidArgument, "gateway needs a provider");
    if (options_.max_attempts < 1) options_.max_attempts = 1;
  }

  std::string id() const override { return inner_->id(); }

  ModelResponse complete(const ModelRequest& request) override {
    if (text::trim_view(request.instruction).empty()) {
      throw Error(ErrorCode::kInvalidArgument, "request instruction is empty");
    }
    if (request.decoding.temperature < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "temperature must be >= 0");
    }
    if (options_.token_ceiling) {
      const auto estimate = static_cast<std::int64_t>(text::whitespace_token_count(request.instruction));
      if (tokens_used_.load() + estimate > *options_.token_ceiling) {
        throw Error(ErrorCode::kBudgetExceeded, "token ceiling " + std::to_string(*options_.token_ceiling) +
                                                    " would be exceeded (used " +
                                                    std::to_string(tokens_used_.load()) + ", request ~" +
                                                    std::to_string(estimate) + ")");
      }
    }

    slots_.acquire();
    struct Release {
      std::counting_semaphore<>& s;
      ~Release() { s.release(); }
    } release{slots_};

    ++requests_;
    auto backoff = options_.initial_backoff;
    for (int attempt = 1;; ++attempt) {
      try {
        ++attempts_;
        ModelResponse response = inner_->complete(request);
        tokens_used_ += response.usage.total();
        return response;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kTransportError || attempt >= options_.max_attempts) throw;
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
      }
    }
  }

  std::int64_t requests() const { return requests_.load(); }
  std::int64_t attempts() const { return attempts_.load(); }
  std::int64_t tokens_used() const { return tokens_used_.load(); }

 private:
  ProviderPtr inner_;
  GatewayOptions options_;
  std::counting_semaphore<> slots_;
  std::atomic<std::int64_t> requests_{0};
  std::atomic<std::int64_t> attempts_{0};
  std::atomic<std::int64_t> tokens_used_{0};
};

/// Validates and dispatches one request through `provider`.
inline ModelResponse complete(Provider& provider, const ModelRequest& request) { return provider.complete(request); }

}  // namespace copkit
