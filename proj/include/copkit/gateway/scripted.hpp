#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <regex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "copkit/core/error.hpp"
#include "copkit/core/text.hpp"
#include "copkit/gateway/provider.hpp"

namespace copkit {

/// Deterministic rule-based stand-in for a VLM. The first matching rule answers;
/// token usage is synthesized as whitespace-token counts.
class ScriptedProvider : public Provider {
 public:
  using Matcher = std::function<bool(const ModelRequest&)>;
  using Responder = std::function<std::string(const ModelRequest&)>;

  struct Rule {
    std::string name;
    Matcher match;
    Responder respond;
  };

  explicit ScriptedProvider(std::string id = "scripted", std::string default_text = "")
      : id_(std::move(id)), default_text_(std::move(default_text)) {}

  std::string id() const override { return id_; }

  ScriptedProvider& add_rule(Rule rule) {
    rules_.push_back(std::move(rule));
    return *this;
  }

  ScriptedProvider& when_contains(std::string needle, std::string reply) {
    return add_rule({"contains:" + needle,
                     [needle](const ModelRequest& r) { return r.instruction.find(needle) != std::string::npos; },
                     [reply](const ModelRequest&) { return reply; }});
  }

  ScriptedProvider& when_regex(const std::string& pattern, std::string reply) {
    std::regex re(pattern);
    return add_rule({"regex:" + pattern, [re](const ModelRequest& r) { return std::regex_search(r.instruction, re); },
                     [reply](const ModelRequest&) { return reply; }});
  }

  ScriptedProvider& when_image(std::string image_id, std::string reply) {
    return add_rule({"image:" + image_id,
                     [image_id](const ModelRequest& r) {
                       return std::find(r.image_ids.begin(), r.image_ids.end(), image_id) != r.image_ids.end();
                     },
                     [reply](const ModelRequest&) { return reply; }});
  }

  ScriptedProvider& when_exact(std::string instruction, std::vector<std::string> images, std::string reply) {
    return add_rule({"exact",
                     [instruction, images](const ModelRequest& r) {
                       return r.instruction == instruction && r.image_ids == images;
                     },
                     [reply](const ModelRequest&) { return reply; }});
  }

  void set_default(std::string text) { default_text_ = std::move(text); }

  ModelResponse complete(const ModelRequest& request) override {
    ++calls_;
    std::string reply = default_text_;
    for (const Rule& rule : rules_) {
      if (rule.match(request)) {
        reply = rule.respond(request);
        break;
      }
    }
    ModelResponse response;
    response.text = std::move(reply);
    response.provider_id = id_;
    response.usage.input_tokens =
        static_cast<std::int64_t>(text::whitespace_token_count(request.instruction) + request.image_ids.size());
    response.usage.output_tokens = static_cast<std::int64_t>(text::whitespace_token_count(response.text));
    return response;
  }

  std::int64_t calls() const { return calls_.load(); }

  /// Rules from JSON: `{"id", "default", "rules": [{"contains"|"regex"|"image": ..., "text": ...}]}`.
  static std::shared_ptr<ScriptedProvider> from_json(const nlohmann::json& spec) {
    auto p = std::make_shared<ScriptedProvider>(spec.value("id", std::string("scripted")),
                                                spec.value("default", std::string{}));
    for (const auto& r : spec.value("rules", nlohmann::json::array())) {
      std::string reply = r.at("text").get<std::string>();
      if (r.contains("contains")) {
        p->when_contains(r["contains"].get<std::string>(), reply);
      } else if (r.contains("regex")) {
        p->when_regex(r["regex"].get<std::string>(), reply);
      } else if (r.contains("image")) {
        p->when_image(r["image"].get<std::string>(), reply);
      } else {
        throw Error(ErrorCode::kConfigError, "scripted rule needs one of contains/regex/image");
      }
    }
    return p;
  }

 private:
  std::string id_;
  std::string default_text_;
  std::vector<Rule> rules_;
  std::atomic<std::int64_t> calls_{0};
};

}  // namespace copkit
