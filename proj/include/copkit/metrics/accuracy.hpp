#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "copkit/core/error.hpp"
#include "copkit/core/text.hpp"

namespace copkit {

/// 100 * matches / total. An empty input scores 0.0 and leaves a warning.
template <typename T>
double exact_accuracy(const std::vector<T>& predictions, const std::vector<T>& labels,
                      std::vector<std::string>* warnings = nullptr) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(predictions.size()) + " predictions but " +
                                                std::to_string(labels.size()) + " labels");
  }
  if (predictions.empty()) {
    if (warnings) warnings->push_back("accuracy over an empty set is reported as 0.0");
    return 0.0;
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (predictions[i] == labels[i]) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(labels.size());
}

/// Next-step correctness: normalized text equality.
inline bool next_step_correct(std::string_view prediction, std::string_view gold) {
  return !text::trim_view(prediction).empty() && text::answers_match(prediction, gold);
}

}  // namespace copkit
