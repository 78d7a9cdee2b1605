#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <thread>
#include <vector>

#include "copkit/cop/result.hpp"
#include "copkit/forge/instance.hpp"

namespace copkit {

/// Runs `fn` over instances on `workers` threads; results come back sorted by
/// instance id regardless of completion order.
inline std::vector<RunResult> run_batch(const std::vector<Instance>& instances,
                                        const std::function<RunResult(const Instance&)>& fn, std::size_t workers = 4) {
  std::vector<RunResult> results(instances.size());
  std::atomic<std::size_t> next{0};
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(instances.size(), 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < instances.size(); i = next++) {
          try {
            results[i] = fn(instances[i]);
          } catch (const std::exception& e) {
            results[i].instance_id = instances[i].id;
            results[i].error = RunError{"batch", "Internal", e.what()};
          }
        }
      });
    }
  }
  std::sort(results.begin(), results.end(),
            [](const RunResult& a, const RunResult& b) { return a.instance_id < b.instance_id; });
  return results;
}

}  // namespace copkit
