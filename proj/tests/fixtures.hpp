#pragma once

#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "copkit/copkit.hpp"

namespace fixtures {

inline copkit::Procedure procedure(const std::string& id, std::vector<std::string> texts,
                                   const std::string& domain = "cars") {
  copkit::Procedure p;
  p.id = id;
  p.domain = domain;
  p.title = "How to " + id;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    copkit::Step s;
    s.index = static_cast<int>(i + 1);
    s.text = texts[i];
    s.image_refs = {"img-" + id + "-" + std::to_string(i + 1)};
    p.steps.push_back(std::move(s));
  }
  return p;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("copkit-" + tag + "-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Synthetic corpus forged into instances, shared by pipeline-level tests.
struct Bench {
  copkit::SynthCorpus synth;
  std::vector<copkit::Instance> instances;
};

inline Bench make_bench(std::uint64_t seed, int per_domain, double fusion_p = 0.5, std::size_t limit = 0) {
  copkit::SynthConfig sc;
  sc.seed = seed;
  sc.procedures_per_domain = per_domain;
  Bench b{copkit::generate_synthetic_corpus(sc), {}};
  copkit::ForgeConfig fc;
  fc.seed = seed;
  fc.fusion_probability = fusion_p;
  b.instances = copkit::forge_dataset(b.synth.corpus, b.synth.image_store, fc).instances;
  if (b.instances.empty()) throw std::runtime_error("bench has no instances; raise per_domain");
  if (limit && b.instances.size() > limit) b.instances.resize(limit);
  return b;
}

}  // namespace fixtures
