#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "copkit/core/io.hpp"
#include "copkit/core/types.hpp"

namespace copkit {

/// Where an image sits inside the corpus.
struct ImageLocation {
  std::string procedure_id;
  int step = 0;
};

/// Procedures in file order plus id and image lookups.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Procedure> procedures) : procedures_(std::move(procedures)) { reindex(); }

  const std::vector<Procedure>& procedures() const { return procedures_; }
  std::size_t size() const { return procedures_.size(); }

  const Procedure& at(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) throw Error(ErrorCode::kUnknownId, "unknown procedure '" + id + "'");
    return procedures_[it->second];
  }

  bool contains(const std::string& id) const { return by_id_.count(id) != 0; }

  const ImageLocation* locate_image(const std::string& image_id) const {
    auto it = images_.find(image_id);
    return it == images_.end() ? nullptr : &it->second;
  }

 private:
  void reindex() {
    by_id_.clear();
    images_.clear();
    for (std::size_t i = 0; i < procedures_.size(); ++i) {
      const Procedure& p = procedures_[i];
      if (!by_id_.emplace(p.id, i).second) {
        throw Error(ErrorCode::kParseError, "duplicate procedure id '" + p.id + "'");
      }
      for (const Step& s : p.steps) {
        for (const std::string& img : s.image_refs) images_.emplace(img, ImageLocation{p.id, s.index});
      }
    }
  }

  std::vector<Procedure> procedures_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::unordered_map<std::string, ImageLocation> images_;
};

inline Corpus load_corpus(const std::filesystem::path& path) {
  std::vector<Procedure> procedures;
  io::for_each_jsonl(path, [&](const json& record, std::size_t line) {
    try {
      procedures.push_back(record.get<Procedure>());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParseError, path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return Corpus(std::move(procedures));
}

inline void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  io::write_atomic(path, io::to_jsonl(corpus.procedures()));
}

}  // namespace copkit
