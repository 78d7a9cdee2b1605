#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "copkit/core/error.hpp"
#include "copkit/core/io.hpp"

namespace copkit {

inline constexpr std::size_t kDefaultEmbeddingDim = 512;

struct EmbeddingVector {
  std::string id;
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

struct ScoredId {
  std::string id;
  double score = 0.0;

  bool operator==(const ScoredId&) const = default;
};

/// Higher score first, then ascending id.
inline bool ranks_before(const ScoredId& a, const ScoredId& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "cosine of dims " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::kZeroVector, "cosine of an all-zero vector");
  double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, -1.0, 1.0);
}

inline double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  return cosine_similarity(std::span<const double>(a.values), std::span<const double>(b.values));
}

/// Key of the text embedding for atomic step `atomic_index` of a procedure.
inline std::string step_embedding_key(const std::string& procedure_id, int atomic_index) {
  return procedure_id + "#" + std::to_string(atomic_index);
}

/// Fixed-dimension id -> vector map with optional domain tags. Exact search only.
class EmbeddingStore {
 public:
  using Filter = std::function<bool(const std::string&)>;

  EmbeddingStore() = default;
  explicit EmbeddingStore(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  bool contains(const std::string& id) const { return index_.count(id) != 0; }

  void add(EmbeddingVector v, std::string tag = {}) {
    if (v.values.empty()) throw Error(ErrorCode::kDimensionMismatch, "embedding '" + v.id + "' has no values");
    if (dim_ == 0) dim_ = v.dim();
    if (v.dim() != dim_) {
      throw Error(ErrorCode::kDimensionMismatch, "embedding '" + v.id + "' has dim " + std::to_string(v.dim()) +
                                                     ", store dim is " + std::to_string(dim_));
    }
    double sq = 0.0;
    for (double x : v.values) {
      if (!std::isfinite(x)) throw Error(ErrorCode::kParseError, "embedding '" + v.id + "' has a non-finite value");
      sq += x * x;
    }
    if (!index_.emplace(v.id, entries_.size()).second) {
      throw Error(ErrorCode::kParseError, "duplicate embedding id '" + v.id + "'");
    }
    norms_.push_back(std::sqrt(sq));
    tags_.push_back(std::move(tag));
    entries_.push_back(std::move(v));
  }

  /// Adds every entry of `other`; dims must agree.
  void merge(const EmbeddingStore& other) {
    for (std::size_t i = 0; i < other.entries_.size(); ++i) add(other.entries_[i], other.tags_[i]);
  }

  const EmbeddingVector& at(const std::string& id) const { return entries_[position(id)]; }
  const std::string& tag(const std::string& id) const { return tags_[position(id)]; }
  const std::vector<EmbeddingVector>& entries() const { return entries_; }
  const std::string& tag_at(std::size_t i) const { return tags_[i]; }

  double similarity(const std::string& a, const std::string& b) const {
    return cosine_similarity(at(a), at(b));
  }

  /// Exact top-k by cosine among entries passing `filter`, excluding the query itself.
  std::vector<ScoredId> top_k_similar(const std::string& query_id, std::size_t k, const Filter& filter = {}) const {
    if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
    const std::size_t q = position(query_id);
    return rank(entries_[q].values, norms_[q], k, [&](std::size_t i) {
      return i != q && (!filter || filter(entries_[i].id));
    });
  }

  /// Same ranking for an arbitrary query vector.
  std::vector<ScoredId> top_k_for_vector(std::span<const double> query, std::size_t k,
                                         const Filter& filter = {}) const {
    if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
    if (query.size() != dim_) throw Error(ErrorCode::kDimensionMismatch, "query dim differs from store dim");
    double sq = 0.0;
    for (double x : query) sq += x * x;
    return rank(query, std::sqrt(sq), k, [&](std::size_t i) { return !filter || filter(entries_[i].id); });
  }

  bool operator==(const EmbeddingStore& o) const {
    return dim_ == o.dim_ && entries_ == o.entries_ && tags_ == o.tags_;
  }

 private:
  std::size_t position(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw Error(ErrorCode::kUnknownId, "no embedding for '" + id + "'");
    return it->second;
  }

  template <typename Pred>
  std::vector<ScoredId> rank(std::span<const double> query, double query_norm, std::size_t k, Pred keep) const {
    if (query_norm == 0.0) throw Error(ErrorCode::kZeroVector, "query vector is all-zero");
    std::vector<ScoredId> scored;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (!keep(i)) continue;
      if (norms_[i] == 0.0) continue;
      const auto& v = entries_[i].values;
      double dot = 0.0;
      for (std::size_t d = 0; d < v.size(); ++d) dot += query[d] * v[d];
      scored.push_back({entries_[i].id, std::clamp(dot / (query_norm * norms_[i]), -1.0, 1.0)});
    }
    const std::size_t keep_n = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep_n), scored.end(),
                      ranks_before);
    scored.resize(keep_n);
    return scored;
  }

  std::size_t dim_ = 0;
  std::vector<EmbeddingVector> entries_;
  std::vector<double> norms_;
  std::vector<std::string> tags_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// JSONL records `{"id", "domain", "vector": [...]}`; gzip accepted.
inline EmbeddingStore load_store(const std::filesystem::path& path) {
  EmbeddingStore store;
  io::for_each_jsonl(path, [&](const nlohmann::json& r, std::size_t line) {
    EmbeddingVector v;
    try {
      v.id = r.at("id").get<std::string>();
      v.values = r.at("vector").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
    store.add(std::move(v), r.value("domain", std::string{}));
  });
  return store;
}

inline std::string store_to_jsonl(const EmbeddingStore& store) {
  std::string out;
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto& e = store.entries()[i];
    nlohmann::json r{{"id", e.id}, {"domain", store.tag_at(i)}, {"vector", e.values}};
    out += r.dump();
    out.push_back('\n');
  }
  return out;
}

inline void save_store(const std::filesystem::path& path, const EmbeddingStore& store) {
  io::write_atomic(path, store_to_jsonl(store));
}

}  // namespace copkit
