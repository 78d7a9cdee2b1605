#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"

using namespace copkit;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(dim);
  for (auto& x : v) x = n(rng);
  return v;
}

// Brute force: long-double cosine, full sort, then truncate.
std::vector<ScoredId> brute_top_k(const EmbeddingStore& store, const std::string& q, std::size_t k,
                                  const EmbeddingStore::Filter& keep = {}) {
  const auto& qv = store.at(q).values;
  std::vector<std::pair<long double, std::string>> all;
  for (const auto& e : store.entries()) {
    if (e.id == q || (keep && !keep(e.id))) continue;
    long double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < qv.size(); ++i) {
      dot += static_cast<long double>(qv[i]) * e.values[i];
      na += static_cast<long double>(qv[i]) * qv[i];
      nb += static_cast<long double>(e.values[i]) * e.values[i];
    }
    all.emplace_back(dot / std::sqrt(na * nb), e.id);
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<ScoredId> out;
  for (std::size_t i = 0; i < std::min(k, all.size()); ++i) {
    out.push_back({all[i].second, static_cast<double>(all[i].first)});
  }
  return out;
}

}  // namespace

TEST(Cosine, BasicIdentities) {
  EXPECT_DOUBLE_EQ(cosine_similarity(std::vector<double>{3, -1, 2}, std::vector<double>{3, -1, 2}), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 0.0);
}

TEST(Cosine, MatchesDirectFormula) {
  // 32 / sqrt(14 * 77), evaluated in long double.
  const long double expected = 32.0L / std::sqrt(14.0L * 77.0L);
  EXPECT_NEAR(cosine_similarity(std::vector<double>{1, 2, 3}, std::vector<double>{4, 5, 6}),
              static_cast<double>(expected), 1e-15);
}

TEST(Cosine, ErrorsAndProperties) {
  EXPECT_THROW(cosine_similarity(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}), Error);
  try {
    cosine_similarity(std::vector<double>{0, 0}, std::vector<double>{1, 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroVector);
  }
  std::mt19937_64 rng(3);
  for (int t = 0; t < 500; ++t) {
    auto a = random_vector(rng, 16), b = random_vector(rng, 16);
    const double ab = cosine_similarity(a, b);
    EXPECT_DOUBLE_EQ(ab, cosine_similarity(b, a));
    auto scaled = a;
    for (auto& x : scaled) x *= 3.5;
    EXPECT_NEAR(cosine_similarity(scaled, b), ab, 1e-12);
    EXPECT_LE(std::abs(ab), 1.0 + 1e-9);
  }
}

TEST(Store, RejectsBadVectors) {
  EmbeddingStore s;
  s.add({"a", {1, 2, 3}});
  try {
    s.add({"b", {1, 2}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
  EXPECT_THROW(s.add({"a", {1, 1, 1}}), Error);
  EXPECT_THROW(s.add({"c", {1, NAN, 1}}), Error);
  try {
    s.top_k_similar("zzz", 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownId);
  }
}

TEST(Store, SaturationAndDuplicate) {
  EmbeddingStore s;
  s.add({"q", {1, 1, 0}});
  s.add({"dup", {2, 2, 0}});
  s.add({"x", {0, 1, 0}});
  s.add({"y", {0, 0, 1}});
  auto top = s.top_k_similar("q", 10);
  ASSERT_EQ(top.size(), 3u);
  EXPECT_EQ(top[0].id, "dup");
  EXPECT_NEAR(top[0].score, 1.0, 1e-12);
  EXPECT_EQ(top[2].id, "y");
}

TEST(Store, TiesBreakByAscendingId) {
  EmbeddingStore s;
  s.add({"q", {1, 0}});
  s.add({"c", {1, 1}});
  s.add({"a", {1, 1}});
  s.add({"b", {1, -1}});
  auto top = s.top_k_similar("q", 3);
  ASSERT_EQ(top.size(), 3u);
  EXPECT_EQ(top[0].id, "a");
  EXPECT_EQ(top[1].id, "b");
  EXPECT_EQ(top[2].id, "c");
}

TEST(Store, TopKMatchesBruteForceOn1000Random512d) {
  std::mt19937_64 rng(2024);
  EmbeddingStore s;
  for (int i = 0; i < 1000; ++i) s.add({"v" + std::to_string(i), random_vector(rng, 512)});
  for (const char* q : {"v0", "v17", "v500", "v999"}) {
    for (std::size_t k : {1u, 7u, 50u}) {
      auto got = s.top_k_similar(q, k);
      auto want = brute_top_k(s, q, k);
      ASSERT_EQ(got.size(), want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_EQ(got[i].id, want[i].id) << q << " k=" << k << " rank " << i;
        EXPECT_NEAR(got[i].score, want[i].score, 1e-12);
      }
    }
  }
  auto even = [](const std::string& id) { return std::stoi(id.substr(1)) % 2 == 0; };
  auto got = s.top_k_similar("v3", 7, even);
  auto want = brute_top_k(s, "v3", 7, even);
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(got[i].id, want[i].id);
}

TEST(Store, LoadEmptyMixedAndRoundTrip) {
  fixtures::TempDir dir("store");
  io::write_atomic(dir / "empty.jsonl", "");
  EXPECT_EQ(load_store(dir / "empty.jsonl").size(), 0u);

  io::write_atomic(dir / "mixed.jsonl",
                   "{\"id\":\"a\",\"vector\":[1,2,3]}\n{\"id\":\"b\",\"vector\":[1,2]}\n");
  try {
    load_store(dir / "mixed.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }

  std::mt19937_64 rng(8);
  EmbeddingStore s;
  for (int i = 0; i < 20; ++i) s.add({"id" + std::to_string(i), random_vector(rng, 512)}, i % 2 ? "cars" : "work");
  save_store(dir / "s.jsonl", s);
  EXPECT_TRUE(load_store(dir / "s.jsonl") == s);
}
