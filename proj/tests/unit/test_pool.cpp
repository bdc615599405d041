#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "dynstereo/pool.hpp"

namespace dynstereo {
namespace {

PointFeatureBatch batch_of(int x, int y, int c,
                           const std::vector<std::pair<int, int>>& cells) {
  PointFeatureBatch b;
  b.grid_x = x;
  b.grid_y = y;
  b.channels = c;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    b.ix.push_back(cells[i].first);
    b.iy.push_back(cells[i].second);
    for (int k = 0; k < c; ++k) b.features.push_back(static_cast<float>(i + 1) + 0.25f * k);
  }
  return b;
}

bool bit_equal(const BevGrid& a, const BevGrid& b) {
  if (a.data.size() != b.data.size()) return false;
  return std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(float)) == 0;
}

TEST(PoolV1, SinglePoint) {
  const PointFeatureBatch b = batch_of(8, 6, 3, {{3, 4}});
  const BevGrid g = pool_v1(b);
  for (int x = 0; x < 8; ++x) {
    for (int y = 0; y < 6; ++y) {
      for (int c = 0; c < 3; ++c) {
        EXPECT_EQ(g.at(x, y, c), (x == 3 && y == 4) ? 1.0f + 0.25f * c : 0.0f);
      }
    }
  }
  EXPECT_EQ(g.skipped, 0u);
}

TEST(PoolV1, Additivity) {
  const BevGrid g = pool_v1(batch_of(4, 4, 2, {{1, 2}, {1, 2}}));
  EXPECT_EQ(g.at(1, 2, 0), 3.0f);
  EXPECT_EQ(g.at(1, 2, 1), 1.25f + 2.25f);
}

TEST(PoolV1, OutOfBoundsSkippedNotWrapped) {
  const BevGrid g = pool_v1(batch_of(4, 5, 1, {{4, 0}, {-1, 0}, {0, 5}, {0, -1}, {2, 2}}));
  EXPECT_EQ(g.skipped, 4u);
  float total = 0;
  for (float v : g.data) total += v;
  EXPECT_EQ(total, 5.0f);
  EXPECT_EQ(g.at(2, 2, 0), 5.0f);
}

TEST(PoolV2, EmptyBatchIsZero) {
  const PointFeatureBatch b = batch_of(7, 3, 4, {});
  for (PoolMode mode : {PoolMode::kDeterministic, PoolMode::kAtomic}) {
    const BevGrid g = pool_v2(b, 3, mode);
    ASSERT_EQ(g.data.size(), 7u * 3 * 4);
    for (float v : g.data) EXPECT_EQ(v, 0.0f);
  }
}

TEST(PoolV2, Validation) {
  PointFeatureBatch b = batch_of(4, 4, 2, {{1, 1}});
  EXPECT_THROW(pool_v2(b, 0), std::invalid_argument);
  b.features.pop_back();
  EXPECT_THROW(pool_v1(b), std::invalid_argument);
}

TEST(PoolV2, DeterministicIsBitIdenticalForAnyWorkerCount) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 12; ++trial) {
    const int x = 1 + static_cast<int>(rng() % 90);
    const int y = 1 + static_cast<int>(rng() % 90);
    const int c = 1 + static_cast<int>(rng() % 40);
    const std::size_t n = rng() % 40000;
    const PointFeatureBatch b = random_batch(n, x, y, c, rng(), 0.05);
    const BevGrid ref = pool_v1(b);
    for (int workers : {1, 2, 3, 7, 8, 16}) {
      const BevGrid g = pool_v2(b, workers, PoolMode::kDeterministic);
      ASSERT_TRUE(bit_equal(ref, g)) << "trial " << trial << " workers " << workers;
      ASSERT_EQ(g.skipped, ref.skipped);
    }
  }
}

TEST(PoolV2, AtomicWithinTolerance) {
  const PointFeatureBatch b = random_batch(100000, 64, 64, 32, 5);
  const BevGrid ref = pool_v1(b);
  for (int workers : {1, 4, 8}) {
    const BevGrid g = pool_v2(b, workers, PoolMode::kAtomic);
    EXPECT_LT(max_relative_difference(g, ref), 1e-5);
    EXPECT_EQ(g.skipped, ref.skipped);
  }
  EXPECT_TRUE(bit_equal(ref, pool_v2(b, 1, PoolMode::kAtomic)));
}

TEST(PoolV2, MassConservation) {
  const PointFeatureBatch b = random_batch(50000, 50, 40, 8, 9, 0.1);
  double expected = 0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b.ix[i] < 0 || b.ix[i] >= b.grid_x || b.iy[i] < 0 || b.iy[i] >= b.grid_y) continue;
    for (int c = 0; c < b.channels; ++c) expected += b.features[i * b.channels + c];
  }
  for (PoolMode mode : {PoolMode::kDeterministic, PoolMode::kAtomic}) {
    const BevGrid g = pool_v2(b, 6, mode);
    double total = 0;
    for (float v : g.data) total += v;
    EXPECT_NEAR(total, expected, 1e-5 * expected);
  }
}

TEST(RandomBatch, SeededAndBounded) {
  const PointFeatureBatch a = random_batch(20000, 30, 20, 4, 3);
  const PointFeatureBatch b = random_batch(20000, 30, 20, 4, 3);
  EXPECT_EQ(a.ix, b.ix);
  EXPECT_EQ(a.iy, b.iy);
  EXPECT_EQ(a.features, b.features);
  EXPECT_NE(random_batch(20000, 30, 20, 4, 4).ix, a.ix);
  std::size_t oob = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    oob += a.ix[i] < 0 || a.ix[i] >= 30 || a.iy[i] < 0 || a.iy[i] >= 20;
  }
  EXPECT_GT(oob, 100u);
  EXPECT_LT(oob, 400u);
  for (float f : a.features) {
    ASSERT_GE(f, 0.0f);
    ASSERT_LT(f, 1.0f);
  }
}

TEST(Bench, SmokeRowsPresent) {
  const auto rows = bench_pool(2000, 16, 16, 8, 2, 1, 1);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].variant, "v1");
  EXPECT_DOUBLE_EQ(rows[0].speedup, 1.0);
  for (const auto& r : rows) {
    EXPECT_EQ(r.n, 2000u);
    EXPECT_GT(r.median_ms, 0.0);
    EXPECT_GT(r.speedup, 0.0);
  }
}

}  // namespace
}  // namespace dynstereo
