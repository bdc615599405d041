#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace dynstereo {

inline constexpr int kPoolBlock = 128;

/// N points with integer BEV cells and C features each, targeting an X x Y grid.
/// Coordinates may lie outside the grid; such points are skipped.
struct PointFeatureBatch {
  int grid_x = 0;
  int grid_y = 0;
  int channels = 0;
  std::vector<std::int32_t> ix;
  std::vector<std::int32_t> iy;
  std::vector<float> features;  // N x C, point-major

  std::size_t size() const { return ix.size(); }
  void validate() const;
};

/// X x Y x C accumulator, channel-contiguous: value(x, y, c) = data[(x * Y + y) * C + c].
struct BevGrid {
  int grid_x = 0;
  int grid_y = 0;
  int channels = 0;
  std::vector<float> data;
  std::size_t skipped = 0;

  BevGrid() = default;
  BevGrid(int x, int y, int c);
  float& at(int x, int y, int c) { return data[cell(x, y) * channels + c]; }
  float at(int x, int y, int c) const { return data[cell(x, y) * channels + c]; }
  std::size_t cell(int x, int y) const { return static_cast<std::size_t>(x) * grid_y + y; }
};

enum class PoolMode { kDeterministic, kAtomic };

/// Sequential scatter-add in point-index order.
BevGrid pool_v1(const PointFeatureBatch& batch);

/// Block-staged scatter-add. Points are taken in blocks of kPoolBlock whose cell indices are
/// staged into a local buffer before the block's features are swept channel-contiguously.
/// Deterministic mode gives each worker exclusive ownership of a band of grid rows; every worker
/// sweeps all staged blocks in point order and adds only into its own cells, so the result is
/// bit-identical to pool_v1 for any worker count. Atomic mode splits blocks across workers and accumulates with atomic float
/// adds (plain adds when there is a single worker).
BevGrid pool_v2(const PointFeatureBatch& batch, int workers,
                PoolMode mode = PoolMode::kDeterministic);

/// Seeded batch with features uniform in [0, 1) and roughly `oob_frac` of points out of bounds.
PointFeatureBatch random_batch(std::size_t n, int x, int y, int c, std::uint64_t seed,
                               double oob_frac = 0.01);

struct PoolBenchRow {
  std::string variant;
  std::size_t n = 0;
  int x = 0;
  int y = 0;
  int c = 0;
  int workers = 0;
  double median_ms = 0.0;
  double speedup = 1.0;  // v1 median / this variant's median
};

/// Times pool_v1 and both pool_v2 modes after one warmup each; returns one row per variant.
std::vector<PoolBenchRow> bench_pool(std::size_t n, int x, int y, int c, int workers, int repeats,
                                     std::uint64_t seed);

/// Largest |a - b| / max(|b|, floor) over all cells.
double max_relative_difference(const BevGrid& a, const BevGrid& b, double floor = 1e-12);

}  // namespace dynstereo
