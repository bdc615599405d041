#include "dynstereo/pool.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

namespace dynstereo {
namespace {

constexpr std::int64_t kSkip = -1;

std::int64_t cell_of(const PointFeatureBatch& b, std::size_t i) {
  const std::int32_t x = b.ix[i];
  const std::int32_t y = b.iy[i];
  if (x < 0 || y < 0 || x >= b.grid_x || y >= b.grid_y) return kSkip;
  return static_cast<std::int64_t>(x) * b.grid_y + y;
}

std::size_t count_skipped(const PointFeatureBatch& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < b.size(); ++i) n += cell_of(b, i) == kSkip;
  return n;
}

// Stages the cell indices of block [begin, end) into `cells`.
void stage(const PointFeatureBatch& b, std::size_t begin, std::size_t end,
           std::array<std::int64_t, kPoolBlock>& cells) {
  for (std::size_t i = begin; i < end; ++i) cells[i - begin] = cell_of(b, i);
}

void run_workers(int workers, const auto& fn) {
  if (workers == 1) {
    fn(0);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back([&fn, w] { fn(w); });
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

void PointFeatureBatch::validate() const {
  if (grid_x <= 0 || grid_y <= 0 || channels <= 0) {
    throw std::invalid_argument("point batch: grid dims and channels must be positive");
  }
  if (iy.size() != ix.size() || features.size() != ix.size() * static_cast<std::size_t>(channels)) {
    throw std::invalid_argument("point batch: coordinate and feature arrays disagree on N");
  }
}

BevGrid::BevGrid(int x, int y, int c)
    : grid_x(x), grid_y(y), channels(c),
      data(static_cast<std::size_t>(x) * y * c, 0.0f) {}

BevGrid pool_v1(const PointFeatureBatch& batch) {
  batch.validate();
  BevGrid grid(batch.grid_x, batch.grid_y, batch.channels);
  const std::size_t c = static_cast<std::size_t>(batch.channels);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const std::int64_t cell = cell_of(batch, i);
    if (cell == kSkip) {
      ++grid.skipped;
      continue;
    }
    float* dst = grid.data.data() + static_cast<std::size_t>(cell) * c;
    const float* src = batch.features.data() + i * c;
    for (std::size_t k = 0; k < c; ++k) dst[k] += src[k];
  }
  return grid;
}

BevGrid pool_v2(const PointFeatureBatch& batch, int workers, PoolMode mode) {
  batch.validate();
  if (workers < 1) throw std::invalid_argument("pool_v2: workers must be >= 1");
  BevGrid grid(batch.grid_x, batch.grid_y, batch.channels);
  const std::size_t n = batch.size();
  const std::size_t c = static_cast<std::size_t>(batch.channels);
  const std::size_t n_blocks = (n + kPoolBlock - 1) / kPoolBlock;

  if (mode == PoolMode::kAtomic) {
    grid.skipped = count_skipped(batch);
    const bool shared = workers > 1;
    run_workers(workers, [&](int w) {
      const std::size_t b_lo = n_blocks * static_cast<std::size_t>(w) / workers;
      const std::size_t b_hi = n_blocks * static_cast<std::size_t>(w + 1) / workers;
      std::array<std::int64_t, kPoolBlock> cells{};
      for (std::size_t b = b_lo; b < b_hi; ++b) {
        const std::size_t begin = b * kPoolBlock;
        const std::size_t end = std::min(n, begin + kPoolBlock);
        stage(batch, begin, end, cells);
        for (std::size_t i = begin; i < end; ++i) {
          const std::int64_t cell = cells[i - begin];
          if (cell == kSkip) continue;
          float* dst = grid.data.data() + static_cast<std::size_t>(cell) * c;
          const float* src = batch.features.data() + i * c;
          if (shared) {
            for (std::size_t k = 0; k < c; ++k) {
              std::atomic_ref<float>(dst[k]).fetch_add(src[k], std::memory_order_relaxed);
            }
          } else {
            for (std::size_t k = 0; k < c; ++k) dst[k] += src[k];
          }
        }
      }
    });
    return grid;
  }

  // Deterministic: each worker owns a contiguous band of grid rows and sweeps every staged block
  // in point order, touching only its own cells.
  grid.skipped = count_skipped(batch);
  workers = std::min(workers, batch.grid_x);
  run_workers(workers, [&](int w) {
    const std::int64_t lo = static_cast<std::int64_t>(batch.grid_x) * w / workers * batch.grid_y;
    const std::int64_t hi = static_cast<std::int64_t>(batch.grid_x) * (w + 1) / workers * batch.grid_y;
    std::array<std::int64_t, kPoolBlock> cells{};
    for (std::size_t b = 0; b < n_blocks; ++b) {
      const std::size_t begin = b * kPoolBlock;
      const std::size_t end = std::min(n, begin + kPoolBlock);
      stage(batch, begin, end, cells);
      for (std::size_t i = begin; i < end; ++i) {
        const std::int64_t cell = cells[i - begin];
        if (cell < lo || cell >= hi) continue;
        float* dst = grid.data.data() + static_cast<std::size_t>(cell) * c;
        const float* src = batch.features.data() + i * c;
        for (std::size_t k = 0; k < c; ++k) dst[k] += src[k];
      }
    }
  });
  return grid;
}

PointFeatureBatch random_batch(std::size_t n, int x, int y, int c, std::uint64_t seed,
                               double oob_frac) {
  if (x <= 0 || y <= 0 || c <= 0) {
    throw std::invalid_argument("random_batch: grid dims and channels must be positive");
  }
  PointFeatureBatch b;
  b.grid_x = x;
  b.grid_y = y;
  b.channels = c;
  b.ix.resize(n);
  b.iy.resize(n);
  b.features.resize(n * static_cast<std::size_t>(c));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int32_t> ux(0, x - 1);
  std::uniform_int_distribution<std::int32_t> uy(0, y - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<float> feat(0.0f, 1.0f);
  for (std::size_t i = 0; i < n; ++i) {
    b.ix[i] = ux(rng);
    b.iy[i] = uy(rng);
    if (unit(rng) < oob_frac) {
      // Alternate the violated bound so every edge case is exercised.
      switch (i % 4) {
        case 0: b.ix[i] = x; break;
        case 1: b.ix[i] = -1; break;
        case 2: b.iy[i] = y; break;
        default: b.iy[i] = -1 - static_cast<std::int32_t>(i % 7); break;
      }
    }
  }
  for (float& f : b.features) f = feat(rng);
  b.validate();
  return b;
}

std::vector<PoolBenchRow> bench_pool(std::size_t n, int x, int y, int c, int workers, int repeats,
                                     std::uint64_t seed) {
  if (n == 0 || x <= 0 || y <= 0 || c <= 0 || workers < 1 || repeats < 1) {
    throw std::invalid_argument("bench_pool: sizes, workers and repeats must be positive");
  }
  const PointFeatureBatch batch = random_batch(n, x, y, c, seed);
  auto time_ms = [&](const auto& run) {
    run();
    std::vector<double> samples;
    for (int r = 0; r < repeats; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      run();
      const auto t1 = std::chrono::steady_clock::now();
      samples.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return median(samples);
  };
  const double v1 = time_ms([&] { return pool_v1(batch); });
  const double v2d = time_ms([&] { return pool_v2(batch, workers, PoolMode::kDeterministic); });
  const double v2a = time_ms([&] { return pool_v2(batch, workers, PoolMode::kAtomic); });
  auto row = [&](std::string name, int w, double ms) {
    return PoolBenchRow{std::move(name), n, x, y, c, w, ms, ms > 0.0 ? v1 / ms : 0.0};
  };
  return {row("v1", 1, v1), row("v2_deterministic", workers, v2d), row("v2_atomic", workers, v2a)};
}

double max_relative_difference(const BevGrid& a, const BevGrid& b, double floor) {
  if (a.data.size() != b.data.size()) {
    throw std::invalid_argument("max_relative_difference: grid shapes differ");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double ref = std::max(std::abs(static_cast<double>(b.data[i])), floor);
    worst = std::max(worst, std::abs(static_cast<double>(a.data[i]) - b.data[i]) / ref);
  }
  return worst;
}

}  // namespace dynstereo
