#include "mobscope/common.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

namespace mobscope {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::mt19937_64 make_engine(std::uint64_t key) {
  std::uint64_t s = key;
  std::seed_seq seq{splitmix64(s), splitmix64(s), splitmix64(s), splitmix64(s)};
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : engine_(make_engine(seed)) {}

Rng Rng::derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = seed;
  std::uint64_t key = splitmix64(s);
  for (std::uint64_t p : path) {
    s = key ^ (p + 0x9E3779B97F4A7C15ull);
    key = splitmix64(s);
  }
  Rng rng(0);
  rng.engine_ = make_engine(key);
  return rng;
}

double Rng::uniform() {
  // 53-bit mantissa from the top bits of one 64-bit draw.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double a, double b) { return a + (b - a) * uniform(); }

double Rng::normal() {
  // Box-Muller; 1 - u keeps the log argument in (0, 1].
  double u1 = uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * kPi * u2);
}

double Rng::normal(double mean, double sd) { return mean + sd * normal(); }

double Rng::truncated_normal(double mean, double sd, double halfwidth) {
  if (halfwidth < 0.0) throw config_error("truncated_normal: negative halfwidth");
  if (halfwidth == 0.0) return mean;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    double d = normal(mean, sd);
    if (d > mean - halfwidth && d < mean + halfwidth) return d;
  }
  throw config_error("truncated_normal: rejection sampling failed (halfwidth << sd?)");
}

std::size_t Rng::categorical(const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw config_error("categorical: negative weight");
    total += w;
  }
  if (total <= 0.0) throw config_error("categorical: weights sum to zero");
  double u = uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.size() - 1;
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  if (n == 0) throw config_error("uniform_index: empty range");
  // Rejection to avoid modulo bias.
  std::uint64_t limit = n * (UINT64_MAX / n);
  for (;;) {
    std::uint64_t v = engine_();
    if (v < limit) return v % n;
  }
}

unsigned worker_threads() {
  if (const char* env = std::getenv("MOBSCOPE_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void parallel_chunks(std::size_t n, std::size_t n_chunks,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (n == 0 || n_chunks == 0) return;
  if (n_chunks > n) n_chunks = n;
  unsigned threads = std::min<std::size_t>(worker_threads(), n_chunks);
  auto chunk_bounds = [&](std::size_t c) {
    std::size_t lo = n * c / n_chunks;
    std::size_t hi = n * (c + 1) / n_chunks;
    return std::pair<std::size_t, std::size_t>(lo, hi);
  };
  if (threads <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) {
      auto [lo, hi] = chunk_bounds(c);
      fn(c, lo, hi);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      auto [lo, hi] = chunk_bounds(c);
      fn(c, lo, hi);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

}  // namespace mobscope
