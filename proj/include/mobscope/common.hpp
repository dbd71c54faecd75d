#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace mobscope {

constexpr double kPi = 3.14159265358979323846;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point p) { return std::sqrt(p.x * p.x + p.y * p.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

/// Errors raised by configuration / input validation.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Errors raised when input data violates a contract.
class data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a time-kernel denominator has no support at the queried time.
class unsupported_time_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Deterministic random stream. All variate generation is implemented on top
/// of raw 64-bit draws so results do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent child stream addressed by a path of indices, e.g.
  /// (seed, repetition, day). Streams with distinct paths are uncorrelated.
  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on [a, b).
  double uniform(double a, double b);
  /// Standard normal (Box-Muller, one variate per pair of uniforms).
  double normal();
  double normal(double mean, double sd);
  /// Normal truncated to (mean - halfwidth, mean + halfwidth) by rejection.
  /// halfwidth == 0 degenerates to the mean.
  double truncated_normal(double mean, double sd, double halfwidth);
  /// Index drawn with probability proportional to weights[i].
  std::size_t categorical(const std::vector<double>& weights);
  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

/// Number of worker threads: MOBSCOPE_THREADS if set, else hardware count.
unsigned worker_threads();

/// Runs fn(chunk_index, begin, end) over n items split into n_chunks
/// contiguous chunks. Chunk boundaries depend only on (n, n_chunks), so any
/// per-chunk outputs reduced in chunk order give thread-count-independent
/// results.
void parallel_chunks(std::size_t n, std::size_t n_chunks,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

}  // namespace mobscope
