#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace vtne {

using cplx = std::complex<double>;

inline constexpr const char* kVersion = "0.1.0";

/// Relative singular-value cutoff used everywhere a truncation happens.
/// Removes numerical-noise singular values without affecting results at
/// working precision.
inline constexpr double kSvdCutoff = 1e-12;

struct shape_error : std::runtime_error {
  explicit shape_error(const std::string& what) : std::runtime_error(what) {}
};

struct argument_error : std::invalid_argument {
  explicit argument_error(const std::string& what) : std::invalid_argument(what) {}
};

struct capacity_error : std::runtime_error {
  explicit capacity_error(const std::string& what) : std::runtime_error(what) {}
};

struct numerical_integrity_error : std::runtime_error {
  explicit numerical_integrity_error(const std::string& what) : std::runtime_error(what) {}
};

struct parse_error : std::runtime_error {
  std::size_t byte_offset;
  parse_error(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (byte " + std::to_string(offset) + ")"), byte_offset(offset) {}
};

struct config_error : std::runtime_error {
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Deterministic normal sampler (Box-Muller over mt19937_64); identical
/// streams on every platform for a given seed.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : state_(seed) {}

  double operator()(double mean, double sigma) {
    if (have_spare_) {
      have_spare_ = false;
      return mean + sigma * spare_;
    }
    double u1 = uniform_();
    double u2 = uniform_();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * 3.14159265358979323846 * u2);
    have_spare_ = true;
    return mean + sigma * r * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  double uniform_() {
    // (0,1]: avoids log(0)
    return (static_cast<double>(next_() >> 11) + 1.0) * 0x1.0p-53;
  }
  std::uint64_t next_() {
    // splitmix-advanced xorshift; small, seed-stable, good enough for inits
    state_ += 0x9E3779B97f4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace vtne
