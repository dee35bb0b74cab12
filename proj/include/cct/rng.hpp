#pragma once

#include <cstdint>
#include <random>

namespace cct {

/// Seeded RNG with a self-contained Gaussian transform.
///
/// std::normal_distribution is implementation-defined, which would break the
/// bit-reproducibility guarantee across standard libraries; mt19937_64 plus
/// an explicit Box-Muller transform is fully specified.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() {
    // 53-bit mantissa-resolution uniform in [0, 1).
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double gaussian(double mean = 0.0, double std_dev = 0.0) {
    if (std_dev == 0.0) return mean;
    if (have_spare_) {
      have_spare_ = false;
      return mean + std_dev * spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return mean + std_dev * radius * std::cos(angle);
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace cct
