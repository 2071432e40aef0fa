#pragma once

#include <cstdint>
#include <string>

namespace grsnet {

// Fixed 17-significant-digit formatting so output files are byte-stable.
std::string fmt17(double v);

// FNV-1a over a byte string; used to fingerprint configurations.
std::uint64_t fnv1a64(const std::string& bytes);

std::string hex64(std::uint64_t v);

// Compensated accumulator for long double-precision sums.
class KahanSum {
  public:
    void add(double x) {
        const double y = x - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

  private:
    double s_ = 0.0;
    double c_ = 0.0;
};

}  // namespace grsnet
