#include "sos/random.hpp"

#include <boost/math/special_functions/erf.hpp>

namespace sos {

double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw InvalidArgument("inverse_normal_cdf: p must lie in (0,1)");
  constexpr double kSqrt2 = 1.4142135623730951;
  if (p < 0.5) return -kSqrt2 * boost::math::erfc_inv(2.0 * p);
  return kSqrt2 * boost::math::erfc_inv(2.0 * (1.0 - p));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
  std::uint64_t z = master ^ (tag * 0x9E3779B97F4A7C15ull);
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a offset basis
  for (unsigned char c : tag) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return derive_seed(master, h);
}

}  // namespace sos
