#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

#include "sos/errors.hpp"

namespace sos {

// Inverse standard-normal CDF, accurate to a few ulp over (0,1).
double inverse_normal_cdf(double p);

// Philox 4x32 with 10 rounds. Pure function of (counter, key); the basis of
// every random draw in the library.
inline std::array<std::uint32_t, 4> philox4x32_10(
    std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
           static_cast<std::uint32_t>(p0)};
  }
  return ctr;
}

// Derives a decorrelated seed for a named sub-role (e.g. "binding",
// "var-forward") so that independent stages never share streams.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag);

// A deterministic draw sequence identified by (seed, context). Context is a
// 64-bit label split into two words; the filter uses (step, particle) so that
// results do not depend on how particles are distributed across workers.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint32_t ctx_hi,
               std::uint32_t ctx_lo) noexcept
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        ctx_hi_(ctx_hi),
        ctx_lo_(ctx_lo) {}

  std::uint64_t next_u64() {
    if (pos_ > 2) refill();
    const std::uint64_t lo = buf_[pos_];
    const std::uint64_t hi = buf_[pos_ + 1];
    pos_ += 2;
    return lo | (hi << 32);
  }

  // Uniform on the open interval (0,1); never exactly 0 or 1, so inverse-CDF
  // transforms stay finite.
  double uniform() {
    const std::uint64_t z = next_u64() >> 11;
    return (static_cast<double>(z) + 0.5) * 0x1.0p-53;
  }

  double normal() { return inverse_normal_cdf(uniform()); }

  // Two standard normals with correlation rho; `first` is drawn first.
  void correlated_normals(double rho, double& first, double& second) {
    first = normal();
    const double z = normal();
    second = rho * first + std::sqrt(1.0 - rho * rho) * z;
  }

  // Uniform draw from {0, ..., n-1}.
  std::uint32_t uniform_below(std::uint32_t n) {
    if (n == 0) throw InvalidArgument("uniform_below: n must be positive");
    return static_cast<std::uint32_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  void refill() {
    buf_ = philox4x32_10({static_cast<std::uint32_t>(block_),
                          static_cast<std::uint32_t>(block_ >> 32), ctx_lo_,
                          ctx_hi_},
                         key_);
    ++block_;
    pos_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint32_t ctx_hi_, ctx_lo_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
};

// Stream-context conventions used by the filter. Particle indices occupy the
// low word; the high word carries the step (0 = prior draw). The resampling
// stream uses a particle slot no real particle can occupy.
namespace stream_ctx {
inline constexpr std::uint32_t kPriorStep = 0;
inline constexpr std::uint32_t kResample = 0xFFFFFFFFu;
inline std::uint32_t step(long t) { return static_cast<std::uint32_t>(t); }
}  // namespace stream_ctx

}  // namespace sos
