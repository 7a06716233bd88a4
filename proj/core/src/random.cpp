#include "gai/random.hpp"

#include <cmath>

#include "gai/normal.hpp"

namespace gai {
namespace {
__extension__ using u128 = unsigned __int128;
}  // namespace

double Rng::normal() {
  return normal_quantile(uniform());
}

double Rng::exponential(double mean) {
  return -mean * std::log(uniform());
}

std::uint64_t Rng::below(std::uint64_t bound) {
  // Lemire's multiply-shift with rejection.
  std::uint64_t x = engine_();
  u128 m = static_cast<u128>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = -bound % bound;
    while (low < threshold) {
      x = engine_();
      m = static_cast<u128>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) noexcept {
  return mix64(mix64(master_seed) ^ (trial_index * 0xd1b54a32d192ed03ULL + 1));
}

}  // namespace gai
