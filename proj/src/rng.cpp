#include "fksteer/rng.hpp"

#include <bit>
#include <random>

namespace fks {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

StreamRng::StreamRng(std::uint64_t seed) {
  std::uint64_t state = seed;
  for (auto& word : s_) word = splitmix64(state);
}

StreamRng::StreamRng(std::uint64_t seed, Purpose purpose, std::uint64_t particle,
                     std::int64_t step, std::uint64_t index) {
  std::uint64_t state = seed;
  std::uint64_t key = splitmix64(state);
  for (std::uint64_t part : {static_cast<std::uint64_t>(purpose), particle,
                             static_cast<std::uint64_t>(step), index}) {
    state = key ^ (part * 0xD1B54A32D192ED03ULL);
    key = splitmix64(state);
  }
  state = key;
  for (auto& word : s_) word = splitmix64(state);
}

StreamRng::result_type StreamRng::operator()() {
  const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = std::rotl(s_[3], 45);
  return result;
}

double StreamRng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double StreamRng::normal() {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(*this);
}

}  // namespace fks
