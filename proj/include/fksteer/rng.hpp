#pragma once

#include <cstdint>
#include <limits>

namespace fks {

// What a random stream is used for. Part of the stream key so that, for
// example, the denoising noise of particle 3 at step 12 never depends on how
// many reward evaluations happened before it.
enum class Purpose : std::uint64_t {
  noise = 1,
  denoise = 2,
  reward = 3,
  resample = 4,
  scenario = 5,
  bootstrap = 6,
};

// Counter-keyed generator: the stream is a pure function of
// (seed, purpose, particle, step, index). xoshiro256** seeded by splitmix64.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  explicit StreamRng(std::uint64_t seed);
  StreamRng(std::uint64_t seed, Purpose purpose, std::uint64_t particle, std::int64_t step,
            std::uint64_t index = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double normal();

 private:
  std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace fks
