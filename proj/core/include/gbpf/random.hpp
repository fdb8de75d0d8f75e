#pragma once

#include <cstdint>
#include <random>

namespace gbpf {

// Tags keep sub-streams derived from one master seed apart.
enum class StreamTag : std::uint64_t {
  Latent = 1,
  Values = 2,
  Replicate = 3,
  MonteCarlo = 4,
};

std::uint64_t derive_seed(std::uint64_t seed, StreamTag tag, std::uint64_t index);

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  // Uniform on the open interval (0, 1), 53 random bits.
  double uniform();
  std::uint64_t next() { return engine_(); }

  // Independent child stream; depends only on this stream's seed, not its state.
  RandomStream split(StreamTag tag, std::uint64_t index) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace gbpf
