#include "gbpf/random.hpp"

#include <array>

namespace gbpf {

std::uint64_t derive_seed(std::uint64_t seed, StreamTag tag, std::uint64_t index) {
  const auto t = static_cast<std::uint64_t>(tag);
  std::array<std::uint32_t, 6> words{
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(t),    static_cast<std::uint32_t>(t >> 32),
      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::seed_seq seq(words.begin(), words.end());
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

RandomStream::RandomStream(std::uint64_t seed) : seed_(seed) {
  std::array<std::uint32_t, 2> words{static_cast<std::uint32_t>(seed),
                                     static_cast<std::uint32_t>(seed >> 32)};
  std::seed_seq seq(words.begin(), words.end());
  engine_.seed(seq);
}

double RandomStream::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

RandomStream RandomStream::split(StreamTag tag, std::uint64_t index) const {
  return RandomStream(derive_seed(seed_, tag, index));
}

}  // namespace gbpf
