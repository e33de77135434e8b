#include "randhyp/rng.hpp"

namespace randhyp {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomStream::RandomStream(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

RandomStream RandomStream::child(std::uint64_t index) const {
  return RandomStream(mix64(seed_ ^ mix64(index + 0x632be59bd9b4e019ULL)));
}

double RandomStream::normal() { return normal_(engine_); }

double RandomStream::uniform() { return uniform_(engine_); }

Vector RandomStream::normal_vector(Index size) {
  Vector out(size);
  for (Index i = 0; i < size; ++i) out[i] = normal_(engine_);
  return out;
}

} // namespace randhyp
