#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace banditservo
{
// Reproducible named RNG streams. A stream is identified by (base seed, tag);
// the tag hash is mixed into the seed so that streams with the same base but
// different names ("system", "models", "selection/kf-manb", ...) are
// statistically independent and stable across runs and thread counts.

inline uint64_t mix64(uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t stream_seed(uint64_t base, std::string_view tag)
{
  uint64_t h = 1469598103934665603ULL;
  for (const char ch : tag)
  {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ULL;
  }
  return mix64(base ^ mix64(h));
}

inline std::mt19937_64 make_stream(uint64_t base, std::string_view tag)
{
  return std::mt19937_64(stream_seed(base, tag));
}
}
