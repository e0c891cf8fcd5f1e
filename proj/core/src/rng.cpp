#include "swar/rng.hpp"

namespace swar {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <typename Range>
std::uint64_t derive(std::uint64_t master_seed, const Range& path) {
  std::uint64_t h = splitmix64(master_seed);
  for (const auto& label : path) {
    h = splitmix64(h ^ fnv1a(label));
  }
  return h;
}

}  // namespace

std::size_t Rng::index(std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::span<const std::string> path) {
  return derive(master_seed, path);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::initializer_list<std::string_view> path) {
  return derive(master_seed, path);
}

Rng rng_tree(std::uint64_t master_seed, std::initializer_list<std::string_view> path) {
  return Rng(derive_seed(master_seed, path));
}

}  // namespace swar
