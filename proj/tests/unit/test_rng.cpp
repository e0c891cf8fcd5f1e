#include <set>

#include "doctest.h"
#include "swar/rng.hpp"

using namespace swar;

TEST_CASE("rng_tree: same path, same stream") {
  auto a = rng_tree(7, {"rl", "env"});
  auto b = rng_tree(7, {"rl", "env"});
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng_tree: path order and master seed matter") {
  CHECK(derive_seed(7, {"a", "b"}) != derive_seed(7, {"b", "a"}));
  CHECK(derive_seed(7, {"a"}) != derive_seed(8, {"a"}));
  CHECK(derive_seed(7, {"ab"}) != derive_seed(7, {"a", "b"}));
  const std::vector<std::string> path{"x", "y"};
  CHECK(derive_seed(3, std::span<const std::string>(path)) == derive_seed(3, {"x", "y"}));
}

TEST_CASE("rng_tree: 1,000 siblings differ in their first draw") {
  std::set<std::uint64_t> first;
  for (int i = 0; i < 1000; ++i) first.insert(rng_tree(42, {"seed", std::to_string(i)}).next_u64());
  CHECK(first.size() == 1000);
}

TEST_CASE("index stays in range") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) CHECK(rng.index(7) < 7);
}
