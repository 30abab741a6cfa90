#pragma once

// Weak compositions of N into L parts: count vectors of L non-negative
// integers summing to N. These are exactly the achievable empirical decision
// distributions with N draws.

#include <cstddef>
#include <cstdint>
#include <vector>

namespace dbkd {

using Counts = std::vector<std::size_t>;

/// C(n, k); throws ContractError on 64-bit overflow.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// C(N + L - 1, L - 1).
std::uint64_t composition_count(std::size_t n, std::size_t parts);

/// All compositions, lexicographically descending from (N, 0, ..., 0).
std::vector<Counts> enumerate_compositions(std::size_t n, std::size_t parts);

}  // namespace dbkd
