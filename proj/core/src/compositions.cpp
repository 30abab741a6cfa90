#include "dbkd/compositions.hpp"

#include <limits>

#include "dbkd/core.hpp"

namespace dbkd {

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // r * (n - k + i) / i stays integral at every step.
    const std::uint64_t f = n - k + i;
    if (r > std::numeric_limits<std::uint64_t>::max() / f) {
      throw ContractError("binomial coefficient overflows 64 bits");
    }
    r = r * f / i;
  }
  return r;
}

std::uint64_t composition_count(std::size_t n, std::size_t parts) {
  if (parts == 0) throw ContractError("compositions need at least one part");
  return binomial(n + parts - 1, parts - 1);
}

std::vector<Counts> enumerate_compositions(std::size_t n, std::size_t parts) {
  const std::uint64_t total = composition_count(n, parts);
  std::vector<Counts> out;
  out.reserve(static_cast<std::size_t>(total));
  Counts c(parts, 0);
  c[0] = n;
  while (true) {
    out.push_back(c);
    // Next in descending lex order: find the rightmost non-zero entry left of
    // the last slot, move one unit right and sweep the tail into its neighbour.
    std::size_t i = parts - 1;
    while (i > 0 && c[i - 1] == 0) --i;
    if (i == 0) break;
    --i;
    const std::size_t tail = c[parts - 1];
    c[parts - 1] = 0;
    --c[i];
    c[i + 1] += 1 + tail;
  }
  return out;
}

}  // namespace dbkd
