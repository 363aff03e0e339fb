#ifndef CAUSEWAY_FACTOR_H_
#define CAUSEWAY_FACTOR_H_

#include <cstddef>
#include <span>
#include <vector>

namespace causeway {

// Non-negative table over discrete variables. `vars` is ascending and values
// are indexed in mixed radix with the last variable varying fastest.
struct Factor {
  std::vector<int> vars;
  std::vector<int> cards;
  std::vector<double> values;

  // All-ones factor; an empty scope gives a single scalar 1.
  static Factor ones(std::vector<int> vars, std::vector<int> cards);

  std::size_t size() const { return values.size(); }
  double total() const;
  // Divides by total(); throws when the total is zero.
  void normalize();
  // Zeroes every entry where `var` differs from `level` (no-op when `var`
  // is outside the scope).
  void reduce(int var, int level);
};

Factor multiply(const Factor& a, const Factor& b);
// Multiplies `b` into `a` in place; b's scope must be inside a's.
void multiply_into(Factor& a, const Factor& b);
// a / b entrywise with 0 / 0 = 0; b's scope must equal a's.
Factor divide(const Factor& a, const Factor& b);
// Sums out everything not in `keep` (ascending, a subset of the scope).
Factor marginalize(const Factor& f, std::span<const int> keep);

}  // namespace causeway

#endif  // CAUSEWAY_FACTOR_H_
