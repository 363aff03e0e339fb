#include "causeway/factor.h"

#include <algorithm>
#include <numeric>

#include "causeway/error.h"

namespace causeway {
namespace {

// Stride of each variable of `scope` inside factor `f` (0 when absent).
std::vector<std::size_t> strides_in(const Factor& f, std::span<const int> scope) {
  std::vector<std::size_t> own(f.vars.size());
  std::size_t s = 1;
  for (std::size_t i = f.vars.size(); i-- > 0;) {
    own[i] = s;
    s *= static_cast<std::size_t>(f.cards[i]);
  }
  std::vector<std::size_t> out(scope.size(), 0);
  for (std::size_t i = 0; i < scope.size(); ++i) {
    auto it = std::lower_bound(f.vars.begin(), f.vars.end(), scope[i]);
    if (it != f.vars.end() && *it == scope[i]) out[i] = own[it - f.vars.begin()];
  }
  return out;
}

// Walks every assignment of (vars, cards) in factor order, calling
// fn(position, offset_a, offset_b) with offsets into two factors.
template <typename Fn>
void walk(const std::vector<int>& cards, const std::vector<std::size_t>& sa,
          const std::vector<std::size_t>& sb, std::size_t total, Fn&& fn) {
  const std::size_t k = cards.size();
  std::vector<int> digit(k, 0);
  std::size_t oa = 0, ob = 0;
  for (std::size_t pos = 0; pos < total; ++pos) {
    fn(pos, oa, ob);
    for (std::size_t i = k; i-- > 0;) {
      if (++digit[i] < cards[i]) {
        oa += sa[i];
        ob += sb[i];
        break;
      }
      oa -= sa[i] * (cards[i] - 1);
      ob -= sb[i] * (cards[i] - 1);
      digit[i] = 0;
    }
  }
}

}  // namespace

Factor Factor::ones(std::vector<int> vars, std::vector<int> cards) {
  if (vars.size() != cards.size()) throw Error("factor: scope and cardinalities differ in length");
  if (!std::is_sorted(vars.begin(), vars.end()) ||
      std::adjacent_find(vars.begin(), vars.end()) != vars.end()) {
    throw Error("factor: scope must be strictly ascending");
  }
  std::size_t n = 1;
  for (int c : cards) {
    if (c < 1) throw Error("factor: cardinality must be >= 1");
    n *= static_cast<std::size_t>(c);
  }
  return Factor{std::move(vars), std::move(cards), std::vector<double>(n, 1.0)};
}

double Factor::total() const { return std::accumulate(values.begin(), values.end(), 0.0); }

void Factor::normalize() {
  const double t = total();
  if (!(t > 0)) throw Error("factor: cannot normalize a zero factor");
  for (double& v : values) v /= t;
}

void Factor::reduce(int var, int level) {
  auto it = std::lower_bound(vars.begin(), vars.end(), var);
  if (it == vars.end() || *it != var) return;
  const std::size_t i = it - vars.begin();
  if (level < 0 || level >= cards[i]) throw Error("factor: evidence level out of range");
  std::size_t stride = 1;
  for (std::size_t j = i + 1; j < vars.size(); ++j) stride *= cards[j];
  for (std::size_t pos = 0; pos < values.size(); ++pos) {
    if (static_cast<int>((pos / stride) % cards[i]) != level) values[pos] = 0.0;
  }
}

Factor multiply(const Factor& a, const Factor& b) {
  std::vector<int> vars;
  std::set_union(a.vars.begin(), a.vars.end(), b.vars.begin(), b.vars.end(),
                 std::back_inserter(vars));
  std::vector<int> cards(vars.size());
  for (std::size_t i = 0; i < vars.size(); ++i) {
    auto ia = std::lower_bound(a.vars.begin(), a.vars.end(), vars[i]);
    if (ia != a.vars.end() && *ia == vars[i]) {
      cards[i] = a.cards[ia - a.vars.begin()];
    } else {
      cards[i] = b.cards[std::lower_bound(b.vars.begin(), b.vars.end(), vars[i]) - b.vars.begin()];
    }
  }
  Factor out = Factor::ones(vars, cards);
  const auto sa = strides_in(a, vars);
  const auto sb = strides_in(b, vars);
  walk(cards, sa, sb, out.size(), [&](std::size_t pos, std::size_t oa, std::size_t ob) {
    out.values[pos] = a.values[oa] * b.values[ob];
  });
  return out;
}

void multiply_into(Factor& a, const Factor& b) {
  if (!std::includes(a.vars.begin(), a.vars.end(), b.vars.begin(), b.vars.end())) {
    throw Error("factor: multiply_into needs b's scope inside a's");
  }
  const auto sb = strides_in(b, a.vars);
  const auto sa = strides_in(a, a.vars);
  walk(a.cards, sa, sb, a.size(),
       [&](std::size_t pos, std::size_t, std::size_t ob) { a.values[pos] *= b.values[ob]; });
}

Factor divide(const Factor& a, const Factor& b) {
  if (a.vars != b.vars) throw Error("factor: divide needs identical scopes");
  Factor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.values[i] = b.values[i] == 0.0 ? 0.0 : a.values[i] / b.values[i];
  }
  return out;
}

Factor marginalize(const Factor& f, std::span<const int> keep) {
  if (!std::includes(f.vars.begin(), f.vars.end(), keep.begin(), keep.end())) {
    throw Error("factor: marginalize onto variables outside the scope");
  }
  std::vector<int> kcards;
  for (int v : keep) {
    kcards.push_back(f.cards[std::lower_bound(f.vars.begin(), f.vars.end(), v) - f.vars.begin()]);
  }
  Factor out = Factor::ones({keep.begin(), keep.end()}, kcards);
  std::fill(out.values.begin(), out.values.end(), 0.0);
  const auto so = strides_in(out, f.vars);
  const auto sf = strides_in(f, f.vars);
  walk(f.cards, sf, so, f.size(),
       [&](std::size_t pos, std::size_t, std::size_t oo) { out.values[oo] += f.values[pos]; });
  return out;
}

}  // namespace causeway
