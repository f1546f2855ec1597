#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

namespace cw {

// A permutation sigma of {1..n} is stored as images: sigma[j] is the image of
// j+1, i.e. the j-th argument of the permuted tuple is x_{sigma[j]}.
using Perm = std::vector<int>;

// Koszul sign eps(sigma; x_1..x_n): the sign picked up when passing from
// x_1,...,x_n to x_{sigma(1)},...,x_{sigma(n)}, one factor (-1)^{ab} per
// transposition of adjacent symbols of degrees a, b.  Returned together with
// the plain permutation sign, and chi = sgn * eps.
struct KoszulSigns {
  int sgn;  // +1 / -1
  int eps;
  int chi() const { return sgn * eps; }
};

inline KoszulSigns koszul_sign(const Perm& sigma, const std::vector<int>& degrees) {
  const size_t n = sigma.size();
  if (degrees.size() != n) throw std::invalid_argument("koszul_sign: length mismatch");
  // Selection sort: repeatedly bring x_{sigma(j)} to the front of what is
  // left; every symbol hopped over contributes one transposition.
  std::vector<int> rest(n);
  for (size_t j = 0; j < n; ++j) rest[j] = j + 1;
  int sgn = 1, eps = 1;
  for (size_t j = 0; j < n; ++j) {
    size_t pos = 0;
    while (pos < rest.size() && rest[pos] != sigma[j]) ++pos;
    if (pos == rest.size()) throw std::invalid_argument("koszul_sign: not a permutation");
    int dmove = degrees[sigma[j] - 1];
    for (size_t t = 0; t < pos; ++t) {
      sgn = -sgn;
      if ((dmove & 1) && (degrees[rest[t] - 1] & 1)) eps = -eps;
    }
    rest.erase(rest.begin() + pos);
  }
  return {sgn, eps};
}

// All (k, n-k)-unshuffles of S_n: sigma with sigma(1)<...<sigma(k) and
// sigma(k+1)<...<sigma(n).  Count is C(n,k).  Deterministic order: by the
// first block read as an increasing sequence, lexicographically.
inline std::vector<Perm> unshuffles(int k, int n) {
  if (k < 0 || k > n) throw std::invalid_argument("unshuffles: need 0 <= k <= n");
  std::vector<Perm> out;
  std::vector<int> first;
  // Enumerate k-subsets of {1..n} lexicographically.
  std::vector<int> idx(k);
  for (int j = 0; j < k; ++j) idx[j] = j + 1;
  while (true) {
    Perm sigma(n);
    std::vector<char> used(n + 1, 0);
    for (int j = 0; j < k; ++j) {
      sigma[j] = idx[j];
      used[idx[j]] = 1;
    }
    int at = k;
    for (int v = 1; v <= n; ++v)
      if (!used[v]) sigma[at++] = v;
    out.push_back(std::move(sigma));
    if (k == 0) break;
    // next k-subset
    int j = k - 1;
    while (j >= 0 && idx[j] == n - (k - 1 - j)) --j;
    if (j < 0) break;
    ++idx[j];
    for (int t = j + 1; t < k; ++t) idx[t] = idx[t - 1] + 1;
  }
  return out;
}

}  // namespace cw
