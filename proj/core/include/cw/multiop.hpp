#pragma once

#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <vector>

#include "cw/graded.hpp"

namespace cw {

// Multilinear graded map of fixed arity and degree shift.  Implementations
// must be linear in every slot; inputs are expected homogeneous whenever a
// Koszul sign depends on them (helpers below expand inhomogeneous inputs).
template <class F>
struct MultiOp {
  virtual ~MultiOp() = default;
  virtual int arity() const = 0;
  virtual int shift() const = 0;
  virtual GradedSpacePtr source() const = 0;
  virtual GradedSpacePtr target() const = 0;
  virtual Elt<F> apply(const std::vector<Elt<F>>& xs) const = 0;
};

template <class F>
using MultiOpPtr = std::shared_ptr<const MultiOp<F>>;

// Multilinear map stored as a sparse tensor on basis tuples.
// Key: (deg_1, idx_1, ..., deg_k, idx_k); value: list of (out index, coeff)
// in the determined output degree sum(deg_i) + shift.
template <class F>
struct TensorOp final : MultiOp<F> {
  GradedSpacePtr src, dst;
  int k = 0, sh = 0;
  std::map<std::vector<int>, std::vector<std::pair<int, F>>> entries;

  TensorOp(GradedSpacePtr s, GradedSpacePtr t, int arity_, int shift_)
      : src(std::move(s)), dst(std::move(t)), k(arity_), sh(shift_) {}

  int arity() const override { return k; }
  int shift() const override { return sh; }
  GradedSpacePtr source() const override { return src; }
  GradedSpacePtr target() const override { return dst; }

  void add_entry(const std::vector<int>& key, int out_idx, const F& c) {
    auto& lst = entries[key];
    for (auto& [j, v] : lst)
      if (j == out_idx) { v += c; return; }
    lst.emplace_back(out_idx, c);
  }

  Elt<F> apply(const std::vector<Elt<F>>& xs) const override {
    if ((int)xs.size() != k) throw std::invalid_argument("TensorOp::apply: arity mismatch");
    Elt<F> out(dst);
    for (auto& [key, lst] : entries) {
      F c(1);
      bool dead = false;
      for (int j = 0; j < k && !dead; ++j) {
        F x = xs[j].coeff(key[2 * j], key[2 * j + 1]);
        if (field_traits<F>::is_zero(x)) dead = true;
        else c *= x;
      }
      if (dead) continue;
      int outdeg = sh;
      for (int j = 0; j < k; ++j) outdeg += key[2 * j];
      for (auto& [oi, v] : lst) out.add_to(outdeg, oi, c * v);
    }
    out.prune();
    return out;
  }
};

// Iterate over all homogeneous basis tuples of given arity on a space,
// optionally restricted to degrees <= degcap per slot.
inline std::vector<std::vector<std::pair<int, int>>> basis_tuples(const GradedSpace& sp, int arity) {
  std::vector<std::pair<int, int>> singles;
  for (int p = 0; p <= sp.top_degree(); ++p)
    for (int j = 0; j < sp.dim(p); ++j) singles.emplace_back(p, j);
  std::vector<std::vector<std::pair<int, int>>> out;
  std::vector<int> idx(arity, 0);
  if (arity == 0) { out.push_back({}); return out; }
  if (singles.empty()) return out;
  while (true) {
    std::vector<std::pair<int, int>> tup(arity);
    for (int j = 0; j < arity; ++j) tup[j] = singles[idx[j]];
    out.push_back(std::move(tup));
    int j = arity - 1;
    while (j >= 0 && idx[j] + 1 == (int)singles.size()) { idx[j] = 0; --j; }
    if (j < 0) break;
    ++idx[j];
  }
  return out;
}

// Materialize any multilinear operator as a stored tensor by evaluating it on
// every basis tuple.  Only sensible on small spaces.
template <class F>
std::shared_ptr<TensorOp<F>> materialize(const MultiOp<F>& op) {
  auto t = std::make_shared<TensorOp<F>>(op.source(), op.target(), op.arity(), op.shift());
  auto sp = op.source();
  for (auto& tup : basis_tuples(*sp, op.arity())) {
    std::vector<Elt<F>> xs;
    std::vector<int> key;
    for (auto& [p, j] : tup) {
      xs.push_back(Elt<F>::basis(sp, p, j));
      key.push_back(p);
      key.push_back(j);
    }
    Elt<F> y = op.apply(xs);
    y.prune();
    for (auto& [q, v] : y.comp)
      for (int oi = 0; oi < (int)v.size(); ++oi)
        if (!field_traits<F>::is_zero(v[oi])) t->add_entry(key, oi, v[oi]);
  }
  return t;
}

// Apply f_1 (x) f_2 (x) ... (x) f_q to a concatenated tuple of homogeneous
// inputs, with the Koszul sign from moving each f_j past the arguments of the
// blocks before it.  Returns the list of output elements (one per block); the
// sign is accumulated separately.
//
// Convention: (f (x) g)(x (x) y) = (-1)^{|g| |x|} f(x) (x) g(y).
template <class F>
struct TensorApplied {
  std::vector<Elt<F>> outs;
  int sign = 1;
};

template <class F>
TensorApplied<F> apply_tensor_ops(const std::vector<const MultiOp<F>*>& ops,
                                  const std::vector<Elt<F>>& xs) {
  TensorApplied<F> res;
  size_t pos = 0;
  // total degree of arguments consumed so far
  int degsofar = 0;
  std::vector<int> blockdeg;
  for (auto* op : ops) {
    std::vector<Elt<F>> block(xs.begin() + pos, xs.begin() + pos + op->arity());
    pos += op->arity();
    int bdeg = 0;
    for (auto& x : block) {
      if (x.is_zero()) continue;
      bdeg += x.degree();
    }
    // Koszul: op (degree op->shift()) moves past everything before its block.
    if ((op->shift() & 1) && (degsofar & 1)) res.sign = -res.sign;
    degsofar += bdeg;
    res.outs.push_back(op->apply(block));
  }
  if (pos != xs.size()) throw std::invalid_argument("apply_tensor_ops: arity mismatch");
  return res;
}

}  // namespace cw
