#include "cw/trees.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <stdexcept>

namespace cw {

long catalan(int k) {
  // c_k = (2k)! / (k! (k+1)!)
  long c = 1;
  for (int i = 0; i < k; ++i) c = c * 2 * (2 * i + 1) / (i + 2);
  return c;
}

std::string Tree::bracket() const {
  if (children.empty()) return "●";
  std::string s = "(";
  for (auto& c : children) s += c.bracket();
  s += ")";
  return s;
}

std::vector<Tree> enum_binary(int n) {
  if (n < 1) throw std::invalid_argument("enum_binary: need n >= 1");
  if (n == 1) return {Tree{}};
  std::vector<Tree> out;
  for (int a = 1; a < n; ++a) {
    auto left = enum_binary(a);
    auto right = enum_binary(n - a);
    for (auto& l : left)
      for (auto& r : right) {
        Tree t;
        t.children = {l, r};
        out.push_back(std::move(t));
      }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// even-valency trees with exactly v vertices
std::vector<Tree> even_trees(int v) {
  if (v == 1) return {Tree{}};
  std::vector<Tree> out;
  for (int k = 2; k <= v - 1; k += 2) {
    // compositions of v-1 into k parts
    std::vector<int> parts(k, 1);
    std::vector<std::vector<Tree>> lists;
    // recursive composition enumeration
    std::function<void(int, int, std::vector<int>&)> rec = [&](int rem, int slot,
                                                               std::vector<int>& cur) {
      if (slot == k) {
        if (rem != 0) return;
        std::vector<std::vector<Tree>> choices;
        for (int x : cur) {
          choices.push_back(even_trees(x));
          if (choices.back().empty()) return;  // no even tree on this many vertices
        }
        std::vector<int> idx(k, 0);
        while (true) {
          Tree t;
          for (int j = 0; j < k; ++j) t.children.push_back(choices[j][idx[j]]);
          out.push_back(std::move(t));
          int j = k - 1;
          while (j >= 0 && idx[j] + 1 == (int)choices[j].size()) { idx[j] = 0; --j; }
          if (j < 0) break;
          ++idx[j];
        }
        return;
      }
      for (int x = 1; x <= rem - (k - slot - 1); ++x) {
        cur.push_back(x);
        rec(rem - x, slot + 1, cur);
        cur.pop_back();
      }
    };
    std::vector<int> cur;
    rec(v - 1, 0, cur);
    (void)parts;
  }
  std::sort(out.begin(), out.end());
  return out;
}

// all planar rooted trees with exactly v vertices
std::vector<Tree> all_trees(int v) {
  if (v == 1) return {Tree{}};
  std::vector<Tree> out;
  for (int k = 1; k <= v - 1; ++k) {
    std::function<void(int, int, std::vector<int>&)> rec = [&](int rem, int slot,
                                                               std::vector<int>& cur) {
      if (slot == k) {
        if (rem != 0) return;
        std::vector<std::vector<Tree>> choices;
        for (int x : cur) {
          choices.push_back(all_trees(x));
          if (choices.back().empty()) return;
        }
        std::vector<int> idx(k, 0);
        while (true) {
          Tree t;
          for (int j = 0; j < k; ++j) t.children.push_back(choices[j][idx[j]]);
          out.push_back(std::move(t));
          int j = k - 1;
          while (j >= 0 && idx[j] + 1 == (int)choices[j].size()) { idx[j] = 0; --j; }
          if (j < 0) break;
          ++idx[j];
        }
        return;
      }
      for (int x = 1; x <= rem - (k - slot - 1); ++x) {
        cur.push_back(x);
        rec(rem - x, slot + 1, cur);
        cur.pop_back();
      }
    };
    std::vector<int> cur;
    rec(v - 1, 0, cur);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool is_even_tree(const Tree& t) {
  if (t.valency() & 1) return false;
  for (auto& c : t.children)
    if (!is_even_tree(c)) return false;
  return true;
}

}  // namespace

std::vector<Tree> enum_cet(int degree) {
  if (degree < 2 || (degree & 1)) throw std::invalid_argument("enum_cet: degree must be even, >= 2");
  return even_trees(degree - 1);
}

std::vector<Tree> enum_cet_bruteforce(int degree) {
  if (degree < 2 || (degree & 1)) throw std::invalid_argument("enum_cet: degree must be even, >= 2");
  std::vector<Tree> out;
  for (auto& t : all_trees(degree - 1))
    if (is_even_tree(t)) out.push_back(t);
  return out;
}

int epsilon_sign(const Tree& t) {
  if (t.children.empty()) return 1;
  if (t.valency() != 2) throw std::invalid_argument("epsilon_sign: tree is not binary");
  int l = t.children[0].num_tails();
  int s = t.children[1].num_tails();
  int sign = ((l * (s - 1)) & 1) ? -1 : 1;
  return sign * epsilon_sign(t.children[0]) * epsilon_sign(t.children[1]);
}

namespace {

bool has_valency_one(const Tree& t) {
  if (t.valency() == 1) return true;
  for (auto& c : t.children)
    if (has_valency_one(c)) return true;
  return false;
}

// apply attach/graft at every vertex; path handling by recursion, rebuilding
// the tree with the modified subtree in place
void expand_at(const Tree& t, std::vector<std::pair<int, Tree>>& out,
               const std::function<Tree(Tree)>& rebuild) {
  int k = t.valency();
  if (k == 0) return;  // tails carry no operations
  // (a) attach: insert a new tail at position j = 0..k, sign (-1)^{j+1}
  for (int j = 0; j <= k; ++j) {
    Tree t2 = t;
    t2.children.insert(t2.children.begin() + j, Tree{});
    out.emplace_back((j & 1) ? 1 : -1, rebuild(std::move(t2)));
  }
  // (b) graft s adjacent edges, 1 < s, r < k, group at position j = 0..r-1,
  // sign (-1)^{rs + (j+1)(s+1)}.  s = k is excluded: that term would be the
  // differential of the whole subtree itself (a valency 1 vertex on top).
  for (int s = 2; s <= k - 1; ++s) {
    int r = k - s + 1;
    for (int j = 0; j <= r - 1; ++j) {
      Tree inner;
      inner.children.assign(t.children.begin() + j, t.children.begin() + j + s);
      Tree t2;
      t2.children.assign(t.children.begin(), t.children.begin() + j);
      t2.children.push_back(std::move(inner));
      t2.children.insert(t2.children.end(), t.children.begin() + j + s, t.children.end());
      int e = r * s + (j + 1) * (s + 1);
      out.emplace_back((e & 1) ? -1 : 1, rebuild(std::move(t2)));
    }
  }
  // recurse into children
  for (int ci = 0; ci < k; ++ci) {
    Tree base = t;
    expand_at(t.children[ci], out, [&base, ci, &rebuild](Tree sub) {
      Tree t2 = base;
      t2.children[ci] = std::move(sub);
      return rebuild(std::move(t2));
    });
  }
}

}  // namespace

std::map<Tree, long> expand_m1_via_stasheff(const Tree& t) {
  std::map<Tree, long> out;
  int k = t.valency();
  if (k == 0) return out;  // m_1(m_0) = 0, the level 0 identity
  const auto& ch = t.children;
  for (int r = 0; r <= k; ++r)
    for (int s = 0; r + s <= k; ++s) {
      int tt = k - r - s;
      if (r == 0 && s == k) continue;  // that term is m_1 m_k itself
      // moved to the right hand side: -(-1)^{rs+t}, times the Koszul sign of
      // m_s passing the first r subtree elements
      long sign = ((r * s + tt) & 1) ? 1 : -1;
      int dpre = 0;
      for (int i = 0; i < r; ++i) dpre += ch[i].degree();
      if ((s & 1) && (dpre & 1)) sign = -sign;
      if (s == 1) {
        for (auto& [tsub, c] : expand_m1_via_stasheff(ch[r])) {
          Tree t2 = t;
          t2.children[r] = tsub;
          out[t2] += sign * c;
        }
      } else if (s == 0) {
        Tree t2 = t;
        t2.children.insert(t2.children.begin() + r, Tree{});
        out[t2] += sign;
      } else {
        Tree inner;
        inner.children.assign(ch.begin() + r, ch.begin() + r + s);
        Tree t2;
        t2.children.assign(ch.begin(), ch.begin() + r);
        t2.children.push_back(std::move(inner));
        t2.children.insert(t2.children.end(), ch.begin() + r + s, ch.end());
        out[t2] += sign;
      }
    }
  for (auto it = out.begin(); it != out.end();)
    it = (it->second == 0) ? out.erase(it) : std::next(it);
  return out;
}

std::vector<std::pair<int, Tree>> expand_tree_differential(const Tree& t) {
  if (has_valency_one(t))
    throw std::invalid_argument("expand_tree_differential: tree has a valency 1 vertex");
  if (t.children.empty())
    throw std::invalid_argument("expand_tree_differential: single vertex tree is excluded");
  std::vector<std::pair<int, Tree>> out;
  expand_at(t, out, [](Tree x) { return x; });
  return out;
}

}  // namespace cw
