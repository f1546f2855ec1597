#pragma once

// Planar rooted tree combinatorics; implementation lands in src/trees.cpp.

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace cw {

// Planar rooted tree, stored as nested children lists.  Canonical encoding is
// the preorder valency sequence, which also drives the enumeration order.
struct Tree {
  std::vector<Tree> children;

  int valency() const { return (int)children.size(); }
  int num_vertices() const {
    int n = 1;
    for (auto& c : children) n += c.num_vertices();
    return n;
  }
  int num_tails() const {
    if (children.empty()) return 1;
    int n = 0;
    for (auto& c : children) n += c.num_tails();
    return n;
  }
  // degree of the evaluated element: sum over vertices of (2 - valency)
  int degree() const {
    int d = 2 - valency();
    for (auto& c : children) d += c.degree();
    return d;
  }
  void preorder_valencies(std::vector<int>& out) const {
    out.push_back(valency());
    for (auto& c : children) c.preorder_valencies(out);
  }
  std::vector<int> encoding() const {
    std::vector<int> v;
    preorder_valencies(v);
    return v;
  }
  // bracket string: a leaf is a bullet, an internal vertex wraps its children
  std::string bracket() const;
  Tree mirror() const {
    Tree t;
    for (auto it = children.rbegin(); it != children.rend(); ++it) t.children.push_back(it->mirror());
    return t;
  }
  bool operator==(const Tree& o) const { return encoding() == o.encoding(); }
  bool operator<(const Tree& o) const { return encoding() < o.encoding(); }
};

// All full binary trees with n leaves (internal vertices have exactly two
// children); count is the Catalan number c_{n-1}.  n >= 1.
std::vector<Tree> enum_binary(int n);

// All completely even trees of the given degree: planar rooted trees whose
// vertices all have even valency (leaves included: valency 0), with
// degree = 1 + number of vertices.  degree must be even and >= 2.
std::vector<Tree> enum_cet(int degree);

// Same set obtained by filtering all planar trees; used as an independent
// oracle for enum_cet in tests.
std::vector<Tree> enum_cet_bruteforce(int degree);

// (-1)^{eps} for a full binary tree with n leaves, where
// eps = sum over internal vertices v of l_v (s_v - 1), with l_v and s_v the
// number of tails above the first and second child of v.
int epsilon_sign(const Tree& binary);

// Signed expansion of the differential of a completely even tree: all trees
// obtained by attaching an edge (s = 0) or grafting s >= 2 adjacent edges at
// a vertex, with signs (-1)^{rs + (j+1)(s+1)} (attach is the s = 0 case,
// reducing to (-1)^{j+1}).  Input must not have a valency 1 vertex.
std::vector<std::pair<int, Tree>> expand_tree_differential(const Tree& t);

long catalan(int k);

// Independent expansion of m_1(M_T) as a formal sum of trees, using only the
// defining identities: m_1 o m_k is rewritten through the level-k identity
// and the s = 1 terms are expanded recursively.  Coefficient map keyed by
// canonical tree order.  Used as the oracle for expand_tree_differential.
std::map<Tree, long> expand_m1_via_stasheff(const Tree& t);

}  // namespace cw
