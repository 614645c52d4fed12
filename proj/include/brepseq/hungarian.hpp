#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "brepseq/geometry.hpp"

namespace brepseq {

/// Square cost matrix with forbidden entries.
struct AssignmentProblem {
  int size = 0;
  /// cost[i * size + j]: incoming i matched to outgoing j.
  std::vector<double> cost;
  std::vector<bool> forbidden;

  double at(int i, int j) const { return cost[static_cast<std::size_t>(i) * size + j]; }
  bool is_forbidden(int i, int j) const {
    return !forbidden.empty() && forbidden[static_cast<std::size_t>(i) * size + j];
  }
};

struct Assignment {
  /// permutation[i] = column matched to row i.
  std::vector<int> permutation;
  double cost = 0.0;
  bool feasible = true;
};

namespace detail {

/// Shortest-augmenting-path Hungarian method (potentials form), O(n^3). a is n x n, 0-based.
inline std::vector<int> hungarian_min(const std::vector<double>& a, int n) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a[static_cast<std::size_t>(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> perm(n, -1);
  for (int j = 1; j <= n; ++j) perm[p[j] - 1] = j - 1;
  return perm;
}

}  // namespace detail

/// Minimum-cost perfect matching avoiding forbidden pairs. Forbidden entries carry a penalty larger
/// than any feasible total, so a forbidden pair in the optimum means no feasible matching exists.
inline Assignment solve_assignment(const AssignmentProblem& p) {
  Assignment out;
  const int n = p.size;
  if (n == 0) return out;
  double finite_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!p.is_forbidden(i, j)) finite_sum += std::abs(p.at(i, j));
    }
  }
  const double penalty = (finite_sum + 1.0) * 4.0;
  std::vector<double> a(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i) * n + j] = p.is_forbidden(i, j) ? penalty : p.at(i, j);
  }
  out.permutation = detail::hungarian_min(a, n);
  for (int i = 0; i < n; ++i) {
    const int j = out.permutation[i];
    if (p.is_forbidden(i, j)) out.feasible = false;
    out.cost += p.at(i, j);
  }
  return out;
}

/// Exhaustive search over all permutations; test oracle for small sizes.
inline Assignment brute_force_assignment(const AssignmentProblem& p) {
  Assignment best;
  best.cost = std::numeric_limits<double>::infinity();
  best.feasible = false;
  std::vector<int> perm(p.size);
  for (int i = 0; i < p.size; ++i) perm[i] = i;
  do {
    double c = 0.0;
    bool ok = true;
    for (int i = 0; i < p.size && ok; ++i) {
      if (p.is_forbidden(i, perm[i])) ok = false;
      c += p.at(i, perm[i]);
    }
    if (ok && c < best.cost) {
      best.cost = c;
      best.permutation = perm;
      best.feasible = true;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace brepseq
