// Dense reference for random-walk controversy, written independently of the
// library solver.
//
// Dangling nodes are treated as terminals: h0 is the absorption probability
// when dangling nodes stop the walk, h1 the chance of stopping at a dangling
// node. A teleport restarts at a random start node, so P = m0 + P * m1 where
// m0 and m1 are the start-set means, i.e. P = m0 / (1 - m1).
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace testing_support {

struct OracleRwc {
  double p[2][2] = {{0, 0}, {0, 0}};
  double rwc() const { return p[0][0] * p[1][1] - p[0][1] * p[1][0]; }
};

// Gaussian elimination with partial pivoting; a is n x n row-major, b has
// `cols` right-hand sides per row. Solves in place into b.
inline void gauss_solve(std::vector<std::vector<double>>& a, std::vector<std::vector<double>>& b) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0.0) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
      for (std::size_t k = 0; k < b[r].size(); ++k) b[r][k] -= f * b[col][k];
    }
  }
  for (std::size_t r = 0; r < n; ++r)
    for (auto& x : b[r]) x /= a[r][r];
}

// edges: (source, target) -> weight; side: id -> 0/1 for every node.
inline OracleRwc oracle_rwc(const std::map<std::pair<std::string, std::string>, std::uint64_t>& edges,
                            const std::map<std::string, int>& side, std::size_t hub_k) {
  std::vector<std::string> ids;
  std::map<std::string, std::size_t> index;
  for (const auto& [id, s] : side) {
    index[id] = ids.size();
    ids.push_back(id);
  }
  const std::size_t n = ids.size();
  std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
  std::vector<double> out(n, 0.0), in_strength(n, 0.0);
  std::vector<std::size_t> in_degree(n, 0);
  for (const auto& [key, weight] : edges) {
    auto u = index.at(key.first), v = index.at(key.second);
    w[u][v] += static_cast<double>(weight);
    out[u] += static_cast<double>(weight);
    in_strength[v] += static_cast<double>(weight);
    ++in_degree[v];
  }
  std::vector<int> hub(n, -1);
  for (int s = 0; s < 2; ++s) {
    std::vector<std::size_t> members;
    for (std::size_t v = 0; v < n; ++v)
      if (side.at(ids[v]) == s) members.push_back(v);
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      if (in_degree[a] != in_degree[b]) return in_degree[a] > in_degree[b];
      if (in_strength[a] != in_strength[b]) return in_strength[a] > in_strength[b];
      return ids[a] < ids[b];
    });
    for (std::size_t k = 0; k < hub_k && k < members.size(); ++k) hub[members[k]] = s;
  }

  // Which non-hub nodes can reach a terminal (hub or dangling) along edges.
  std::vector<bool> terminal_reach(n, false);
  for (std::size_t v = 0; v < n; ++v) terminal_reach[v] = hub[v] >= 0 || out[v] == 0.0;
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t u = 0; u < n; ++u) {
      if (terminal_reach[u]) continue;
      for (std::size_t v = 0; v < n; ++v)
        if (w[u][v] > 0 && terminal_reach[v]) {
          terminal_reach[u] = true;
          changed = true;
          break;
        }
    }
  }

  // Unknowns: non-hub, non-dangling nodes that reach a terminal.
  std::vector<std::size_t> var(n, n);
  std::vector<std::size_t> vars;
  for (std::size_t v = 0; v < n; ++v)
    if (hub[v] < 0 && out[v] > 0.0 && terminal_reach[v]) {
      var[v] = vars.size();
      vars.push_back(v);
    }
  const std::size_t m = vars.size();
  // Columns: absorbed at X, absorbed at Y, stopped at a dangling node.
  std::vector<std::vector<double>> a(m, std::vector<double>(m, 0.0));
  std::vector<std::vector<double>> b(m, std::vector<double>(3, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t u = vars[i];
    a[i][i] = 1.0;
    for (std::size_t v = 0; v < n; ++v) {
      if (w[u][v] == 0.0) continue;
      const double p = w[u][v] / out[u];
      if (hub[v] >= 0) b[i][static_cast<std::size_t>(hub[v])] += p;
      else if (out[v] == 0.0) b[i][2] += p;
      else if (var[v] < n) a[i][var[v]] -= p;
    }
  }
  if (m > 0) gauss_solve(a, b);
  auto value = [&](std::size_t v, std::size_t col) {
    if (hub[v] >= 0) return col < 2 && static_cast<std::size_t>(hub[v]) == col ? 1.0 : 0.0;
    if (out[v] == 0.0) return col == 2 ? 1.0 : 0.0;
    return var[v] < n ? b[var[v]][col] : 0.0;
  };

  OracleRwc r;
  for (int from = 0; from < 2; ++from) {
    double m0[2] = {0, 0}, m1 = 0;
    std::size_t starts = 0;
    for (std::size_t v = 0; v < n; ++v) {
      if (side.at(ids[v]) != from || hub[v] >= 0) continue;
      ++starts;
      m0[0] += value(v, 0);
      m0[1] += value(v, 1);
      m1 += value(v, 2);
    }
    for (int to = 0; to < 2; ++to) {
      const double mean0 = m0[to] / static_cast<double>(starts);
      const double mean1 = m1 / static_cast<double>(starts);
      r.p[from][to] = mean0 == 0.0 ? 0.0 : mean0 / (1.0 - mean1);
    }
  }
  return r;
}

}  // namespace testing_support
