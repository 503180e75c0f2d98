// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "jwdm/ot.hpp"

namespace jwdm::ot {

std::vector<std::size_t> solve_assignment(const CostMatrix& c) {
    if (c.rows != c.cols || c.rows == 0)
        throw std::invalid_argument("solve_assignment: cost matrix must be square and non-empty");
    const std::size_t n = c.rows;
    const double inf = std::numeric_limits<double>::infinity();

    // Shortest augmenting paths with row/column potentials; index 0 is a
    // sentinel column.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    for (std::size_t row = 1; row <= n; ++row) {
        match[0] = row;
        std::size_t col0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[col0] = 1;
            const std::size_t r = match[col0];
            double delta = inf;
            std::size_t col1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = c(r - 1, j - 1) - u[r] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = col0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    col1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            col0 = col1;
        } while (match[col0] != 0);
        do {
            const std::size_t col1 = way[col0];
            match[col0] = match[col1];
            col0 = col1;
        } while (col0 != 0);
    }

    std::vector<std::size_t> assignment(n);
    for (std::size_t j = 1; j <= n; ++j) assignment[match[j] - 1] = j - 1;
    return assignment;
}

TransportResult hungarian(const CostMatrix& c) {
    const auto assignment = solve_assignment(c);
    const std::size_t n = c.rows;
    TransportResult r;
    r.coupling = Coupling{n, n, std::vector<double>(n * n, 0.0)};
    const double w = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) r.coupling.plan[i * n + assignment[i]] = w;
    r.value = transport_cost(r.coupling, c);
    return r;
}

namespace {

struct BasicCell {
    std::size_t row;
    std::size_t col;
    double flow;
};

}  // namespace

// Primal simplex on the transportation problem. The basis is a spanning tree
// of the bipartite graph (rows 0..n-1, columns n..n+m-1) with n+m-1 cells.
// Entering cells follow Dantzig's rule; after a run of degenerate pivots the
// solver switches to Bland's rule until the objective moves, which rules out
// cycling.
TransportResult network_simplex(std::span<const double> a, std::span<const double> b,
                                const CostMatrix& c) {
    const std::size_t n = a.size(), m = b.size();
    if (n == 0 || m == 0) throw std::invalid_argument("network_simplex: empty marginal");
    if (c.rows != n || c.cols != m)
        throw std::invalid_argument("network_simplex: cost matrix shape does not match marginals");
    double sa = 0.0, sb = 0.0;
    for (double x : a) {
        if (!(x >= 0.0)) throw std::invalid_argument("network_simplex: negative supply");
        sa += x;
    }
    for (double x : b) {
        if (!(x >= 0.0)) throw std::invalid_argument("network_simplex: negative demand");
        sb += x;
    }
    if (std::fabs(sa - sb) > 1e-9 * std::max(1.0, sa))
        throw std::invalid_argument("network_simplex: marginals carry different mass");

    // Northwest-corner start.
    std::vector<BasicCell> basis;
    basis.reserve(n + m - 1);
    std::vector<std::ptrdiff_t> slot(n * m, -1);
    {
        std::vector<double> ra(a.begin(), a.end()), rb(b.begin(), b.end());
        std::size_t i = 0, j = 0;
        while (true) {
            const double q = std::max(0.0, std::min(ra[i], rb[j]));
            slot[i * m + j] = static_cast<std::ptrdiff_t>(basis.size());
            basis.push_back({i, j, q});
            const bool row_done = ra[i] <= rb[j];
            ra[i] -= q;
            rb[j] -= q;
            if (i == n - 1 && j == m - 1) break;
            if ((row_done && i < n - 1) || j == m - 1)
                ++i;
            else
                ++j;
        }
    }

    const std::size_t nodes = n + m;
    const double tol = 1e-12 * std::max(1.0, c.max());
    std::vector<std::vector<std::size_t>> adj(nodes);
    std::vector<double> pot(nodes);
    std::vector<char> seen(nodes);
    std::vector<std::ptrdiff_t> parent_edge(nodes);
    std::vector<std::size_t> queue;
    queue.reserve(nodes);

    auto other_end = [&](const BasicCell& e, std::size_t node) {
        return node < n ? n + e.col : e.row;
    };
    auto rebuild_adjacency = [&] {
        for (auto& l : adj) l.clear();
        for (std::size_t k = 0; k < basis.size(); ++k) {
            adj[basis[k].row].push_back(k);
            adj[n + basis[k].col].push_back(k);
        }
    };
    // Breadth-first walk of the tree from `root`; fills parent_edge and, if
    // requested, node potentials with pot[row] + pot[col] = c(row, col).
    auto walk = [&](std::size_t root, bool potentials) {
        std::fill(seen.begin(), seen.end(), 0);
        queue.clear();
        queue.push_back(root);
        seen[root] = 1;
        parent_edge[root] = -1;
        if (potentials) pot[root] = 0.0;
        for (std::size_t h = 0; h < queue.size(); ++h) {
            const std::size_t u = queue[h];
            for (std::size_t k : adj[u]) {
                const std::size_t w = other_end(basis[k], u);
                if (seen[w]) continue;
                seen[w] = 1;
                parent_edge[w] = static_cast<std::ptrdiff_t>(k);
                if (potentials) pot[w] = c(basis[k].row, basis[k].col) - pot[u];
                queue.push_back(w);
            }
        }
        if (queue.size() != nodes) throw std::logic_error("network_simplex: basis is not a tree");
    };

    const std::size_t max_pivots = 50 * n * m + 1000;
    std::size_t degenerate_run = 0;
    const std::size_t bland_after = n + m;
    std::vector<std::size_t> path;
    for (std::size_t pivot = 0;; ++pivot) {
        if (pivot > max_pivots) throw std::runtime_error("network_simplex: pivot limit exceeded");
        rebuild_adjacency();
        walk(0, true);

        const bool bland = degenerate_run >= bland_after;
        std::ptrdiff_t entering = -1;
        double best = -tol;
        for (std::size_t i = 0; i < n && !(bland && entering >= 0); ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                if (slot[i * m + j] >= 0) continue;
                const double rc = c(i, j) - pot[i] - pot[n + j];
                if (rc < best) {
                    entering = static_cast<std::ptrdiff_t>(i * m + j);
                    if (bland) break;
                    best = rc;
                }
            }
        }
        if (entering < 0) break;

        const std::size_t ei = static_cast<std::size_t>(entering) / m;
        const std::size_t ej = static_cast<std::size_t>(entering) % m;
        walk(ei, false);
        path.clear();
        for (std::size_t node = n + ej; node != ei;) {
            const auto k = static_cast<std::size_t>(parent_edge[node]);
            path.push_back(k);
            node = other_end(basis[k], node);
        }
        // path[0] touches column ej; even positions lose flow, odd gain.
        std::size_t leaving = path[0];
        double theta = basis[leaving].flow;
        for (std::size_t t = 2; t < path.size(); t += 2) {
            const auto& e = basis[path[t]];
            const auto& cur = basis[leaving];
            if (e.flow < theta ||
                (bland && e.flow == theta && e.row * m + e.col < cur.row * m + cur.col)) {
                theta = e.flow;
                leaving = path[t];
            }
        }
        for (std::size_t t = 0; t < path.size(); ++t) {
            auto& e = basis[path[t]];
            e.flow = (t % 2 == 0) ? std::max(0.0, e.flow - theta) : e.flow + theta;
        }
        degenerate_run = theta > 0.0 ? 0 : degenerate_run + 1;

        auto& out = basis[leaving];
        slot[out.row * m + out.col] = -1;
        out = BasicCell{ei, ej, theta};
        slot[static_cast<std::size_t>(entering)] = static_cast<std::ptrdiff_t>(leaving);
    }

    TransportResult r;
    r.coupling = Coupling{n, m, std::vector<double>(n * m, 0.0)};
    for (const auto& e : basis) r.coupling.plan[e.row * m + e.col] = e.flow;
    r.value = transport_cost(r.coupling, c);
    return r;
}

}  // namespace jwdm::ot
