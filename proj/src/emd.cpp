#include <cmath>
#include <limits>
#include <vector>

#include "splatgrad/errors.hpp"
#include "splatgrad/losses.hpp"

namespace splatgrad {

namespace {

// Shortest-augmenting-path assignment (Jonker-Volgenant style, O(n³)).
// Returns for each row the assigned column.
std::vector<int> solve_assignment(const std::vector<double>& cost, int n) {
    const double inf = std::numeric_limits<double>::infinity();
    // 1-based potentials; way[j] is the alternating-path predecessor of column j
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
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
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j) {
        if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
    }
    return row_to_col;
}

}  // namespace

double emd(const PointCloud& a, const PointCloud& b) {
    if (a.empty() || b.empty()) {
        throw ParameterError("emd: clouds must be nonempty");
    }
    if (a.size() != b.size()) {
        throw ParameterError("emd: clouds must have equal size, got " + std::to_string(a.size()) +
                             " and " + std::to_string(b.size()));
    }
    const int n = static_cast<int>(a.size());
    std::vector<double> cost(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            cost[static_cast<std::size_t>(i) * n + j] = (a[i] - b[j]).norm();
        }
    }
    const std::vector<int> match = solve_assignment(cost, n);
    // Re-sum the original costs in row order; the potentials carry roundoff.
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        total += cost[static_cast<std::size_t>(i) * n + match[i]];
    }
    return total;
}

}  // namespace splatgrad
