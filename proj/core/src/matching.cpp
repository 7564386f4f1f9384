#include "d2dalloc/matching.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace d2dalloc {

namespace {

constexpr double kTieTol = 1e-9;

// Kuhn-Munkres with potentials over a rows x cols cost matrix (rows <= cols),
// minimizing. Forbidden edges carry a finite big cost so the duals never see
// an infinity; whether one was used is checked afterwards.
struct Km {
    int rows, cols;
    const std::vector<std::vector<EdgeWeight>>* w;
    double big;

    double cost(int r, int c) const {
        const EdgeWeight& e = (*w)[static_cast<std::size_t>(r)]
                                  [static_cast<std::size_t>(c)];
        return e ? -*e : big;
    }

    // col_to_row[c+1] = matched row index + 1 (0 = unmatched column).
    std::vector<int> solve() const {
        const int n = rows, m = cols;
        std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
        std::vector<double> v(static_cast<std::size_t>(m) + 1, 0.0);
        std::vector<int> p(static_cast<std::size_t>(m) + 1, 0);
        std::vector<int> way(static_cast<std::size_t>(m) + 1, 0);
        for (int i = 1; i <= n; ++i) {
            p[0] = i;
            int j0 = 0;
            std::vector<double> minv(static_cast<std::size_t>(m) + 1,
                                     std::numeric_limits<double>::infinity());
            std::vector<char> used(static_cast<std::size_t>(m) + 1, 0);
            do {
                used[static_cast<std::size_t>(j0)] = 1;
                const int i0 = p[static_cast<std::size_t>(j0)];
                int j1 = 0;
                double delta = std::numeric_limits<double>::infinity();
                for (int j = 1; j <= m; ++j) {
                    if (used[static_cast<std::size_t>(j)]) continue;
                    const double cur = cost(i0 - 1, j - 1) -
                                       u[static_cast<std::size_t>(i0)] -
                                       v[static_cast<std::size_t>(j)];
                    if (cur < minv[static_cast<std::size_t>(j)]) {
                        minv[static_cast<std::size_t>(j)] = cur;
                        way[static_cast<std::size_t>(j)] = j0;
                    }
                    if (minv[static_cast<std::size_t>(j)] < delta) {
                        delta = minv[static_cast<std::size_t>(j)];
                        j1 = j;
                    }
                }
                for (int j = 0; j <= m; ++j) {
                    if (used[static_cast<std::size_t>(j)]) {
                        u[static_cast<std::size_t>(
                            p[static_cast<std::size_t>(j)])] += delta;
                        v[static_cast<std::size_t>(j)] -= delta;
                    } else {
                        minv[static_cast<std::size_t>(j)] -= delta;
                    }
                }
                j0 = j1;
            } while (p[static_cast<std::size_t>(j0)] != 0);
            do {
                const int j1 = way[static_cast<std::size_t>(j0)];
                p[static_cast<std::size_t>(j0)] =
                    p[static_cast<std::size_t>(j1)];
                j0 = j1;
            } while (j0 != 0);
        }
        return p;
    }
};

std::optional<MatchResult> solve_once(
    const std::vector<std::vector<EdgeWeight>>& weights) {
    const int rows = static_cast<int>(weights.size());
    if (rows == 0) return MatchResult{{}, 0.0};
    const int cols = static_cast<int>(weights.front().size());
    if (rows > cols) return std::nullopt;
    for (const auto& row : weights)
        if (static_cast<int>(row.size()) != cols)
            throw std::invalid_argument("max_weight_assignment: ragged matrix");

    double big = 1.0;
    for (const auto& row : weights)
        for (const EdgeWeight& e : row)
            if (e) big += 2.0 * std::fabs(*e);

    const Km km{rows, cols, &weights, big};
    const std::vector<int> p = km.solve();

    MatchResult out;
    out.row_to_col.assign(static_cast<std::size_t>(rows), -1);
    for (int j = 1; j <= cols; ++j) {
        const int i = p[static_cast<std::size_t>(j)];
        if (i == 0) continue;
        const EdgeWeight& e = weights[static_cast<std::size_t>(i - 1)]
                                     [static_cast<std::size_t>(j - 1)];
        if (!e) return std::nullopt;  // only a forbidden completion exists
        out.row_to_col[static_cast<std::size_t>(i - 1)] = j - 1;
        out.total += *e;
    }
    return out;
}

}  // namespace

std::optional<MatchResult> max_weight_assignment(
    const std::vector<std::vector<EdgeWeight>>& weights) {
    std::optional<MatchResult> base = solve_once(weights);
    if (!base || base->row_to_col.empty()) return base;

    const int rows = static_cast<int>(weights.size());
    const int cols = static_cast<int>(weights.front().size());

    // Lexicographic refinement: walk the columns in order and pin the
    // smallest row that still permits an optimal completion. This
    // canonicalizes ties regardless of the path the solver above took.
    std::vector<int> fixed_row_of_col(static_cast<std::size_t>(cols), -1);
    std::vector<char> row_fixed(static_cast<std::size_t>(rows), 0);
    double remaining = base->total;
    int rows_left = rows;

    std::vector<int> free_rows;
    std::vector<int> free_cols;
    for (int c = 0; c < cols && rows_left > 0; ++c) {
        free_rows.clear();
        for (int r = 0; r < rows; ++r)
            if (!row_fixed[static_cast<std::size_t>(r)]) free_rows.push_back(r);
        free_cols.clear();
        for (int c2 = c + 1; c2 < cols; ++c2)
            if (fixed_row_of_col[static_cast<std::size_t>(c2)] < 0)
                free_cols.push_back(c2);

        for (int r : free_rows) {
            const EdgeWeight& e = weights[static_cast<std::size_t>(r)]
                                         [static_cast<std::size_t>(c)];
            if (!e) continue;
            // Sub-problem without row r and columns <= c.
            std::vector<std::vector<EdgeWeight>> sub;
            sub.reserve(free_rows.size() - 1);
            for (int r2 : free_rows) {
                if (r2 == r) continue;
                std::vector<EdgeWeight> line;
                line.reserve(free_cols.size());
                for (int c2 : free_cols)
                    line.push_back(weights[static_cast<std::size_t>(r2)]
                                          [static_cast<std::size_t>(c2)]);
                sub.push_back(std::move(line));
            }
            const std::optional<MatchResult> rest = solve_once(sub);
            if (!rest) continue;
            if (*e + rest->total >= remaining - kTieTol) {
                fixed_row_of_col[static_cast<std::size_t>(c)] = r;
                row_fixed[static_cast<std::size_t>(r)] = 1;
                remaining = rest->total;
                --rows_left;
                break;
            }
        }
    }

    MatchResult out;
    out.row_to_col.assign(static_cast<std::size_t>(rows), -1);
    for (int c = 0; c < cols; ++c) {
        const int r = fixed_row_of_col[static_cast<std::size_t>(c)];
        if (r < 0) continue;
        out.row_to_col[static_cast<std::size_t>(r)] = c;
        out.total += *weights[static_cast<std::size_t>(r)]
                             [static_cast<std::size_t>(c)];
    }
    return out;
}

}  // namespace d2dalloc
