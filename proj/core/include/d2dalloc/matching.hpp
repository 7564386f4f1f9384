#pragma once

#include <optional>
#include <vector>

namespace d2dalloc {

// Weight of one bipartite edge; nullopt marks a forbidden edge (the usual
// "minus infinity" without putting an infinity into the arithmetic).
using EdgeWeight = std::optional<double>;

struct MatchResult {
    std::vector<int> row_to_col;  // size = rows, every entry >= 0
    double total = 0.0;
};

// Maximum-weight bipartite matching that must saturate every row, solved by
// the Kuhn-Munkres algorithm in O(rows^2 * cols). weights[r][c] is the edge
// weight between row r and column c. Requires rows <= cols. Returns nullopt
// when no saturating matching over finite edges exists. Among co-optimal
// matchings (total within 1e-9), the one whose sorted (col, row) pair list
// is lexicographically smallest is returned.
std::optional<MatchResult> max_weight_assignment(
    const std::vector<std::vector<EdgeWeight>>& weights);

}  // namespace d2dalloc
