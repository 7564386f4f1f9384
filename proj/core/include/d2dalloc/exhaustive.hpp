#pragma once

#include <cstdint>

#include "d2dalloc/model.hpp"

namespace d2dalloc {

// Options for the ground-truth enumerator. restrict_one_d2d_per_channel
// reproduces the one-to-one sharing baseline (at most one D2D link on a
// channel, on top of the usual single x=1 occupant); force_d2d_mode_only
// disables cellular mode entirely (channel assignment only).
struct EnumOptions {
    bool restrict_one_d2d_per_channel = false;
    bool force_d2d_mode_only = false;
    std::uint64_t budget = 20'000'000;  // max assignments to enumerate
};

// Closed-form overestimate of the number of assignments the enumerator will
// touch: sum over the number x of cellular-mode D2D links of
//   C(n_d, x) * P(m_u, n_uc + x) * P(m_d, n_dc + x) * (M + 1)^(n_d - x),
// with P a falling factorial. Used as the budget guard before enumerating.
double estimate_assignment_count(const Scenario& s, const EnumOptions& opts);

// Enumerates every structurally distinct assignment, keeps the best one that
// passes the full feasibility check, and breaks ties toward the smallest
// (sorted rho pairs, sorted x set). Returns feasible=false when nothing
// satisfies the constraints. Throws BudgetError when the estimate exceeds
// opts.budget.
SolveResult exhaustive_solve(const Scenario& s, const EnumOptions& opts = {});

}  // namespace d2dalloc
