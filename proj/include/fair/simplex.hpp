#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace fair {

enum class Relation { LessEqual, Equal, GreaterEqual };

struct LinearConstraint {
    std::vector<double> coeffs;
    Relation relation;
    double rhs;
};

struct VariableBounds {
    double lower = 0.0;
    double upper = std::numeric_limits<double>::infinity();

    static VariableBounds free() {
        return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    }
};

/// maximize objective . x  subject to constraints and per-variable bounds.
struct LinearProgram {
    std::vector<double> objective;
    std::vector<LinearConstraint> constraints;
    std::vector<VariableBounds> bounds; // empty means x >= 0 for every variable

    explicit LinearProgram(std::size_t n_vars = 0) : objective(n_vars, 0.0) {}

    std::size_t n_vars() const noexcept { return objective.size(); }

    /// Adds a constraint with a dense coefficient row; returns its index.
    std::size_t add_constraint(std::vector<double> coeffs, Relation rel, double rhs);
    void set_bounds(std::size_t var, VariableBounds b);
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

std::string to_string(LpStatus s);

struct LpOptions {
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    /// Pivot elements smaller than this are never chosen.
    double pivot_tol = 1e-11;
    /// 0 picks a limit proportional to the tableau size.
    std::size_t max_iterations = 0;
};

struct LpSolution {
    LpStatus status = LpStatus::IterationLimit;
    std::vector<double> x;
    double objective = 0.0;
    std::size_t iterations = 0;
    bool used_bland = false;
};

/**
 * Two-phase dense tableau simplex.
 *
 * Pricing is Dantzig's largest reduced cost; after 10 * rows degenerate
 * pivots the solver switches permanently to Bland's rule, which cannot cycle.
 * Infeasible and unbounded problems are reported through the status.
 */
LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options = {});

/// Largest violation of any constraint or bound by x.
double max_violation(const LinearProgram& lp, const std::vector<double>& x);

} // namespace fair
