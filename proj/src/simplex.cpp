#include "fair/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fair/welfare.hpp"

namespace fair {

std::size_t LinearProgram::add_constraint(std::vector<double> coeffs, Relation rel, double rhs) {
    if (coeffs.size() != n_vars()) {
        throw InputError("add_constraint: expected " + std::to_string(n_vars()) + " coefficients");
    }
    constraints.push_back({std::move(coeffs), rel, rhs});
    return constraints.size() - 1;
}

void LinearProgram::set_bounds(std::size_t var, VariableBounds b) {
    if (bounds.empty()) {
        bounds.assign(n_vars(), VariableBounds{});
    }
    bounds.at(var) = b;
}

std::string to_string(LpStatus s) {
    switch (s) {
    case LpStatus::Optimal:
        return "optimal";
    case LpStatus::Infeasible:
        return "infeasible";
    case LpStatus::Unbounded:
        return "unbounded";
    case LpStatus::IterationLimit:
        return "iteration_limit";
    }
    return "unknown";
}

namespace {

// x_j = offset + sign * y[pos] - y[neg]   (neg only for free variables)
struct ColumnMap {
    double offset = 0.0;
    double sign = 1.0;
    std::size_t pos = 0;
    std::ptrdiff_t neg = -1;
};

struct Row {
    std::vector<double> coeffs; // over y
    Relation relation;
    double rhs;
};

class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * (cols + 1), 0.0), basis_(rows) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double& at(std::size_t r, std::size_t c) { return data_[r * (cols_ + 1) + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * (cols_ + 1) + c]; }
    double& rhs(std::size_t r) { return at(r, cols_); }
    std::vector<std::size_t>& basis() { return basis_; }

    void pivot(std::size_t r, std::size_t q, std::vector<double>& cost) {
        const std::size_t width = cols_ + 1;
        double* prow = &data_[r * width];
        const double inv = 1.0 / prow[q];
        for (std::size_t c = 0; c < width; ++c) {
            prow[c] *= inv;
        }
        prow[q] = 1.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            if (i == r) {
                continue;
            }
            double* irow = &data_[i * width];
            const double f = irow[q];
            if (f == 0.0) {
                continue;
            }
            for (std::size_t c = 0; c < width; ++c) {
                irow[c] -= f * prow[c];
            }
            irow[q] = 0.0;
        }
        const double f = cost[q];
        if (f != 0.0) {
            for (std::size_t c = 0; c < width; ++c) {
                cost[c] -= f * prow[c];
            }
            cost[q] = 0.0;
        }
        basis_[r] = q;
    }

    void remove_row(std::size_t r) {
        const std::size_t width = cols_ + 1;
        data_.erase(data_.begin() + static_cast<std::ptrdiff_t>(r * width),
                    data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * width));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
        --rows_;
    }

    // cost row = [c, 0] reduced against the current basis
    std::vector<double> reduced_costs(const std::vector<double>& c) const {
        std::vector<double> d(cols_ + 1, 0.0);
        std::copy(c.begin(), c.end(), d.begin());
        for (std::size_t i = 0; i < rows_; ++i) {
            const double cb = c[basis_[i]];
            if (cb == 0.0) {
                continue;
            }
            for (std::size_t col = 0; col <= cols_; ++col) {
                d[col] -= cb * at(i, col);
            }
        }
        return d;
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
    std::vector<std::size_t> basis_;
};

enum class PhaseResult { Optimal, Unbounded, IterationLimit };

struct PivotState {
    std::size_t iterations = 0;
    std::size_t degenerate = 0;
    bool bland = false;
};

PhaseResult run_phase(Tableau& t, std::vector<double>& cost, const std::vector<bool>& allowed, const LpOptions& opt,
                      std::size_t max_iter, PivotState& st) {
    const std::size_t degenerate_limit = 10 * std::max<std::size_t>(t.rows(), 1);
    while (true) {
        if (st.iterations >= max_iter) {
            return PhaseResult::IterationLimit;
        }
        std::ptrdiff_t q = -1;
        double best = opt.optimality_tol;
        for (std::size_t j = 0; j < t.cols(); ++j) {
            if (!allowed[j] || cost[j] <= opt.optimality_tol) {
                continue;
            }
            if (st.bland) {
                q = static_cast<std::ptrdiff_t>(j);
                break;
            }
            if (cost[j] > best) {
                best = cost[j];
                q = static_cast<std::ptrdiff_t>(j);
            }
        }
        if (q < 0) {
            return PhaseResult::Optimal;
        }
        const auto qc = static_cast<std::size_t>(q);

        std::ptrdiff_t r = -1;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < t.rows(); ++i) {
            const double a = t.at(i, qc);
            if (a <= opt.pivot_tol) {
                continue;
            }
            const double ratio = std::max(t.rhs(i), 0.0) / a;
            if (r < 0 || ratio < best_ratio - 1e-12) {
                best_ratio = ratio;
                r = static_cast<std::ptrdiff_t>(i);
                continue;
            }
            if (ratio <= best_ratio + 1e-12) {
                const auto ri = static_cast<std::size_t>(r);
                const bool take = st.bland ? t.basis()[i] < t.basis()[ri] : a > t.at(ri, qc);
                if (take) {
                    best_ratio = std::min(best_ratio, ratio);
                    r = static_cast<std::ptrdiff_t>(i);
                }
            }
        }
        if (r < 0) {
            return PhaseResult::Unbounded;
        }
        if (best_ratio <= opt.feasibility_tol) {
            if (++st.degenerate > degenerate_limit) {
                st.bland = true;
            }
        }
        t.pivot(static_cast<std::size_t>(r), qc, cost);
        ++st.iterations;
    }
}

} // namespace

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& opt) {
    const std::size_t n = lp.n_vars();
    if (n == 0) {
        throw InputError("solve_lp: at least one variable required");
    }
    if (!lp.bounds.empty() && lp.bounds.size() != n) {
        throw InputError("solve_lp: bounds must be empty or cover every variable");
    }
    for (double c : lp.objective) {
        if (!std::isfinite(c)) {
            throw InputError("solve_lp: objective coefficients must be finite");
        }
    }
    for (const auto& con : lp.constraints) {
        if (con.coeffs.size() != n) {
            throw InputError("solve_lp: constraint has wrong number of coefficients");
        }
        if (!std::isfinite(con.rhs) || !std::all_of(con.coeffs.begin(), con.coeffs.end(),
                                                    [](double v) { return std::isfinite(v); })) {
            throw InputError("solve_lp: constraint coefficients must be finite");
        }
    }

    LpSolution result;

    // Map original variables onto nonnegative columns y.
    std::vector<ColumnMap> map(n);
    std::size_t ny = 0;
    std::vector<Row> rows;
    std::vector<std::pair<std::size_t, double>> upper_rows; // y[col] <= value
    for (std::size_t j = 0; j < n; ++j) {
        VariableBounds b = lp.bounds.empty() ? VariableBounds{} : lp.bounds[j];
        if (b.lower > b.upper) {
            result.status = LpStatus::Infeasible;
            return result;
        }
        const bool lo = std::isfinite(b.lower);
        const bool hi = std::isfinite(b.upper);
        ColumnMap& m = map[j];
        m.pos = ny++;
        if (lo) {
            m.offset = b.lower;
            if (hi) {
                upper_rows.emplace_back(m.pos, b.upper - b.lower);
            }
        } else if (hi) {
            m.offset = b.upper;
            m.sign = -1.0;
        } else {
            m.neg = static_cast<std::ptrdiff_t>(ny++);
        }
    }

    for (const auto& con : lp.constraints) {
        Row row{std::vector<double>(ny, 0.0), con.relation, con.rhs};
        for (std::size_t j = 0; j < n; ++j) {
            const double a = con.coeffs[j];
            if (a == 0.0) {
                continue;
            }
            row.rhs -= a * map[j].offset;
            row.coeffs[map[j].pos] += a * map[j].sign;
            if (map[j].neg >= 0) {
                row.coeffs[static_cast<std::size_t>(map[j].neg)] -= a;
            }
        }
        rows.push_back(std::move(row));
    }
    for (auto [col, value] : upper_rows) {
        Row row{std::vector<double>(ny, 0.0), Relation::LessEqual, value};
        row.coeffs[col] = 1.0;
        rows.push_back(std::move(row));
    }
    for (auto& row : rows) {
        if (row.rhs < 0.0) {
            for (auto& c : row.coeffs) {
                c = -c;
            }
            row.rhs = -row.rhs;
            if (row.relation == Relation::LessEqual) {
                row.relation = Relation::GreaterEqual;
            } else if (row.relation == Relation::GreaterEqual) {
                row.relation = Relation::LessEqual;
            }
        }
    }

    const std::size_t m = rows.size();
    std::size_t n_slack = 0;
    std::size_t n_art = 0;
    for (const auto& row : rows) {
        n_slack += row.relation != Relation::Equal ? 1 : 0;
        n_art += row.relation != Relation::LessEqual ? 1 : 0;
    }
    const std::size_t slack0 = ny;
    const std::size_t art0 = ny + n_slack;
    const std::size_t ncols = ny + n_slack + n_art;

    Tableau t(m, ncols);
    {
        std::size_t slack = slack0;
        std::size_t art = art0;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < ny; ++j) {
                t.at(i, j) = rows[i].coeffs[j];
            }
            t.rhs(i) = rows[i].rhs;
            switch (rows[i].relation) {
            case Relation::LessEqual:
                t.at(i, slack) = 1.0;
                t.basis()[i] = slack++;
                break;
            case Relation::GreaterEqual:
                t.at(i, slack++) = -1.0;
                t.at(i, art) = 1.0;
                t.basis()[i] = art++;
                break;
            case Relation::Equal:
                t.at(i, art) = 1.0;
                t.basis()[i] = art++;
                break;
            }
        }
    }

    const std::size_t max_iter = opt.max_iterations > 0 ? opt.max_iterations : 50 * (m + ncols) + 1000;
    PivotState st;
    std::vector<bool> allowed(ncols, true);

    if (n_art > 0) {
        std::vector<double> c1(ncols, 0.0);
        for (std::size_t j = art0; j < ncols; ++j) {
            c1[j] = -1.0;
        }
        std::vector<double> cost = t.reduced_costs(c1);
        PhaseResult pr = run_phase(t, cost, allowed, opt, max_iter, st);
        result.iterations = st.iterations;
        result.used_bland = st.bland;
        if (pr == PhaseResult::IterationLimit) {
            result.status = LpStatus::IterationLimit;
            return result;
        }
        double rhs_scale = 1.0;
        for (const auto& row : rows) {
            rhs_scale = std::max(rhs_scale, std::abs(row.rhs));
        }
        // cost[ncols] = -(phase-one objective) = sum of artificials
        if (cost[ncols] > opt.feasibility_tol * rhs_scale) {
            result.status = LpStatus::Infeasible;
            return result;
        }
        // Drive remaining (zero-valued) artificials out of the basis.
        for (std::size_t i = 0; i < t.rows();) {
            if (t.basis()[i] < art0) {
                ++i;
                continue;
            }
            std::ptrdiff_t q = -1;
            double best = opt.pivot_tol;
            for (std::size_t j = 0; j < art0; ++j) {
                if (std::abs(t.at(i, j)) > best) {
                    best = std::abs(t.at(i, j));
                    q = static_cast<std::ptrdiff_t>(j);
                }
            }
            if (q < 0) {
                t.remove_row(i); // redundant constraint
                continue;
            }
            t.pivot(i, static_cast<std::size_t>(q), cost);
            ++i;
        }
        for (std::size_t j = art0; j < ncols; ++j) {
            allowed[j] = false;
        }
    }

    std::vector<double> c2(ncols, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        c2[map[j].pos] += lp.objective[j] * map[j].sign;
        if (map[j].neg >= 0) {
            c2[static_cast<std::size_t>(map[j].neg)] -= lp.objective[j];
        }
    }
    std::vector<double> cost = t.reduced_costs(c2);
    PhaseResult pr = run_phase(t, cost, allowed, opt, max_iter, st);
    result.iterations = st.iterations;
    result.used_bland = st.bland;
    if (pr == PhaseResult::IterationLimit) {
        result.status = LpStatus::IterationLimit;
        return result;
    }
    if (pr == PhaseResult::Unbounded) {
        result.status = LpStatus::Unbounded;
        return result;
    }

    std::vector<double> y(ncols, 0.0);
    for (std::size_t i = 0; i < t.rows(); ++i) {
        y[t.basis()[i]] = std::max(t.rhs(i), 0.0);
    }
    result.x.assign(n, 0.0);
    result.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double v = map[j].offset + map[j].sign * y[map[j].pos];
        if (map[j].neg >= 0) {
            v -= y[static_cast<std::size_t>(map[j].neg)];
        }
        result.x[j] = v;
        result.objective += lp.objective[j] * v;
    }
    result.status = LpStatus::Optimal;
    return result;
}

double max_violation(const LinearProgram& lp, const std::vector<double>& x) {
    if (x.size() != lp.n_vars()) {
        throw InputError("max_violation: wrong number of values");
    }
    double worst = 0.0;
    for (const auto& con : lp.constraints) {
        double lhs = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            lhs += con.coeffs[j] * x[j];
        }
        double v = 0.0;
        switch (con.relation) {
        case Relation::LessEqual:
            v = lhs - con.rhs;
            break;
        case Relation::GreaterEqual:
            v = con.rhs - lhs;
            break;
        case Relation::Equal:
            v = std::abs(lhs - con.rhs);
            break;
        }
        worst = std::max(worst, v);
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
        VariableBounds b = lp.bounds.empty() ? VariableBounds{} : lp.bounds[j];
        worst = std::max({worst, b.lower - x[j], x[j] - b.upper});
    }
    return worst;
}

} // namespace fair
