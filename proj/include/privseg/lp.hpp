#pragma once
// Dense two-phase simplex with Bland's anticycling rule. Variables are free;
// sign constraints arrive as rows. Scale is tens of variables, so the tableau
// is a plain dense matrix and columns are priced on demand.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace privseg {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };
enum class Sense { maximize, minimize };

struct LinearProgram {
    std::size_t n_vars = 0;
    std::vector<double> objective;
    std::vector<std::vector<double>> le_a;
    std::vector<double> le_b;
    std::vector<std::vector<double>> eq_a;
    std::vector<double> eq_b;

    explicit LinearProgram(std::size_t n) : n_vars(n), objective(n, 0.0) {
        if (n == 0) throw std::invalid_argument("LinearProgram: needs at least one variable");
    }

    void add_le(std::vector<double> a, double b) {
        if (a.size() != n_vars) throw std::invalid_argument("LinearProgram: row length mismatch");
        le_a.push_back(std::move(a));
        le_b.push_back(b);
    }
    void add_eq(std::vector<double> a, double b) {
        if (a.size() != n_vars) throw std::invalid_argument("LinearProgram: row length mismatch");
        eq_a.push_back(std::move(a));
        eq_b.push_back(b);
    }
};

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    double objective_value = 0.0;
    std::vector<double> point;
    double dual_bound = 0.0;    // y*b recovered from the final tableau; equals the
                                // objective at a clean optimum (weak duality check)
    double max_residual = 0.0;  // worst constraint violation of the returned point
};

inline constexpr int kSimplexIterationCap = 10000;

namespace detail {

template <class T>
T abs_val(const T& x) {
    return x < T(0) ? T(-x) : x;
}

// One simplex run over rows already in "A x = b, b >= 0, basis = identity
// columns" form. Column layout: [u | w | slack | artificial], x = u - w.
template <class T>
struct Tableau {
    std::size_t n = 0;       // original free variables
    std::size_t n_slack = 0;
    std::size_t n_art = 0;
    std::vector<std::vector<T>> a;  // m rows, width() columns
    std::vector<T> rhs;
    std::vector<std::size_t> basis;  // per row: basic column
    T tol{};                         // 0 on the exact path
    int iterations = 0;

    std::size_t width() const { return 2 * n + n_slack + n_art; }
    bool is_artificial(std::size_t col) const { return col >= 2 * n + n_slack; }

    void pivot(std::size_t r, std::size_t c) {
        T p = a[r][c];
        for (T& v : a[r]) v = v / p;
        rhs[r] = rhs[r] / p;
        a[r][c] = T(1);
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (i == r) continue;
            T f = a[i][c];
            if (f == T(0)) continue;
            for (std::size_t j = 0; j < width(); ++j) a[i][j] = a[i][j] - f * a[r][j];
            rhs[i] = rhs[i] - f * rhs[r];
            a[i][c] = T(0);
        }
        basis[r] = c;
    }

    // Reduced cost of column c under cost vector `cost`.
    T reduced_cost(const std::vector<T>& cost, std::size_t c) const {
        T rc = cost[c];
        for (std::size_t r = 0; r < a.size(); ++r) {
            const T& coef = a[r][c];
            if (coef != T(0)) rc = rc - cost[basis[r]] * coef;
        }
        return rc;
    }

    // Bland's rule: smallest improving column, smallest-basis-index ratio tie.
    // Returns optimal / unbounded / iteration_limit.
    LpStatus run(const std::vector<T>& cost, bool bar_artificials) {
        for (;;) {
            if (++iterations > kSimplexIterationCap) return LpStatus::iteration_limit;
            std::size_t enter = width();
            for (std::size_t c = 0; c < width(); ++c) {
                if (bar_artificials && is_artificial(c)) continue;
                if (reduced_cost(cost, c) > tol) {
                    enter = c;
                    break;
                }
            }
            if (enter == width()) return LpStatus::optimal;

            std::size_t leave = a.size();
            T best_ratio{};
            for (std::size_t r = 0; r < a.size(); ++r) {
                if (!(a[r][enter] > tol)) continue;
                T ratio = rhs[r] / a[r][enter];
                if (leave == a.size() || ratio < best_ratio ||
                    (ratio == best_ratio && basis[r] < basis[leave])) {
                    leave = r;
                    best_ratio = ratio;
                }
            }
            if (leave == a.size()) return LpStatus::unbounded;
            pivot(leave, enter);
        }
    }
};

template <class T>
struct SimplexOutcome {
    LpStatus status = LpStatus::infeasible;
    T value{};
    std::vector<T> x;
    T dual_bound{};
};

// Maximize c*x subject to le_a*x <= le_b and eq_a*x = eq_b, x free.
template <class T>
SimplexOutcome<T> simplex_max(std::size_t n, const std::vector<T>& c,
                              const std::vector<std::vector<T>>& le_a, const std::vector<T>& le_b,
                              const std::vector<std::vector<T>>& eq_a, const std::vector<T>& eq_b,
                              const T& tol) {
    Tableau<T> t;
    t.n = n;
    t.n_slack = le_a.size();
    t.tol = tol;

    // Which rows need an artificial: negated <= rows (surplus slack) and all = rows.
    std::vector<std::size_t> art_of_row;
    std::size_t m = le_a.size() + eq_a.size();
    art_of_row.assign(m, std::size_t(-1));
    std::size_t n_art = 0;
    for (std::size_t r = 0; r < le_a.size(); ++r)
        if (le_b[r] < T(0)) art_of_row[r] = n_art++;
    for (std::size_t r = 0; r < eq_a.size(); ++r) art_of_row[le_a.size() + r] = n_art++;
    t.n_art = n_art;

    auto push_row = [&](const std::vector<T>& a_in, const T& b_in, bool is_le, std::size_t row_id) {
        std::vector<T> row(t.width(), T(0));
        T sign = b_in < T(0) ? T(-1) : T(1);
        for (std::size_t j = 0; j < n; ++j) {
            row[j] = sign * a_in[j];
            row[n + j] = -sign * a_in[j];
        }
        if (is_le) row[2 * n + row_id] = sign;  // slack keeps its own column either way
        std::size_t art = art_of_row[is_le ? row_id : le_a.size() + row_id];
        if (art != std::size_t(-1)) row[2 * n + t.n_slack + art] = T(1);
        t.a.push_back(std::move(row));
        t.rhs.push_back(sign * b_in);
        if (art != std::size_t(-1))
            t.basis.push_back(2 * n + t.n_slack + art);
        else
            t.basis.push_back(2 * n + row_id);
    };
    for (std::size_t r = 0; r < le_a.size(); ++r) push_row(le_a[r], le_b[r], true, r);
    for (std::size_t r = 0; r < eq_a.size(); ++r) push_row(eq_a[r], eq_b[r], false, r);

    SimplexOutcome<T> out;

    if (n_art > 0) {
        std::vector<T> phase1(t.width(), T(0));
        for (std::size_t j = 2 * n + t.n_slack; j < t.width(); ++j) phase1[j] = T(-1);
        LpStatus st = t.run(phase1, false);
        if (st != LpStatus::optimal) {
            // The phase-1 objective is bounded by 0, so anything but optimal
            // here is a numerical breakdown.
            out.status = LpStatus::iteration_limit;
            return out;
        }
        T infeas{};
        for (std::size_t r = 0; r < t.a.size(); ++r)
            if (t.is_artificial(t.basis[r])) infeas = infeas + t.rhs[r];
        if (infeas > tol) {
            out.status = LpStatus::infeasible;
            return out;
        }
        // Evict basic artificials; rows that offer no pivot are redundant.
        for (std::size_t r = t.a.size(); r-- > 0;) {
            if (!t.is_artificial(t.basis[r])) continue;
            std::size_t piv = t.width();
            for (std::size_t j = 0; j < 2 * n + t.n_slack; ++j)
                if (abs_val(t.a[r][j]) > tol) {
                    piv = j;
                    break;
                }
            if (piv != t.width()) {
                t.pivot(r, piv);
            } else {
                t.a.erase(t.a.begin() + static_cast<std::ptrdiff_t>(r));
                t.rhs.erase(t.rhs.begin() + static_cast<std::ptrdiff_t>(r));
                t.basis.erase(t.basis.begin() + static_cast<std::ptrdiff_t>(r));
            }
        }
    }

    std::vector<T> cost(t.width(), T(0));
    for (std::size_t j = 0; j < n; ++j) {
        cost[j] = c[j];
        cost[n + j] = -c[j];
    }
    LpStatus st = t.run(cost, true);
    out.status = st;
    if (st != LpStatus::optimal) return out;

    out.x.assign(n, T(0));
    for (std::size_t r = 0; r < t.a.size(); ++r) {
        std::size_t b = t.basis[r];
        if (b < n)
            out.x[b] = out.x[b] + t.rhs[r];
        else if (b < 2 * n)
            out.x[b - n] = out.x[b - n] - t.rhs[r];
    }
    out.value = T(0);
    for (std::size_t j = 0; j < n; ++j) out.value = out.value + c[j] * out.x[j];

    // Row duals via the rows' identity columns (slack or artificial), priced
    // against the final tableau; y*b is the weak-duality certificate.
    // Row signs cancel in y*b, so the transformed data can be used directly.
    out.dual_bound = T(0);
    std::vector<T> all_rhs;
    all_rhs.reserve(le_b.size() + eq_b.size());
    for (const T& b : le_b) all_rhs.push_back(b);
    for (const T& b : eq_b) all_rhs.push_back(b);
    for (std::size_t r = 0; r < le_b.size() + eq_b.size(); ++r) {
        std::size_t col;
        T col_sign;
        if (r < le_b.size()) {
            col = 2 * n + r;
            col_sign = le_b[r] < T(0) ? T(-1) : T(1);  // slack entered with the row's sign
        } else {
            col = 2 * n + t.n_slack + art_of_row[r];
            col_sign = T(1);
        }
        T y = -t.reduced_cost(cost, col) / col_sign;  // cost[col]=0, so rc = -cB*column
        T sign = all_rhs[r] < T(0) ? T(-1) : T(1);
        out.dual_bound = out.dual_bound + (sign * y) * all_rhs[r];
    }
    return out;
}

}  // namespace detail

inline LpSolution solve(const LinearProgram& lp, Sense sense) {
    std::vector<double> c = lp.objective;
    if (sense == Sense::minimize)
        for (double& x : c) x = -x;
    auto res = detail::simplex_max<double>(lp.n_vars, c, lp.le_a, lp.le_b, lp.eq_a, lp.eq_b, 1e-9);
    LpSolution sol;
    sol.status = res.status;
    if (res.status != LpStatus::optimal) return sol;
    sol.point = res.x;
    sol.objective_value = sense == Sense::minimize ? -res.value : res.value;
    sol.dual_bound = sense == Sense::minimize ? -res.dual_bound : res.dual_bound;
    for (std::size_t r = 0; r < lp.le_a.size(); ++r) {
        double ax = 0.0;
        for (std::size_t j = 0; j < lp.n_vars; ++j) ax += lp.le_a[r][j] * sol.point[j];
        sol.max_residual = std::max(sol.max_residual, ax - lp.le_b[r]);
    }
    for (std::size_t r = 0; r < lp.eq_a.size(); ++r) {
        double ax = 0.0;
        for (std::size_t j = 0; j < lp.n_vars; ++j) ax += lp.eq_a[r][j] * sol.point[j];
        sol.max_residual = std::max(sol.max_residual, std::abs(ax - lp.eq_b[r]));
    }
    return sol;
}

}  // namespace privseg
