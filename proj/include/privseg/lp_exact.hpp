#pragma once
// Rational-arithmetic path through the same simplex core. Doubles convert to
// rationals exactly, so this adjudicates any float-path disagreement.

#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "privseg/lp.hpp"

namespace privseg {

using Rational = boost::multiprecision::cpp_rational;

inline LpSolution solve_exact(const LinearProgram& lp, Sense sense) {
    auto lift = [](const std::vector<double>& v) {
        std::vector<Rational> out;
        out.reserve(v.size());
        for (double x : v) out.emplace_back(x);
        return out;
    };
    std::vector<Rational> c = lift(lp.objective);
    if (sense == Sense::minimize)
        for (Rational& x : c) x = -x;
    std::vector<std::vector<Rational>> le_a, eq_a;
    for (const auto& row : lp.le_a) le_a.push_back(lift(row));
    for (const auto& row : lp.eq_a) eq_a.push_back(lift(row));
    std::vector<Rational> le_b = lift(lp.le_b), eq_b = lift(lp.eq_b);

    auto res = detail::simplex_max<Rational>(lp.n_vars, c, le_a, le_b, eq_a, eq_b, Rational(0));
    LpSolution sol;
    sol.status = res.status;
    if (res.status != LpStatus::optimal) return sol;
    sol.point.reserve(lp.n_vars);
    for (const Rational& x : res.x) sol.point.push_back(x.convert_to<double>());
    double value = res.value.convert_to<double>();
    double bound = res.dual_bound.convert_to<double>();
    sol.objective_value = sense == Sense::minimize ? -value : value;
    sol.dual_bound = sense == Sense::minimize ? -bound : bound;
    sol.max_residual = 0.0;  // exact arithmetic: the rational point satisfies rows exactly
    return sol;
}

}  // namespace privseg
