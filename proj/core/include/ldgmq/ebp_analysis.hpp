#pragma once

#include <cstdint>
#include <vector>

#include "ldgmq/degree_dist.hpp"
#include "ldgmq/source_problem.hpp"

namespace ldgmq {

struct polynomial {
    std::vector<double> c;  // c[k] x^k
    double operator()(double x) const;
    polynomial derivative() const;
    int degree() const { return static_cast<int>(c.size()) - 1; }
};

// The erasure-problem EXIT functions: f from the check side (problem
// dependent), and g(y) = y^(db-1), h(y) = y^db from the regular b-side.
struct exit_fgh {
    polynomial f;
    int db = 0;
    double g(double y) const;
    double h(double y) const;
    double dh(double y) const;
};

/// f(x) = sum_d v_d x^(d-1) for plain BEQ.
exit_fgh beq_fgh(const degree_distribution& dd);

struct ebp_curve_data {
    std::vector<double> x, ib, ibext;
    double iu = 0;
};

/// The parametric EBP fixed-point curve Ib(x), Ibext(x) on [0,1].
ebp_curve_data ebp_curve(const exit_fgh& fgh, double iu, int grid_points = 1001);

double ebp_ib(const exit_fgh& fgh, double iu, double x);
double ebp_ibext(const exit_fgh& fgh, double iu, double x);
/// Sign-carrying margin of dIb/dx: positive iff the curve increases at x.
double ebp_margin(const exit_fgh& fgh, double iu, double x);

enum class mono_verdict { satisfied, violated, inconclusive };

struct mono_result {
    mono_verdict verdict = mono_verdict::inconclusive;
    double margin = 0;     // worst signed dIb/dx margin over [0,1]
    double witness_x = 0;  // where it is attained
    bool origin_ok = false;  // Ib(0) = 0, i.e. v1 = 0
};

/// Both monotonicity conditions: the curve starts at the origin and the
/// derivative margin stays positive on a refined grid (with golden-section
/// sharpening around the minimum). |margin| below boundary_tol reports
/// inconclusive rather than rounding to a verdict.
mono_result monotonicity_check(const exit_fgh& fgh, double v1, double iu,
                               double boundary_tol = 1e-10, int grid_points = 10001);

/// Largest Iu whose monotonicity verdict is satisfied, by bisection.
/// Requires v1 = 0; verifies the verdict is monotone across the bracket.
double threshold_search(const degree_distribution& dd, double tol = 1e-6);
double threshold_search(const exit_fgh& fgh, double v1, double tol = 1e-6);

/// Largest Iu for which the EBP curve stays out of the Ib < 0 half-plane.
double solvability_boundary(const exit_fgh& fgh, double tol = 1e-6);

struct ebp_area_result {
    double a_ebp = 0;
    double identity_residual = 0;  // db Iu v1 + integral - Iu/R
    double iu_over_r = 0;
};

/// Area under the EBP curve by adaptive quadrature of the parametric
/// integral, plus the residual of the closed-form area identity.
ebp_area_result ebp_area(const degree_distribution& dd, double iu);

/// Scalar BEQ density-evolution recursion (the erasure specialization of
/// the b-step), traced per iteration.
struct beq_recursion_trace {
    std::vector<double> i_cb, i_bc, i_ext;
};
beq_recursion_trace beq_scalar_recursion(const degree_distribution& dd, double iu, double ib_pri,
                                         int iterations, bool sure_init);

/// Scalar a-step recursion under BEQ; returns the extrinsic MI trace.
std::vector<double> beq_scalar_astep(const degree_distribution& dd, double iu, double ia_pri,
                                     int iterations);

// Erasure profile of a 2^K erasure-like source: averaged entropy function of
// the composed symbol prior, per-level check information, and their sum Iu.
struct erasure_profile {
    int K = 1;
    std::vector<double> h;   // h_0 .. h_K
    std::vector<double> ic;  // Ic_0 .. Ic_{K-1}
    double iu = 0;
};

/// iid-bit sources are computed exactly; dim-pmf sources by sampling
/// subspaces (mc_samples draws). The sum of the Ic equals Iu structurally;
/// h_K is cross-checked against E[dim] and violations raise model_error.
erasure_profile erasure_profile_2k(const symmetric_problem& prob, int mc_samples = 20000,
                                   std::uint64_t seed = 1);

/// f(x) for the 2^K erasure-like problem from its profile; g and h are
/// unchanged. Collapses to the BEQ f at K = 1.
exit_fgh f_erasure_2k(const erasure_profile& profile, const degree_distribution& dd);

// Degree-distribution search under the monotonicity constraint, which is
// affine in the edge fractions at fixed (x, Iu, db). The inner feasibility
// problem maximizes the worst grid margin by concave hill-climbing along
// null-space directions of the two equality constraints.
struct dd_search_target {
    enum class kind { max_iu_at_rate, min_rate_at_iu };
    kind goal = kind::max_iu_at_rate;
    double value = 0.5;  // the fixed R or the fixed Iu
};

struct dd_search_result {
    degree_distribution dd;
    double achieved = 0;  // the optimized Iu or R
    double margin = 0;    // worst constraint margin of the returned dd
    mono_result check;    // monotonicity audit of the result
};

dd_search_result dd_search(const dd_search_target& target, int db, std::vector<int> degrees,
                           double tol = 1e-5, int margin_grid = 2001);

}  // namespace ldgmq
