#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ldgmq/degree_dist.hpp"
#include "ldgmq/density.hpp"
#include "ldgmq/ldgm_code.hpp"
#include "ldgmq/source_problem.hpp"

namespace ldgmq {

enum class de_init { unknown, sure };  // lower / upper starting point

struct de_options {
    int max_iterations = 200;
    double convergence_tol = 1e-7;  // |MI(l) - MI(l-1)| for 3 consecutive l
    bool force_histogram = false;   // promote erasure inputs before iterating
    llr_grid grid;
};

struct de_result {
    symmetric_density extrinsic = symmetric_density::erasure(0.0);
    std::vector<double> mi_trace;  // extrinsic MI per iteration
    int iterations = 0;
    bool converged = false;
};

/// Density of the reconstruction-symbol prior w.r.t. the reference symbol
/// for binary problems; exact atoms for discrete sources, quadrature
/// deposits for MSE. Checks symmetry and that I(density) matches R0(t).
symmetric_density prior_density_u(const test_channel& ch, const llr_grid& grid = {},
                                  double mi_tol = 2e-3);

/// b-step density evolution at decimation fraction ib_pri, from the unknown
/// (lower) or sure (upper) initialization; returns the extrinsic density.
de_result de_bstep(const degree_distribution& dd, const symmetric_density& du_pri, double ib_pri,
                   de_init init, const de_options& opt = {});

/// a-step density evolution at scrambling-decimation fraction ia_pri;
/// always from the sure initialization (the upper bound construction).
de_result de_astep(const degree_distribution& dd, const symmetric_density& du_pri, double ia_pri,
                   const de_options& opt = {});

struct exit_curve_point {
    double ib_pri = 0;
    double i_lower = 0;
    double i_upper = 0;
    int l = 0;
    bool converged = false;
};

enum class sweep_verdict { satisfied, violated, inconclusive };

struct exit_sweep_result {
    std::vector<exit_curve_point> points;
    sweep_verdict verdict = sweep_verdict::inconclusive;
    double max_gap = 0;        // max over the grid of i_upper - i_lower
    double upper_at_zero = 0;  // the a-step synchronization proxy
};

/// Lower/upper BP EXIT curves over an ib_pri grid, with the two
/// synchronization conditions evaluated at tolerance tol.
exit_sweep_result bp_exit_sweep(const degree_distribution& dd, const symmetric_density& du_pri,
                                std::span<const double> ib_grid, double tol,
                                const de_options& opt = {});

struct mc_de_result {
    std::vector<double> cb_mi_trace;  // per iteration, population mean
    std::vector<double> bc_mi_trace;
    double ext_mi = 0;
    double ext_mi_stderr = 0;
    std::vector<double> ext_samples_p0;  // canonical extrinsic population
};

/// Population-dynamics DE through the 2^K-ary local tree unit: dithered
/// symbol prior, modulation-factor marginalization, then the check and
/// variable combines. Everything runs in the reference-canonical frame.
mc_de_result mc_de_2k(const degree_distribution& dd, const test_channel& ch,
                      modulation_kind modulation, double ib_pri, int iterations, int population,
                      de_init init, std::uint64_t seed);

}  // namespace ldgmq
