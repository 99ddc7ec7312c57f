#include "ldgmq/density_evolution.hpp"

#include <algorithm>
#include <cmath>

#include "ldgmq/errors.hpp"
#include "ldgmq/prob_tuple.hpp"
#include "ldgmq/rng.hpp"

namespace ldgmq {

symmetric_density prior_density_u(const test_channel& ch, const llr_grid& grid, double mi_tol) {
    const symmetric_problem& prob = ch.problem();
    if (prob.group().order() != 2) throw domain_error("prior_density_u: binary problems only");

    switch (prob.kind) {
        case problem_kind::mary_erasure:
            return symmetric_density::erasure(1.0 - prob.epsilon);
        case problem_kind::erasure_like_k: {
            if (!ch.t_is_infinite())
                throw domain_error("prior_density_u: erasure problems at t = infinity");
            // K = 1: probability that the symbol arrives pinned
            const double sure = prob.mode == symmetric_problem::subspace_mode::iid_bits
                                    ? 1.0 - prob.epsilon
                                    : prob.dim_pmf[0];
            return symmetric_density::erasure(sure);
        }
        case problem_kind::mary_hamming: {
            const double t = ch.t();
            const double e = std::exp(-t);
            density_builder b(grid);
            b.add(t, 1.0 / (1.0 + e));
            b.add(-t, e / (1.0 + e));
            symmetric_density d = b.finish();
            if (std::abs(d.mi() - ch.r0()) > mi_tol)
                throw model_error("prior_density_u: MI does not match R0");
            return d;
        }
        case problem_kind::mse_uniform: {
            const double t = ch.t();
            const int M = prob.M;
            gl_integrator gl(16);
            density_builder b(grid);
            const int panels_per_unit = 256;
            auto dist = [&](int u, double y) { return prob.distortion(u, y); };
            for (int p = 0; p < panels_per_unit * M; ++p) {
                const double lo = static_cast<double>(p) / panels_per_unit;
                const double h = 1.0 / panels_per_unit;
                for (std::size_t i = 0; i < gl.nodes().size(); ++i) {
                    const double y = lo + h * gl.nodes()[i];
                    double q = 0;
                    for (int u = 0; u < M; ++u) q += std::exp(-t * dist(u, y));
                    const double w = gl.weights()[i] * h * std::exp(-t * dist(0, y)) / q;
                    const double llr = -t * (dist(0, y) - dist(1, y));
                    b.add(llr, w);
                }
            }
            symmetric_density d = b.finish();
            if (std::abs(d.mi() - ch.r0()) > mi_tol)
                throw model_error("prior_density_u: MI does not match R0");
            return d;
        }
    }
    throw domain_error("prior_density_u: unsupported problem");
}

namespace {

symmetric_density check_mix(const degree_distribution& dd, const symmetric_density& bc) {
    std::vector<double> weights;
    std::vector<symmetric_density> parts;
    for (auto& [d, vd] : dd.v()) {
        if (vd <= 0) continue;
        weights.push_back(vd);
        parts.push_back(density_cn_power(bc, d - 1));
    }
    return density_mix(weights, parts);
}

bool trace_converged(const std::vector<double>& mi, double tol) {
    const std::size_t n = mi.size();
    if (n < 4) return false;
    for (int k = 0; k < 3; ++k)
        if (std::abs(mi[n - 1 - k] - mi[n - 2 - k]) >= tol) return false;
    return true;
}

}  // namespace

de_result de_bstep(const degree_distribution& dd, const symmetric_density& du_pri, double ib_pri,
                   de_init init, const de_options& opt) {
    if (ib_pri < 0 || ib_pri > 1) throw domain_error("de_bstep: ib_pri in [0,1]");
    symmetric_density du = du_pri;
    symmetric_density rho_b = symmetric_density::erasure(ib_pri);
    symmetric_density bc = symmetric_density::erasure(init == de_init::unknown ? 0.0 : 1.0);
    if (opt.force_histogram) {
        du = du.promoted(opt.grid);
        rho_b = rho_b.promoted(opt.grid);
        bc = bc.promoted(opt.grid);
    }
    de_result out;
    symmetric_density cb = bc;  // placeholder until the first iteration
    for (int l = 1; l <= opt.max_iterations; ++l) {
        cb = density_cn(du, check_mix(dd, bc));
        bc = density_vn(rho_b, density_vn_power(cb, dd.db() - 1));
        out.extrinsic = density_vn_power(cb, dd.db());
        out.mi_trace.push_back(out.extrinsic.mi());
        out.iterations = l;
        if (trace_converged(out.mi_trace, opt.convergence_tol)) {
            out.converged = true;
            break;
        }
    }
    return out;
}

de_result de_astep(const degree_distribution& dd, const symmetric_density& du_pri, double ia_pri,
                   const de_options& opt) {
    if (ia_pri < 0 || ia_pri > 1) throw domain_error("de_astep: ia_pri in [0,1]");
    symmetric_density du = du_pri;
    symmetric_density rho_a = symmetric_density::erasure(ia_pri);
    symmetric_density bc = symmetric_density::erasure(1.0);
    if (opt.force_histogram) {
        du = du.promoted(opt.grid);
        rho_a = rho_a.promoted(opt.grid);
        bc = bc.promoted(opt.grid);
    }
    const symmetric_density du_a = density_cn(du, rho_a);
    auto extrinsic = [&](const symmetric_density& bc_now) {
        std::vector<double> weights;
        std::vector<symmetric_density> parts;
        for (auto& [d, wd] : dd.w()) {
            if (wd <= 0) continue;
            weights.push_back(wd);
            parts.push_back(density_cn_power(bc_now, d));
        }
        return density_cn(du, density_mix(weights, parts));
    };
    de_result out;
    for (int l = 1; l <= opt.max_iterations; ++l) {
        const symmetric_density cb = density_cn(du_a, check_mix(dd, bc));
        bc = density_vn_power(cb, dd.db() - 1);
        out.extrinsic = extrinsic(bc);
        out.mi_trace.push_back(out.extrinsic.mi());
        out.iterations = l;
        if (trace_converged(out.mi_trace, opt.convergence_tol)) {
            out.converged = true;
            break;
        }
    }
    return out;
}

exit_sweep_result bp_exit_sweep(const degree_distribution& dd, const symmetric_density& du_pri,
                                std::span<const double> ib_grid, double tol,
                                const de_options& opt) {
    exit_sweep_result out;
    out.points.reserve(ib_grid.size());
    bool all_converged = true;
    for (double ib : ib_grid) {
        const de_result lo = de_bstep(dd, du_pri, ib, de_init::unknown, opt);
        const de_result hi = de_bstep(dd, du_pri, ib, de_init::sure, opt);
        exit_curve_point p;
        p.ib_pri = ib;
        p.i_lower = lo.extrinsic.mi();
        p.i_upper = hi.extrinsic.mi();
        p.l = std::max(lo.iterations, hi.iterations);
        p.converged = lo.converged && hi.converged;
        all_converged = all_converged && p.converged;
        out.max_gap = std::max(out.max_gap, p.i_upper - p.i_lower);
        out.points.push_back(p);
    }
    {
        const de_result z = de_bstep(dd, du_pri, 0.0, de_init::sure, opt);
        out.upper_at_zero = z.extrinsic.mi();
        all_converged = all_converged && z.converged;
    }
    if (out.max_gap > tol || out.upper_at_zero > tol)
        out.verdict = sweep_verdict::violated;
    else if (all_converged)
        out.verdict = sweep_verdict::satisfied;
    else
        out.verdict = sweep_verdict::inconclusive;
    return out;
}

mc_de_result mc_de_2k(const degree_distribution& dd, const test_channel& ch,
                      modulation_kind modulation, double ib_pri, int iterations, int population,
                      de_init init, std::uint64_t seed) {
    const int K = dd.K();
    if (K < 1) throw domain_error("mc_de_2k: K >= 1");
    if (ch.problem().group().order() != (std::uint64_t{1} << K))
        throw domain_error("mc_de_2k: problem group order must be 2^K");
    if (population < 100) throw domain_error("mc_de_2k: population too small");

    const group_descriptor g = ch.problem().group();
    const std::vector<std::uint32_t> phi =
        modulation == modulation_kind::gray_zm || K > 1
            ? (modulation == modulation_kind::gray_zm ? gray_map(K)
                                                      : [&] {
                                                            std::vector<std::uint32_t> id(1u << K);
                                                            for (std::uint32_t c = 0; c < id.size();
                                                                 ++c)
                                                                id[c] = c;
                                                            return id;
                                                        }())
            : std::vector<std::uint32_t>{0, 1};
    const std::uint32_t patterns = 1u << K;

    // degree sampling by the edge perspective
    std::vector<std::pair<int, double>> vcdf;
    {
        double acc = 0;
        for (auto& [d, vd] : dd.v()) {
            acc += vd;
            vcdf.push_back({d, acc});
        }
    }
    rng r(substream(seed, "mc-de"));
    auto sample_degree = [&] {
        const double u = r.uniform();
        for (auto& [d, c] : vcdf)
            if (u < c) return d;
        return vcdf.back().first;
    };

    // canonical (reference-0) populations of m_bc
    std::vector<double> bc(population, init == de_init::unknown ? 0.5 : 1.0);
    std::vector<double> cb(population, 0.5);
    auto draw_bc = [&](const std::vector<double>& pop) { return pop[r.bounded(pop.size())]; };

    mc_de_result out;
    std::vector<double> rho_phi(patterns);
    for (int l = 0; l < iterations; ++l) {
        // fresh m_cb population through the symbol unit
        std::vector<double> cb_next(population);
        for (int s = 0; s < population; ++s) {
            const int d = sample_degree();
            // dithered prior in the canonical frame
            const std::uint32_t cstar = static_cast<std::uint32_t>(r.bounded(patterns));
            const std::uint32_t eps = static_cast<std::uint32_t>(r.bounded(patterns));
            const std::uint32_t delta = static_cast<std::uint32_t>(r.bounded(g.order()));
            auto modulate = [&](std::uint32_t bits) {
                return modulation == modulation_kind::identity_z2k
                           ? (bits ^ eps ^ delta)
                           : static_cast<std::uint32_t>(
                                 g.add(phi[(bits ^ eps) & (patterns - 1)], delta));
            };
            const std::uint32_t ustar = modulate(cstar);
            const source_symbol y = ch.sample_y_given_u(ustar, r);
            const group_tuple prior = ch.prior_from_sample(y);
            for (std::uint32_t cbit = 0; cbit < patterns; ++cbit)
                rho_phi[cbit] = prior(modulate(cbit ^ cstar));  // canonical shift

            const int k = static_cast<int>(r.bounded(K));
            double mcu[16];
            for (int kk = 0; kk < K; ++kk) {
                if (kk == k) continue;
                double dprod = 1.0;
                for (int e = 0; e < d; ++e) dprod *= 2.0 * draw_bc(bc) - 1.0;
                mcu[kk] = 0.5 * (1.0 + dprod);
            }
            double w[2] = {0.0, 0.0};
            for (std::uint32_t cbit = 0; cbit < patterns; ++cbit) {
                double p = rho_phi[cbit];
                if (p == 0.0) continue;
                for (int kk = 0; kk < K; ++kk) {
                    if (kk == k) continue;
                    p *= (cbit >> kk) & 1u ? 1.0 - mcu[kk] : mcu[kk];
                }
                w[(cbit >> k) & 1u] += p;
            }
            const double sum = w[0] + w[1];
            double duc = sum > 0.0 ? (w[0] - w[1]) / sum : 0.0;
            for (int e = 0; e < d - 1; ++e) duc *= 2.0 * draw_bc(bc) - 1.0;
            cb_next[s] = 0.5 * (1.0 + duc);
        }
        cb = std::move(cb_next);
        double mi = 0;
        for (double p : cb) mi += 1.0 - binary_entropy(p);
        out.cb_mi_trace.push_back(mi / population);

        // b-node update
        std::vector<double> bc_next(population);
        for (int s = 0; s < population; ++s) {
            if (r.uniform() < ib_pri) {
                bc_next[s] = 1.0;  // decimated to the reference value
                continue;
            }
            double l0 = 0, l1 = 0;
            for (int e = 0; e < dd.db() - 1; ++e) {
                const double p = draw_bc(cb);
                l0 += std::log(p);
                l1 += std::log(1.0 - p);
            }
            if (l0 == -std::numeric_limits<double>::infinity() &&
                l1 == -std::numeric_limits<double>::infinity())
                throw contradiction_error("mc_de_2k: contradictory messages");
            bc_next[s] = l0 == -std::numeric_limits<double>::infinity()
                             ? 0.0
                             : (l1 == -std::numeric_limits<double>::infinity()
                                    ? 1.0
                                    : 1.0 / (1.0 + std::exp(l1 - l0)));
        }
        bc = std::move(bc_next);
        mi = 0;
        for (double p : bc) mi += 1.0 - binary_entropy(p);
        out.bc_mi_trace.push_back(mi / population);
    }

    // extrinsic population: db incoming check messages, no prior
    out.ext_samples_p0.resize(population);
    double sum = 0, sumsq = 0;
    for (int s = 0; s < population; ++s) {
        double l0 = 0, l1 = 0;
        for (int e = 0; e < dd.db(); ++e) {
            const double p = draw_bc(cb);
            l0 += std::log(p);
            l1 += std::log(1.0 - p);
        }
        double p0;
        if (l0 == -std::numeric_limits<double>::infinity() &&
            l1 == -std::numeric_limits<double>::infinity())
            throw contradiction_error("mc_de_2k: contradictory extrinsic");
        p0 = l0 == -std::numeric_limits<double>::infinity()
                 ? 0.0
                 : (l1 == -std::numeric_limits<double>::infinity()
                        ? 1.0
                        : 1.0 / (1.0 + std::exp(l1 - l0)));
        out.ext_samples_p0[s] = p0;
        const double mi = 1.0 - binary_entropy(p0);
        sum += mi;
        sumsq += mi * mi;
    }
    out.ext_mi = sum / population;
    const double var = std::max(0.0, sumsq / population - out.ext_mi * out.ext_mi);
    out.ext_mi_stderr = std::sqrt(var / population);
    return out;
}

}  // namespace ldgmq
