#include "ldgmq/ebp_analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "ldgmq/errors.hpp"
#include "ldgmq/rng.hpp"

namespace ldgmq {

double polynomial::operator()(double x) const {
    double acc = 0;
    for (std::size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
    return acc;
}

polynomial polynomial::derivative() const {
    polynomial d;
    if (c.size() <= 1) {
        d.c = {0.0};
        return d;
    }
    d.c.resize(c.size() - 1);
    for (std::size_t k = 1; k < c.size(); ++k) d.c[k - 1] = k * c[k];
    return d;
}

double exit_fgh::g(double y) const { return std::pow(y, db - 1); }
double exit_fgh::h(double y) const { return std::pow(y, db); }
double exit_fgh::dh(double y) const { return db * std::pow(y, db - 1); }

exit_fgh beq_fgh(const degree_distribution& dd) {
    exit_fgh out;
    out.db = dd.db();
    out.f.c.assign(dd.max_degree(), 0.0);
    for (auto& [d, vd] : dd.v()) out.f.c[d - 1] += vd;
    return out;
}

double ebp_ib(const exit_fgh& fgh, double iu, double x) {
    return 1.0 - (1.0 - x) / fgh.g(1.0 - iu * fgh.f(x));
}

double ebp_ibext(const exit_fgh& fgh, double iu, double x) {
    return 1.0 - fgh.h(1.0 - iu * fgh.f(x));
}

double ebp_margin(const exit_fgh& fgh, double iu, double x) {
    // dIb/dx = A^-db * m(x) with A = 1 - Iu f(x) > 0, so the sign lives in
    // m(x) = A - (db-1) Iu (1-x) f'(x)
    const polynomial fp = fgh.f.derivative();
    return 1.0 - iu * fgh.f(x) - (fgh.db - 1) * iu * (1.0 - x) * fp(x);
}

ebp_curve_data ebp_curve(const exit_fgh& fgh, double iu, int grid_points) {
    if (iu < 0 || iu >= 1) throw domain_error("ebp_curve: 0 <= Iu < 1");
    if (grid_points < 2) throw domain_error("ebp_curve: need at least two grid points");
    ebp_curve_data out;
    out.iu = iu;
    out.x.resize(grid_points);
    out.ib.resize(grid_points);
    out.ibext.resize(grid_points);
    for (int i = 0; i < grid_points; ++i) {
        const double x = static_cast<double>(i) / (grid_points - 1);
        out.x[i] = x;
        out.ib[i] = ebp_ib(fgh, iu, x);
        out.ibext[i] = ebp_ibext(fgh, iu, x);
    }
    return out;
}

namespace {

// golden-section minimization of a smooth scalar function on [lo, hi]
template <typename F>
std::pair<double, double> golden_min(F&& f, double lo, double hi, int iters = 80) {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    return f1 < f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

}  // namespace

mono_result monotonicity_check(const exit_fgh& fgh, double v1, double iu, double boundary_tol,
                               int grid_points) {
    if (iu < 0 || iu >= 1) throw domain_error("monotonicity_check: 0 <= Iu < 1");
    mono_result out;
    out.origin_ok = v1 == 0.0;

    double worst = std::numeric_limits<double>::infinity();
    double wx = 0;
    for (int i = 0; i < grid_points; ++i) {
        const double x = static_cast<double>(i) / (grid_points - 1);
        const double m = ebp_margin(fgh, iu, x);
        if (m < worst) {
            worst = m;
            wx = x;
        }
    }
    const double span = 1.0 / (grid_points - 1);
    const auto [rx, rm] = golden_min([&](double x) { return ebp_margin(fgh, iu, x); },
                                     std::max(0.0, wx - span), std::min(1.0, wx + span));
    if (rm < worst) {
        worst = rm;
        wx = rx;
    }
    out.margin = worst;
    out.witness_x = wx;

    if (!out.origin_ok) {
        // Ib(0) < 0 whenever v1 > 0 and Iu > 0
        out.verdict = iu == 0.0 ? mono_verdict::inconclusive : mono_verdict::violated;
        return out;
    }
    if (std::abs(worst) < boundary_tol)
        out.verdict = mono_verdict::inconclusive;
    else
        out.verdict = worst > 0 ? mono_verdict::satisfied : mono_verdict::violated;
    return out;
}

double threshold_search(const exit_fgh& fgh, double v1, double tol) {
    if (v1 != 0.0) throw domain_error("threshold_search: requires v1 = 0");
    auto satisfied = [&](double iu) { return monotonicity_check(fgh, 0.0, iu, 0.0).margin > 0.0; };
    double lo = 1e-9, hi = 1.0 - 1e-9;
    if (!satisfied(lo) || satisfied(hi))
        throw non_monotone_bracket("threshold_search: verdict bracket invalid");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (satisfied(mid) ? lo : hi) = mid;
    }
    // spot-check that the verdict is monotone through the bracket
    const double thr = 0.5 * (lo + hi);
    for (int i = 1; i <= 8; ++i) {
        if (!satisfied(thr * i / 9.0))
            throw non_monotone_bracket("threshold_search: verdict not monotone below threshold");
    }
    return thr;
}

double threshold_search(const degree_distribution& dd, double tol) {
    return threshold_search(beq_fgh(dd), dd.v_at(1), tol);
}

double solvability_boundary(const exit_fgh& fgh, double tol) {
    auto min_ib = [&](double iu) {
        double worst = std::numeric_limits<double>::infinity();
        double wx = 0;
        const int grid = 20001;
        for (int i = 0; i < grid; ++i) {
            const double x = static_cast<double>(i) / (grid - 1);
            const double v = ebp_ib(fgh, iu, x);
            if (v < worst) {
                worst = v;
                wx = x;
            }
        }
        const double span = 1.0 / (grid - 1);
        const auto [rx, rv] = golden_min([&](double x) { return ebp_ib(fgh, iu, x); },
                                         std::max(0.0, wx - span), std::min(1.0, wx + span));
        (void)rx;
        return std::min(worst, rv);
    };
    auto contained = [&](double iu) { return min_ib(iu) >= -1e-13; };
    double lo = 1e-9, hi = 1.0 - 1e-9;
    if (!contained(lo) || contained(hi))
        throw non_monotone_bracket("solvability_boundary: bracket invalid");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (contained(mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

ebp_area_result ebp_area(const degree_distribution& dd, double iu) {
    if (iu < 0 || iu >= 1) throw domain_error("ebp_area: 0 <= Iu < 1");
    const exit_fgh fgh = beq_fgh(dd);
    const polynomial fp = fgh.f.derivative();
    // (1 - Ib(x)) dIbext/dx, integrated over the parameter x
    auto integrand = [&](double x) {
        const double a = 1.0 - iu * fgh.f(x);
        return (1.0 - ebp_ib(fgh, iu, x)) * iu * fp(x) * fgh.dh(a);
    };
    gl_integrator gl(16);
    const double integral = gl.integrate(integrand, 0.0, 1.0, 1e-12);
    ebp_area_result out;
    out.iu_over_r = iu / dd.rate();
    out.a_ebp = ebp_ibext(fgh, iu, 0.0) + integral;
    out.identity_residual = fgh.db * iu * dd.v_at(1) + integral - out.iu_over_r;
    return out;
}

beq_recursion_trace beq_scalar_recursion(const degree_distribution& dd, double iu, double ib_pri,
                                         int iterations, bool sure_init) {
    const exit_fgh fgh = beq_fgh(dd);
    beq_recursion_trace out;
    double bc = sure_init ? 1.0 : 0.0;
    for (int l = 0; l < iterations; ++l) {
        const double cb = iu * fgh.f(bc);
        bc = 1.0 - (1.0 - ib_pri) * fgh.g(1.0 - cb);
        out.i_cb.push_back(cb);
        out.i_bc.push_back(bc);
        out.i_ext.push_back(1.0 - fgh.h(1.0 - cb));
    }
    return out;
}

std::vector<double> beq_scalar_astep(const degree_distribution& dd, double iu, double ia_pri,
                                     int iterations) {
    const exit_fgh fgh = beq_fgh(dd);
    std::vector<double> out;
    double bc = 1.0;
    for (int l = 0; l < iterations; ++l) {
        const double cb = iu * ia_pri * fgh.f(bc);
        bc = 1.0 - fgh.g(1.0 - cb);
        double ext = 0;
        for (auto& [d, wd] : dd.w()) ext += wd * std::pow(bc, d);
        out.push_back(iu * ext);
    }
    return out;
}

namespace {

// rank of the projection of a GF(2) span onto the coordinate subset `mask`
int projected_rank(const std::vector<std::uint32_t>& basis, std::uint32_t mask) {
    std::vector<std::uint32_t> pivots;
    for (std::uint32_t v : basis) {
        v &= mask;
        for (std::uint32_t p : pivots) v = std::min(v, v ^ p);
        if (v) pivots.push_back(v);
    }
    return static_cast<int>(pivots.size());
}

std::vector<double> avg_projected_dims(const std::vector<std::uint32_t>& basis, int K) {
    // mean over subsets of size l of dim(proj_S(span)); index l = 0..K
    std::vector<double> sum(K + 1, 0.0);
    std::vector<double> cnt(K + 1, 0.0);
    for (std::uint32_t mask = 0; mask < (1u << K); ++mask) {
        const int l = std::popcount(mask);
        sum[l] += projected_rank(basis, mask);
        cnt[l] += 1;
    }
    for (int l = 0; l <= K; ++l) sum[l] /= cnt[l];
    return sum;
}

}  // namespace

erasure_profile erasure_profile_2k(const symmetric_problem& prob, int mc_samples,
                                   std::uint64_t seed) {
    if (prob.kind != problem_kind::erasure_like_k)
        throw domain_error("erasure_profile_2k: erasure-like source required");
    const int K = prob.K;
    erasure_profile out;
    out.K = K;
    out.h.assign(K + 1, 0.0);
    double expected_dim = 0;

    if (prob.mode == symmetric_problem::subspace_mode::iid_bits) {
        // exact enumeration over erasure patterns
        for (std::uint32_t mask = 0; mask < (1u << K); ++mask) {
            double pmask = 1.0;
            for (int k = 0; k < K; ++k)
                pmask *= (mask >> k) & 1u ? prob.epsilon : 1.0 - prob.epsilon;
            if (pmask == 0) continue;
            std::vector<std::uint32_t> basis;
            for (int k = 0; k < K; ++k)
                if ((mask >> k) & 1u) basis.push_back(1u << k);
            const auto dims = avg_projected_dims(basis, K);
            for (int l = 0; l <= K; ++l) out.h[l] += pmask * dims[l];
            expected_dim += pmask * std::popcount(mask);
        }
    } else {
        test_channel ch = test_channel::erasure_limit(prob);
        rng r(substream(seed, "erasure-profile"));
        for (int s = 0; s < mc_samples; ++s) {
            const coset c = std::get<coset>(ch.sample_source(r));
            const auto dims = avg_projected_dims(c.basis, K);
            for (int l = 0; l <= K; ++l) out.h[l] += dims[l];
            expected_dim += c.dim();
        }
        for (int l = 0; l <= K; ++l) out.h[l] /= mc_samples;
        expected_dim /= mc_samples;
    }

    out.ic.resize(K);
    for (int l = 0; l < K; ++l) out.ic[l] = 1.0 - (out.h[l + 1] - out.h[l]);
    out.iu = std::accumulate(out.ic.begin(), out.ic.end(), 0.0);
    if (std::abs(out.h[K] - expected_dim) > 1e-9)
        throw model_error("erasure_profile_2k: h_K inconsistent with E[dim]");
    for (int l = 0; l < K; ++l)
        if (out.ic[l] < -1e-12 || out.ic[l] > 1.0 + 1e-12)
            throw model_error("erasure_profile_2k: Ic out of [0,1]");
    return out;
}

exit_fgh f_erasure_2k(const erasure_profile& profile, const degree_distribution& dd) {
    const int K = profile.K;
    if (dd.K() != K) throw domain_error("f_erasure_2k: K mismatch");
    exit_fgh out;
    out.db = dd.db();
    // f(x) = sum_l (Ic_l / Iu) sum_d v_d alpha_{d,l}(x), expanded to a
    // polynomial via the binomial in (1 - x^d)^(K-1-l)
    const int maxpow = dd.max_degree() * K;
    out.f.c.assign(maxpow + 1, 0.0);
    for (int l = 0; l < K; ++l) {
        const double scale_l = profile.ic[l] / profile.iu;
        if (scale_l == 0) continue;
        double binom_k1_l = 1.0;  // C(K-1, l)
        for (int i = 0; i < l; ++i) binom_k1_l *= static_cast<double>(K - 1 - i) / (i + 1);
        for (auto& [d, vd] : dd.v()) {
            if (vd == 0) continue;
            const int outer = K - 1 - l;
            double binom = 1.0;  // C(outer, m)
            for (int m = 0; m <= outer; ++m) {
                const double sign = m % 2 == 0 ? 1.0 : -1.0;
                const int power = d * (l + 1) - 1 + d * m;
                out.f.c[power] += scale_l * vd * binom_k1_l * sign * binom;
                binom = binom * (outer - m) / (m + 1);
            }
        }
    }
    return out;
}

namespace {

// The two equality constraints over the support: sum v = 1 and
// sum v/d = 1/(R db). base is the least-squares particular solution and
// nullsp an orthonormal basis of feasible directions.
struct slice {
    std::vector<int> degrees;
    std::vector<double> base;
    std::vector<std::vector<double>> nullsp;
};

slice build_slice(const std::vector<int>& degrees, double inv_rdb) {
    const int n = static_cast<int>(degrees.size());
    slice s;
    s.degrees = degrees;
    double a11 = n, a12 = 0, a22 = 0;
    for (int d : degrees) {
        a12 += 1.0 / d;
        a22 += 1.0 / (static_cast<double>(d) * d);
    }
    const double det = a11 * a22 - a12 * a12;
    if (n == 1) {
        // single degree: the slice is one point if consistent, else empty
        s.base = {1.0};
        return s;
    }
    if (std::abs(det) < 1e-14) throw domain_error("dd_search: degenerate degree set");
    const double y1 = 1.0, y2 = inv_rdb;
    const double c1 = (a22 * y1 - a12 * y2) / det;
    const double c2 = (a11 * y2 - a12 * y1) / det;
    s.base.resize(n);
    for (int i = 0; i < n; ++i) s.base[i] = c1 + c2 / degrees[i];

    std::vector<std::vector<double>> rows = {std::vector<double>(n, 1.0), std::vector<double>(n)};
    for (int i = 0; i < n; ++i) rows[1][i] = 1.0 / degrees[i];
    auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double v = 0;
        for (int i = 0; i < n; ++i) v += a[i] * b[i];
        return v;
    };
    std::vector<std::vector<double>> ortho;
    for (auto& rrow : rows) {
        std::vector<double> v = rrow;
        for (auto& o : ortho) {
            const double pr = dot(v, o);
            for (int i = 0; i < n; ++i) v[i] -= pr * o[i];
        }
        const double nn = std::sqrt(dot(v, v));
        if (nn > 1e-12) {
            for (double& x : v) x /= nn;
            ortho.push_back(v);
        }
    }
    for (int e = 0; e < n; ++e) {
        std::vector<double> v(n, 0.0);
        v[e] = 1.0;
        for (auto& o : ortho) {
            const double pr = dot(v, o);
            for (int i = 0; i < n; ++i) v[i] -= pr * o[i];
        }
        for (auto& o : s.nullsp) {
            const double pr = dot(v, o);
            for (int i = 0; i < n; ++i) v[i] -= pr * o[i];
        }
        const double nn = std::sqrt(dot(v, v));
        if (nn > 1e-9) {
            for (double& x : v) x /= nn;
            s.nullsp.push_back(v);
        }
    }
    return s;
}

}  // namespace

dd_search_result dd_search(const dd_search_target& target, int db, std::vector<int> degrees,
                           double tol, int margin_grid) {
    std::sort(degrees.begin(), degrees.end());
    degrees.erase(std::unique(degrees.begin(), degrees.end()), degrees.end());
    degrees.erase(std::remove_if(degrees.begin(), degrees.end(), [](int d) { return d <= 1; }),
                  degrees.end());
    if (degrees.empty()) throw domain_error("dd_search: need degrees >= 2 (v1 is forced to 0)");
    const int n = static_cast<int>(degrees.size());

    auto worst_margin = [&](const std::vector<double>& v, double iu) {
        double worst = std::numeric_limits<double>::infinity();
        for (double vi : v) worst = std::min(worst, vi);
        if (worst < -1e-9) return worst;  // sign-infeasible
        exit_fgh fgh;
        fgh.db = db;
        fgh.f.c.assign(degrees.back(), 0.0);
        for (int i = 0; i < n; ++i) fgh.f.c[degrees[i] - 1] += std::max(0.0, v[i]);
        for (int i = 0; i < margin_grid; ++i) {
            const double x = static_cast<double>(i) / (margin_grid - 1);
            worst = std::min(worst, ebp_margin(fgh, iu, x));
        }
        return worst;
    };

    auto best_margin = [&](double rate, double iu, std::vector<double>* vbest) {
        if (n == 1) {
            // only one degree: feasible iff the rate matches it exactly
            const double implied = static_cast<double>(degrees[0]) / db;
            if (std::abs(rate - implied) > 1e-9)
                return -std::numeric_limits<double>::infinity();
            std::vector<double> v = {1.0};
            if (vbest) *vbest = v;
            return worst_margin(v, iu);
        }
        const slice s = build_slice(degrees, 1.0 / (rate * db));
        std::vector<double> v = s.base;
        double cur = worst_margin(v, iu);
        for (int sweep = 0; sweep < 60; ++sweep) {
            bool improved = false;
            for (const auto& dir : s.nullsp) {
                auto along = [&](double step) {
                    std::vector<double> w = v;
                    for (int i = 0; i < n; ++i) w[i] += step * dir[i];
                    return -worst_margin(w, iu);
                };
                const auto [st, neg] = golden_min(along, -1.0, 1.0, 60);
                if (-neg > cur + 1e-13) {
                    for (int i = 0; i < n; ++i) v[i] += st * dir[i];
                    cur = -neg;
                    improved = true;
                }
            }
            if (!improved) break;
        }
        if (vbest) *vbest = v;
        return cur;
    };

    auto dd_from = [&](const std::vector<double>& vbest, double rate) {
        std::map<int, double> v;
        for (int i = 0; i < n; ++i) v[degrees[i]] = std::max(0.0, vbest[i]);
        double vsum = 0;
        for (auto& [d, x] : v) vsum += x;
        for (auto& [d, x] : v) x /= vsum;
        return degree_distribution::from_v(db, v, rate);
    };

    dd_search_result out{degree_distribution::regular(db, degrees[0]), 0, 0, {}};
    std::vector<double> vbest;
    if (target.goal == dd_search_target::kind::max_iu_at_rate) {
        const double rate = target.value;
        if (best_margin(rate, 1e-9, nullptr) <= 0)
            throw domain_error("dd_search: no feasible distribution at this rate");
        double lo = 1e-9, hi = 1.0 - 1e-9;
        if (best_margin(rate, hi, nullptr) > 0) {
            lo = hi;
        } else {
            while (hi - lo > tol) {
                const double mid = 0.5 * (lo + hi);
                (best_margin(rate, mid, nullptr) > 0 ? lo : hi) = mid;
            }
        }
        out.achieved = lo;
        out.margin = best_margin(rate, lo, &vbest);
        out.dd = dd_from(vbest, rate);
    } else {
        const double iu = target.value;
        double lo = std::max(iu, 1e-6), hi = 1.0;
        if (best_margin(hi, iu, nullptr) <= 0)
            throw domain_error("dd_search: infeasible even at rate 1");
        while (hi - lo > tol) {
            const double mid = 0.5 * (lo + hi);
            (best_margin(mid, iu, nullptr) > 0 ? hi : lo) = mid;
        }
        out.achieved = hi;
        out.margin = best_margin(hi, iu, &vbest);
        out.dd = dd_from(vbest, hi);
    }
    const double check_iu =
        target.goal == dd_search_target::kind::max_iu_at_rate ? out.achieved : target.value;
    out.check = monotonicity_check(beq_fgh(out.dd), out.dd.v_at(1),
                                   std::clamp(check_iu, 0.0, 1.0 - 1e-9));
    return out;
}

}  // namespace ldgmq
