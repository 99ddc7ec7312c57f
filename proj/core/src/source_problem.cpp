#include "ldgmq/source_problem.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#include "ldgmq/errors.hpp"

namespace ldgmq {

namespace {

// Reduced echelon pivots of a GF(2) generator list.
std::vector<std::uint32_t> gf2_pivots(const std::vector<std::uint32_t>& gens) {
    std::vector<std::uint32_t> pivots;
    for (std::uint32_t v : gens) {
        for (std::uint32_t p : pivots) v = std::min(v, v ^ p);
        if (v) pivots.push_back(v);
    }
    return pivots;
}

bool gf2_in_span(std::uint32_t x, const std::vector<std::uint32_t>& pivots) {
    for (std::uint32_t p : pivots) x = std::min(x, x ^ p);
    return x == 0;
}

double wrap_to_centered(double r, double M) {
    r = std::fmod(r, M);
    if (r < 0) r += M;
    if (r >= M / 2) r -= M;
    return r;
}

// Number of l-dimensional subspaces of Z_2^K (Gaussian binomial).
double gaussian_binomial(int K, int l) {
    double v = 1.0;
    for (int i = 0; i < l; ++i)
        v *= (std::pow(2.0, K - i) - 1.0) / (std::pow(2.0, l - i) - 1.0);
    return v;
}

}  // namespace

bool coset::contains(std::uint32_t u) const {
    return gf2_in_span(u ^ offset, gf2_pivots(basis));
}

symmetric_problem symmetric_problem::mse(int M) {
    if (M < 2) throw domain_error("mse: M >= 2");
    symmetric_problem p;
    p.kind = problem_kind::mse_uniform;
    p.M = M;
    return p;
}

symmetric_problem symmetric_problem::hamming(int M) {
    if (M < 2) throw domain_error("hamming: M >= 2");
    symmetric_problem p;
    p.kind = problem_kind::mary_hamming;
    p.M = M;
    return p;
}

symmetric_problem symmetric_problem::erasure(int M, double eps) {
    if (M < 2 || eps < 0 || eps > 1) throw domain_error("erasure: bad parameters");
    symmetric_problem p;
    p.kind = problem_kind::mary_erasure;
    p.M = M;
    p.epsilon = eps;
    return p;
}

symmetric_problem symmetric_problem::erasure_k(int K, double eps_per_bit) {
    if (K < 1 || K > 20 || eps_per_bit < 0 || eps_per_bit > 1)
        throw domain_error("erasure_k: bad parameters");
    symmetric_problem p;
    p.kind = problem_kind::erasure_like_k;
    p.K = K;
    p.epsilon = eps_per_bit;
    return p;
}

symmetric_problem symmetric_problem::erasure_k_pmf(int K, std::vector<double> dim_pmf) {
    if (K < 1 || K > 20 || static_cast<int>(dim_pmf.size()) != K + 1)
        throw domain_error("erasure_k_pmf: pmf must have K+1 entries");
    double s = 0;
    for (double v : dim_pmf) {
        if (v < 0) throw domain_error("erasure_k_pmf: negative mass");
        s += v;
    }
    if (std::abs(s - 1.0) > 1e-12) throw domain_error("erasure_k_pmf: pmf must sum to 1");
    symmetric_problem p;
    p.kind = problem_kind::erasure_like_k;
    p.K = K;
    p.mode = subspace_mode::dim_pmf;
    p.dim_pmf = std::move(dim_pmf);
    return p;
}

group_descriptor symmetric_problem::group() const {
    if (kind == problem_kind::erasure_like_k) return group_descriptor::z2k(K);
    return M == 2 ? group_descriptor::zm(2) : group_descriptor::zm(M);
}

double symmetric_problem::distortion(std::uint64_t u, const source_symbol& y) const {
    switch (kind) {
        case problem_kind::mse_uniform: {
            const double r = wrap_to_centered(std::get<double>(y) - static_cast<double>(u), M);
            return r * r;
        }
        case problem_kind::mary_hamming:
            return std::get<int>(y) == static_cast<int>(u) ? 0.0 : 1.0;
        case problem_kind::mary_erasure: {
            const int s = std::get<int>(y);
            return (s < 0 || s == static_cast<int>(u)) ? 0.0 : 1.0;
        }
        case problem_kind::erasure_like_k:
            return std::get<coset>(y).contains(static_cast<std::uint32_t>(u)) ? 0.0 : 1.0;
    }
    return 0.0;
}

source_symbol symmetric_problem::apply_action(std::uint64_t u, const source_symbol& y) const {
    switch (kind) {
        case problem_kind::mse_uniform: {
            double r = std::fmod(std::get<double>(y) - static_cast<double>(u), static_cast<double>(M));
            if (r < 0) r += M;
            return r;
        }
        case problem_kind::mary_hamming:
        case problem_kind::mary_erasure: {
            const int s = std::get<int>(y);
            if (s < 0) return s;
            return static_cast<int>((s - static_cast<int>(u) % M + M) % M);
        }
        case problem_kind::erasure_like_k: {
            coset c = std::get<coset>(y);
            c.offset ^= static_cast<std::uint32_t>(u);
            return c;
        }
    }
    return y;
}

gl_integrator::gl_integrator(int n) {
    // Newton iteration on Legendre polynomials, mapped from [-1,1] to [0,1].
    x_.resize(n);
    w_.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        x_[i] = 0.5 * (1.0 + x);
        w_[i] = 1.0 / ((1.0 - x * x) * pp * pp);
    }
}

test_channel::test_channel(symmetric_problem prob, double t) : prob_(std::move(prob)), t_(t) {
    if (!(t > 0) || !std::isfinite(t)) throw domain_error("test_channel: t must be positive and finite");
}

test_channel test_channel::erasure_limit(symmetric_problem prob) {
    if (!prob.is_erasure_kind())
        throw domain_error("erasure_limit: t = infinity only for erasure problems");
    test_channel ch(std::move(prob), 1.0);
    ch.t_inf_ = true;
    ch.t_ = std::numeric_limits<double>::infinity();
    return ch;
}

test_channel::mse_stats test_channel::compute_mse_stats() const {
    const int M = prob_.M;
    const double t = t_;
    gl_integrator gl(16);
    // Both integrands are 1-periodic in y, so integrate over one period.
    auto per_y_d = [&](double y) {
        double q = 0, dsum = 0;
        for (int u = 0; u < M; ++u) {
            const double r = wrap_to_centered(y - u, M);
            const double w = std::exp(-t * r * r);
            q += w;
            dsum += w * r * r;
        }
        return dsum / q;
    };
    auto per_y_h = [&](double y) {
        double q = 0;
        std::array<double, 64> w{};
        for (int u = 0; u < M; ++u) {
            const double r = wrap_to_centered(y - u, M);
            w[u] = std::exp(-t * r * r);
            q += w[u];
        }
        double h = 0;
        for (int u = 0; u < M; ++u) {
            const double p = w[u] / q;
            if (p > 0) h -= p * std::log2(p);
        }
        return h;
    };
    mse_stats s;
    s.d0 = gl.integrate(per_y_d, 0.0, 1.0, 1e-11);
    s.h_cond = gl.integrate(per_y_h, 0.0, 1.0, 1e-11);
    return s;
}

void test_channel::ensure_stats() const {
    if (stats_) return;
    switch (prob_.kind) {
        case problem_kind::mse_uniform:
            stats_ = compute_mse_stats();
            break;
        case problem_kind::mary_hamming: {
            const double e = std::exp(-t_);
            const double q = 1.0 + (prob_.M - 1) * e;
            mse_stats s;
            s.d0 = (prob_.M - 1) * e / q;
            s.h_cond = -(1.0 / q) * std::log2(1.0 / q);
            if (e > 0) s.h_cond -= (prob_.M - 1) * (e / q) * std::log2(e / q);
            stats_ = s;
            break;
        }
        case problem_kind::mary_erasure: {
            mse_stats s;
            if (t_inf_) {
                s.d0 = 0.0;
                s.h_cond = prob_.epsilon * std::log2(static_cast<double>(prob_.M));
            } else {
                const double e = std::exp(-t_);
                const double q = 1.0 + (prob_.M - 1) * e;
                double hh = -(1.0 / q) * std::log2(1.0 / q);
                if (e > 0) hh -= (prob_.M - 1) * (e / q) * std::log2(e / q);
                s.d0 = (1.0 - prob_.epsilon) * (prob_.M - 1) * e / q;
                s.h_cond = prob_.epsilon * std::log2(static_cast<double>(prob_.M)) +
                           (1.0 - prob_.epsilon) * hh;
            }
            stats_ = s;
            break;
        }
        case problem_kind::erasure_like_k: {
            const int K = prob_.K;
            std::vector<double> pdim(K + 1, 0.0);
            if (prob_.mode == symmetric_problem::subspace_mode::iid_bits) {
                for (int l = 0; l <= K; ++l) {
                    double c = 1.0;
                    for (int i = 0; i < l; ++i) c *= static_cast<double>(K - i) / (i + 1);
                    pdim[l] = c * std::pow(prob_.epsilon, l) * std::pow(1.0 - prob_.epsilon, K - l);
                }
            } else {
                pdim = prob_.dim_pmf;
            }
            mse_stats s{0.0, 0.0};
            const double big = std::pow(2.0, K);
            for (int l = 0; l <= K; ++l) {
                const double sz = std::pow(2.0, l);
                if (t_inf_) {
                    s.h_cond += pdim[l] * l;
                } else {
                    const double e = std::exp(-t_);
                    const double q = sz + (big - sz) * e;
                    s.d0 += pdim[l] * (big - sz) * e / q;
                    double h = -sz * (1.0 / q) * std::log2(1.0 / q);
                    if (e > 0 && big > sz) h -= (big - sz) * (e / q) * std::log2(e / q);
                    s.h_cond += pdim[l] * h;
                }
            }
            stats_ = s;
            break;
        }
    }
}

double test_channel::d0() const {
    ensure_stats();
    return stats_->d0;
}

double test_channel::cond_entropy_u_given_y() const {
    ensure_stats();
    return stats_->h_cond;
}

double test_channel::r0() const {
    ensure_stats();
    return std::log2(static_cast<double>(prob_.group().order())) - stats_->h_cond;
}

group_tuple test_channel::prior_from_sample(const source_symbol& y) const {
    const group_descriptor g = prob_.group();
    if (t_inf_) {
        std::vector<double> w(g.order(), 0.0);
        bool any = false;
        for (std::uint64_t u = 0; u < g.order(); ++u) {
            if (prob_.distortion(u, y) == 0.0) {
                w[u] = 1.0;
                any = true;
            }
        }
        if (!any) throw contradiction_error("prior_from_sample: empty consistent set");
        return group_tuple(g, std::move(w));
    }
    std::vector<double> logw(g.order());
    for (std::uint64_t u = 0; u < g.order(); ++u) logw[u] = -t_ * prob_.distortion(u, y);
    return group_tuple::from_log_weights(g, logw);
}

std::vector<double> test_channel::induced_pu() const {
    const group_descriptor g = prob_.group();
    std::vector<double> pu(g.order(), 0.0);
    switch (prob_.kind) {
        case problem_kind::mse_uniform: {
            gl_integrator gl(16);
            for (std::uint64_t u = 0; u < g.order(); ++u) {
                auto f = [&](double y) {
                    double q = 0, wu = 0;
                    for (int v = 0; v < prob_.M; ++v) {
                        const double r = wrap_to_centered(y - v, prob_.M);
                        const double w = std::exp(-t_ * r * r);
                        q += w;
                        if (static_cast<std::uint64_t>(v) == u) wu = w;
                    }
                    return wu / q;
                };
                pu[u] = gl.integrate(f, 0.0, prob_.M, 1e-11, 4 * prob_.M) / prob_.M;
            }
            break;
        }
        case problem_kind::mary_hamming:
        case problem_kind::mary_erasure: {
            const bool era = prob_.kind == problem_kind::mary_erasure;
            const double eps = era ? prob_.epsilon : 0.0;
            for (int s = 0; s < prob_.M; ++s) {
                const group_tuple pr = prior_from_sample(source_symbol{s});
                const double py = (1.0 - eps) / prob_.M;
                for (std::uint64_t u = 0; u < g.order(); ++u) pu[u] += py * pr(u);
            }
            if (era) {
                const group_tuple pr = prior_from_sample(source_symbol{-1});
                for (std::uint64_t u = 0; u < g.order(); ++u) pu[u] += eps * pr(u);
            }
            break;
        }
        case problem_kind::erasure_like_k: {
            const int K = prob_.K;
            if (prob_.mode == symmetric_problem::subspace_mode::iid_bits) {
                for (std::uint32_t mask = 0; mask < (1u << K); ++mask) {
                    const int l = std::popcount(mask);
                    double pmask = 1.0;
                    for (int k = 0; k < K; ++k)
                        pmask *= (mask >> k) & 1u ? prob_.epsilon : 1.0 - prob_.epsilon;
                    if (pmask == 0.0) continue;
                    std::vector<std::uint32_t> basis;
                    for (int k = 0; k < K; ++k)
                        if ((mask >> k) & 1u) basis.push_back(1u << k);
                    const std::uint32_t ncosets = 1u << (K - l);
                    for (std::uint32_t off = 0; off < (1u << K); ++off) {
                        if (off & mask) continue;  // canonical coset representatives
                        const group_tuple pr = prior_from_sample(coset{basis, off});
                        const double py = pmask / ncosets;
                        for (std::uint64_t u = 0; u < g.order(); ++u) pu[u] += py * pr(u);
                    }
                }
            } else {
                if (K > 4) throw size_exceeded("induced_pu: subspace enumeration capped at K = 4");
                // enumerate all subspaces by brute force over subsets
                std::vector<std::vector<std::uint32_t>> by_dim(K + 1);
                const std::uint32_t n = 1u << K;
                for (std::uint64_t sub = 1; sub < (std::uint64_t{1} << n); ++sub) {
                    if (!(sub & 1)) continue;  // must contain 0
                    std::vector<std::uint32_t> el;
                    for (std::uint32_t e = 0; e < n; ++e)
                        if ((sub >> e) & 1) el.push_back(e);
                    if ((el.size() & (el.size() - 1)) != 0) continue;  // order must be 2^l
                    bool closed = true;
                    for (std::uint32_t x : el)
                        for (std::uint32_t y2 : el)
                            if (!((sub >> (x ^ y2)) & 1)) {
                                closed = false;
                                break;
                            }
                    if (!closed) continue;
                    by_dim[std::countr_zero(el.size())].push_back(static_cast<std::uint32_t>(sub));
                }
                for (int l = 0; l <= K; ++l) {
                    if (prob_.dim_pmf[l] == 0.0 || by_dim[l].empty()) continue;
                    for (std::uint32_t sub : by_dim[l]) {
                        std::vector<std::uint32_t> el;
                        for (std::uint32_t e = 0; e < n; ++e)
                            if ((sub >> e) & 1) el.push_back(e);
                        std::vector<std::uint32_t> basis = gf2_pivots(el);
                        const std::uint32_t ncosets = n >> l;
                        // one representative per coset
                        std::vector<bool> seen(n, false);
                        for (std::uint32_t off = 0; off < n; ++off) {
                            if (seen[off]) continue;
                            for (std::uint32_t e : el) seen[off ^ e] = true;
                            const group_tuple pr = prior_from_sample(coset{basis, off});
                            const double py = prob_.dim_pmf[l] / (by_dim[l].size() * ncosets);
                            for (std::uint64_t u = 0; u < g.order(); ++u) pu[u] += py * pr(u);
                        }
                    }
                }
            }
            break;
        }
    }
    return pu;
}

source_symbol test_channel::sample_source(rng& r) const {
    switch (prob_.kind) {
        case problem_kind::mse_uniform:
            return r.uniform() * prob_.M;
        case problem_kind::mary_hamming:
            return static_cast<int>(r.bounded(prob_.M));
        case problem_kind::mary_erasure:
            if (r.uniform() < prob_.epsilon) return -1;
            return static_cast<int>(r.bounded(prob_.M));
        case problem_kind::erasure_like_k: {
            const int K = prob_.K;
            if (prob_.mode == symmetric_problem::subspace_mode::iid_bits) {
                std::uint32_t mask = 0;
                for (int k = 0; k < K; ++k)
                    if (r.uniform() < prob_.epsilon) mask |= 1u << k;
                std::vector<std::uint32_t> basis;
                for (int k = 0; k < K; ++k)
                    if ((mask >> k) & 1u) basis.push_back(1u << k);
                const std::uint32_t off = static_cast<std::uint32_t>(r.bounded(1u << K)) & ~mask;
                return coset{std::move(basis), off};
            }
            double x = r.uniform();
            int dim = 0;
            for (int l = 0; l <= K; ++l) {
                x -= prob_.dim_pmf[l];
                dim = l;
                if (x < 0) break;
            }
            std::vector<std::uint32_t> basis;
            while (true) {
                basis.clear();
                for (int i = 0; i < dim; ++i)
                    basis.push_back(static_cast<std::uint32_t>(r.bounded(1u << K)));
                if (static_cast<int>(gf2_pivots(basis).size()) == dim) break;
            }
            const std::uint32_t off = static_cast<std::uint32_t>(r.bounded(1u << K));
            return coset{std::move(basis), off};
        }
    }
    return 0;
}

std::pair<std::uint64_t, source_symbol> test_channel::sample_pair(rng& r) const {
    const std::uint64_t u = r.bounded(prob_.group().order());
    return {u, sample_y_given_u(u, r)};
}

source_symbol test_channel::sample_y_given_u(std::uint64_t u, rng& r) const {
    switch (prob_.kind) {
        case problem_kind::mse_uniform: {
            if (qmin_ == 0.0) {
                double qmin = std::numeric_limits<double>::infinity();
                for (int i = 0; i < 4096; ++i) {
                    const double y = (i + 0.5) / 4096.0;
                    double q = 0;
                    for (int v = 0; v < prob_.M; ++v) {
                        const double rr = wrap_to_centered(y - v, prob_.M);
                        q += std::exp(-t_ * rr * rr);
                    }
                    qmin = std::min(qmin, q);
                }
                qmin_ = qmin * 0.999;  // keep the bound strictly valid
            }
            while (true) {
                const double z = r.uniform() * prob_.M;
                double q = 0;
                for (int v = 0; v < prob_.M; ++v) {
                    const double rr = wrap_to_centered(z - v, prob_.M);
                    q += std::exp(-t_ * rr * rr);
                }
                const double r0 = wrap_to_centered(z, prob_.M);
                const double f = std::exp(-t_ * r0 * r0) / q;  // p(z | u = 0)
                if (r.uniform() < f * qmin_) {
                    double y = std::fmod(z + static_cast<double>(u), static_cast<double>(prob_.M));
                    return y;
                }
            }
        }
        case problem_kind::mary_hamming: {
            const double e = std::exp(-t_);
            const double q = 1.0 + (prob_.M - 1) * e;
            if (r.uniform() * q < 1.0) return static_cast<int>(u);
            const int other = static_cast<int>(r.bounded(prob_.M - 1));
            return static_cast<int>((u + 1 + other) % prob_.M);
        }
        case problem_kind::mary_erasure: {
            if (r.uniform() < prob_.epsilon) return -1;
            if (t_inf_) return static_cast<int>(u);
            const double e = std::exp(-t_);
            const double q = 1.0 + (prob_.M - 1) * e;
            if (r.uniform() * q < 1.0) return static_cast<int>(u);
            const int other = static_cast<int>(r.bounded(prob_.M - 1));
            return static_cast<int>((u + 1 + other) % prob_.M);
        }
        case problem_kind::erasure_like_k: {
            if (!t_inf_) throw domain_error("sample_y_given_u: erasure_like_k supports t = infinity only");
            source_symbol y = sample_source(r);
            coset c = std::get<coset>(y);
            // re-center the coset on the reference symbol
            c.offset = static_cast<std::uint32_t>(u);
            if (prob_.mode == symmetric_problem::subspace_mode::iid_bits) {
                std::uint32_t mask = 0;
                for (std::uint32_t b : c.basis) mask |= b;
                c.offset = static_cast<std::uint32_t>(u) & ~mask;
            }
            return c;
        }
    }
    return 0;
}

double test_channel::likelihood(const source_symbol& y, std::uint64_t u) const {
    switch (prob_.kind) {
        case problem_kind::mse_uniform: {
            const double yy = std::get<double>(y);
            double q = 0;
            for (int v = 0; v < prob_.M; ++v) {
                const double rr = wrap_to_centered(yy - v, prob_.M);
                q += std::exp(-t_ * rr * rr);
            }
            return std::exp(-t_ * prob_.distortion(u, y)) / q;
        }
        case problem_kind::mary_hamming: {
            const double e = std::exp(-t_);
            const double q = 1.0 + (prob_.M - 1) * e;
            return std::exp(-t_ * prob_.distortion(u, y)) / q;
        }
        case problem_kind::mary_erasure: {
            const int s = std::get<int>(y);
            if (s < 0) return prob_.epsilon;
            if (t_inf_) return (1.0 - prob_.epsilon) * (static_cast<int>(u) == s ? 1.0 : 0.0);
            const double e = std::exp(-t_);
            const double q = 1.0 + (prob_.M - 1) * e;
            return (1.0 - prob_.epsilon) * std::exp(-t_ * prob_.distortion(u, y)) / q;
        }
        case problem_kind::erasure_like_k: {
            if (!t_inf_) throw domain_error("likelihood: erasure_like_k supports t = infinity only");
            const coset& c = std::get<coset>(y);
            if (!c.contains(static_cast<std::uint32_t>(u))) return 0.0;
            const int l = c.dim();
            if (prob_.mode == symmetric_problem::subspace_mode::iid_bits) {
                double pmask = 1.0;
                std::uint32_t mask = 0;
                for (std::uint32_t b : c.basis) mask |= b;
                for (int k = 0; k < prob_.K; ++k)
                    pmask *= (mask >> k) & 1u ? prob_.epsilon : 1.0 - prob_.epsilon;
                return pmask;
            }
            return prob_.dim_pmf[l] / gaussian_binomial(prob_.K, l);
        }
    }
    return 0.0;
}

double test_channel::solve_t0(const symmetric_problem& prob, double R) {
    const double logm = std::log2(static_cast<double>(prob.group().order()));
    if (!(R > 0.0) || R >= logm) throw domain_error("solve_t0: R out of achievable range");
    auto r0_at = [&](double t) { return test_channel(prob, t).r0(); };
    double lo = 1e-9, hi = 1.0;
    while (r0_at(hi) < R) {
        hi *= 2.0;
        if (hi > 1e6) throw numerical_failure("solve_t0: bracket not found");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double r = r0_at(mid);
        if (std::abs(r - R) <= 1e-9) return mid;
        (r < R ? lo : hi) = mid;
    }
    // R0 is monotone increasing, so the bracket collapsed onto the target.
    const double t = 0.5 * (lo + hi);
    if (std::abs(r0_at(t) - R) > 1e-7) throw numerical_failure("solve_t0: did not converge");
    return t;
}

double test_channel::mse_ideal_sigma2(int M, double R) {
    const double scale = std::pow(2.0, R) / M;
    return 1.0 / (2.0 * std::numbers::pi * std::numbers::e * scale * scale);
}

double test_channel::random_coding_loss(int M, double R) {
    const double t = solve_t0(symmetric_problem::mse(M), R);
    const double d0 = test_channel(symmetric_problem::mse(M), t).d0();
    return 10.0 * std::log10(d0 / mse_ideal_sigma2(M, R));
}

std::vector<source_symbol> sample_source(const symmetric_problem& prob, int n, std::uint64_t seed) {
    if (n < 0) throw domain_error("sample_source: n < 0");
    test_channel ch = prob.is_erasure_kind() ? test_channel::erasure_limit(prob)
                                             : test_channel(prob, 1.0);
    rng r(substream(seed, "source"));
    std::vector<source_symbol> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.push_back(ch.sample_source(r));
    return out;
}

}  // namespace ldgmq
