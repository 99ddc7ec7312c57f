#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "ldgmq/group.hpp"
#include "ldgmq/prob_tuple.hpp"
#include "ldgmq/rng.hpp"

namespace ldgmq {

/// Affine subspace of Z_2^K given by a GF(2) basis and an offset; the source
/// alphabet of the K-dimensional erasure problem.
struct coset {
    std::vector<std::uint32_t> basis;  // independent GF(2) generators
    std::uint32_t offset = 0;

    std::uint64_t cardinality() const { return std::uint64_t{1} << basis.size(); }
    bool contains(std::uint32_t u) const;
    unsigned dim() const { return static_cast<unsigned>(basis.size()); }
};

// One source symbol: a real in [0,M) for MSE, a symbol index (-1 = erased)
// for the discrete problems, or a coset for the K-dimensional erasure case.
using source_symbol = std::variant<double, int, coset>;

enum class problem_kind { mse_uniform, mary_hamming, mary_erasure, erasure_like_k };

struct symmetric_problem {
    problem_kind kind = problem_kind::mse_uniform;
    int M = 2;           // mse / hamming / erasure alphabet size
    int K = 1;           // erasure_like_k dimension
    double epsilon = 0;  // erasure probability (per symbol, or per bit below)

    // erasure_like_k source law: either independent per-bit erasures with
    // probability epsilon (the analytically checkable default), or a pmf over
    // subspace dimensions with a uniform subspace and offset given the
    // dimension. Both keep p(y) uniform over each Y_x.
    enum class subspace_mode { iid_bits, dim_pmf };
    subspace_mode mode = subspace_mode::iid_bits;
    std::vector<double> dim_pmf;  // size K+1 when mode == dim_pmf

    static symmetric_problem mse(int M);
    static symmetric_problem hamming(int M);
    static symmetric_problem erasure(int M, double eps);
    static symmetric_problem erasure_k(int K, double eps_per_bit);
    static symmetric_problem erasure_k_pmf(int K, std::vector<double> dim_pmf);

    group_descriptor group() const;
    double distortion(std::uint64_t u, const source_symbol& y) const;
    source_symbol apply_action(std::uint64_t u, const source_symbol& y) const;  // psi_u(y)
    bool is_erasure_kind() const {
        return kind == problem_kind::mary_erasure || kind == problem_kind::erasure_like_k;
    }
};

// Test channel p(u|y) = exp(-t d(u,y)) / Q(y). t may be infinite for the
// erasure problems, in which case priors are exact uniform-on-consistent-set
// tuples. Immutable and shareable across threads after construction.
class test_channel {
  public:
    test_channel(symmetric_problem prob, double t);
    static test_channel erasure_limit(symmetric_problem prob);  // t = infinity

    const symmetric_problem& problem() const { return prob_; }
    double t() const { return t_; }
    bool t_is_infinite() const { return t_inf_; }

    double d0() const;                      // E[d(u,y)]
    double r0() const;                      // I(u;y), bits/symbol
    double cond_entropy_u_given_y() const;  // H(u|y), bits
    std::vector<double> induced_pu() const;

    group_tuple prior_from_sample(const source_symbol& y) const;
    group_tuple conditional_pu(const source_symbol& y) const { return prior_from_sample(y); }

    source_symbol sample_source(rng& r) const;  // y ~ p(y)
    source_symbol sample_y_given_u(std::uint64_t u, rng& r) const;
    std::pair<std::uint64_t, source_symbol> sample_pair(rng& r) const;  // (u*, y ~ p(y|u*))

    /// p(y|u) as a density/pmf value (continuous y for MSE).
    double likelihood(const source_symbol& y, std::uint64_t u) const;

    /// t with |R0(t) - R| <= 1e-9, by bisection on the increasing R0.
    static double solve_t0(const symmetric_problem& prob, double R);
    /// 10 log10 of the M-ary MSE shaping gap at rate R against 1/(2 pi e).
    static double random_coding_loss(int M, double R);
    static double mse_ideal_sigma2(int M, double R);

  private:
    struct mse_stats {
        double d0, h_cond;  // E[d], H(u|y)
    };
    mse_stats compute_mse_stats() const;
    void ensure_stats() const;

    symmetric_problem prob_;
    double t_ = 1.0;
    bool t_inf_ = false;
    mutable std::optional<mse_stats> stats_;
    mutable double qmin_ = 0.0;  // rejection-sampling bound cache (MSE)
};

std::vector<source_symbol> sample_source(const symmetric_problem& prob, int n, std::uint64_t seed);

// Composite Gauss-Legendre on [0,1): panels are doubled until successive
// estimates differ by less than tol. Throws numerical_failure at the cap.
class gl_integrator {
  public:
    explicit gl_integrator(int points_per_panel = 16);
    /// Integrate f over [a,b) with the panel-doubling rule.
    template <typename F>
    double integrate(F&& f, double a, double b, double tol = 1e-10, int initial_panels = 4) const {
        double prev = pass(f, a, b, initial_panels);
        for (int panels = initial_panels * 2; panels <= 1 << 14; panels *= 2) {
            const double cur = pass(f, a, b, panels);
            if (std::abs(cur - prev) < tol) return cur;
            prev = cur;
        }
        throw numerical_failure("gl_integrator: tolerance not met at max panel count");
    }

    const std::vector<double>& nodes() const { return x_; }
    const std::vector<double>& weights() const { return w_; }

  private:
    template <typename F>
    double pass(F&& f, double a, double b, int panels) const {
        const double h = (b - a) / panels;
        double total = 0.0;
        for (int p = 0; p < panels; ++p) {
            const double lo = a + p * h;
            for (std::size_t i = 0; i < x_.size(); ++i) total += w_[i] * f(lo + h * x_[i]) * h;
        }
        return total;
    }

    std::vector<double> x_, w_;  // nodes/weights on [0,1]
};

}  // namespace ldgmq
