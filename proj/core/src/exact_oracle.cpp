#include "ldgmq/exact_oracle.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <limits>

#include "ldgmq/errors.hpp"
#include "ldgmq/rng.hpp"

namespace ldgmq {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Streaming log-sum-exp with a running max shift.
struct log_sum {
    double mx = kNegInf;
    double s = 0.0;
    void add(double x) {
        if (x == kNegInf) return;
        if (mx == kNegInf) {
            mx = x;
            s = 1.0;
        } else if (x <= mx) {
            s += std::exp(x - mx);
        } else {
            s = s * std::exp(mx - x) + 1.0;
            mx = x;
        }
    }
    bool empty() const { return mx == kNegInf; }
    double value() const { return empty() ? kNegInf : mx + std::log(s); }
};

prob_tuple tuple_from_logsums(const log_sum& l0, const log_sum& l1) {
    if (l0.empty() && l1.empty()) throw contradiction_error("oracle: no consistent completion");
    if (l0.empty()) return prob_tuple::sure(1);
    if (l1.empty()) return prob_tuple::sure(0);
    const double d = l1.value() - l0.value();
    return {1.0 / (1.0 + std::exp(d))};
}

}  // namespace

exact_oracle::exact_oracle(const ldgm_code& code, const test_channel& ch,
                           std::vector<source_symbol> y)
    : code_(&code), ch_(&ch), y_(std::move(y)) {
    if (code.K != 1) throw domain_error("exact_oracle: binary codes only");
    if (code.nb + code.nc > kOracleMaxBits) throw size_exceeded("exact_oracle: nb + nc > cap");
    if (static_cast<int>(y_.size()) != code.n) throw domain_error("exact_oracle: |y| != n");
    dist_.resize(code.n);
    for (int j = 0; j < code.n; ++j)
        for (int u = 0; u < 2; ++u) dist_[j][u] = ch.problem().distortion(u, y_[j]);
}

prob_tuple exact_oracle::run_target(std::span<const std::optional<std::uint8_t>> b_priors,
                                    std::span<const std::optional<std::uint8_t>> a_priors,
                                    bool target_is_b, int target) const {
    const ldgm_code& code = *code_;
    const bool tinf = ch_->t_is_infinite();
    const double t = ch_->t();

    // free bit list; the target is always enumerated, its own prior ignored
    struct free_bit {
        bool is_b;
        int idx;
    };
    std::vector<free_bit> free;
    std::vector<std::uint8_t> b(code.nb, 0), a(code.nc, 0);
    for (int i = 0; i < code.nb; ++i) {
        const bool is_target = target_is_b && i == target;
        if (!is_target && b_priors[i]) {
            b[i] = *b_priors[i];
        } else {
            free.push_back({true, i});
        }
    }
    for (int j = 0; j < code.nc; ++j) {
        const bool is_target = !target_is_b && j == target;
        if (!is_target && a_priors[j]) {
            a[j] = *a_priors[j];
        } else {
            free.push_back({false, j});
        }
    }
    if (free.size() > static_cast<std::size_t>(kOracleMaxBits))
        throw size_exceeded("oracle: too many free bits");

    // initial codeword and distortion state
    std::vector<std::uint8_t> c(a.begin(), a.end());
    for (int i = 0; i < code.nb; ++i) {
        if (!b[i]) continue;
        for (std::int32_t j : code.rows[i]) c[j] ^= 1;
    }
    double S = 0;
    for (int j = 0; j < code.nc; ++j) S += dist_[j][c[j]];

    log_sum acc[2];
    auto current_target_bit = [&]() -> int { return target_is_b ? b[target] : a[target]; };
    auto accumulate = [&] {
        const double logw = tinf ? (S == 0.0 ? 0.0 : kNegInf) : -t * S;
        acc[current_target_bit()].add(logw);
    };
    auto flip = [&](const free_bit& f) {
        if (f.is_b) {
            b[f.idx] ^= 1;
            for (std::int32_t j : code.rows[f.idx]) {
                S -= dist_[j][c[j]];
                c[j] ^= 1;
                S += dist_[j][c[j]];
            }
        } else {
            a[f.idx] ^= 1;
            S -= dist_[f.idx][c[f.idx]];
            c[f.idx] ^= 1;
            S += dist_[f.idx][c[f.idx]];
        }
    };

    accumulate();
    const std::uint64_t total = std::uint64_t{1} << free.size();
    for (std::uint64_t step = 1; step < total; ++step) {
        flip(free[std::countr_zero(step)]);
        if (!tinf && (step & 0xfffu) == 0) {
            // refresh the incremental sum to stop rounding drift
            S = 0;
            for (int j = 0; j < code.nc; ++j) S += dist_[j][c[j]];
        }
        accumulate();
    }
    return tuple_from_logsums(acc[0], acc[1]);
}

prob_tuple exact_oracle::ext_b(std::span<const std::uint8_t> aa,
                               std::span<const std::uint8_t> b_decided, int i) const {
    if (static_cast<int>(aa.size()) != code_->nc) throw domain_error("ext_b: |a| != nc");
    if (i < 0 || i >= code_->nb || static_cast<int>(b_decided.size()) > code_->nb)
        throw domain_error("ext_b: bad index");
    std::vector<std::optional<std::uint8_t>> bp(code_->nb), ap(code_->nc);
    for (std::size_t k = 0; k < b_decided.size(); ++k) bp[k] = b_decided[k];
    for (int j = 0; j < code_->nc; ++j) ap[j] = aa[j];
    return run_target(bp, ap, true, i);
}

prob_tuple exact_oracle::ext_a(std::span<const std::uint8_t> a_decided, int j) const {
    if (j < 0 || j >= code_->nc || static_cast<int>(a_decided.size()) > code_->nc)
        throw domain_error("ext_a: bad index");
    std::vector<std::optional<std::uint8_t>> bp(code_->nb), ap(code_->nc);
    for (std::size_t k = 0; k < a_decided.size(); ++k) ap[k] = a_decided[k];
    return run_target(bp, ap, false, j);
}

prob_tuple exact_oracle::ext_b_priors(std::span<const std::optional<std::uint8_t>> b_priors,
                                      std::span<const std::optional<std::uint8_t>> a_priors,
                                      int i) const {
    return run_target(b_priors, a_priors, true, i);
}

prob_tuple exact_oracle::ext_a_priors(std::span<const std::optional<std::uint8_t>> b_priors,
                                      std::span<const std::optional<std::uint8_t>> a_priors,
                                      int j) const {
    return run_target(b_priors, a_priors, false, j);
}

exact_oracle::tpq_result exact_oracle::tpq_run(std::span<const double> omega_a,
                                               std::span<const double> omega_b) const {
    const ldgm_code& code = *code_;
    if (static_cast<int>(omega_a.size()) != code.nc || static_cast<int>(omega_b.size()) != code.nb)
        throw domain_error("tpq_run: omega sizes must be nc and nb");
    tpq_result out;
    for (int j = 0; j < code.nc; ++j) {
        const prob_tuple ext = ext_a(out.a, j);
        out.extrinsic_entropy_sum += tuple_entropy(ext);
        out.a.push_back(omega_a[j] >= ext.p0 ? 1 : 0);
    }
    for (int i = 0; i < code.nb; ++i) {
        const prob_tuple ext = ext_b(out.a, out.b, i);
        out.extrinsic_entropy_sum += tuple_entropy(ext);
        out.b.push_back(omega_b[i] >= ext.p0 ? 1 : 0);
    }
    // u = b G + a with the scrambling sequence chosen by the a-steps
    std::vector<std::uint8_t> c = out.a;
    for (int i = 0; i < code.nb; ++i) {
        if (!out.b[i]) continue;
        for (std::int32_t j : code.rows[i]) c[j] ^= 1;
    }
    out.u.assign(code.n, 0);
    double dsum = 0;
    for (int j = 0; j < code.n; ++j) {
        out.u[j] = c[j];
        dsum += dist_[j][c[j]];
    }
    out.distortion = dsum / code.n;
    return out;
}

exact_oracle::area_report area_identity_check(const ldgm_code& code, const test_channel& ch,
                                              int samples, std::uint64_t seed) {
    if (samples < 2) throw domain_error("area_identity_check: samples >= 2");
    rng r(substream(seed, "area-identity"));
    double sum = 0, sumsq = 0;
    for (int s = 0; s < samples; ++s) {
        std::vector<source_symbol> y;
        y.reserve(code.n);
        for (int j = 0; j < code.n; ++j) y.push_back(ch.sample_source(r));
        exact_oracle oracle(code, ch, std::move(y));
        std::vector<double> wa(code.nc), wb(code.nb);
        for (auto& w : wa) w = r.uniform();
        for (auto& w : wb) w = r.uniform();
        const double lhs = oracle.tpq_run(wa, wb).extrinsic_entropy_sum;
        sum += lhs;
        sumsq += lhs * lhs;
    }
    exact_oracle::area_report rep;
    rep.samples = samples;
    rep.lhs_mean = sum / samples;
    const double var = std::max(0.0, sumsq / samples - rep.lhs_mean * rep.lhs_mean);
    rep.lhs_stderr = std::sqrt(var / samples);
    rep.rhs = code.nb + code.n * ch.cond_entropy_u_given_y();
    return rep;
}

}  // namespace ldgmq
