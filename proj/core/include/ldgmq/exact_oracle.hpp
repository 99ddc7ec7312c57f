#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ldgmq/ldgm_code.hpp"
#include "ldgmq/prob_tuple.hpp"
#include "ldgmq/source_problem.hpp"

namespace ldgmq {

/// Enumeration cap: 2^26 completions is a few desk-scale seconds.
inline constexpr int kOracleMaxBits = 26;

// Brute-force ground truth for binary (K = 1) instances: exact extrinsics of
// the decimation chain, the true probabilistic quantizer, and the finite-n
// area identity. All summation runs in log domain with running max shift, so
// large t cannot underflow.
class exact_oracle {
  public:
    exact_oracle(const ldgm_code& code, const test_channel& ch, std::vector<source_symbol> y);

    const ldgm_code& code() const { return *code_; }
    const test_channel& channel() const { return *ch_; }
    const std::vector<source_symbol>& y() const { return y_; }

    /// True extrinsic of b_i given a fixed scrambling sequence and the first
    /// `decided` decimated values of b.
    prob_tuple ext_b(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b_decided,
                     int i) const;

    /// True extrinsic of a_j given the first `decided` scrambling bits;
    /// sums over the remaining a and all b.
    prob_tuple ext_a(std::span<const std::uint8_t> a_decided, int j) const;

    // Exact extrinsic under explicit sure/unknown priors per variable
    // (nullopt = unknown); covers the loop-free BP comparison setups.
    prob_tuple ext_b_priors(std::span<const std::optional<std::uint8_t>> b_priors,
                            std::span<const std::optional<std::uint8_t>> a_priors, int i) const;
    prob_tuple ext_a_priors(std::span<const std::optional<std::uint8_t>> b_priors,
                            std::span<const std::optional<std::uint8_t>> a_priors, int j) const;

    struct tpq_result {
        std::vector<std::uint8_t> a, b;
        std::vector<std::uint32_t> u;
        double distortion = 0;
        double extrinsic_entropy_sum = 0;  // sum of H over every step's extrinsic
    };
    /// Sequential a-steps then b-steps driven by exact extrinsics; samples
    /// (b, a) proportionally to exp(-n t d(u(b,a), y)).
    tpq_result tpq_run(std::span<const double> omega_a, std::span<const double> omega_b) const;

    struct area_report {
        double lhs_mean = 0;
        double lhs_stderr = 0;
        double rhs = 0;
        int samples = 0;
    };

  private:
    struct enum_ctx;
    prob_tuple run_target(std::span<const std::optional<std::uint8_t>> b_priors,
                          std::span<const std::optional<std::uint8_t>> a_priors, bool target_is_b,
                          int target) const;

    const ldgm_code* code_;
    const test_channel* ch_;
    std::vector<source_symbol> y_;
    std::vector<std::array<double, 2>> dist_;  // d(u, y_j) per symbol
};

/// Monte-Carlo check of the path-entropy identity: the expectation of the
/// summed extrinsic entropies along a TPQ path equals nb + n H(u|y).
exact_oracle::area_report area_identity_check(const ldgm_code& code, const test_channel& ch,
                                              int samples, std::uint64_t seed);

}  // namespace ldgmq
