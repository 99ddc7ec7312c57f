#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ldgmq/ldgm_code.hpp"
#include "ldgmq/prob_tuple.hpp"
#include "ldgmq/source_problem.hpp"

namespace ldgmq {

enum class decimator_kind { pd, gd };

struct decimation_policy {
    decimator_kind decimator = decimator_kind::gd;
    int warmup = 5;          // BP iterations before any decimation
    int max_iterations = 60;  // L; the remainder is force-decimated at L
    double pace = 0;          // fraction of nb per iteration; 0 = 1/(L - warmup)
    bool reinit_per_step = false;  // analysis-parity mode: fresh messages per b-step
    // Erasure problems can hit contradictory sure messages after a wrong
    // guess. abort raises decimation_contradiction; resolve keeps the
    // majority side, counts the event, and continues.
    enum class contradiction_policy { abort, resolve };
    contradiction_policy on_contradiction = contradiction_policy::abort;
};

struct trace_row {
    int iteration = 0;
    double mean_ext_mi = 0;  // over undecimated bits
    int decimated = 0;       // cumulative
    int contradictions = 0;  // cumulative
};

struct quantize_result {
    std::vector<std::uint8_t> b;
    std::vector<std::uint32_t> u;
    double distortion = 0;
    int iterations = 0;
    int contradictions = 0;
    bool budget_exceeded = false;  // remainder force-decimated at L
    std::vector<trace_row> trace;
    std::string recovery = "none";
};

// Message-passing state over one (code, channel, y) instance. Messages are
// binary tuples stored per generator-matrix edge; 2^K-ary codes additionally
// carry per-bit messages through each symbol's modulation factor.
class bp_quantizer {
  public:
    bp_quantizer(const ldgm_code& code, const test_channel& ch, std::span<const source_symbol> y);

    /// One flooding sweep: (K>1: symbol-factor messages), check updates,
    /// then variable updates and extrinsics.
    void iteration();

    const std::vector<double>& extrinsics_p0() const { return ext_p0_; }
    prob_tuple extrinsic(int i) const { return {ext_p0_[i]}; }
    bool decimated(int i) const { return decimated_[i] != 0; }
    int undecimated_count() const { return static_cast<int>(live_.size()); }
    int contradictions() const { return contradictions_; }
    double mean_extrinsic_mi() const;

    /// Hard-decision message initialization from a reference word; the
    /// upper-bound counterpart of the all-unknown start.
    void init_messages_sure(std::span<const std::uint8_t> b_ref);

    /// Probabilistic decimator: next sequential undecimated index, value by
    /// thresholding omega against the extrinsic.
    std::pair<int, int> decimate_pd(double omega);
    /// Greedy decimator: the most certain undecimated bit; ties break to the
    /// lowest index, then to value 0.
    std::pair<int, int> decimate_gd();
    void decimate(int i, int value);

    /// Messages from a decimated b-node toward its checks, sure extrinsics
    /// everywhere; used by tests to watch erasure closure.
    std::vector<double> messages_bc_p0() const { return m_bc_; }
    std::vector<double> messages_uc_p0() const { return m_uc_; }

    void set_contradiction_policy(decimation_policy::contradiction_policy p) { on_contra_ = p; }

    quantize_result run(const decimation_policy& policy, std::uint64_t seed);

  private:
    void check_update();
    void variable_update();
    void symbol_factor_update();  // K > 1: m_cu then m_uc
    prob_tuple combine_log(double l0, double l1, int node);

    const ldgm_code* code_;
    const test_channel* ch_;
    std::vector<source_symbol> y_;
    decimation_policy::contradiction_policy on_contra_ = decimation_policy::contradiction_policy::abort;
    int round_ = 0;

    // edge id = position in row-major CSR; col view holds edge ids
    std::vector<int> row_ptr_, row_col_, col_ptr_, col_row_, col_edge_;
    std::vector<double> m_bc_, m_cb_;    // per edge, p0
    std::vector<double> m_cu_, m_uc_;    // per column (K > 1), p0
    std::vector<double> rho_b_;          // per b-node prior, p0
    std::vector<group_tuple> rho_u_;     // per symbol prior over G
    std::vector<std::vector<double>> rho_u_phi_;  // composed with phi_j, indexed by c bits
    std::vector<double> ext_p0_;
    std::vector<std::uint8_t> decimated_;
    std::vector<int> live_;  // sorted undecimated indices
    int contradictions_ = 0;
    std::vector<double> scratch_;
};

/// End-to-end quantization of one source block (Alg. 1 / Alg. 3 shape).
quantize_result quantize(const ldgm_code& code, const test_channel& ch,
                         std::span<const source_symbol> y, const decimation_policy& policy,
                         std::uint64_t seed);

/// Analysis-only a-step extrinsics: hard-decision initialization from a
/// reference b, L sweeps without b priors, then the a-side extrinsic at
/// every column. a_priors entries: nullopt = unknown, else the decided bit.
std::vector<prob_tuple> ext_a_upper(const ldgm_code& code, const test_channel& ch,
                                    std::span<const source_symbol> y,
                                    std::span<const std::uint8_t> b_ref,
                                    std::span<const std::optional<std::uint8_t>> a_priors, int L);

/// Extension point for the reconstruction-prior adjustment step; the
/// algorithm referenced for it is out of scope, so this is the identity.
template <typename State>
State& recovery_hook(State& state) {
    return state;
}

}  // namespace ldgmq
