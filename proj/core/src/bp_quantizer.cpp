#include "ldgmq/bp_quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ldgmq/errors.hpp"
#include "ldgmq/rng.hpp"

namespace ldgmq {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double p0_from_logs(double l0, double l1) {
    if (l0 == kNegInf && l1 == kNegInf) return -1.0;  // contradiction marker
    if (l0 == kNegInf) return 0.0;
    if (l1 == kNegInf) return 1.0;
    return 1.0 / (1.0 + std::exp(l1 - l0));
}
}  // namespace

bp_quantizer::bp_quantizer(const ldgm_code& code, const test_channel& ch,
                           std::span<const source_symbol> y)
    : code_(&code), ch_(&ch), y_(y.begin(), y.end()) {
    if (static_cast<int>(y.size()) != code.n) throw domain_error("bp_quantizer: |y| != n");

    row_ptr_.assign(code.nb + 1, 0);
    for (int i = 0; i < code.nb; ++i)
        row_ptr_[i + 1] = row_ptr_[i] + static_cast<int>(code.rows[i].size());
    row_col_.resize(row_ptr_.back());
    {
        int e = 0;
        for (int i = 0; i < code.nb; ++i)
            for (std::int32_t j : code.rows[i]) row_col_[e++] = j;
    }
    col_ptr_.assign(code.nc + 1, 0);
    for (int j : row_col_) col_ptr_[j + 1] += 1;
    for (int j = 0; j < code.nc; ++j) col_ptr_[j + 1] += col_ptr_[j];
    col_row_.resize(row_col_.size());
    col_edge_.resize(row_col_.size());
    {
        std::vector<int> fill(col_ptr_.begin(), col_ptr_.end() - 1);
        int e = 0;
        for (int i = 0; i < code.nb; ++i) {
            for (std::int32_t j : code.rows[i]) {
                col_row_[fill[j]] = i;
                col_edge_[fill[j]] = e;
                ++fill[j];
                ++e;
            }
        }
    }

    m_bc_.assign(row_col_.size(), 0.5);
    m_cb_.assign(row_col_.size(), 0.5);
    rho_b_.assign(code.nb, 0.5);
    ext_p0_.assign(code.nb, 0.5);
    decimated_.assign(code.nb, 0);
    live_.resize(code.nb);
    for (int i = 0; i < code.nb; ++i) live_[i] = i;

    rho_u_.reserve(code.n);
    rho_u_phi_.resize(code.n);
    const std::uint32_t patterns = 1u << code.K;
    for (int j = 0; j < code.n; ++j) {
        rho_u_.push_back(ch.prior_from_sample(y[j]));
        rho_u_phi_[j].resize(patterns);
        for (std::uint32_t cb = 0; cb < patterns; ++cb)
            rho_u_phi_[j][cb] = rho_u_.back()(code.modulate(j, cb));
    }

    m_cu_.assign(code.nc, 0.5);
    m_uc_.assign(code.nc, 0.5);
    if (code.K == 1) {
        for (int j = 0; j < code.n; ++j) {
            const double w0 = rho_u_phi_[j][0], w1 = rho_u_phi_[j][1];
            m_uc_[j] = w0 / (w0 + w1);
        }
    }
}

prob_tuple bp_quantizer::combine_log(double l0, double l1, int node) {
    const double p0 = p0_from_logs(l0, l1);
    if (p0 >= 0.0) return {p0};
    ++contradictions_;
    if (on_contra_ == decimation_policy::contradiction_policy::abort)
        throw decimation_contradiction(node, round_);
    // majority of sure incoming messages decides; an exact tie stays unknown
    int n0 = 0, n1 = 0;
    for (int e = row_ptr_[node]; e < row_ptr_[node + 1]; ++e) {
        if (m_cb_[e] == 1.0) ++n0;
        if (m_cb_[e] == 0.0) ++n1;
    }
    if (n0 > n1) return prob_tuple::sure(0);
    if (n1 > n0) return prob_tuple::sure(1);
    return prob_tuple::unknown();
}

void bp_quantizer::symbol_factor_update() {
    const ldgm_code& code = *code_;
    // m_cu per column: scrambling bit plus the full column of m_bc
    for (int s = 0; s < code.nc; ++s) {
        double d = code.scramble[s] ? -1.0 : 1.0;
        for (int ce = col_ptr_[s]; ce < col_ptr_[s + 1]; ++ce)
            d *= 2.0 * m_bc_[col_edge_[ce]] - 1.0;
        m_cu_[s] = 0.5 * (1.0 + d);
    }
    // m_uc per column: marginalize the modulation factor over the symbol
    const std::uint32_t patterns = 1u << code.K;
    for (int j = 0; j < code.n; ++j) {
        for (int k = 0; k < code.K; ++k) {
            double w[2] = {0.0, 0.0};
            for (std::uint32_t cb = 0; cb < patterns; ++cb) {
                double p = rho_u_phi_[j][cb];
                if (p == 0.0) continue;
                for (int kk = 0; kk < code.K; ++kk) {
                    if (kk == k) continue;
                    const double pc = m_cu_[j * code.K + kk];
                    p *= (cb >> kk) & 1u ? 1.0 - pc : pc;
                }
                w[(cb >> k) & 1u] += p;
            }
            const double sum = w[0] + w[1];
            m_uc_[j * code.K + k] = sum > 0.0 ? w[0] / sum : 0.5;
        }
    }
}

void bp_quantizer::check_update() {
    const ldgm_code& code = *code_;
    for (int s = 0; s < code.nc; ++s) {
        const int lo = col_ptr_[s], hi = col_ptr_[s + 1];
        const int deg = hi - lo;
        if (deg == 0) continue;
        const double d_t = (2.0 * m_uc_[s] - 1.0) * (code.scramble[s] ? -1.0 : 1.0);
        if (deg == 1) {
            m_cb_[col_edge_[lo]] = 0.5 * (1.0 + d_t);
            continue;
        }
        scratch_.resize(2 * (deg + 1));
        double* pre = scratch_.data();
        double* suf = scratch_.data() + deg + 1;
        pre[0] = 1.0;
        for (int k = 0; k < deg; ++k) pre[k + 1] = pre[k] * (2.0 * m_bc_[col_edge_[lo + k]] - 1.0);
        suf[deg] = 1.0;
        for (int k = deg - 1; k >= 0; --k)
            suf[k] = suf[k + 1] * (2.0 * m_bc_[col_edge_[lo + k]] - 1.0);
        for (int k = 0; k < deg; ++k)
            m_cb_[col_edge_[lo + k]] = 0.5 * (1.0 + d_t * pre[k] * suf[k + 1]);
    }
}

void bp_quantizer::variable_update() {
    const ldgm_code& code = *code_;
    for (int i = 0; i < code.nb; ++i) {
        if (decimated_[i]) continue;
        const int lo = row_ptr_[i], hi = row_ptr_[i + 1];
        const int deg = hi - lo;
        scratch_.resize(4 * (deg + 1));
        double* pre0 = scratch_.data();
        double* pre1 = pre0 + (deg + 1);
        double* suf0 = pre1 + (deg + 1);
        double* suf1 = suf0 + (deg + 1);
        pre0[0] = pre1[0] = 0.0;
        for (int k = 0; k < deg; ++k) {
            const double p = m_cb_[lo + k];
            pre0[k + 1] = pre0[k] + std::log(p);
            pre1[k + 1] = pre1[k] + std::log(1.0 - p);
        }
        suf0[deg] = suf1[deg] = 0.0;
        for (int k = deg - 1; k >= 0; --k) {
            const double p = m_cb_[lo + k];
            suf0[k] = suf0[k + 1] + std::log(p);
            suf1[k] = suf1[k + 1] + std::log(1.0 - p);
        }
        for (int k = 0; k < deg; ++k)
            m_bc_[lo + k] = combine_log(pre0[k] + suf0[k + 1], pre1[k] + suf1[k + 1], i).p0;
        ext_p0_[i] = combine_log(pre0[deg], pre1[deg], i).p0;
    }
}

void bp_quantizer::iteration() {
    ++round_;
    if (code_->K > 1) symbol_factor_update();
    check_update();
    variable_update();
}

double bp_quantizer::mean_extrinsic_mi() const {
    if (live_.empty()) return 0.0;
    double s = 0;
    for (int i : live_) s += 1.0 - binary_entropy(ext_p0_[i]);
    return s / live_.size();
}

void bp_quantizer::init_messages_sure(std::span<const std::uint8_t> b_ref) {
    if (static_cast<int>(b_ref.size()) != code_->nb)
        throw domain_error("init_messages_sure: |b_ref| != nb");
    for (int i = 0; i < code_->nb; ++i) {
        const double v = decimated_[i] ? rho_b_[i] : (b_ref[i] ? 0.0 : 1.0);
        for (int e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e) m_bc_[e] = v;
    }
}

void bp_quantizer::decimate(int i, int value) {
    if (i < 0 || i >= code_->nb || decimated_[i]) throw domain_error("decimate: bad index");
    decimated_[i] = 1;
    rho_b_[i] = value == 0 ? 1.0 : 0.0;
    ext_p0_[i] = rho_b_[i];
    for (int e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e) m_bc_[e] = rho_b_[i];
    live_.erase(std::lower_bound(live_.begin(), live_.end(), i));
}

std::pair<int, int> bp_quantizer::decimate_pd(double omega) {
    if (live_.empty()) throw domain_error("decimate_pd: nothing left");
    const int i = live_.front();
    const int value = omega >= ext_p0_[i] ? 1 : 0;
    decimate(i, value);
    return {i, value};
}

std::pair<int, int> bp_quantizer::decimate_gd() {
    if (live_.empty()) throw domain_error("decimate_gd: nothing left");
    int best = live_.front();
    double best_cert = -1.0;
    for (int i : live_) {
        const double cert = std::max(ext_p0_[i], 1.0 - ext_p0_[i]);
        if (cert > best_cert) {
            best_cert = cert;
            best = i;
        }
    }
    const int value = ext_p0_[best] >= 0.5 ? 0 : 1;
    decimate(best, value);
    return {best, value};
}

quantize_result bp_quantizer::run(const decimation_policy& policy, std::uint64_t seed) {
    const ldgm_code& code = *code_;
    on_contra_ = policy.on_contradiction;
    quantize_result out;
    rng r(substream(seed, "quantize"));
    std::vector<double> omega_b(code.nb);
    for (auto& w : omega_b) w = r.uniform();

    auto decimate_one = [&] {
        if (policy.decimator == decimator_kind::pd) {
            const int i = live_.front();
            decimate_pd(omega_b[i]);
        } else {
            decimate_gd();
        }
    };

    if (policy.reinit_per_step) {
        // analysis-parity mode: every decimation gets a fresh BP pass
        while (!live_.empty()) {
            for (int i = 0; i < code.nb; ++i) {
                const double v = decimated_[i] ? rho_b_[i] : 0.5;
                for (int e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e) m_bc_[e] = v;
            }
            for (int l = 0; l < policy.max_iterations; ++l) iteration();
            decimate_one();
            out.trace.push_back({round_, mean_extrinsic_mi(),
                                 code.nb - static_cast<int>(live_.size()), contradictions_});
        }
        out.iterations = round_;
    } else {
        const double pace = policy.pace > 0
                                ? policy.pace
                                : 1.0 / std::max(1, policy.max_iterations - policy.warmup);
        const int per_round = std::max(1, static_cast<int>(std::ceil(pace * code.nb)));
        for (int it = 1; it <= policy.max_iterations && !live_.empty(); ++it) {
            iteration();
            if (it > policy.warmup) {
                if (policy.decimator == decimator_kind::gd) {
                    // extrinsics are fixed within a round, so the repeated
                    // argmax equals the top-k by (certainty, lowest index)
                    const int k = std::min<int>(per_round, static_cast<int>(live_.size()));
                    std::vector<std::pair<double, int>> order;
                    order.reserve(live_.size());
                    for (int i : live_)
                        order.push_back({-std::max(ext_p0_[i], 1.0 - ext_p0_[i]), i});
                    std::nth_element(order.begin(), order.begin() + (k - 1), order.end());
                    std::sort(order.begin(), order.begin() + k);
                    for (int s = 0; s < k; ++s) {
                        const int i = order[s].second;
                        decimate(i, ext_p0_[i] >= 0.5 ? 0 : 1);
                    }
                } else {
                    for (int s = 0; s < per_round && !live_.empty(); ++s) decimate_one();
                }
            }
            out.trace.push_back({round_, mean_extrinsic_mi(),
                                 code.nb - static_cast<int>(live_.size()), contradictions_});
        }
        out.iterations = round_;
        if (!live_.empty()) {
            out.budget_exceeded = true;
            while (!live_.empty()) {
                const int i = live_.front();
                decimate(i, ext_p0_[i] >= 0.5 ? 0 : 1);
            }
        }
    }

    out.b.resize(code.nb);
    for (int i = 0; i < code.nb; ++i) out.b[i] = rho_b_[i] == 1.0 ? 0 : 1;
    out.u = encode(code, out.b);
    double dsum = 0;
    for (int j = 0; j < code.n; ++j) dsum += ch_->problem().distortion(out.u[j], y_[j]);
    out.distortion = dsum / code.n;
    out.contradictions = contradictions_;
    return out;
}

quantize_result quantize(const ldgm_code& code, const test_channel& ch,
                         std::span<const source_symbol> y, const decimation_policy& policy,
                         std::uint64_t seed) {
    bp_quantizer q(code, ch, y);
    return q.run(policy, seed);
}

std::vector<prob_tuple> ext_a_upper(const ldgm_code& code, const test_channel& ch,
                                    std::span<const source_symbol> y,
                                    std::span<const std::uint8_t> b_ref,
                                    std::span<const std::optional<std::uint8_t>> a_priors, int L) {
    if (code.K != 1) throw domain_error("ext_a_upper: binary codes only");
    if (static_cast<int>(b_ref.size()) != code.nb || static_cast<int>(a_priors.size()) != code.nc ||
        static_cast<int>(y.size()) != code.n)
        throw domain_error("ext_a_upper: size mismatch");

    std::vector<double> du(code.nc);  // delta of the u prior per column
    for (int j = 0; j < code.n; ++j) {
        const group_tuple pr = ch.prior_from_sample(y[j]);
        du[j] = pr(0) - pr(1);
    }
    std::vector<double> da(code.nc);  // delta of the a prior
    for (int j = 0; j < code.nc; ++j) da[j] = a_priors[j] ? (*a_priors[j] ? -1.0 : 1.0) : 0.0;

    // messages live per (row, slot); deltas on the check side, log pairs on
    // the variable side
    std::vector<std::vector<double>> m_bc(code.nb), m_cb(code.nb);
    for (int i = 0; i < code.nb; ++i) {
        m_bc[i].assign(code.rows[i].size(), b_ref[i] ? -1.0 : 1.0);
        m_cb[i].assign(code.rows[i].size(), 0.0);
    }
    std::vector<std::vector<std::pair<int, int>>> col_adj(code.nc);
    for (int i = 0; i < code.nb; ++i)
        for (std::size_t s = 0; s < code.rows[i].size(); ++s)
            col_adj[code.rows[i][s]].push_back({i, static_cast<int>(s)});

    for (int l = 0; l < L; ++l) {
        for (int j = 0; j < code.nc; ++j) {
            const auto& adj = col_adj[j];
            const int deg = static_cast<int>(adj.size());
            std::vector<double> pre(deg + 1, 1.0), suf(deg + 1, 1.0);
            for (int k = 0; k < deg; ++k) pre[k + 1] = pre[k] * m_bc[adj[k].first][adj[k].second];
            for (int k = deg - 1; k >= 0; --k)
                suf[k] = suf[k + 1] * m_bc[adj[k].first][adj[k].second];
            const double dt = du[j] * da[j];
            for (int k = 0; k < deg; ++k)
                m_cb[adj[k].first][adj[k].second] = dt * pre[k] * suf[k + 1];
        }
        for (int i = 0; i < code.nb; ++i) {
            const int deg = static_cast<int>(code.rows[i].size());
            std::vector<double> l0(deg + 1, 0.0), l1(deg + 1, 0.0), r0(deg + 1, 0.0),
                r1(deg + 1, 0.0);
            for (int k = 0; k < deg; ++k) {
                const double p0 = 0.5 * (1.0 + m_cb[i][k]);
                l0[k + 1] = l0[k] + std::log(p0);
                l1[k + 1] = l1[k] + std::log(1.0 - p0);
            }
            for (int k = deg - 1; k >= 0; --k) {
                const double p0 = 0.5 * (1.0 + m_cb[i][k]);
                r0[k] = r0[k + 1] + std::log(p0);
                r1[k] = r1[k + 1] + std::log(1.0 - p0);
            }
            for (int k = 0; k < deg; ++k) {
                const double p = p0_from_logs(l0[k] + r0[k + 1], l1[k] + r1[k + 1]);
                if (p < 0.0) throw decimation_contradiction(i, l + 1);
                m_bc[i][k] = 2.0 * p - 1.0;
            }
        }
    }

    std::vector<prob_tuple> out(code.nc);
    for (int j = 0; j < code.nc; ++j) {
        double d = du[j];
        for (auto [i, s] : col_adj[j]) d *= m_bc[i][s];
        out[j] = prob_tuple::from_delta(d);
    }
    return out;
}

}  // namespace ldgmq
