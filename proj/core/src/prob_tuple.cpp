#include "ldgmq/prob_tuple.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace ldgmq {

double binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

prob_tuple prob_tuple::from_weights(double q0, double q1) {
    if (q0 < 0.0 || q1 < 0.0) throw domain_error("negative tuple weight");
    const double s = q0 + q1;
    if (s == 0.0) throw contradiction_error("all-zero binary tuple");
    return {q0 / s};
}

prob_tuple vn_combine(prob_tuple a, prob_tuple b) {
    return prob_tuple::from_weights(a.p0 * b.p0, a.p1() * b.p1());
}

group_tuple::group_tuple(group_descriptor g, std::vector<double> weights)
    : group_(std::move(g)), p_(std::move(weights)) {
    if (p_.size() != group_.order()) throw domain_error("tuple size does not match group order");
    for (double v : p_)
        if (v < 0.0 || !std::isfinite(v)) throw domain_error("invalid tuple weight");
    normalize();
}

void group_tuple::normalize() {
    double mx = 0.0;
    for (double v : p_) mx = std::max(mx, v);
    if (mx == 0.0) throw contradiction_error("all-zero group tuple");
    // Max shift keeps long odot chains away from underflow before the sum.
    double sum = 0.0;
    for (double& v : p_) {
        v /= mx;
        sum += v;
    }
    for (double& v : p_) v /= sum;
}

group_tuple group_tuple::uniform(const group_descriptor& g) {
    return group_tuple(g, std::vector<double>(g.order(), 1.0));
}

group_tuple group_tuple::sure(const group_descriptor& g, std::uint64_t u) {
    std::vector<double> w(g.order(), 0.0);
    w.at(u) = 1.0;
    return group_tuple(g, std::move(w));
}

group_tuple group_tuple::from_log_weights(const group_descriptor& g, std::span<const double> logw) {
    if (logw.size() != g.order()) throw domain_error("log-weight size mismatch");
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : logw) mx = std::max(mx, v);
    if (!(mx > -std::numeric_limits<double>::infinity()))
        throw contradiction_error("all-zero group tuple (log domain)");
    std::vector<double> w(logw.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(logw[i] - mx);
    return group_tuple(g, std::move(w));
}

double group_tuple::entropy() const {
    double h = 0.0;
    for (double v : p_)
        if (v > 0.0) h -= v * std::log2(v);
    return h;
}

prob_tuple group_tuple::as_binary() const {
    if (group_.order() != 2) throw domain_error("as_binary on non-binary tuple");
    return {p_[0]};
}

group_tuple group_tuple::from_binary(prob_tuple t) {
    return group_tuple(group_descriptor::zm(2), {t.p0, t.p1()});
}

group_tuple vn_combine(const group_tuple& a, const group_tuple& b) {
    if (a.group() != b.group()) throw domain_error("vn_combine: group mismatch");
    group_tuple out = a;
    for (std::size_t u = 0; u < out.p_.size(); ++u) out.p_[u] *= b.p_[u];
    out.normalize();
    return out;
}

group_tuple cn_combine(const group_tuple& a, const group_tuple& b) {
    if (a.group() != b.group()) throw domain_error("cn_combine: group mismatch");
    const group_descriptor& g = a.group();
    group_tuple out = a;
    std::fill(out.p_.begin(), out.p_.end(), 0.0);
    for (std::uint64_t u1 = 0; u1 < g.order(); ++u1) {
        if (a.p_[u1] == 0.0) continue;
        for (std::uint64_t u2 = 0; u2 < g.order(); ++u2)
            out.p_[g.add(u1, u2)] += a.p_[u1] * b.p_[u2];
    }
    out.normalize();
    return out;
}

group_tuple cn_subtract(const group_tuple& a, const group_tuple& b) {
    if (a.group() != b.group()) throw domain_error("cn_subtract: group mismatch");
    const group_descriptor& g = a.group();
    group_tuple out = a;
    std::fill(out.p_.begin(), out.p_.end(), 0.0);
    for (std::uint64_t u1 = 0; u1 < g.order(); ++u1) {
        if (a.p_[u1] == 0.0) continue;
        for (std::uint64_t u2 = 0; u2 < g.order(); ++u2)
            out.p_[g.sub(u1, u2)] += a.p_[u1] * b.p_[u2];
    }
    out.normalize();
    return out;
}

double entropy_function(const group_tuple& mu, std::uint32_t mask) {
    const group_descriptor& g = mu.group();
    if (g.kind() != group_kind::z2k) throw domain_error("entropy_function needs a Z_2^K tuple");
    if (mask >= g.order()) throw domain_error("entropy_function: subset out of range");
    const unsigned nsel = std::popcount(mask);
    std::vector<double> marg(std::size_t{1} << nsel, 0.0);
    for (std::uint64_t c = 0; c < g.order(); ++c) {
        // compress the selected bits of c into a bucket index
        std::uint64_t idx = 0;
        unsigned out = 0;
        for (unsigned k = 0; k < g.bits(); ++k) {
            if (mask & (1u << k)) {
                idx |= ((c >> k) & 1u) << out;
                ++out;
            }
        }
        marg[idx] += mu(c);
    }
    double h = 0.0;
    for (double v : marg)
        if (v > 0.0) h -= v * std::log2(v);
    return h;
}

double avg_entropy_function(const group_tuple& mu, unsigned k) {
    const group_descriptor& g = mu.group();
    if (g.kind() != group_kind::z2k) throw domain_error("avg_entropy_function needs a Z_2^K tuple");
    const unsigned kk = g.bits();
    if (k > kk) throw domain_error("avg_entropy_function: k out of range");
    if (k == 0) return 0.0;
    double total = 0.0;
    std::uint64_t count = 0;
    for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << kk); ++mask) {
        if (static_cast<unsigned>(std::popcount(mask)) != k) continue;
        total += entropy_function(mu, mask);
        ++count;
    }
    return total / static_cast<double>(count);
}

affine_subspace::affine_subspace(group_descriptor ambient, std::uint64_t offset,
                                 const std::vector<std::uint64_t>& generators)
    : ambient_(std::move(ambient)) {
    // BFS closure of the generated subgroup, then shift by the offset.
    std::vector<std::uint64_t> sub = {0};
    std::vector<std::uint64_t> frontier = {0};
    auto known = [&](std::uint64_t e) {
        return std::binary_search(sub.begin(), sub.end(), e);
    };
    while (!frontier.empty()) {
        std::vector<std::uint64_t> next;
        for (std::uint64_t e : frontier) {
            for (std::uint64_t gen : generators) {
                const std::uint64_t f = ambient_.add(e, gen);
                if (!known(f)) {
                    sub.push_back(f);
                    std::sort(sub.begin(), sub.end());
                    next.push_back(f);
                }
            }
        }
        frontier = std::move(next);
        if (sub.size() > (std::uint64_t{1} << 26)) throw size_exceeded("affine subspace too large");
    }
    elements_.reserve(sub.size());
    for (std::uint64_t e : sub) elements_.push_back(ambient_.add(offset, e));
    std::sort(elements_.begin(), elements_.end());
}

bool affine_subspace::contains(std::uint64_t e) const {
    return std::binary_search(elements_.begin(), elements_.end(), e);
}

affine_subspace affine_subspace::repetition3(const group_descriptor& g) {
    group_descriptor amb = group_descriptor::product({g, g, g});
    std::vector<std::uint64_t> gens;
    // cyclic generator (1,1,1) spans the diagonal for Z_M; for products use
    // each factor generator of the diagonal
    if (g.kind() == group_kind::z2k) {
        for (unsigned k = 0; k < g.bits(); ++k) {
            const std::uint64_t e = std::uint64_t{1} << k;
            gens.push_back(amb.pack({e, e, e}));
        }
    } else {
        gens.push_back(amb.pack({1, 1, 1}));
    }
    return affine_subspace(amb, 0, gens);
}

affine_subspace affine_subspace::parity3(const group_descriptor& g) {
    group_descriptor amb = group_descriptor::product({g, g, g});
    std::vector<std::uint64_t> gens;
    auto push = [&](std::uint64_t e) {
        gens.push_back(amb.pack({e, 0, e}));
        gens.push_back(amb.pack({0, e, e}));
    };
    if (g.kind() == group_kind::z2k) {
        for (unsigned k = 0; k < g.bits(); ++k) push(std::uint64_t{1} << k);
    } else {
        push(1);
    }
    return affine_subspace(amb, 0, gens);
}

group_tuple nu_combine(const affine_subspace& c, std::size_t i, std::span<const group_tuple> lambdas) {
    const group_descriptor& amb = c.ambient();
    if (amb.kind() != group_kind::product) throw domain_error("nu_combine: ambient must be a product");
    const auto& factors = amb.factors();
    if (i >= factors.size() || lambdas.size() != factors.size() - 1)
        throw domain_error("nu_combine: wrong tuple count");
    for (std::size_t j = 0, l = 0; j < factors.size(); ++j) {
        if (j == i) continue;
        if (lambdas[l++].group() != factors[j]) throw domain_error("nu_combine: factor group mismatch");
    }
    if (c.cardinality() == 0) throw domain_error("nu_combine: empty subspace");

    std::vector<double> w(factors[i].order(), 0.0);
    for (std::uint64_t e : c.elements()) {
        const auto parts = amb.unpack(e);
        double prod = 1.0;
        for (std::size_t j = 0, l = 0; j < factors.size(); ++j) {
            if (j == i) continue;
            prod *= lambdas[l++](parts[j]);
        }
        w[parts[i]] += prod;
    }
    return group_tuple(factors[i], std::move(w));  // normalize throws on all-zero
}

}  // namespace ldgmq
