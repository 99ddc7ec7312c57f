#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "ldgmq/group.hpp"

namespace ldgmq {

// Binary probability tuple, stored as p0 with p1 = 1 - p0 implied. This is
// the BP message currency for binary codes; the general group_tuple below is
// used for symbol priors and the enumeration oracle.
struct prob_tuple {
    double p0 = 0.5;

    double p1() const { return 1.0 - p0; }
    double operator()(int b) const { return b == 0 ? p0 : 1.0 - p0; }
    double llr() const { return std::log(p0) - std::log1p(-p0); }
    /// Difference-domain value p0 - p1; check-node combining multiplies these.
    double delta() const { return 2.0 * p0 - 1.0; }

    static prob_tuple sure(int b) { return {b == 0 ? 1.0 : 0.0}; }
    static prob_tuple unknown() { return {0.5}; }
    static prob_tuple from_delta(double d) { return {0.5 * (1.0 + d)}; }
    static prob_tuple from_weights(double q0, double q1);

    bool is_sure() const { return p0 == 0.0 || p0 == 1.0; }
    bool is_unknown() const { return p0 == 0.5; }
};

prob_tuple vn_combine(prob_tuple a, prob_tuple b);  // may throw contradiction_error
inline prob_tuple cn_combine(prob_tuple a, prob_tuple b) {
    return prob_tuple::from_delta(a.delta() * b.delta());
}

double binary_entropy(double p);  // H2, bits
inline double tuple_entropy(prob_tuple t) { return binary_entropy(t.p0); }
inline double tuple_mi(prob_tuple t) { return 1.0 - binary_entropy(t.p0); }

// Normalized probability vector over a finite abelian group.
class group_tuple {
  public:
    group_tuple() = default;
    group_tuple(group_descriptor g, std::vector<double> weights);

    static group_tuple uniform(const group_descriptor& g);
    static group_tuple sure(const group_descriptor& g, std::uint64_t u);
    /// Build from unnormalized log-weights via max shift; robust for large t.
    static group_tuple from_log_weights(const group_descriptor& g, std::span<const double> logw);

    const group_descriptor& group() const { return group_; }
    std::uint64_t size() const { return group_.order(); }
    double operator()(std::uint64_t u) const { return p_[u]; }
    const std::vector<double>& probs() const { return p_; }

    double entropy() const;  // bits
    double mi() const { return std::log2(static_cast<double>(size())) - entropy(); }

    prob_tuple as_binary() const;
    static group_tuple from_binary(prob_tuple t);

  private:
    friend group_tuple vn_combine(const group_tuple&, const group_tuple&);
    friend group_tuple cn_combine(const group_tuple&, const group_tuple&);
    friend group_tuple cn_subtract(const group_tuple&, const group_tuple&);
    void normalize();  // throws contradiction_error on all-zero

    group_descriptor group_;
    std::vector<double> p_;
};

group_tuple vn_combine(const group_tuple& a, const group_tuple& b);
group_tuple cn_combine(const group_tuple& a, const group_tuple& b);   // oplus
group_tuple cn_subtract(const group_tuple& a, const group_tuple& b);  // ominus

/// Joint entropy (bits) of the bit subset `mask` of a tuple over Z_2^K.
double entropy_function(const group_tuple& mu, std::uint32_t mask);
/// Mean of entropy_function over all subsets of size k.
double avg_entropy_function(const group_tuple& mu, unsigned k);

// An affine subspace (coset of a subgroup) of a product group, represented
// by an offset and subgroup generators. Elements are enumerated exactly;
// this backs the nu operation and the desk-scale oracles.
class affine_subspace {
  public:
    affine_subspace(group_descriptor ambient, std::uint64_t offset,
                    const std::vector<std::uint64_t>& generators);

    const group_descriptor& ambient() const { return ambient_; }
    const std::vector<std::uint64_t>& elements() const { return elements_; }
    std::uint64_t cardinality() const { return elements_.size(); }
    bool contains(std::uint64_t e) const;

    static affine_subspace repetition3(const group_descriptor& g);   // {(u,u,u)}
    static affine_subspace parity3(const group_descriptor& g);       // {(u1,u2,u1+u2)}

  private:
    group_descriptor ambient_;
    std::vector<std::uint64_t> elements_;  // sorted
};

/// nu(C; lambdas excluding i): marginal of component i under the product of
/// the other components' tuples, restricted to C. Explicit enumeration.
group_tuple nu_combine(const affine_subspace& c, std::size_t i, std::span<const group_tuple> lambdas);

}  // namespace ldgmq
