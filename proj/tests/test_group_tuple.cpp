#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "ldgmq/errors.hpp"
#include "ldgmq/prob_tuple.hpp"
#include "ldgmq/rng.hpp"

using namespace ldgmq;

namespace {

group_tuple random_tuple(const group_descriptor& g, rng& r) {
    std::vector<double> w(g.order());
    for (double& v : w) v = r.uniform() + 1e-3;
    return group_tuple(g, std::move(w));
}

double max_abs_diff(const group_tuple& a, const group_tuple& b) {
    double m = 0;
    for (std::uint64_t u = 0; u < a.size(); ++u) m = std::max(m, std::abs(a(u) - b(u)));
    return m;
}

}  // namespace

TEST_CASE("group element arithmetic") {
    const auto z6 = group_descriptor::zm(6);
    CHECK(z6.add(4, 5) == 3);
    CHECK(z6.sub(1, 5) == 2);
    CHECK(z6.neg(0) == 0);

    const auto z2k = group_descriptor::z2k(3);
    CHECK(z2k.add(0b101, 0b110) == 0b011);
    CHECK(z2k.sub(0b101, 0b101) == 0);

    const auto prod = group_descriptor::product({z6, z2k});
    const auto e1 = prod.pack({4, 0b101});
    const auto e2 = prod.pack({5, 0b110});
    CHECK(prod.unpack(prod.add(e1, e2)) == std::vector<std::uint64_t>{3, 0b011});
    CHECK(prod.add(e1, prod.neg(e1)) == 0);
}

TEST_CASE("vn_combine basics") {
    const auto z2 = group_descriptor::zm(2);
    const group_tuple star = group_tuple::uniform(z2);
    const group_tuple mu(z2, {0.3, 0.7});

    // identity case
    CHECK(max_abs_diff(vn_combine(star, mu), mu) < 1e-15);

    // direct normalization 0.64 / 0.04
    const group_tuple p(z2, {0.8, 0.2});
    const group_tuple q = vn_combine(p, p);
    CHECK(q(0) == doctest::Approx(16.0 / 17.0).epsilon(1e-12));
    CHECK(q(1) == doctest::Approx(1.0 / 17.0).epsilon(1e-12));

    // disjoint sure supports
    CHECK_THROWS_AS(vn_combine(group_tuple::sure(z2, 0), group_tuple::sure(z2, 1)),
                    contradiction_error);
}

TEST_CASE("cn_combine basics") {
    const auto z6 = group_descriptor::zm(6);
    // sure tuples add their labels
    CHECK(cn_combine(group_tuple::sure(z6, 4), group_tuple::sure(z6, 5))(3) == 1.0);
    // uniform absorbs
    rng r(7);
    const group_tuple mu = random_tuple(z6, r);
    CHECK(max_abs_diff(cn_combine(group_tuple::uniform(z6), mu), group_tuple::uniform(z6)) <
          1e-15);
    // binary numbers
    const auto z2 = group_descriptor::zm(2);
    const group_tuple p(z2, {0.9, 0.1});
    const group_tuple q = cn_combine(p, p);
    CHECK(q(0) == doctest::Approx(0.82).epsilon(1e-12));
    CHECK(q(1) == doctest::Approx(0.18).epsilon(1e-12));
    // subtraction inverts the label shift
    const group_tuple shifted = cn_combine(mu, group_tuple::sure(z6, 2));
    CHECK(max_abs_diff(cn_subtract(shifted, group_tuple::sure(z6, 2)), mu) < 1e-15);
}

TEST_CASE("vn and cn are associative and commutative") {
    for (auto g : {group_descriptor::zm(2), group_descriptor::zm(5), group_descriptor::z2k(3)}) {
        rng r(11 + g.order());
        for (int rep = 0; rep < 50; ++rep) {
            const group_tuple a = random_tuple(g, r), b = random_tuple(g, r),
                              c = random_tuple(g, r);
            CHECK(max_abs_diff(vn_combine(a, b), vn_combine(b, a)) < 1e-12);
            CHECK(max_abs_diff(cn_combine(a, b), cn_combine(b, a)) < 1e-12);
            CHECK(max_abs_diff(vn_combine(vn_combine(a, b), c), vn_combine(a, vn_combine(b, c))) <
                  1e-12);
            CHECK(max_abs_diff(cn_combine(cn_combine(a, b), c), cn_combine(a, cn_combine(b, c))) <
                  1e-12);
        }
    }
}

TEST_CASE("nu_combine reproduces vn and cn") {
    for (auto g : {group_descriptor::zm(2), group_descriptor::zm(4), group_descriptor::z2k(2)}) {
        rng r(23);
        const affine_subspace rep = affine_subspace::repetition3(g);
        const affine_subspace par = affine_subspace::parity3(g);
        CHECK(rep.cardinality() == g.order());
        CHECK(par.cardinality() == g.order() * g.order());
        for (int t = 0; t < 20; ++t) {
            const group_tuple a = random_tuple(g, r), b = random_tuple(g, r);
            const std::vector<group_tuple> in = {a, b};
            CHECK(max_abs_diff(nu_combine(rep, 2, in), vn_combine(a, b)) < 1e-14);
            CHECK(max_abs_diff(nu_combine(par, 2, in), cn_combine(a, b)) < 1e-14);
        }
    }
}

TEST_CASE("nu_combine matches an independent enumeration on a random subspace of Z2^5") {
    const auto z2 = group_descriptor::zm(2);
    const auto amb = group_descriptor::product({z2, z2, z2, z2, z2});
    rng r(101);
    for (int rep = 0; rep < 20; ++rep) {
        // two random independent generators over the 5 bits, random offset
        std::vector<std::uint64_t> gens;
        while (gens.size() < 2) {
            std::vector<std::uint64_t> parts(5);
            for (auto& p : parts) p = r.bounded(2);
            const std::uint64_t e = amb.pack(parts);
            if (e == 0) continue;
            if (gens.size() == 1 && (e == gens[0] || e == 0)) continue;
            gens.push_back(e);
        }
        std::vector<std::uint64_t> off_parts(5);
        for (auto& p : off_parts) p = r.bounded(2);
        const affine_subspace c(amb, amb.pack(off_parts), gens);

        std::vector<group_tuple> lam;
        for (int i = 0; i < 4; ++i) lam.push_back(random_tuple(z2, r));
        const std::size_t target = 3;
        const group_tuple nu = nu_combine(c, target, lam);

        // independent brute-force sum over the stored element list
        double w[2] = {0, 0};
        for (std::uint64_t e : c.elements()) {
            const auto parts = amb.unpack(e);
            double prod = 1;
            std::size_t li = 0;
            for (std::size_t j = 0; j < 5; ++j) {
                if (j == target) continue;
                prod *= lam[li++](parts[j]);
            }
            w[parts[target]] += prod;
        }
        const double total = w[0] + w[1];
        CHECK(nu(0) == doctest::Approx(w[0] / total).epsilon(1e-12));
    }
}

TEST_CASE("entropy and mutual information of tuples") {
    const auto z2 = group_descriptor::zm(2);
    CHECK(group_tuple::uniform(z2).entropy() == doctest::Approx(1.0));
    CHECK(group_tuple::uniform(z2).mi() == doctest::Approx(0.0));
    const auto z8 = group_descriptor::zm(8);
    CHECK(group_tuple::sure(z8, 5).entropy() == 0.0);
    CHECK(group_tuple::sure(z8, 5).mi() == doctest::Approx(3.0));
    // frozen against a direct H2 evaluation
    CHECK(group_tuple(z2, {0.11, 0.89}).entropy() ==
          doctest::Approx(0.4999159582).epsilon(1e-9));
}

TEST_CASE("entropy functions over Z2^K") {
    const auto z22 = group_descriptor::z2k(2);
    const group_tuple uni = group_tuple::uniform(z22);
    CHECK(avg_entropy_function(uni, 1) == doctest::Approx(1.0));
    CHECK(avg_entropy_function(uni, 2) == doctest::Approx(2.0));
    CHECK(avg_entropy_function(uni, 0) == 0.0);

    const group_tuple sure = group_tuple::sure(z22, 0b10);
    for (unsigned k = 0; k <= 2; ++k) CHECK(avg_entropy_function(sure, k) == doctest::Approx(0.0));

    // uniform on the affine subspace {00, 11}
    const group_tuple sub(z22, {0.5, 0.0, 0.0, 0.5});
    CHECK(entropy_function(sub, 0b01) == doctest::Approx(1.0));
    CHECK(entropy_function(sub, 0b10) == doctest::Approx(1.0));
    CHECK(entropy_function(sub, 0b11) == doctest::Approx(1.0));
    CHECK(avg_entropy_function(sub, 2) == doctest::Approx(1.0));

    CHECK_THROWS_AS(entropy_function(sub, 0b100), domain_error);
}

TEST_CASE("entropy function monotonicity properties") {
    const auto z23 = group_descriptor::z2k(3);
    rng r(55);
    for (int rep = 0; rep < 30; ++rep) {
        const group_tuple mu = random_tuple(z23, r);
        // h_k nondecreasing in k
        double prev = 0;
        for (unsigned k = 1; k <= 3; ++k) {
            const double hk = avg_entropy_function(mu, k);
            CHECK(hk >= prev - 1e-12);
            prev = hk;
        }
        // H_S <= H_{S union S'}
        for (std::uint32_t s = 0; s < 8; ++s)
            for (std::uint32_t sp = 0; sp < 8; ++sp)
                CHECK(entropy_function(mu, s) <= entropy_function(mu, s | sp) + 1e-12);
    }
}

TEST_CASE("Bayes inversion for symmetric tuples (Monte Carlo)") {
    // build (u, lambda) pairs from the minimal symmetric construction and
    // check p(u | lambda) = lambda(u) within 3 sigma
    const auto z4 = group_descriptor::zm(4);
    rng r(2024);
    const group_tuple base = random_tuple(z4, r);
    const int trials = 200000;
    // count hits of (orbit representative shift, u); representative = shift s
    std::vector<double> count_su(16, 0.0);
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t u = r.bounded(4);
        // lambda = base (+) sure(s) with probability base(u (-) s)
        const double x = r.uniform();
        double acc = 0;
        std::uint64_t s = 0;
        for (std::uint64_t cand = 0; cand < 4; ++cand) {
            acc += base(z4.sub(u, cand));
            s = cand;
            if (x < acc) break;
        }
        count_su[s * 4 + u] += 1;
    }
    for (std::uint64_t s = 0; s < 4; ++s) {
        double tot = 0;
        for (std::uint64_t u = 0; u < 4; ++u) tot += count_su[s * 4 + u];
        if (tot < 100) continue;
        for (std::uint64_t u = 0; u < 4; ++u) {
            // lambda = base (+) sure(s): lambda(u) = base(u (-) s)
            const double expect = base(z4.sub(u, s));
            const double phat = count_su[s * 4 + u] / tot;
            const double sigma = std::sqrt(std::max(expect * (1 - expect), 1e-9) / tot);
            CHECK(std::abs(phat - expect) < 3.5 * sigma + 1e-3);
        }
    }
}

TEST_CASE("binary prob_tuple helpers") {
    CHECK(prob_tuple::sure(0).llr() == std::numeric_limits<double>::infinity());
    CHECK(prob_tuple::sure(1).llr() == -std::numeric_limits<double>::infinity());
    CHECK(prob_tuple::unknown().llr() == doctest::Approx(0.0));
    CHECK(cn_combine(prob_tuple{0.9}, prob_tuple{0.9}).p0 == doctest::Approx(0.82));
    CHECK(vn_combine(prob_tuple{0.8}, prob_tuple{0.8}).p0 == doctest::Approx(16.0 / 17.0));
    CHECK_THROWS_AS(vn_combine(prob_tuple::sure(0), prob_tuple::sure(1)), contradiction_error);
}

TEST_CASE("underflow guard in long vn chains") {
    const auto z2 = group_descriptor::zm(2);
    group_tuple acc(z2, {1.0, 1e-12});
    for (int i = 0; i < 200; ++i) acc = vn_combine(acc, group_tuple(z2, {1.0, 1e-12}));
    CHECK(acc(0) > 0.999999);
    CHECK(acc(0) <= 1.0);
}
