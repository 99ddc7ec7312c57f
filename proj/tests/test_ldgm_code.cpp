#include <doctest.h>

#include <bit>
#include <cstdint>
#include <map>
#include <vector>

#include "ldgmq/errors.hpp"
#include "ldgmq/ldgm_code.hpp"
#include "ldgmq/rng.hpp"
#include "ldgmq/serialize.hpp"

using namespace ldgmq;

TEST_CASE("degree distribution consistency") {
    const auto dd = degree_distribution::regular(4, 2);
    CHECK(dd.rate() == doctest::Approx(0.5));
    CHECK(dd.v_at(2) == doctest::Approx(1.0));

    const degree_distribution mixed(4, {{2, 0.5}, {3, 0.5}});
    double vsum = 0;
    for (auto& [d, vd] : mixed.v()) vsum += vd;
    CHECK(vsum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mixed.rate() == doctest::Approx(2.5 / 4.0));

    // 2^K-ary rate carries the factor K
    const auto dd2 = degree_distribution::regular(8, 2, 2);
    CHECK(dd2.rate() == doctest::Approx(0.5));

    CHECK_THROWS_AS(degree_distribution(1, {{2, 1.0}}), domain_error);
    CHECK_THROWS_AS(degree_distribution(4, {{2, 0.5}}), domain_error);
}

TEST_CASE("rounding: already integral") {
    const auto rd = degree_distribution::regular(4, 2).round_at(100);
    CHECK(rd.nb == 50);
    CHECK(rd.symbol_counts.at(2) == 100);
    CHECK(rd.repair_moves == 0);
}

TEST_CASE("rounding: largest remainder with repair accounting") {
    const degree_distribution dd(2, {{2, 0.5}, {3, 0.5}});
    const auto rd = dd.round_at(7);
    // 3.5 / 3.5 with the remainder tie going to the higher degree
    CHECK(rd.symbol_counts.at(2) == 3);
    CHECK(rd.symbol_counts.at(3) == 4);
    CHECK(rd.repair_moves == 0);
    CHECK(rd.nb == 9);  // 18 edges / db = 2
    // apportionment deviation bound
    for (auto& [d, c] : rd.symbol_counts)
        CHECK(std::abs(static_cast<double>(c) / 7 - 0.5) <= 1.0 / 7 + 1e-12);
}

TEST_CASE("rounding: repair when db does not divide the edges") {
    const degree_distribution dd(4, {{2, 0.5}, {3, 0.5}});
    const auto rd = dd.round_at(9);  // 4.5/4.5 -> {2:4,3:5}: 23 edges, needs repair
    long long edges = 0;
    for (auto& [d, c] : rd.symbol_counts) edges += static_cast<long long>(d) * c;
    CHECK(edges % 4 == 0);
    CHECK(rd.repair_moves > 0);
    int total = 0;
    for (auto& [d, c] : rd.symbol_counts) total += c;
    CHECK(total == 9);
}

TEST_CASE("rounded distribution converges to the target") {
    const degree_distribution dd(5, {{2, 0.3}, {3, 0.45}, {7, 0.25}});
    for (int n : {40, 160, 640, 2560}) {
        const auto rd = dd.round_at(n);
        for (auto& [d, wd] : dd.w()) {
            const double realized =
                rd.symbol_counts.count(d) ? static_cast<double>(rd.symbol_counts.at(d)) / n : 0.0;
            CHECK(std::abs(realized - wd) <= (1.0 + rd.repair_moves) / n + 1e-12);
        }
        CHECK(std::abs(rd.rn - dd.rate()) <= 3.0 * dd.max_degree() / n);
    }
}

TEST_CASE("configuration sample: socket conservation and determinism") {
    const degree_distribution dd(4, {{2, 0.5}, {3, 0.5}});
    const ldgm_code code = sample_code(dd, 64, 7);
    // per-column degrees realize the rounded counts before parity collapse;
    // after collapse the counts can only shrink by even amounts
    std::map<int, int> realized;
    for (int j = 0; j < code.nc; ++j)
        realized[static_cast<int>(code.cols[j].size())] += 1;
    long long edges = code.edge_count();
    CHECK(edges <= static_cast<long long>(code.nb) * code.db);
    CHECK((static_cast<long long>(code.nb) * code.db - edges) % 2 == 0);

    const ldgm_code again = sample_code(dd, 64, 7);
    CHECK(again.rows == code.rows);
    CHECK(again.scramble == code.scramble);
    const ldgm_code other = sample_code(dd, 64, 8);
    CHECK(other.rows != code.rows);
}

TEST_CASE("encode equals a dense GF(2) product") {
    const degree_distribution dd(3, {{2, 0.5}, {4, 0.5}});
    rng r(21);
    for (int rep = 0; rep < 10; ++rep) {
        const ldgm_code code = sample_code(dd, 24, 1000 + rep);
        REQUIRE(code.nc <= 64);
        std::vector<std::uint64_t> dense(code.nb, 0);
        for (int i = 0; i < code.nb; ++i)
            for (std::int32_t j : code.rows[i]) dense[i] |= std::uint64_t{1} << j;
        std::vector<std::uint8_t> b(code.nb);
        for (auto& x : b) x = r.bit();
        std::uint64_t c = 0;
        for (int j = 0; j < code.nc; ++j)
            if (code.scramble[j]) c |= std::uint64_t{1} << j;
        for (int i = 0; i < code.nb; ++i)
            if (b[i]) c ^= dense[i];
        const auto got = encode_bits(code, b);
        for (int j = 0; j < code.nc; ++j) CHECK(got[j] == ((c >> j) & 1));
    }
}

TEST_CASE("encode is linear over Z2 before modulation") {
    const degree_distribution dd(4, {{2, 1.0}});
    const ldgm_code code = sample_code(dd, 32, 5);
    rng r(17);
    std::vector<std::uint8_t> b1(code.nb), b2(code.nb), bx(code.nb);
    for (int i = 0; i < code.nb; ++i) {
        b1[i] = r.bit();
        b2[i] = r.bit();
        bx[i] = b1[i] ^ b2[i];
    }
    const auto c1 = encode_bits(code, b1);
    const auto cx = encode_bits(code, bx);
    // (b1 ^ b2) G + a == (b1 G + a) ^ (b2 G)
    std::vector<std::uint8_t> b2g(code.nc, 0);
    for (int i = 0; i < code.nb; ++i)
        if (b2[i])
            for (std::int32_t j : code.rows[i]) b2g[j] ^= 1;
    for (int j = 0; j < code.nc; ++j) CHECK(cx[j] == (c1[j] ^ b2g[j]));

    // zero input reproduces the modulated scrambling sequence
    const std::vector<std::uint8_t> zero(code.nb, 0);
    const auto u0 = encode(code, zero);
    for (int j = 0; j < code.n; ++j) CHECK(u0[j] == code.modulate(j, code.scramble[j]));
}

TEST_CASE("Gray map") {
    const auto g1 = gray_map(1);
    CHECK(g1[0] == 0);
    CHECK(g1[1] == 1);
    // spec ordering with component 1 as the first bit
    const auto g2 = gray_map(2);
    CHECK(g2[0b00] == 0);
    CHECK(g2[0b10] == 1);  // bit pattern "01": c1=0, c2=1
    CHECK(g2[0b11] == 2);
    CHECK(g2[0b01] == 3);
    for (unsigned K = 1; K <= 8; ++K) {
        const auto g = gray_map(K);
        std::vector<bool> seen(g.size(), false);
        for (auto m : g) {
            CHECK(!seen[m]);
            seen[m] = true;
        }
        // adjacent Gray levels differ in one bit pattern position
        std::vector<std::uint32_t> inv(g.size());
        for (std::uint32_t c = 0; c < g.size(); ++c) inv[g[c]] = c;
        for (std::uint32_t m = 0; m + 1 < g.size(); ++m)
            CHECK(std::popcount(inv[m] ^ inv[m + 1]) == 1);
    }
}

TEST_CASE("neighborhood expansion and loop detection") {
    // L = 0: the node alone
    const degree_distribution dd(2, {{2, 1.0}});
    const ldgm_code code = sample_code(dd, 12, 3);
    const auto nb0 = neighborhood(code, node_kind::b_variable, 0, 0);
    CHECK(nb0.b_nodes.size() == 1);
    CHECK(nb0.check_nodes.empty());
    CHECK(nb0.loop_free);

    // two rows sharing the same two columns: a 4-cycle seen at L = 1
    ldgm_code tiny;
    tiny.n = 2;
    tiny.K = 1;
    tiny.nb = 2;
    tiny.nc = 2;
    tiny.db = 2;
    tiny.modulation = modulation_kind::binary;
    tiny.rows = {{0, 1}, {0, 1}};
    tiny.cols = {{0, 1}, {0, 1}};
    tiny.scramble = {0, 0};
    tiny.dither_eps = {0, 0};
    tiny.dither_delta = {0, 0};
    tiny.phi = {0, 1};
    tiny.symbol_degree = {2, 2};
    CHECK_FALSE(neighborhood(tiny, node_kind::b_variable, 0, 1).loop_free);
    CHECK_FALSE(graph_is_forest(tiny));
}

TEST_CASE("loopy-neighborhood fraction decreases with n") {
    const degree_distribution dd(4, {{2, 1.0}});
    auto loopy_fraction = [&](int n, int samples) {
        int loopy = 0;
        for (int s = 0; s < samples; ++s) {
            const ldgm_code code = sample_code(dd, n, 9000 + 13 * s + n);
            if (!neighborhood(code, node_kind::b_variable, 0, 2).loop_free) ++loopy;
        }
        return static_cast<double>(loopy) / samples;
    };
    const double p32 = loopy_fraction(32, 400);
    const double p128 = loopy_fraction(128, 400);
    const double p512 = loopy_fraction(512, 400);
    CHECK(p128 < p32 + 0.05);
    CHECK(p512 < p32);
}

TEST_CASE("codebook covers the space uniformly over scrambling sequences") {
    const degree_distribution dd(2, {{1, 0.5}, {2, 0.5}});
    for (int n : {2, 3}) {
        ldgm_code code = sample_code(dd, n, 77);
        REQUIRE(code.K == 1);
        std::vector<int> covered(std::size_t{1} << code.n, 0);
        std::vector<std::uint8_t> b(code.nb);
        for (std::uint32_t am = 0; am < (1u << code.nc); ++am) {
            for (int j = 0; j < code.nc; ++j) code.scramble[j] = (am >> j) & 1;
            for (std::uint32_t bm = 0; bm < (1u << code.nb); ++bm) {
                for (int i = 0; i < code.nb; ++i) b[i] = (bm >> i) & 1;
                const auto u = encode(code, b);
                std::uint32_t ui = 0;
                for (int j = 0; j < code.n; ++j) ui |= u[j] << j;
                covered[ui] += 1;
            }
        }
        for (int c : covered) CHECK(c == (1 << code.nb));
    }
}

TEST_CASE("code JSON spec round-trips to an identical sample") {
    const degree_distribution dd(4, {{2, 0.25}, {3, 0.75}}, 2);
    const ldgm_code code = sample_code(dd, 30, 123);
    const json spec = code_to_json(code, dd);
    const ldgm_code back = code_from_json(spec);
    CHECK(back.rows == code.rows);
    CHECK(back.scramble == code.scramble);
    CHECK(back.dither_eps == code.dither_eps);
    CHECK(back.dither_delta == code.dither_delta);
    CHECK(back.phi == code.phi);
    CHECK(back.modulation == code.modulation);
}
