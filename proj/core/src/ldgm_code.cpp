#include "ldgmq/ldgm_code.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "ldgmq/errors.hpp"
#include "ldgmq/rng.hpp"

namespace ldgmq {

std::vector<std::uint32_t> gray_map(unsigned K) {
    if (K < 1 || K > 16) throw domain_error("gray_map: 1 <= K <= 16");
    const std::uint32_t size = 1u << K;
    std::vector<std::uint32_t> phi(size);
    for (std::uint32_t m = 0; m < size; ++m) {
        std::uint32_t g = m ^ (m >> 1);
        // component 1 of the bit vector is the most significant Gray bit
        std::uint32_t c = 0;
        for (unsigned k = 0; k < K; ++k)
            if ((g >> (K - 1 - k)) & 1u) c |= 1u << k;
        phi[c] = m;
    }
    return phi;
}

group_descriptor ldgm_code::symbol_group() const {
    switch (modulation) {
        case modulation_kind::binary:
            return group_descriptor::zm(2);
        case modulation_kind::gray_zm:
            return group_descriptor::zm(std::uint64_t{1} << K);
        case modulation_kind::identity_z2k:
            return group_descriptor::z2k(K);
    }
    return group_descriptor::zm(2);
}

std::uint32_t ldgm_code::modulate(int j, std::uint32_t c_bits) const {
    const std::uint32_t mask = (1u << K) - 1u;
    switch (modulation) {
        case modulation_kind::binary:
            return c_bits & 1u;
        case modulation_kind::gray_zm:
            return (phi[(c_bits ^ dither_eps[j]) & mask] + dither_delta[j]) & mask;
        case modulation_kind::identity_z2k:
            return (c_bits ^ dither_eps[j] ^ dither_delta[j]) & mask;
    }
    return c_bits;
}

long long ldgm_code::edge_count() const {
    long long e = 0;
    for (const auto& r : rows) e += static_cast<long long>(r.size());
    return e;
}

ldgm_code sample_code(const degree_distribution& dd, int n, std::uint64_t seed) {
    return sample_code(dd, n, seed,
                       dd.K() == 1 ? modulation_kind::binary : modulation_kind::gray_zm);
}

ldgm_code sample_code(const degree_distribution& dd, int n, std::uint64_t seed,
                      modulation_kind modulation) {
    if ((modulation == modulation_kind::binary) != (dd.K() == 1))
        throw domain_error("sample_code: modulation kind inconsistent with K");
    const auto rd = dd.round_at(n);
    ldgm_code code;
    code.n = n;
    code.K = dd.K();
    code.nb = rd.nb;
    code.nc = n * dd.K();
    code.rn = rd.rn;
    code.db = dd.db();
    code.seed = seed;
    code.modulation = modulation;

    rng r(substream(seed, "ldgm-code"));

    // assign one degree class per symbol, then shuffle the assignment
    code.symbol_degree.reserve(n);
    for (auto& [d, c] : rd.symbol_counts)
        for (int i = 0; i < c; ++i) code.symbol_degree.push_back(d);
    for (int i = n - 1; i > 0; --i)
        std::swap(code.symbol_degree[i], code.symbol_degree[r.bounded(i + 1)]);

    // configuration model: pair row sockets with a shuffled list of column
    // sockets; parallel edges collapse by multiplicity parity
    std::vector<std::int32_t> col_sockets;
    for (int j = 0; j < n; ++j) {
        const int d = code.symbol_degree[j];
        for (int k = 0; k < code.K; ++k)
            for (int e = 0; e < d; ++e) col_sockets.push_back(j * code.K + k);
    }
    if (static_cast<long long>(col_sockets.size()) !=
        static_cast<long long>(code.nb) * code.db)
        throw numerical_failure("sample_code: socket count mismatch");
    for (std::size_t i = col_sockets.size() - 1; i > 0; --i)
        std::swap(col_sockets[i], col_sockets[r.bounded(i + 1)]);

    std::vector<std::map<std::int32_t, int>> row_mult(code.nb);
    std::size_t s = 0;
    for (int i = 0; i < code.nb; ++i)
        for (int e = 0; e < code.db; ++e) row_mult[i][col_sockets[s++]] += 1;

    code.rows.resize(code.nb);
    code.cols.resize(code.nc);
    for (int i = 0; i < code.nb; ++i) {
        for (auto& [c, m] : row_mult[i]) {
            if (m % 2 == 0) continue;
            code.rows[i].push_back(c);
            code.cols[c].push_back(i);
        }
    }
    for (auto& c : code.cols) std::sort(c.begin(), c.end());

    code.scramble.resize(code.nc);
    for (auto& b : code.scramble) b = r.bit() ? 1 : 0;

    code.dither_eps.assign(n, 0);
    code.dither_delta.assign(n, 0);
    if (code.K == 1) {
        code.phi = {0, 1};
    } else {
        code.phi = modulation == modulation_kind::gray_zm
                       ? gray_map(code.K)
                       : [&] {
                             std::vector<std::uint32_t> id(std::size_t{1} << code.K);
                             for (std::uint32_t c = 0; c < id.size(); ++c) id[c] = c;
                             return id;
                         }();
        for (int j = 0; j < n; ++j) {
            code.dither_eps[j] = static_cast<std::uint32_t>(r.bounded(1u << code.K));
            code.dither_delta[j] = static_cast<std::uint32_t>(r.bounded(1u << code.K));
        }
    }
    return code;
}

std::vector<std::uint8_t> encode_bits(const ldgm_code& code, std::span<const std::uint8_t> b) {
    if (static_cast<int>(b.size()) != code.nb) throw domain_error("encode: |b| != nb");
    std::vector<std::uint8_t> c(code.scramble.begin(), code.scramble.end());
    for (int i = 0; i < code.nb; ++i) {
        if (!b[i]) continue;
        for (std::int32_t j : code.rows[i]) c[j] ^= 1;
    }
    return c;
}

std::vector<std::uint32_t> encode(const ldgm_code& code, std::span<const std::uint8_t> b) {
    const std::vector<std::uint8_t> c = encode_bits(code, b);
    std::vector<std::uint32_t> u(code.n);
    for (int j = 0; j < code.n; ++j) {
        std::uint32_t bits = 0;
        for (int k = 0; k < code.K; ++k) bits |= static_cast<std::uint32_t>(c[j * code.K + k]) << k;
        u[j] = code.modulate(j, bits);
    }
    return u;
}

neighborhood_result neighborhood(const ldgm_code& code, node_kind kind, int index, int L) {
    neighborhood_result out;
    if (L < 0) throw domain_error("neighborhood: L >= 0");
    // node ids: b-variable i -> i, check/column node j -> nb + j
    const int nb = code.nb;
    std::vector<std::int8_t> seen(nb + code.nc, 0);
    struct entry {
        int id;
        int parent;
        int depth;
    };
    std::deque<entry> q;
    int max_depth;
    if (kind == node_kind::b_variable) {
        if (index < 0 || index >= nb) throw domain_error("neighborhood: bad b index");
        q.push_back({index, -1, 0});
        max_depth = 2 * L;
    } else {
        if (index < 0 || index >= code.nc) throw domain_error("neighborhood: bad a index");
        q.push_back({nb + index, -1, 0});
        max_depth = 2 * L + 1;
    }
    seen[q.front().id] = 1;
    while (!q.empty()) {
        const entry e = q.front();
        q.pop_front();
        if (e.id < nb)
            out.b_nodes.push_back(e.id);
        else
            out.check_nodes.push_back(e.id - nb);
        if (e.depth >= max_depth) continue;
        const auto& adj = e.id < nb ? code.rows[e.id] : code.cols[e.id - nb];
        for (std::int32_t nb_raw : adj) {
            const int nid = e.id < nb ? nb + nb_raw : nb_raw;
            if (nid == e.parent) continue;
            if (seen[nid]) {
                out.loop_free = false;
                continue;
            }
            seen[nid] = 1;
            q.push_back({nid, e.id, e.depth + 1});
        }
    }
    return out;
}

bool graph_is_forest(const ldgm_code& code) {
    std::vector<std::int8_t> seen(code.nb + code.nc, 0);
    for (int start = 0; start < code.nb; ++start) {
        if (seen[start]) continue;
        std::deque<std::pair<int, int>> q = {{start, -1}};
        seen[start] = 1;
        while (!q.empty()) {
            auto [id, parent] = q.front();
            q.pop_front();
            const auto& adj = id < code.nb ? code.rows[id] : code.cols[id - code.nb];
            for (std::int32_t raw : adj) {
                const int nid = id < code.nb ? code.nb + raw : raw;
                if (nid == parent) continue;
                if (seen[nid]) return false;
                seen[nid] = 1;
                q.push_back({nid, id});
            }
        }
    }
    return true;
}

}  // namespace ldgmq
