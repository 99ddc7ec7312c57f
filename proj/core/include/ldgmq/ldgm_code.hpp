#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ldgmq/degree_dist.hpp"
#include "ldgmq/group.hpp"

namespace ldgmq {

/// Binary-reflected Gray modulation table phi: Z_2^K -> Z_{2^K}. Component k
/// of the bit vector is bit k of the table index.
std::vector<std::uint32_t> gray_map(unsigned K);

// How codeword bits map to reconstruction symbols: plain bits for binary
// codes, a dithered Gray map into Z_{2^K} for M-ary MSE, or a dithered
// identity map into Z_2^K for the erasure-like problems.
enum class modulation_kind { binary, gray_zm, identity_z2k };

// A sampled LDGM code: sparse binary generator matrix in dual adjacency
// (rows -> columns and the transpose), a scrambling sequence, and per-symbol
// dithered modulation maps for the 2^K-ary construction. Immutable after
// sampling; regenerate bit-exactly from (dd, n, K, seed).
struct ldgm_code {
    int n = 0;   // symbols
    int K = 1;   // bits per symbol
    int nb = 0;  // rows of G
    int nc = 0;  // columns of G (n * K)
    double rn = 0;
    int db = 0;
    std::uint64_t seed = 0;
    modulation_kind modulation = modulation_kind::binary;

    std::vector<std::vector<std::int32_t>> rows;  // row -> column ids (sorted)
    std::vector<std::vector<std::int32_t>> cols;  // column -> row ids (sorted)
    std::vector<std::uint8_t> scramble;           // a, length nc
    std::vector<std::uint32_t> dither_eps;        // per symbol, in Z_2^K
    std::vector<std::uint32_t> dither_delta;      // per symbol, in G
    std::vector<std::uint32_t> phi;               // modulation table, size 2^K
    std::vector<int> symbol_degree;               // check-degree class per symbol

    group_descriptor symbol_group() const;
    std::uint32_t modulate(int j, std::uint32_t c_bits) const;  // phi_j
    long long edge_count() const;
};

/// Configuration-model sample with multiplicity-parity edge collapse
/// (matrix semantics over Z_2). Dithers are sampled only for K > 1; the
/// binary construction uses the identity map with no dithers. The default
/// modulation is Gray into Z_{2^K} when K > 1.
ldgm_code sample_code(const degree_distribution& dd, int n, std::uint64_t seed);
ldgm_code sample_code(const degree_distribution& dd, int n, std::uint64_t seed,
                      modulation_kind modulation);

/// c = b G + a over Z_2.
std::vector<std::uint8_t> encode_bits(const ldgm_code& code, std::span<const std::uint8_t> b);
/// u_j = phi_j(c bits of symbol j).
std::vector<std::uint32_t> encode(const ldgm_code& code, std::span<const std::uint8_t> b);

enum class node_kind { b_variable, a_variable };

struct neighborhood_result {
    std::vector<int> b_nodes;
    std::vector<int> check_nodes;
    bool loop_free = true;
};

/// Breadth-first depth-L BP neighborhood of a b-variable or an a-variable
/// (the latter hangs off its check node). loop_free is true iff the
/// explored subgraph is a tree.
neighborhood_result neighborhood(const ldgm_code& code, node_kind kind, int index, int L);

/// True iff the whole bipartite (b, check) graph is a forest.
bool graph_is_forest(const ldgm_code& code);

}  // namespace ldgmq
