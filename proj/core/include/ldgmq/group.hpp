#pragma once

#include <cstdint>
#include <vector>

#include "ldgmq/errors.hpp"

namespace ldgmq {

enum class group_kind { zm, z2k, product };

// A finite abelian group with a canonical integer element encoding in
// [0, order). Z_M uses modular indices, Z_2^K packs one component per bit
// (component k of the vector is bit k of the index), and products use a
// mixed-radix layout over their factors.
class group_descriptor {
  public:
    static group_descriptor zm(std::uint64_t m);
    static group_descriptor z2k(unsigned k);
    static group_descriptor product(std::vector<group_descriptor> factors);

    group_kind kind() const { return kind_; }
    std::uint64_t order() const { return order_; }
    unsigned bits() const { return bits_; }  // z2k only: K
    const std::vector<group_descriptor>& factors() const { return factors_; }

    std::uint64_t add(std::uint64_t a, std::uint64_t b) const;
    std::uint64_t sub(std::uint64_t a, std::uint64_t b) const;
    std::uint64_t neg(std::uint64_t a) const;

    /// Pack per-factor indices into a product-group element.
    std::uint64_t pack(const std::vector<std::uint64_t>& parts) const;
    std::vector<std::uint64_t> unpack(std::uint64_t e) const;

    bool operator==(const group_descriptor& o) const;
    bool operator!=(const group_descriptor& o) const { return !(*this == o); }

  private:
    group_kind kind_ = group_kind::zm;
    std::uint64_t order_ = 1;
    unsigned bits_ = 0;
    std::vector<group_descriptor> factors_;
    std::vector<std::uint64_t> strides_;  // product layout
};

}  // namespace ldgmq
