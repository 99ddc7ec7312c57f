#include "ldgmq/group.hpp"

namespace ldgmq {

group_descriptor group_descriptor::zm(std::uint64_t m) {
    if (m < 2) throw domain_error("Z_M requires M >= 2");
    group_descriptor g;
    g.kind_ = group_kind::zm;
    g.order_ = m;
    return g;
}

group_descriptor group_descriptor::z2k(unsigned k) {
    if (k < 1 || k > 30) throw domain_error("Z_2^K requires 1 <= K <= 30");
    group_descriptor g;
    g.kind_ = group_kind::z2k;
    g.bits_ = k;
    g.order_ = std::uint64_t{1} << k;
    return g;
}

group_descriptor group_descriptor::product(std::vector<group_descriptor> factors) {
    if (factors.empty()) throw domain_error("product group needs at least one factor");
    group_descriptor g;
    g.kind_ = group_kind::product;
    g.factors_ = std::move(factors);
    g.order_ = 1;
    g.strides_.resize(g.factors_.size());
    for (std::size_t i = 0; i < g.factors_.size(); ++i) {
        g.strides_[i] = g.order_;
        g.order_ *= g.factors_[i].order();
    }
    return g;
}

std::uint64_t group_descriptor::add(std::uint64_t a, std::uint64_t b) const {
    switch (kind_) {
        case group_kind::zm:
            return (a + b) % order_;
        case group_kind::z2k:
            return a ^ b;
        case group_kind::product: {
            std::uint64_t out = 0;
            for (std::size_t i = 0; i < factors_.size(); ++i) {
                const std::uint64_t fo = factors_[i].order();
                out += strides_[i] * factors_[i].add((a / strides_[i]) % fo, (b / strides_[i]) % fo);
            }
            return out;
        }
    }
    return 0;
}

std::uint64_t group_descriptor::neg(std::uint64_t a) const {
    switch (kind_) {
        case group_kind::zm:
            return (order_ - a) % order_;
        case group_kind::z2k:
            return a;
        case group_kind::product: {
            std::uint64_t out = 0;
            for (std::size_t i = 0; i < factors_.size(); ++i) {
                const std::uint64_t fo = factors_[i].order();
                out += strides_[i] * factors_[i].neg((a / strides_[i]) % fo);
            }
            return out;
        }
    }
    return 0;
}

std::uint64_t group_descriptor::sub(std::uint64_t a, std::uint64_t b) const { return add(a, neg(b)); }

std::uint64_t group_descriptor::pack(const std::vector<std::uint64_t>& parts) const {
    if (kind_ != group_kind::product || parts.size() != factors_.size())
        throw domain_error("pack: not a matching product group");
    std::uint64_t out = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) out += strides_[i] * parts[i];
    return out;
}

std::vector<std::uint64_t> group_descriptor::unpack(std::uint64_t e) const {
    if (kind_ != group_kind::product) throw domain_error("unpack: not a product group");
    std::vector<std::uint64_t> parts(factors_.size());
    for (std::size_t i = 0; i < factors_.size(); ++i) parts[i] = (e / strides_[i]) % factors_[i].order();
    return parts;
}

bool group_descriptor::operator==(const group_descriptor& o) const {
    if (kind_ != o.kind_ || order_ != o.order_ || bits_ != o.bits_) return false;
    if (factors_.size() != o.factors_.size()) return false;
    for (std::size_t i = 0; i < factors_.size(); ++i)
        if (factors_[i] != o.factors_[i]) return false;
    return true;
}

}  // namespace ldgmq
