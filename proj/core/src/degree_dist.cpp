#include "ldgmq/degree_dist.hpp"

#include <algorithm>
#include <cmath>

#include "ldgmq/errors.hpp"

namespace ldgmq {

degree_distribution::degree_distribution(int db, std::map<int, double> w, int K)
    : db_(db), K_(K), w_(std::move(w)) {
    if (db_ < 2) throw domain_error("degree_distribution: db >= 2 required");
    if (K_ < 1) throw domain_error("degree_distribution: K >= 1 required");
    double wsum = 0, edge = 0;
    for (auto& [d, wd] : w_) {
        if (d < 1) throw domain_error("degree_distribution: degrees must be >= 1");
        if (wd < -1e-15) throw domain_error("degree_distribution: negative w_d");
        wsum += wd;
        edge += d * wd;
    }
    if (std::abs(wsum - 1.0) > 1e-9) throw domain_error("degree_distribution: w must sum to 1");
    R_ = K_ * edge / db_;
    for (auto& [d, wd] : w_) v_[d] = K_ * d * wd / (R_ * db_);
}

degree_distribution degree_distribution::regular(int db, int dc, int K) {
    return degree_distribution(db, {{dc, 1.0}}, K);
}

degree_distribution degree_distribution::from_v(int db, const std::map<int, double>& v, double R,
                                                int K) {
    std::map<int, double> w;
    double check = 0;
    for (auto& [d, vd] : v) {
        if (vd < -1e-15) throw domain_error("from_v: negative v_d");
        w[d] = vd * R * db / (K * d);
        check += vd;
    }
    if (std::abs(check - 1.0) > 1e-9) throw domain_error("from_v: v must sum to 1");
    double wsum = 0;
    for (auto& [d, wd] : w) wsum += wd;
    if (std::abs(wsum - 1.0) > 1e-9)
        throw domain_error("from_v: inconsistent (R, db, v); w does not sum to 1");
    return degree_distribution(db, std::move(w), K);
}

double degree_distribution::v_at(int d) const {
    auto it = v_.find(d);
    return it == v_.end() ? 0.0 : it->second;
}

double degree_distribution::w_at(int d) const {
    auto it = w_.find(d);
    return it == w_.end() ? 0.0 : it->second;
}

degree_distribution::rounded degree_distribution::round_at(int n) const {
    if (n < std::max(max_degree(), db_)) throw domain_error("round_at: n too small");
    rounded out;
    // Largest-remainder apportionment of n symbols over the degree classes;
    // remainder ties go to the higher degree.
    std::vector<std::pair<int, double>> quota;
    int assigned = 0;
    for (auto& [d, wd] : w_) {
        const double q = n * wd;
        const int fl = static_cast<int>(std::floor(q + 1e-12));
        out.symbol_counts[d] = fl;
        assigned += fl;
        quota.push_back({d, q - fl});
    }
    std::sort(quota.begin(), quota.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first > b.first;
    });
    for (int i = 0; assigned < n; ++i, ++assigned) out.symbol_counts[quota[i % quota.size()].first] += 1;

    auto edges = [&] {
        long long e = 0;
        for (auto& [d, c] : out.symbol_counts) e += static_cast<long long>(K_) * d * c;
        return e;
    };
    // Move single columns between adjacent integer degrees until db divides
    // the edge count; each move shifts one column to the next higher degree
    // (+K edges), starting from the lowest populated class.
    while (edges() % db_ != 0) {
        int from = -1;
        for (auto& [d, c] : out.symbol_counts) {
            if (c > 0) {
                from = d;
                break;
            }
        }
        if (from < 0) throw domain_error("round_at: no columns to repair with");
        out.symbol_counts[from] -= 1;
        out.symbol_counts[from + 1] += 1;
        out.repair_moves += 1;
        if (out.repair_moves > db_ * K_ + 8) throw numerical_failure("round_at: repair did not settle");
    }
    out.nb = static_cast<int>(edges() / db_);
    out.rn = static_cast<double>(out.nb) / n;
    return out;
}

}  // namespace ldgmq
