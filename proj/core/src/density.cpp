#include "ldgmq/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "ldgmq/errors.hpp"
#include "ldgmq/prob_tuple.hpp"

namespace ldgmq {

namespace {

// Stable boxplus of two nonnegative LLR magnitudes.
double boxplus_mag(double a, double b) {
    return std::min(a, b) + std::log1p(std::exp(-(a + b))) - std::log1p(std::exp(-std::abs(a - b)));
}

// Pairwise check-node tables per grid: output bin index and interpolation
// fraction for every magnitude pair (j, k >= 1).
struct cn_table {
    std::vector<std::uint16_t> idx;
    std::vector<float> frac;
};

const cn_table& get_cn_table(const llr_grid& g) {
    static std::mutex mu;
    static std::map<std::pair<int, double>, cn_table> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(g.half_bins, g.lmax);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const int w = g.half_bins;
    const double h = g.step();
    cn_table t;
    t.idx.resize(static_cast<std::size_t>(w) * w);
    t.frac.resize(static_cast<std::size_t>(w) * w);
    for (int j = 1; j <= w; ++j) {
        for (int k = 1; k <= w; ++k) {
            const double out = boxplus_mag(j * h, k * h);
            int lo = static_cast<int>(out / h);
            double f = out / h - lo;
            if (lo >= w) {
                lo = w - 1;
                f = 1.0;
            }
            const std::size_t at = static_cast<std::size_t>(j - 1) * w + (k - 1);
            t.idx[at] = static_cast<std::uint16_t>(lo);
            t.frac[at] = static_cast<float>(f);
        }
    }
    return cache.emplace(key, std::move(t)).first->second;
}

// H2 of the pair at each center, cached per grid.
const std::vector<double>& get_h2_table(const llr_grid& g) {
    static std::mutex mu;
    static std::map<std::pair<int, double>, std::vector<double>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(g.half_bins, g.lmax);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<double> t(g.half_bins + 1);
    for (int k = 0; k <= g.half_bins; ++k)
        t[k] = binary_entropy(1.0 / (1.0 + std::exp(k * g.step())));
    return cache.emplace(key, std::move(t)).first->second;
}

}  // namespace

symmetric_density symmetric_density::erasure(double x) {
    if (x < 0.0 || x > 1.0) throw domain_error("erasure density needs x in [0,1]");
    symmetric_density d;
    d.erasure_ = x;
    return d;
}

symmetric_density symmetric_density::histogram(llr_grid grid, std::vector<double> pair_mass,
                                               double sure_mass) {
    if (static_cast<int>(pair_mass.size()) != grid.half_bins + 1)
        throw domain_error("histogram: pair_mass size must be half_bins + 1");
    double total = sure_mass;
    for (double m : pair_mass) {
        if (m < -1e-12) throw domain_error("histogram: negative mass");
        total += m;
    }
    if (std::abs(total - 1.0) > 1e-9) throw domain_error("histogram: mass must sum to 1");
    symmetric_density d;
    d.grid_ = grid;
    d.pair_mass_ = std::move(pair_mass);
    d.sure_ = sure_mass;
    const double scale = 1.0 / total;
    for (double& m : d.pair_mass_) m = std::max(0.0, m) * scale;
    d.sure_ *= scale;
    return d;
}

double symmetric_density::erasure_x() const {
    if (!erasure_) throw domain_error("erasure_x on a histogram density");
    return *erasure_;
}

std::optional<double> symmetric_density::as_erasure_like(double tol) const {
    if (erasure_) return *erasure_;
    double other = 0;
    for (std::size_t k = 1; k < pair_mass_.size(); ++k) other += pair_mass_[k];
    if (other <= tol) return sure_ / (sure_ + pair_mass_[0] + other);
    return std::nullopt;
}

symmetric_density symmetric_density::promoted(const llr_grid& grid) const {
    if (!erasure_) {
        if (!(grid_ == grid)) throw domain_error("density grid mismatch");
        return *this;
    }
    std::vector<double> pm(grid.half_bins + 1, 0.0);
    pm[0] = 1.0 - *erasure_;
    symmetric_density d;
    d.grid_ = grid;
    d.pair_mass_ = std::move(pm);
    d.sure_ = *erasure_;
    return d;
}

double symmetric_density::mi() const {
    if (erasure_) return *erasure_;
    const auto& h2 = get_h2_table(grid_);
    double h = 0;
    for (std::size_t k = 0; k < pair_mass_.size(); ++k) h += pair_mass_[k] * h2[k];
    return 1.0 - h;
}

double density_mi(const symmetric_density& d) { return d.mi(); }

std::vector<double> symmetric_density::expand_two_sided() const {
    if (erasure_) throw domain_error("expand_two_sided on an erasure density");
    const int w = grid_.half_bins;
    const double h = grid_.step();
    std::vector<double> a(2 * w + 1, 0.0);
    a[w] = pair_mass_[0];
    for (int k = 1; k <= w; ++k) {
        const double sig = 1.0 / (1.0 + std::exp(-k * h));
        a[w + k] = pair_mass_[k] * sig;
        a[w - k] = pair_mass_[k] * (1.0 - sig);
    }
    return a;
}

double symmetric_density::symmetry_residual() const {
    if (erasure_) return 0.0;
    const auto a = expand_two_sided();
    const int w = grid_.half_bins;
    const double h = grid_.step();
    double worst = 0.0;
    for (int k = 1; k <= w; ++k)
        worst = std::max(worst, std::abs(a[w - k] - std::exp(-k * h) * a[w + k]));
    return worst;
}

double symmetric_density::sample_llr(double u, double ub) const {
    if (erasure_) {
        if (u < *erasure_) return std::numeric_limits<double>::infinity();
        return 0.0;
    }
    double acc = sure_;
    if (u < acc) return std::numeric_limits<double>::infinity();
    const double h = grid_.step();
    for (std::size_t k = 0; k < pair_mass_.size(); ++k) {
        acc += pair_mass_[k];
        if (u < acc) {
            if (k == 0) return 0.0;
            const double sig = 1.0 / (1.0 + std::exp(-static_cast<double>(k) * h));
            return ub < sig ? k * h : -static_cast<double>(k) * h;
        }
    }
    return 0.0;
}

symmetric_density density_vn(const symmetric_density& a, const symmetric_density& b) {
    if (a.erasure_ && b.erasure_)
        return symmetric_density::erasure(1.0 - (1.0 - *a.erasure_) * (1.0 - *b.erasure_));
    const llr_grid grid = a.erasure_ ? b.grid_ : a.grid_;
    const symmetric_density da = a.promoted(grid), db = b.promoted(grid);
    const int w = grid.half_bins;

    const std::vector<double> xa = da.expand_two_sided();
    const std::vector<double> xb = db.expand_two_sided();
    std::vector<int> nza;
    for (int i = 0; i <= 2 * w; ++i)
        if (xa[i] != 0.0) nza.push_back(i);
    // signed LLRs add; sums land exactly on the shared grid
    std::vector<double> conv(4 * w + 1, 0.0);
    for (int i : nza) {
        const double ma = xa[i];
        for (int jj = 0; jj <= 2 * w; ++jj) {
            const double m = xb[jj];
            if (m != 0.0) conv[i + jj] += ma * m;
        }
    }

    double sure = da.sure_ + db.sure_ - da.sure_ * db.sure_;
    std::vector<double> pm(w + 1, 0.0);
    double overflow = da.overflow_ + db.overflow_;
    pm[0] = conv[2 * w];
    for (int k = 1; k <= 2 * w; ++k) {
        const double m = conv[2 * w + k] + conv[2 * w - k];
        if (k <= w) {
            pm[k] = m;
        } else if (m > 0.0) {
            sure += m;  // mass beyond the grid clamps into the atoms
            overflow += m;
        }
    }
    symmetric_density out = symmetric_density::histogram(grid, std::move(pm), sure);
    out.overflow_ = overflow;
    return out;
}

symmetric_density density_cn(const symmetric_density& a, const symmetric_density& b) {
    if (a.erasure_ && b.erasure_) return symmetric_density::erasure(*a.erasure_ * *b.erasure_);
    const llr_grid grid = a.erasure_ ? b.grid_ : a.grid_;
    const symmetric_density da = a.promoted(grid), db = b.promoted(grid);
    const int w = grid.half_bins;

    const double sa = da.sure_, sb = db.sure_;
    const double za = da.pair_mass_[0], zb = db.pair_mass_[0];
    double fa_tot = 0, fb_tot = 0;
    for (int k = 1; k <= w; ++k) {
        fa_tot += da.pair_mass_[k];
        fb_tot += db.pair_mass_[k];
    }

    std::vector<double> pm(w + 1, 0.0);
    double sure = sa * sb;
    pm[0] = za * zb + za * (sb + fb_tot) + zb * (sa + fa_tot);
    for (int k = 1; k <= w; ++k) pm[k] = sa * db.pair_mass_[k] + sb * da.pair_mass_[k];

    if (fa_tot > 0 && fb_tot > 0) {
        const cn_table& tab = get_cn_table(grid);
        std::vector<int> nza, nzb;
        for (int k = 1; k <= w; ++k) {
            if (da.pair_mass_[k] != 0.0) nza.push_back(k);
            if (db.pair_mass_[k] != 0.0) nzb.push_back(k);
        }
        for (int j : nza) {
            const double mj = da.pair_mass_[j];
            const std::size_t base = static_cast<std::size_t>(j - 1) * w;
            for (int k : nzb) {
                const double m = mj * db.pair_mass_[k];
                const std::size_t at = base + (k - 1);
                const int lo = tab.idx[at];
                const double f = tab.frac[at];
                pm[lo] += m * (1.0 - f);
                pm[lo + 1] += m * f;
            }
        }
    }
    symmetric_density out = symmetric_density::histogram(grid, std::move(pm), sure);
    out.overflow_ = da.overflow_ + db.overflow_;
    return out;
}

symmetric_density density_mix(std::span<const double> weights,
                              std::span<const symmetric_density> ds) {
    if (weights.size() != ds.size() || ds.empty()) throw domain_error("density_mix: size mismatch");
    double wsum = 0;
    for (double v : weights) {
        if (v < 0) throw domain_error("density_mix: negative weight");
        wsum += v;
    }
    if (std::abs(wsum - 1.0) > 1e-9) throw domain_error("density_mix: weights must sum to 1");
    bool all_erasure = true;
    for (const auto& d : ds) all_erasure = all_erasure && d.is_erasure();
    if (all_erasure) {
        double x = 0;
        for (std::size_t i = 0; i < ds.size(); ++i) x += weights[i] * ds[i].erasure_x();
        return symmetric_density::erasure(x);
    }
    llr_grid grid;
    bool found = false;
    for (const auto& d : ds)
        if (!d.is_erasure()) {
            grid = d.grid();
            found = true;
            break;
        }
    (void)found;
    std::vector<double> pm(grid.half_bins + 1, 0.0);
    double sure = 0, overflow = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const symmetric_density p = ds[i].promoted(grid);
        for (std::size_t k = 0; k < pm.size(); ++k) pm[k] += weights[i] * p.pair_mass_[k];
        sure += weights[i] * p.sure_;
        overflow += weights[i] * p.overflow_;
    }
    symmetric_density out = symmetric_density::histogram(grid, std::move(pm), sure);
    out.overflow_ = overflow;
    return out;
}

symmetric_density density_vn_power(const symmetric_density& d, int k) {
    if (k < 0) throw domain_error("density_vn_power: k >= 0");
    if (k == 0) return symmetric_density::erasure(0.0);
    symmetric_density acc = d;
    symmetric_density base = d;
    --k;
    while (k > 0) {
        if (k & 1) acc = density_vn(acc, base);
        k >>= 1;
        if (k > 0) base = density_vn(base, base);
    }
    return acc;
}

symmetric_density density_cn_power(const symmetric_density& d, int k) {
    if (k < 0) throw domain_error("density_cn_power: k >= 0");
    if (k == 0) return symmetric_density::erasure(1.0);
    symmetric_density acc = d;
    symmetric_density base = d;
    --k;
    while (k > 0) {
        if (k & 1) acc = density_cn(acc, base);
        k >>= 1;
        if (k > 0) base = density_cn(base, base);
    }
    return acc;
}

density_builder::density_builder(llr_grid grid) : grid_(grid) {
    two_sided_.assign(2 * grid.half_bins + 1, 0.0);
}

void density_builder::add(double llr, double mass) {
    if (mass < 0) throw domain_error("density_builder: negative mass");
    if (mass == 0) return;
    const int w = grid_.half_bins;
    const double h = grid_.step();
    if (std::isinf(llr)) {
        (llr > 0 ? pos_inf_ : neg_inf_) += mass;
        return;
    }
    if (llr > grid_.lmax) {
        pos_inf_ += mass;
        overflow_ += mass;
        return;
    }
    if (llr < -grid_.lmax) {
        neg_inf_ += mass;
        overflow_ += mass;
        return;
    }
    const double pos = llr / h + w;  // in [0, 2w]
    int lo = static_cast<int>(pos);
    if (lo >= 2 * w) lo = 2 * w - 1;
    const double f = pos - lo;
    two_sided_[lo] += mass * (1.0 - f);
    two_sided_[lo + 1] += mass * f;
}

symmetric_density density_builder::finish(double symmetry_tol) {
    const int w = grid_.half_bins;
    const double h = grid_.step();
    double total = pos_inf_ + neg_inf_;
    for (double m : two_sided_) total += m;
    if (total <= 0) throw domain_error("density_builder: no mass");

    double residual = neg_inf_;  // a symmetric density has no sure-wrong atom
    for (int k = 1; k <= w; ++k) {
        const double hi = two_sided_[w + k] / total;
        const double lo = two_sided_[w - k] / total;
        residual += std::abs(lo - std::exp(-k * h) * hi);
    }
    if (residual > symmetry_tol)
        throw model_error("density_builder: symmetry violated beyond tolerance");

    std::vector<double> pm(w + 1, 0.0);
    pm[0] = two_sided_[w] / total;
    for (int k = 1; k <= w; ++k) pm[k] = (two_sided_[w + k] + two_sided_[w - k]) / total;
    symmetric_density out =
        symmetric_density::histogram(grid_, std::move(pm), (pos_inf_ + neg_inf_) / total);
    return out;
}

}  // namespace ldgmq
