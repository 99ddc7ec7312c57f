#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ldgmq {

/// LLR discretization: centers at k*h for k in [-half_bins, half_bins] with
/// h = lmax / half_bins, plus a sure atom at +infinity. Keeping an exact
/// center at zero lets erasure-like densities stay exact through every op.
struct llr_grid {
    int half_bins = 2048;
    double lmax = 30.0;
    double step() const { return lmax / half_bins; }
    bool operator==(const llr_grid& o) const {
        return half_bins == o.half_bins && lmax == o.lmax;
    }
};

// Symmetric message density conditioned on reference bit 0. Two forms:
// a scalar erasure density Delta_BEC(x), or a histogram in canonical pair
// form: pair_mass[k] holds the total mass of the (+l_k, -l_k) pair, with the
// within-pair split implied by symmetry; pair_mass[0] is the mass at LLR 0.
// All public operations keep the form canonical, so the two-sided expansion
// satisfies the symmetry condition to floating-point accuracy.
class symmetric_density {
  public:
    static symmetric_density erasure(double x);
    static symmetric_density histogram(llr_grid grid, std::vector<double> pair_mass,
                                       double sure_mass);

    bool is_erasure() const { return erasure_.has_value(); }
    double erasure_x() const;
    /// Histogram whose mass sits only on the zero bin and the sure atom is
    /// erasure-like too; returns its x when so.
    std::optional<double> as_erasure_like(double tol = 0.0) const;

    const llr_grid& grid() const { return grid_; }
    const std::vector<double>& pair_mass() const { return pair_mass_; }
    double sure_mass() const { return sure_; }
    double overflow_recorded() const { return overflow_; }

    double mi() const;
    double entropy() const { return 1.0 - mi(); }

    /// Convert an erasure density to histogram form on the given grid
    /// (exact); histograms are re-gridded only if the grid matches.
    symmetric_density promoted(const llr_grid& grid) const;

    /// Two-sided expansion a[k + half_bins] for k in [-W, W]; test hook and
    /// basis of the variable-node convolution.
    std::vector<double> expand_two_sided() const;
    /// Max |a(-l) - e^-l a(l)| over the two-sided expansion.
    double symmetry_residual() const;

    /// Sample an LLR conditioned on reference bit 0.
    double sample_llr(double u01, double u01b) const;

  private:
    symmetric_density() = default;
    std::optional<double> erasure_;
    llr_grid grid_;
    std::vector<double> pair_mass_;
    double sure_ = 0;
    double overflow_ = 0;

    friend symmetric_density density_vn(const symmetric_density&, const symmetric_density&);
    friend symmetric_density density_cn(const symmetric_density&, const symmetric_density&);
    friend symmetric_density density_mix(std::span<const double>,
                                         std::span<const symmetric_density>);
};

symmetric_density density_vn(const symmetric_density& a, const symmetric_density& b);
symmetric_density density_cn(const symmetric_density& a, const symmetric_density& b);
symmetric_density density_mix(std::span<const double> weights,
                              std::span<const symmetric_density> densities);

/// d combined with itself k times under vn (k = 0 gives Delta_BEC(0)).
symmetric_density density_vn_power(const symmetric_density& d, int k);
/// d combined with itself k times under cn (k = 0 gives Delta_BEC(1)).
symmetric_density density_cn_power(const symmetric_density& d, int k);

double density_mi(const symmetric_density& d);

// Two-sided accumulator for building densities from deposits (quadrature
// over a channel, discrete atoms). finish() verifies the symmetry condition
// between the sides before packing to canonical form.
class density_builder {
  public:
    explicit density_builder(llr_grid grid);
    /// Linear mass-preserving split onto the two neighboring centers;
    /// |llr| > lmax clamps into the atoms and is recorded as overflow.
    void add(double llr, double mass);
    symmetric_density finish(double symmetry_tol = 0.02);

  private:
    llr_grid grid_;
    std::vector<double> two_sided_;
    double pos_inf_ = 0, neg_inf_ = 0;
    double overflow_ = 0;
};

}  // namespace ldgmq
