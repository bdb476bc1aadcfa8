#pragma once

#include "ghost/grid.hpp"
#include "ghost/io.hpp"
#include "ghost/reconstruct.hpp"
#include "ghost/scene.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ghost {

/// Closed-form resolution limits. dk = 1 / w0 is the far-field estimate.
struct ResolutionReport {
    double dx = 0.0; // lambda z / (pi w0), meters
    double dz = 0.0; // 2 pi dx^2 / lambda, meters
    double dk = 0.0; // radians per meter
    double product = 0.0;
};

ResolutionReport theoretical_resolution(double wavelength, double waist, double z);

/// Boolean sample mask on an nx-by-ny grid.
struct Region {
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::vector<std::uint8_t> inside;

    Region() = default;
    Region(std::size_t nx_, std::size_t ny_, bool fill = false) : nx(nx_), ny(ny_), inside(nx_ * ny_, fill ? 1 : 0) {}

    bool operator()(std::size_t ix, std::size_t iy) const { return inside[iy * nx + ix] != 0; }
    std::size_t count() const;
};

Region support_region(const TransmissionObject& object);
/// Grows the region by a disk of `radius` samples.
Region dilate(const Region& region, double radius);
Region complement(const Region& region);
Region intersect(const Region& a, const Region& b);
/// Samples where the values reach at least `fraction` of their maximum.
Region threshold_region(const RealGrid& values, double fraction);
/// Axis-aligned rectangle [x0, x1) x [y0, y1).
Region box_region(std::size_t nx, std::size_t ny, std::size_t x0, std::size_t y0, std::size_t x1, std::size_t y1);

/// Separable blur with kernel exp(-r^2 / (2 sigma^2)), sigma in samples,
/// zero outside the grid. sigma = 0 returns the input.
RealGrid gaussian_blur(const RealGrid& grid, double sigma);

/// Pearson correlation of two grids, optionally restricted to a region.
double normalized_cross_correlation(const RealGrid& a, const RealGrid& b);
double normalized_cross_correlation(const RealGrid& a, const RealGrid& b, const Region& region);

/// Sum |grad G'|^2 / Sum G'^2 over the region, G' = G minus its region mean,
/// central differences (one-sided at the grid border). Per squared sample.
/// DegenerateInput if G' vanishes on the region.
double sharpness(const RealGrid& g, const Region& region);

struct SpeckleStats {
    double contrast = 0.0;        // sqrt of the region average of var(I) / <I>^2
    double hwhm = 0.0;            // meters, autocovariance half width at half maximum
    double coherence_width = 0.0; // meters, 1/e width of the autocovariance: hwhm / sqrt(ln 2)
    double ks_statistic = 0.0;    // point intensity vs exponential with the sample mean
    double ks_p_value = 0.0;
    std::size_t realizations = 0;
};

/// Streaming speckle statistics over an ensemble of intensity patterns.
/// Contrast pools per-sample ensemble moments over the region; the
/// autocovariance is sampled along x and y from a lattice of base points in
/// the region; the KS test uses the intensity at `probe` across realizations.
class SpeckleAccumulator {
public:
    SpeckleAccumulator(const GridSpec& grid, const Region& region, std::size_t max_lag, std::size_t probe_x,
                       std::size_t probe_y, std::size_t base_stride = 4);

    void add(const RealGrid& intensity);
    /// InsufficientData below 100 realizations or when the region spans fewer
    /// than 50 x 50 coherence cells of the measured width. A field whose
    /// contrast is below 1e-6 reports zero widths and KS statistic 1.
    SpeckleStats result() const;
    /// Normalized autocovariance at lags 0..max_lag, x and y averaged.
    std::vector<double> autocovariance() const;
    std::size_t count() const noexcept { return n_; }
    std::span<const double> probe_samples() const noexcept { return probe_; }

private:
    GridSpec grid_;
    Region region_;
    std::size_t max_lag_;
    std::size_t probe_index_;
    std::vector<std::size_t> region_index_;
    std::vector<std::size_t> partner_index_;
    std::vector<double> sum_, sum_sq_;
    std::vector<std::size_t> bases_;
    // Per base point, lag and axis: sum of I(b) I(b + lag).
    std::vector<double> pair_ab_;
    std::vector<double> probe_;
    std::size_t n_ = 0;
};

/// One-sample Kolmogorov-Smirnov test against the exponential law with the
/// sample mean. Returns {D, p} from the asymptotic Kolmogorov distribution.
std::pair<double, double> ks_exponential(std::span<const double> samples);

/// Survival function of the Kolmogorov distribution, P(K > x).
double kolmogorov_survival(double x);

/// Pearson chi-square over equal-width bins on [lo, hi) against a uniform law;
/// returns {statistic, p-value} with bins - 1 degrees of freedom.
std::pair<double, double> chi_square_uniform(std::span<const double> samples, double lo, double hi, std::size_t bins);

struct SnrPoint {
    std::size_t n = 0;
    double snr = 0.0;
};

struct SnrCurve {
    std::vector<SnrPoint> points;
    double slope = 0.0; // d log SNR / d log N
    double intercept = 0.0;
    double n_s = 0.0;   // object open area / (pi dx^2 / 4)
};

/// Support mean over background sd. Background: illuminated samples (<I> at
/// least half its maximum) farther than `margin` samples from the support.
double snr(const ReconstructionResult& result, const Region& support, double margin);

/// Least-squares line through (log N, log SNR); needs two or more points with SNR > 0.
std::pair<double, double> loglog_fit(const std::vector<SnrPoint>& points);

/// Reconstructs at the object plane with the first N records for every N in
/// `counts` (one pass) and fits the SNR law. InsufficientData if a count
/// exceeds the records.
SnrCurve snr_curve(const RecordSet& records, const TransmissionObject& object, std::vector<std::size_t> counts,
                   const RunOptions& options = {});

/// SNR law from snapshots already taken (e.g. checkpoints of a simulation).
SnrCurve snr_curve_from(const std::vector<ReconstructionResult>& snapshots, const TransmissionObject& object,
                        double wavelength, double waist);

} // namespace ghost
