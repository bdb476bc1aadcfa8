#include "ghost/analysis.hpp"

#include "ghost/error.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace ghost {

namespace {

constexpr double kPi = std::numbers::pi;

void require_same(const Region& region, std::size_t nx, std::size_t ny)
{
    if (region.nx != nx || region.ny != ny) {
        throw Error(ErrorKind::ShapeMismatch, "region and grid shapes differ");
    }
}

std::vector<double> blur_axis(const std::vector<double>& in, std::size_t nx, std::size_t ny, bool along_x,
                              const std::vector<double>& kernel)
{
    const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
    std::vector<double> out(in.size(), 0.0);
    const auto n = static_cast<std::ptrdiff_t>(along_x ? nx : ny);
    for (std::size_t a = 0; a < (along_x ? ny : nx); ++a) {
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
                const std::ptrdiff_t j = i + k;
                if (j < 0 || j >= n) {
                    continue;
                }
                const std::size_t idx = along_x ? a * nx + static_cast<std::size_t>(j) : static_cast<std::size_t>(j) * nx + a;
                acc += kernel[static_cast<std::size_t>(k + radius)] * in[idx];
            }
            const std::size_t o = along_x ? a * nx + static_cast<std::size_t>(i) : static_cast<std::size_t>(i) * nx + a;
            out[o] = acc;
        }
    }
    return out;
}

double region_mean(const RealGrid& g, const Region& region)
{
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        if (region.inside[i]) {
            sum += g.values[i];
            ++count;
        }
    }
    return count ? sum / static_cast<double>(count) : 0.0;
}

} // namespace

ResolutionReport theoretical_resolution(double wavelength, double waist, double z)
{
    if (!(wavelength > 0.0) || !(waist > 0.0) || !(z > 0.0) || !std::isfinite(wavelength) || !std::isfinite(waist) ||
        !std::isfinite(z)) {
        throw Error(ErrorKind::InvalidParameter, "wavelength, waist and distance must be positive");
    }
    ResolutionReport r;
    r.dx = wavelength * z / (kPi * waist);
    r.dz = 2.0 * kPi * r.dx * r.dx / wavelength;
    r.dk = 1.0 / waist;
    r.product = r.dx * r.dk;
    return r;
}

std::size_t Region::count() const
{
    return static_cast<std::size_t>(std::count(inside.begin(), inside.end(), std::uint8_t{1}));
}

Region support_region(const TransmissionObject& object)
{
    Region r(object.grid.nx, object.grid.ny);
    r.inside = object.support;
    return r;
}

Region dilate(const Region& region, double radius)
{
    if (radius <= 0.0) {
        return region;
    }
    const auto reach = static_cast<std::ptrdiff_t>(std::floor(radius));
    std::vector<std::pair<std::ptrdiff_t, std::ptrdiff_t>> offsets;
    for (std::ptrdiff_t dy = -reach; dy <= reach; ++dy) {
        for (std::ptrdiff_t dx = -reach; dx <= reach; ++dx) {
            if (static_cast<double>(dx * dx + dy * dy) <= radius * radius) {
                offsets.emplace_back(dx, dy);
            }
        }
    }
    Region out(region.nx, region.ny);
    const auto nx = static_cast<std::ptrdiff_t>(region.nx);
    const auto ny = static_cast<std::ptrdiff_t>(region.ny);
    for (std::ptrdiff_t y = 0; y < ny; ++y) {
        for (std::ptrdiff_t x = 0; x < nx; ++x) {
            if (!region.inside[static_cast<std::size_t>(y * nx + x)]) {
                continue;
            }
            for (const auto& [dx, dy] : offsets) {
                const auto xx = x + dx;
                const auto yy = y + dy;
                if (xx >= 0 && xx < nx && yy >= 0 && yy < ny) {
                    out.inside[static_cast<std::size_t>(yy * nx + xx)] = 1;
                }
            }
        }
    }
    return out;
}

Region complement(const Region& region)
{
    Region out = region;
    for (auto& v : out.inside) {
        v = v ? 0 : 1;
    }
    return out;
}

Region intersect(const Region& a, const Region& b)
{
    require_same(b, a.nx, a.ny);
    Region out = a;
    for (std::size_t i = 0; i < out.inside.size(); ++i) {
        out.inside[i] = a.inside[i] && b.inside[i] ? 1 : 0;
    }
    return out;
}

Region threshold_region(const RealGrid& values, double fraction)
{
    Region out(values.nx, values.ny);
    if (values.values.empty()) {
        return out;
    }
    const double peak = *std::max_element(values.values.begin(), values.values.end());
    for (std::size_t i = 0; i < values.values.size(); ++i) {
        out.inside[i] = values.values[i] >= fraction * peak ? 1 : 0;
    }
    return out;
}

Region box_region(std::size_t nx, std::size_t ny, std::size_t x0, std::size_t y0, std::size_t x1, std::size_t y1)
{
    Region out(nx, ny);
    for (std::size_t y = y0; y < std::min(y1, ny); ++y) {
        for (std::size_t x = x0; x < std::min(x1, nx); ++x) {
            out.inside[y * nx + x] = 1;
        }
    }
    return out;
}

RealGrid gaussian_blur(const RealGrid& grid, double sigma)
{
    if (sigma < 0.0 || !std::isfinite(sigma)) {
        throw Error(ErrorKind::InvalidParameter, "blur width must be non-negative");
    }
    if (sigma == 0.0) {
        return grid;
    }
    const auto radius = static_cast<std::size_t>(std::ceil(4.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double total = 0.0;
    for (std::size_t i = 0; i < kernel.size(); ++i) {
        const double d = static_cast<double>(i) - static_cast<double>(radius);
        kernel[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        total += kernel[i];
    }
    for (auto& k : kernel) {
        k /= total;
    }
    RealGrid out(grid.nx, grid.ny);
    out.values = blur_axis(blur_axis(grid.values, grid.nx, grid.ny, true, kernel), grid.nx, grid.ny, false, kernel);
    return out;
}

double normalized_cross_correlation(const RealGrid& a, const RealGrid& b)
{
    return normalized_cross_correlation(a, b, Region(a.nx, a.ny, true));
}

double normalized_cross_correlation(const RealGrid& a, const RealGrid& b, const Region& region)
{
    if (a.nx != b.nx || a.ny != b.ny) {
        throw Error(ErrorKind::ShapeMismatch, "NCC needs equal grid shapes");
    }
    require_same(region, a.nx, a.ny);
    const double ma = region_mean(a, region);
    const double mb = region_mean(b, region);
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        if (!region.inside[i]) {
            continue;
        }
        const double da = a.values[i] - ma;
        const double db = b.values[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (!(saa > 0.0) || !(sbb > 0.0)) {
        throw Error(ErrorKind::DegenerateInput, "NCC of a constant grid is undefined");
    }
    return sab / std::sqrt(saa * sbb);
}

double sharpness(const RealGrid& g, const Region& region)
{
    require_same(region, g.nx, g.ny);
    if (g.nx < 2 || g.ny < 2) {
        throw Error(ErrorKind::DegenerateInput, "sharpness needs at least 2 x 2 samples");
    }
    const double mean = region_mean(g, region);
    const std::size_t nx = g.nx;
    const std::size_t ny = g.ny;
    double grad = 0.0;
    double energy = 0.0;
    for (std::size_t y = 0; y < ny; ++y) {
        for (std::size_t x = 0; x < nx; ++x) {
            if (!region(x, y)) {
                continue;
            }
            const std::size_t xl = x == 0 ? x : x - 1;
            const std::size_t xr = x + 1 == nx ? x : x + 1;
            const std::size_t yl = y == 0 ? y : y - 1;
            const std::size_t yr = y + 1 == ny ? y : y + 1;
            const double gx = (g(xr, y) - g(xl, y)) / static_cast<double>(xr - xl);
            const double gy = (g(x, yr) - g(x, yl)) / static_cast<double>(yr - yl);
            grad += gx * gx + gy * gy;
            const double v = g(x, y) - mean;
            energy += v * v;
        }
    }
    const double scale = std::max(std::abs(mean), 1e-300);
    if (!(energy > 1e-28 * scale * scale * static_cast<double>(region.count())) || energy == 0.0) {
        throw Error(ErrorKind::DegenerateInput, "G is constant over the region");
    }
    return grad / energy;
}

SpeckleAccumulator::SpeckleAccumulator(const GridSpec& grid, const Region& region, std::size_t max_lag,
                                       std::size_t probe_x, std::size_t probe_y, std::size_t base_stride)
    : grid_(grid), region_(region), max_lag_(max_lag), probe_index_(probe_y * grid.nx + probe_x)
{
    require_same(region, grid.nx, grid.ny);
    if (probe_x >= grid.nx || probe_y >= grid.ny) {
        throw Error(ErrorKind::InvalidParameter, "probe point lies outside the grid");
    }
    if (max_lag < 1 || base_stride < 1) {
        throw Error(ErrorKind::InvalidParameter, "max lag and base stride must be >= 1");
    }
    for (std::size_t i = 0; i < region.inside.size(); ++i) {
        if (region.inside[i]) {
            region_index_.push_back(i);
        }
    }
    if (region_index_.empty()) {
        throw Error(ErrorKind::InsufficientData, "speckle region is empty");
    }
    sum_.assign(grid.size(), 0.0);
    sum_sq_.assign(grid.size(), 0.0);
    for (std::size_t y = 0; y + max_lag < grid.ny; y += base_stride) {
        for (std::size_t x = 0; x + max_lag < grid.nx; x += base_stride) {
            if (region(x, y) && region(x + max_lag, y) && region(x, y + max_lag)) {
                bases_.push_back(y * grid.nx + x);
            }
        }
    }
    pair_ab_.assign(bases_.size() * (max_lag + 1) * 2, 0.0);
    // Lagged partners may fall outside the region; their moments are tracked too.
    std::vector<std::uint8_t> partner(grid.size(), 0);
    for (const auto b : bases_) {
        for (std::size_t l = 1; l <= max_lag; ++l) {
            for (const std::size_t j : {b + l, b + l * grid.nx}) {
                if (!region.inside[j]) {
                    partner[j] = 1;
                }
            }
        }
    }
    for (std::size_t i = 0; i < partner.size(); ++i) {
        if (partner[i]) {
            partner_index_.push_back(i);
        }
    }
}

void SpeckleAccumulator::add(const RealGrid& intensity)
{
    if (intensity.nx != grid_.nx || intensity.ny != grid_.ny) {
        throw Error(ErrorKind::GridMismatch, "intensity grid does not match the speckle accumulator");
    }
    const auto& v = intensity.values;
    for (const auto i : region_index_) {
        sum_[i] += v[i];
        sum_sq_[i] += v[i] * v[i];
    }
    for (const auto i : partner_index_) {
        sum_[i] += v[i];
        sum_sq_[i] += v[i] * v[i];
    }
    const std::size_t stride = (max_lag_ + 1) * 2;
    for (std::size_t k = 0; k < bases_.size(); ++k) {
        const std::size_t b = bases_[k];
        double* out = pair_ab_.data() + k * stride;
        for (std::size_t l = 0; l <= max_lag_; ++l) {
            out[2 * l] += v[b] * v[b + l];
            out[2 * l + 1] += v[b] * v[b + l * grid_.nx];
        }
    }
    probe_.push_back(v[probe_index_]);
    ++n_;
}

std::vector<double> SpeckleAccumulator::autocovariance() const
{
    if (n_ < 2) {
        throw Error(ErrorKind::InsufficientData, "autocovariance needs at least 2 realizations");
    }
    const double n = static_cast<double>(n_);
    auto variance = [&](std::size_t i) {
        const double m = sum_[i] / n;
        return std::max(sum_sq_[i] / n - m * m, 0.0);
    };
    std::vector<double> acc(max_lag_ + 1, 0.0);
    std::vector<std::size_t> used(max_lag_ + 1, 0);
    const std::size_t stride = (max_lag_ + 1) * 2;
    for (std::size_t k = 0; k < bases_.size(); ++k) {
        const std::size_t b = bases_[k];
        const double mb = sum_[b] / n;
        const double vb = variance(b);
        for (std::size_t l = 0; l <= max_lag_; ++l) {
            for (int axis = 0; axis < 2; ++axis) {
                const std::size_t j = axis == 0 ? b + l : b + l * grid_.nx;
                const double vj = variance(j);
                if (!(vb > 0.0) || !(vj > 0.0)) {
                    continue;
                }
                const double cov = pair_ab_[k * stride + 2 * l + static_cast<std::size_t>(axis)] / n - mb * (sum_[j] / n);
                acc[l] += cov / std::sqrt(vb * vj);
                ++used[l];
            }
        }
    }
    for (std::size_t l = 0; l <= max_lag_; ++l) {
        acc[l] = used[l] ? acc[l] / static_cast<double>(used[l]) : 0.0;
    }
    return acc;
}

SpeckleStats SpeckleAccumulator::result() const
{
    if (n_ < 100) {
        throw Error(ErrorKind::InsufficientData,
                    "speckle statistics need at least 100 realizations, have " + std::to_string(n_));
    }
    if (bases_.empty()) {
        throw Error(ErrorKind::InsufficientData, "region too small for the requested autocovariance lags");
    }
    SpeckleStats s;
    s.realizations = n_;
    const double n = static_cast<double>(n_);
    double ratio = 0.0;
    std::size_t counted = 0;
    for (const auto i : region_index_) {
        const double m = sum_[i] / n;
        if (!(m > 0.0)) {
            continue;
        }
        const double var = (sum_sq_[i] - n * m * m) / (n - 1.0);
        ratio += var / (m * m);
        ++counted;
    }
    if (counted == 0) {
        throw Error(ErrorKind::InsufficientData, "speckle region is dark");
    }
    s.contrast = std::sqrt(std::max(ratio / static_cast<double>(counted), 0.0));
    if (s.contrast < 1e-6) {
        // Deterministic illumination up to rounding: no speckle, so no width and no exponential law.
        s.ks_statistic = 1.0;
        return s;
    }

    const auto c = autocovariance();
    std::size_t l = 1;
    while (l <= max_lag_ && c[l] >= 0.5) {
        ++l;
    }
    if (l > max_lag_) {
        throw Error(ErrorKind::InsufficientData, "autocovariance stays above one half within the maximum lag");
    }
    const double frac = (c[l - 1] - 0.5) / (c[l - 1] - c[l]);
    s.hwhm = (static_cast<double>(l - 1) + frac) * grid_.pitch;
    s.coherence_width = s.hwhm / std::sqrt(std::log(2.0));

    const double cells =
        static_cast<double>(region_index_.size()) * grid_.pitch * grid_.pitch / (s.coherence_width * s.coherence_width);
    if (cells < 2500.0) {
        throw Error(ErrorKind::InsufficientData, "speckle region spans only " + std::to_string(cells) +
                                                     " coherence cells, need 50 x 50");
    }
    const auto [d, p] = ks_exponential(probe_);
    s.ks_statistic = d;
    s.ks_p_value = p;
    return s;
}

double kolmogorov_survival(double x)
{
    if (x <= 0.0) {
        return 1.0;
    }
    if (x < 0.3) {
        // The alternating series converges slowly here; use the dual (theta) form.
        const double t = kPi * kPi / (8.0 * x * x);
        double cdf = 0.0;
        for (int k = 1; k < 50; k += 2) {
            cdf += std::exp(-static_cast<double>(k * k) * t);
        }
        return 1.0 - std::sqrt(2.0 * kPi) / x * cdf;
    }
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sum += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-17) {
            break;
        }
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

std::pair<double, double> ks_exponential(std::span<const double> samples)
{
    if (samples.size() < 2) {
        throw Error(ErrorKind::InsufficientData, "KS test needs at least 2 samples");
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
    if (!(mean > 0.0)) {
        throw Error(ErrorKind::DegenerateInput, "exponential fit needs a positive mean");
    }
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = 1.0 - std::exp(-sorted[i] / mean);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    const double sqrt_n = std::sqrt(n);
    const double p = kolmogorov_survival((sqrt_n + 0.12 + 0.11 / sqrt_n) * d);
    return {d, p};
}

std::pair<double, double> chi_square_uniform(std::span<const double> samples, double lo, double hi, std::size_t bins)
{
    if (bins < 2 || samples.empty() || !(hi > lo)) {
        throw Error(ErrorKind::InvalidParameter, "chi-square needs >= 2 bins, samples and hi > lo");
    }
    std::vector<double> counts(bins, 0.0);
    for (const double v : samples) {
        if (v < lo || v >= hi) {
            throw Error(ErrorKind::InvalidParameter, "sample outside the histogram range");
        }
        const auto b = std::min(bins - 1, static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins)));
        counts[b] += 1.0;
    }
    const double expected = static_cast<double>(samples.size()) / static_cast<double>(bins);
    double stat = 0.0;
    for (const double c : counts) {
        stat += (c - expected) * (c - expected) / expected;
    }
    const boost::math::chi_squared dist(static_cast<double>(bins - 1));
    return {stat, boost::math::cdf(boost::math::complement(dist, stat))};
}

double snr(const ReconstructionResult& result, const Region& support, double margin)
{
    require_same(support, result.g.nx, result.g.ny);
    const auto illuminated = threshold_region(result.mean_intensity, 0.5);
    const auto background = intersect(illuminated, complement(dilate(support, margin)));
    if (background.count() < 16) {
        throw Error(ErrorKind::InsufficientData, "no illuminated background left outside the object");
    }
    if (support.count() == 0) {
        throw Error(ErrorKind::InsufficientData, "object support is empty");
    }
    const double signal = region_mean(result.g, support);
    const double bg_mean = region_mean(result.g, background);
    double ss = 0.0;
    for (std::size_t i = 0; i < result.g.values.size(); ++i) {
        if (background.inside[i]) {
            const double d = result.g.values[i] - bg_mean;
            ss += d * d;
        }
    }
    const double sd = std::sqrt(ss / static_cast<double>(background.count() - 1));
    if (!(sd > 0.0)) {
        throw Error(ErrorKind::DegenerateInput, "background of G has zero spread");
    }
    return std::max(signal / sd, 0.0);
}

std::pair<double, double> loglog_fit(const std::vector<SnrPoint>& points)
{
    std::vector<std::pair<double, double>> xy;
    for (const auto& p : points) {
        if (p.snr > 0.0 && p.n > 0) {
            xy.emplace_back(std::log(static_cast<double>(p.n)), std::log(p.snr));
        }
    }
    if (xy.size() < 2) {
        throw Error(ErrorKind::InsufficientData, "log-log fit needs two points with positive SNR");
    }
    double mx = 0.0;
    double my = 0.0;
    for (const auto& [x, y] : xy) {
        mx += x;
        my += y;
    }
    mx /= static_cast<double>(xy.size());
    my /= static_cast<double>(xy.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (const auto& [x, y] : xy) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if (!(sxx > 0.0)) {
        throw Error(ErrorKind::InsufficientData, "log-log fit needs distinct N values");
    }
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

SnrCurve snr_curve_from(const std::vector<ReconstructionResult>& snapshots, const TransmissionObject& object,
                        double wavelength, double waist)
{
    const auto res = theoretical_resolution(wavelength, waist, object.distance);
    const auto support = support_region(object);
    const double margin = 3.0 * res.dx / object.grid.pitch;
    SnrCurve curve;
    for (const auto& s : snapshots) {
        if (!curve.points.empty() && s.n <= curve.points.back().n) {
            throw Error(ErrorKind::InvalidParameter, "SNR snapshots must have strictly increasing N");
        }
        curve.points.push_back({s.n, snr(s, support, margin)});
    }
    const auto [slope, intercept] = loglog_fit(curve.points);
    curve.slope = slope;
    curve.intercept = intercept;
    curve.n_s = object.support_area() / (kPi * res.dx * res.dx / 4.0);
    return curve;
}

SnrCurve snr_curve(const RecordSet& records, const TransmissionObject& object, std::vector<std::size_t> counts,
                   const RunOptions& options)
{
    std::sort(counts.begin(), counts.end());
    counts.erase(std::unique(counts.begin(), counts.end()), counts.end());
    if (counts.empty() || counts.back() > records.records.size() || counts.front() < 2) {
        throw Error(ErrorKind::InsufficientData, "SNR counts must lie between 2 and the number of records (" +
                                                     std::to_string(records.records.size()) + ")");
    }
    RecordSet head = records;
    head.records.resize(counts.back());
    std::vector<ReconstructionResult> snaps;
    RunOptions opts = options;
    opts.checkpoints = counts;
    opts.on_checkpoint = [&](std::size_t, const std::vector<ReconstructionResult>& planes) {
        snaps.push_back(planes.front());
    };
    reconstruct_at(head, records.distance, opts);
    return snr_curve_from(snaps, object, records.arm.wavelength, records.arm.waist);
}

} // namespace ghost
