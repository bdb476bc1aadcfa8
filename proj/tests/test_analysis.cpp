#include "ghost/analysis.hpp"
#include "ghost/config.hpp"
#include "ghost/error.hpp"
#include "ghost/propagation.hpp"
#include "ghost/reconstruct.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace ghost;

namespace {

constexpr double kHeNe = 632.8e-9;
constexpr double kPi = std::numbers::pi;

template <class F>
ErrorKind error_kind(F&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an exception");
    return ErrorKind::IoError;
}

// Circular Gaussian speckle with intensity autocovariance exp(-d^2 / c^2), c = sigma * sqrt(2) samples:
// white complex noise blurred by exp(-r^2 / (2 sigma^2)) has field correlation exp(-d^2 / (4 sigma^2)).
RealGrid synthetic_speckle(std::size_t n, double sigma, std::mt19937_64& rng)
{
    std::normal_distribution<double> g(0.0, 1.0);
    RealGrid re(n, n);
    RealGrid im(n, n);
    for (std::size_t i = 0; i < n * n; ++i) {
        re.values[i] = g(rng);
        im.values[i] = g(rng);
    }
    re = gaussian_blur(re, sigma);
    im = gaussian_blur(im, sigma);
    RealGrid out(n, n);
    for (std::size_t i = 0; i < n * n; ++i) {
        out.values[i] = re.values[i] * re.values[i] + im.values[i] * im.values[i];
    }
    return out;
}

} // namespace

TEST_CASE("resolution at the paper's 84 cm geometry")
{
    const auto r = theoretical_resolution(kHeNe, 740e-6, 0.84);
    CHECK(r.dx == doctest::Approx(230e-6).epsilon(0.15));
    CHECK(r.dx == doctest::Approx(kHeNe * 0.84 / (kPi * 740e-6)).epsilon(1e-15));
    CHECK(r.dz == doctest::Approx(0.50).epsilon(0.05));
    CHECK(r.dk == doctest::Approx(1.0 / 740e-6).epsilon(1e-15));
    CHECK(r.product == doctest::Approx(r.dx * r.dk).epsilon(1e-15));

    const auto twice = theoretical_resolution(kHeNe, 740e-6, 1.68);
    CHECK(twice.dx == doctest::Approx(2.0 * r.dx).epsilon(1e-14));
    CHECK(twice.dz == doctest::Approx(4.0 * r.dz).epsilon(1e-14));

    CHECK(error_kind([] { theoretical_resolution(0.0, 740e-6, 0.84); }) == ErrorKind::InvalidParameter);
    CHECK(error_kind([] { theoretical_resolution(kHeNe, -1.0, 0.84); }) == ErrorKind::InvalidParameter);
    CHECK(error_kind([] { theoretical_resolution(kHeNe, 740e-6, 0.0); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("resolution product is lambda z / (pi w0^2)")
{
    const auto r = theoretical_resolution(kHeNe, 740e-6, 0.11);
    CHECK(r.product == doctest::Approx(kHeNe * 0.11 / (kPi * 740e-6 * 740e-6)).epsilon(1e-14));
    CHECK(r.dx == doctest::Approx(29.94e-6).epsilon(1e-3));
}

TEST_CASE("regions: dilate, complement, intersect, threshold, box")
{
    Region dot(21, 21);
    dot.inside[10 * 21 + 10] = 1;
    const auto disk = dilate(dot, 3.0);
    // Lattice points with x^2 + y^2 <= 9.
    CHECK(disk.count() == 29);
    CHECK(disk(13, 10));
    CHECK(!disk(13, 11));
    CHECK(dilate(dot, 0.0).count() == 1);
    CHECK(complement(disk).count() == 21 * 21 - 29);
    const auto box = box_region(21, 21, 10, 0, 21, 21);
    CHECK(box.count() == 11 * 21);
    CHECK(intersect(disk, box).count() == 18);

    RealGrid g(4, 1);
    g.values = {0.0, 0.49, 0.5, 1.0};
    const auto t = threshold_region(g, 0.5);
    CHECK(!t(1, 0));
    CHECK(t(2, 0));
    CHECK(t(3, 0));
}

TEST_CASE("gaussian blur: identity at zero width, unit area and variance sigma^2")
{
    RealGrid g(41, 41);
    g(20, 20) = 1.0;
    CHECK(gaussian_blur(g, 0.0) == g);
    const double sigma = 2.5;
    const auto b = gaussian_blur(g, sigma);
    double total = 0.0;
    double m2 = 0.0;
    for (std::size_t iy = 0; iy < 41; ++iy) {
        for (std::size_t ix = 0; ix < 41; ++ix) {
            const double dx = static_cast<double>(ix) - 20.0;
            total += b(ix, iy);
            m2 += dx * dx * b(ix, iy);
        }
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m2 / total == doctest::Approx(sigma * sigma).epsilon(2e-3));
    CHECK(b(20, 20) > b(21, 20));
    CHECK(b(21, 20) == doctest::Approx(b(20, 21)).epsilon(1e-14));
}

TEST_CASE("normalized cross-correlation")
{
    RealGrid a(8, 8);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0.0, 1.0);
    for (auto& v : a.values) {
        v = n(rng);
    }
    RealGrid b = a;
    RealGrid c = a;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        b.values[i] = 3.0 * a.values[i] + 1.0;
        c.values[i] = -a.values[i];
    }
    CHECK(normalized_cross_correlation(a, a) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(normalized_cross_correlation(a, b) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(normalized_cross_correlation(a, c) == doctest::Approx(-1.0).epsilon(1e-14));
    const auto left = box_region(8, 8, 0, 0, 4, 8);
    RealGrid d = a;
    for (std::size_t iy = 0; iy < 8; ++iy) {
        for (std::size_t ix = 4; ix < 8; ++ix) {
            d(ix, iy) = n(rng);
        }
    }
    CHECK(normalized_cross_correlation(a, d, left) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(normalized_cross_correlation(a, d) < 0.99);
}

TEST_CASE("sharpness: constant input, affine invariance and a cosine")
{
    RealGrid flat(16, 16, 2.0);
    const Region all(16, 16, true);
    CHECK(error_kind([&] { sharpness(flat, all); }) == ErrorKind::DegenerateInput);

    // cos(k x) over whole periods, away from the border: central differences give sin^2(k).
    const std::size_t n = 40;
    const double k = 2.0 * kPi / 8.0;
    RealGrid wave(n, n);
    for (std::size_t iy = 0; iy < n; ++iy) {
        for (std::size_t ix = 0; ix < n; ++ix) {
            wave(ix, iy) = std::cos(k * static_cast<double>(ix));
        }
    }
    const auto inner = box_region(n, n, 4, 4, 36, 36);
    CHECK(sharpness(wave, inner) == doctest::Approx(std::sin(k) * std::sin(k)).epsilon(1e-12));

    RealGrid lifted = wave;
    for (auto& v : lifted.values) {
        v = -4.0 * v + 9.0;
    }
    CHECK(sharpness(lifted, inner) == doctest::Approx(sharpness(wave, inner)).epsilon(1e-12));

    // A wider blur of the same pattern is less sharp.
    RealGrid dot(n, n);
    dot(20, 20) = 1.0;
    const Region grid(n, n, true);
    CHECK(sharpness(gaussian_blur(dot, 2.0), grid) > sharpness(gaussian_blur(dot, 3.0), grid));
}

TEST_CASE("Kolmogorov survival function")
{
    CHECK(kolmogorov_survival(0.0) == 1.0);
    CHECK(kolmogorov_survival(1.358) == doctest::Approx(0.05).epsilon(0.01));
    CHECK(kolmogorov_survival(1.628) == doctest::Approx(0.01).epsilon(0.01));
    CHECK(kolmogorov_survival(0.5) == doctest::Approx(0.9639).epsilon(1e-3));
    // Both series branches agree where they meet.
    CHECK(kolmogorov_survival(0.2999999) == doctest::Approx(kolmogorov_survival(0.3)).epsilon(1e-6));
}

TEST_CASE("KS test accepts exponential samples and rejects uniform ones")
{
    std::mt19937_64 rng(21);
    std::exponential_distribution<double> e(0.37);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    std::vector<double> expo(5000);
    std::vector<double> flat(5000);
    for (std::size_t i = 0; i < expo.size(); ++i) {
        expo[i] = e(rng);
        flat[i] = u(rng);
    }
    CHECK(ks_exponential(expo).second > 0.01);
    CHECK(ks_exponential(flat).second < 1e-6);
}

TEST_CASE("chi-square against a uniform law")
{
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> flat(16000);
    std::vector<double> skew(16000);
    for (std::size_t i = 0; i < flat.size(); ++i) {
        flat[i] = u(rng);
        skew[i] = std::pow(u(rng), 1.1);
    }
    CHECK(chi_square_uniform(flat, 0.0, 1.0, 16).second > 0.01);
    CHECK(chi_square_uniform(skew, 0.0, 1.0, 16).second < 1e-6);
    // Four equal bins with counts 10, 10, 10, 30: statistic 20 on 3 degrees of freedom.
    std::vector<double> fixed;
    for (int b = 0; b < 4; ++b) {
        for (int i = 0; i < (b == 3 ? 30 : 10); ++i) {
            fixed.push_back(0.25 * b + 0.1);
        }
    }
    const auto [stat, p] = chi_square_uniform(fixed, 0.0, 1.0, 4);
    CHECK(stat == doctest::Approx(20.0));
    CHECK(p == doctest::Approx(1.6974e-4).epsilon(1e-3));
    CHECK(error_kind([&] { chi_square_uniform(fixed, 0.0, 0.5, 4); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("speckle statistics of synthetic Gaussian-correlated speckle")
{
    const std::size_t n = 192;
    const double sigma = 2.0;
    const double width = sigma * std::sqrt(2.0);
    const GridSpec grid{n, n, 1.0};
    const auto region = box_region(n, n, 16, 16, n - 16, n - 16);
    SpeckleAccumulator acc(grid, region, 12, n / 2, n / 2);
    std::mt19937_64 rng(3);
    for (int r = 0; r < 99; ++r) {
        acc.add(synthetic_speckle(n, sigma, rng));
    }
    CHECK(error_kind([&] { acc.result(); }) == ErrorKind::InsufficientData);
    for (int r = 0; r < 201; ++r) {
        acc.add(synthetic_speckle(n, sigma, rng));
    }
    const auto s = acc.result();
    MESSAGE("contrast " << s.contrast << " width " << s.coherence_width << " (model " << width << ")");
    CHECK(s.realizations == 300);
    CHECK(s.contrast == doctest::Approx(1.0).epsilon(0.05));
    CHECK(s.coherence_width == doctest::Approx(width).epsilon(0.08));
    const auto c = acc.autocovariance();
    CHECK(c[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c[2] == doctest::Approx(std::exp(-4.0 / (width * width))).epsilon(0.1));
}

TEST_CASE("speckle statistics need a region of 50 x 50 coherence cells")
{
    const std::size_t n = 64;
    SpeckleAccumulator acc(GridSpec{n, n, 1.0}, box_region(n, n, 8, 8, 56, 56), 12, 32, 32);
    std::mt19937_64 rng(4);
    for (int r = 0; r < 120; ++r) {
        acc.add(synthetic_speckle(n, 2.0, rng));
    }
    CHECK(error_kind([&] { acc.result(); }) == ErrorKind::InsufficientData);
}

TEST_CASE("an unmodulated beam shows no speckle")
{
    ReferenceArm arm;
    arm.seed = 1;
    arm.wavelength = kHeNe;
    arm.waist = 200e-6;
    arm.slm_pitch = 8e-6;
    arm.mask = {32, 32};
    arm.macro_factor = 3;
    arm.grid = GridSpec{128, 128, 8e-6};
    const auto beam = fresnel_propagate(make_gaussian_input(arm.grid, arm.waist, kHeNe), 0.05);
    const auto center = threshold_region(beam.intensity(), 0.5);
    SpeckleAccumulator acc(arm.grid, center, 8, 64, 64);
    for (int r = 0; r < 100; ++r) {
        acc.add(beam.intensity());
    }
    const auto s = acc.result();
    CHECK(s.contrast < 1e-6);
    CHECK(s.coherence_width == 0.0);
}

TEST_CASE("SNR: support mean over background spread, and the log-log fit")
{
    const std::size_t n = 64;
    ReconstructionResult res;
    res.g = RealGrid(n, n);
    res.mean_intensity = RealGrid(n, n, 1.0);
    const auto support = box_region(n, n, 28, 28, 36, 36);
    std::mt19937_64 rng(6);
    std::normal_distribution<double> noise(0.0, 0.1);
    for (std::size_t i = 0; i < n * n; ++i) {
        res.g.values[i] = (support.inside[i] ? 1.0 : 0.0) + noise(rng);
    }
    CHECK(snr(res, support, 4.0) == doctest::Approx(10.0).epsilon(0.05));
    RealGrid dark(n, n);
    res.mean_intensity = dark;
    res.mean_intensity(0, 0) = 1.0;
    CHECK(error_kind([&] { snr(res, support, 4.0); }) == ErrorKind::InsufficientData);

    std::vector<SnrPoint> pts;
    for (const std::size_t m : {100u, 400u, 1600u}) {
        pts.push_back({m, 0.3 * std::sqrt(static_cast<double>(m))});
    }
    const auto [slope, intercept] = loglog_fit(pts);
    CHECK(slope == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(intercept == doctest::Approx(std::log(0.3)).epsilon(1e-12));
    CHECK(error_kind([] { loglog_fit({{100, 1.0}}); }) == ErrorKind::InsufficientData);
}

TEST_CASE("SNR curve from records grows with N")
{
    ExperimentConfig c;
    c.waist = 200e-6;
    c.mask = {32, 32};
    c.grid = GridSpec{128, 128, 8e-6};
    c.distance = 0.03;
    c.object.slit_width = 40e-6;
    c.object.slit_separation = 160e-6;
    c.object.slit_height = 200e-6;
    c.realizations = 1600;
    const auto obj = make_object(c);
    RunOptions opt;
    opt.threads = 2;
    const auto run = run_gi(c, obj, opt);
    const auto curve = snr_curve(run.records, obj, {100, 400, 1600}, opt);
    REQUIRE(curve.points.size() == 3);
    CHECK(curve.points[1].snr > curve.points[0].snr);
    CHECK(curve.points[2].snr > curve.points[1].snr);
    CHECK(curve.slope == doctest::Approx(0.5).epsilon(0.3));
    const double dx = theoretical_resolution(c.wavelength, c.waist, c.distance).dx;
    CHECK(curve.n_s == doctest::Approx(obj.support_area() / (kPi * dx * dx / 4.0)).epsilon(1e-12));
    CHECK(error_kind([&] { snr_curve(run.records, obj, {100, 2000}, opt); }) == ErrorKind::InsufficientData);
}
