#include "ghost/error.hpp"
#include "ghost/phase_retrieval.hpp"
#include "ghost/propagation.hpp"
#include "ghost/scene.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace ghost;

namespace {

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

// Double slit on a 64 x 64 grid; the right half carries an extra phase step.
ComplexField slit_field(double phase)
{
    const GridSpec g{64, 64, 10e-6};
    const auto obj = make_double_slit(60e-6, 140e-6, 200e-6, g, 0.0);
    ComplexField t;
    t.grid = g;
    t.wavelength = 632.8e-9;
    t.samples = obj.samples;
    for (std::size_t iy = 0; iy < g.ny; ++iy) {
        for (std::size_t ix = g.nx / 2; ix < g.nx; ++ix) {
            t(ix, iy) *= std::polar(1.0, phase);
        }
    }
    return t;
}

RetrievalProblem problem_of(const ComplexField& t)
{
    RetrievalProblem p;
    p.grid = t.grid;
    p.near = t.intensity();
    p.far = fourier_plane(t).intensity();
    return p;
}

bool non_increasing(const std::vector<double>& trace)
{
    for (std::size_t k = 1; k < trace.size(); ++k) {
        if (trace[k] > trace[k - 1] * (1.0 + 1e-12) + 1e-15) {
            return false;
        }
    }
    return true;
}

ReconstructionResult fake_result(std::size_t n, double pitch, Plane plane, std::string fingerprint)
{
    ReconstructionResult r;
    r.grid = GridSpec{n, n, pitch};
    r.g = RealGrid(n, n, 1.0);
    r.mean_intensity = RealGrid(n, n, 1.0);
    r.plane = plane;
    r.n = 10;
    r.fingerprint = std::move(fingerprint);
    return r;
}

} // namespace

TEST_CASE("noiseless double slit with a phase step is recovered with a monotone error trace")
{
    const auto t = slit_field(1.0);
    auto p = problem_of(t);
    p.max_iterations = 200;
    p.tolerance = 1e-9;
    RetrievalOptions o;
    o.seed = 3;
    const auto r = gerchberg_saxton(p, o);
    CHECK(r.error_trace.size() <= 200);
    CHECK(non_increasing(r.error_trace));
    CHECK(r.error_trace.back() < 0.01 * r.error_trace.front());
    CHECK(aligned_error(r.estimate.samples, t.samples, 64, 64) < 0.05);
    // The near-plane projection is applied last, so the modulus is exact.
    for (std::size_t i = 0; i < t.samples.size(); ++i) {
        CHECK(std::abs(r.estimate.samples[i]) == doctest::Approx(std::abs(t.samples[i])).epsilon(1e-12));
    }
}

TEST_CASE("a real object is a fixed point of zero-phase start")
{
    const auto t = slit_field(0.0);
    auto p = problem_of(t);
    p.tolerance = 1e-9;
    RetrievalOptions o;
    o.init = PhaseInit::Zero;
    const auto r = gerchberg_saxton(p, o);
    CHECK(r.converged);
    CHECK(r.error_trace.size() == 1);
    CHECK(r.error_trace[0] < 1e-12);
    CHECK(aligned_error(r.estimate.samples, t.samples, 64, 64) < 1e-12);
}

TEST_CASE("explicit initial field equal to the truth converges immediately")
{
    const auto t = slit_field(2.0);
    auto p = problem_of(t);
    p.tolerance = 1e-9;
    const auto r = gerchberg_saxton(p, std::span<const Complex>(t.samples));
    CHECK(r.converged);
    CHECK(r.error_trace.size() == 1);
    REQUIRE(r.restart_errors.size() == 1);
    CHECK(r.restart_errors[0] == r.error_trace.back());
}

TEST_CASE("inconsistent moduli never converge but the trace stays non-increasing")
{
    const auto t = slit_field(1.0);
    auto p = problem_of(t);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.7, 1.3);
    for (auto& v : p.far.values) {
        v *= u(rng);
    }
    p.max_iterations = 60;
    p.tolerance = 1e-6;
    const auto r = gerchberg_saxton(p);
    CHECK_FALSE(r.converged);
    CHECK(r.error_trace.size() == 60);
    CHECK(non_increasing(r.error_trace));
    CHECK(r.error_trace.back() > 1e-3);
}

TEST_CASE("restarts keep the best final error and do not depend on the thread count")
{
    const auto t = slit_field(1.5);
    auto p = problem_of(t);
    p.max_iterations = 30;
    p.tolerance = 0.0;
    RetrievalOptions o;
    o.seed = 9;
    o.restarts = 4;
    const auto one = gerchberg_saxton(p, o);
    REQUIRE(one.restart_errors.size() == 4);
    for (const double e : one.restart_errors) {
        CHECK(one.restart_errors[one.restart] <= e);
    }
    CHECK(one.error_trace.back() == one.restart_errors[one.restart]);

    o.threads = 3;
    const auto three = gerchberg_saxton(p, o);
    CHECK(three.restart == one.restart);
    CHECK(three.restart_errors == one.restart_errors);
    CHECK(three.estimate.samples == one.estimate.samples);

    // Restart 0 of a multi-start run is the single-start run.
    o.restarts = 1;
    o.threads = 1;
    const auto single = gerchberg_saxton(p, o);
    CHECK(single.error_trace.back() == one.restart_errors[0]);
}

TEST_CASE("aligned error ignores the global phase and the conjugate twin")
{
    const auto t = slit_field(0.8);
    const std::size_t n = 64;
    std::vector<Complex> rotated(t.samples);
    for (auto& v : rotated) {
        v *= std::polar(1.0, 2.1);
    }
    CHECK(aligned_error(rotated, t.samples, n, n) < 1e-12);

    std::vector<Complex> twin(t.samples.size());
    for (std::size_t iy = 0; iy < n; ++iy) {
        for (std::size_t ix = 0; ix < n; ++ix) {
            const std::size_t rx = (n - ix) % n;
            const std::size_t ry = (n - iy) % n;
            twin[iy * n + ix] = std::conj(t.samples[ry * n + rx]) * std::polar(1.0, -0.4);
        }
    }
    CHECK(aligned_error(twin, t.samples, n, n) < 1e-12);
    // The twin has the same far-field modulus.
    ComplexField tw = t;
    tw.samples = twin;
    CHECK(relative_l2(fourier_plane(tw).intensity().span(), fourier_plane(t).intensity().span()) < 1e-12);

    std::vector<Complex> wrong(t.samples);
    for (std::size_t iy = 0; iy < n; ++iy) {
        for (std::size_t ix = n / 2; ix < n; ++ix) {
            wrong[iy * n + ix] *= std::polar(1.0, 1.0);
        }
    }
    CHECK(aligned_error(wrong, t.samples, n, n) > 0.2);

    const auto aligned = align_global_phase(rotated, t.samples);
    CHECK(relative_l2(aligned, t.samples) < 1e-12);
    CHECK(error_kind([&] { (void)aligned_error(rotated, t.samples, n, n + 1); }) == ErrorKind::ShapeMismatch);
}

TEST_CASE("bad retrieval problems are rejected")
{
    const auto t = slit_field(0.0);
    auto p = problem_of(t);
    auto bad = p;
    bad.far = RealGrid(32, 32, 1.0);
    CHECK(error_kind([&] { (void)gerchberg_saxton(bad); }) == ErrorKind::ShapeMismatch);
    bad = p;
    bad.near.values[5] = -1.0;
    CHECK(error_kind([&] { (void)gerchberg_saxton(bad); }) == ErrorKind::InvalidParameter);
    bad = p;
    bad.far.values[5] = std::nan("");
    CHECK(error_kind([&] { (void)gerchberg_saxton(bad); }) == ErrorKind::NonFiniteInput);
    bad = p;
    bad.far = RealGrid(64, 64, 0.0);
    CHECK(error_kind([&] { (void)gerchberg_saxton(bad); }) == ErrorKind::InvalidParameter);
    bad = p;
    bad.max_iterations = 0;
    CHECK(error_kind([&] { (void)gerchberg_saxton(bad); }) == ErrorKind::InvalidParameter);
    std::vector<Complex> short_init(10);
    CHECK(error_kind([&] { (void)gerchberg_saxton(p, std::span<const Complex>(short_init)); }) ==
          ErrorKind::ShapeMismatch);
}

TEST_CASE("extract_intensities clamps, normalizes and checks provenance")
{
    const std::size_t n = 8;
    const double pitch = 10e-6;
    const double dk = 2.0 * std::numbers::pi / (static_cast<double>(n) * pitch);
    auto gi = fake_result(n, pitch, Plane::fresnel(0.1), "arm");
    auto gd = fake_result(n, dk, Plane::fourier_plane(), "arm");
    gi.g.values[0] = -3.0;
    gi.g.values[1] = 5.0;
    gd.g.values[2] = -1.0;

    const auto p = extract_intensities(gi, gd);
    CHECK(p.grid.nx == n);
    CHECK(p.near.values[0] == 0.0);
    double near_total = 0.0;
    double far_total = 0.0;
    for (std::size_t i = 0; i < n * n; ++i) {
        near_total += p.near.values[i];
        far_total += p.far.values[i];
    }
    CHECK(near_total == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(far_total == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p.near.values[1] == doctest::Approx(5.0 * p.near.values[2]).epsilon(1e-14));
    CHECK(p.far.values[2] == 0.0);

    CHECK(error_kind([&] { (void)extract_intensities(gd, gi); }) == ErrorKind::PlaneMismatch);
    CHECK(error_kind([&] { (void)extract_intensities(gi, gi); }) == ErrorKind::PlaneMismatch);
    auto other = gd;
    other.fingerprint = "other-arm";
    CHECK(error_kind([&] { (void)extract_intensities(gi, other); }) == ErrorKind::FingerprintMismatch);
    auto dark = gi;
    dark.g = RealGrid(n, n, -1.0);
    CHECK(error_kind([&] { (void)extract_intensities(dark, gd); }) == ErrorKind::DegenerateInput);
}

TEST_CASE("extract_intensities resamples a finer GD grid onto the conjugate axes")
{
    const std::size_t n = 8;
    const double pitch = 10e-6;
    const double dk = 2.0 * std::numbers::pi / (static_cast<double>(n) * pitch);
    auto gi = fake_result(n, pitch, Plane::fresnel(0.1), "arm");
    // Twice as fine in k: target sample k = j dk lands on GD index 2 j exactly.
    auto gd = fake_result(2 * n, 0.5 * dk, Plane::fourier_plane(), "arm");
    for (std::size_t iy = 0; iy < 2 * n; ++iy) {
        for (std::size_t ix = 0; ix < 2 * n; ++ix) {
            gd.g(ix, iy) = 1.0 + static_cast<double>(ix) + 100.0 * static_cast<double>(iy);
        }
    }
    const auto p = extract_intensities(gi, gd);
    double raw_total = 0.0;
    for (std::size_t iy = 0; iy < n; ++iy) {
        for (std::size_t ix = 0; ix < n; ++ix) {
            raw_total += gd.g(2 * ix, 2 * iy);
        }
    }
    for (std::size_t iy = 0; iy < n; ++iy) {
        for (std::size_t ix = 0; ix < n; ++ix) {
            const double expected = gd.g(2 * ix, 2 * iy) / raw_total;
            CHECK(p.far(ix, iy) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}
