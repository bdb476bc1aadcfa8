#include "ghost/phase_retrieval.hpp"

#include "ghost/error.hpp"
#include "ghost/philox.hpp"
#include "ghost/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

namespace ghost {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Realization stream reserved for retrieval phases so they never collide with SLM masks.
constexpr std::uint64_t kRetrievalStream = 0xC0FFEE0000000000ULL;

void check_intensity(const RealGrid& g, const char* name)
{
    double total = 0.0;
    for (const double v : g.values) {
        if (!std::isfinite(v)) {
            throw Error(ErrorKind::NonFiniteInput, std::string(name) + " intensity has non-finite samples");
        }
        if (v < 0.0) {
            throw Error(ErrorKind::InvalidParameter, std::string(name) + " intensity has negative samples");
        }
        total += v;
    }
    if (!(total > 0.0)) {
        throw Error(ErrorKind::InvalidParameter, std::string(name) + " intensity carries no energy");
    }
}

void check_problem(const RetrievalProblem& p)
{
    if (p.near.nx != p.far.nx || p.near.ny != p.far.ny || p.near.nx != p.grid.nx || p.near.ny != p.grid.ny) {
        throw Error(ErrorKind::ShapeMismatch, "near and far intensities must share the problem grid");
    }
    if (p.grid.nx != p.grid.ny) {
        throw Error(ErrorKind::ShapeMismatch, "phase retrieval needs a square grid");
    }
    check_intensity(p.near, "near-field");
    check_intensity(p.far, "far-field");
    if (p.max_iterations < 1) {
        throw Error(ErrorKind::InvalidParameter, "need at least one iteration");
    }
}

RetrievalResult run(const RetrievalProblem& p, std::span<const Complex> initial)
{
    const std::size_t n = p.grid.nx;
    const std::size_t size = n * n;
    std::vector<double> near_amp(size);
    std::vector<double> far_amp(size);
    double far_total = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
        near_amp[i] = std::sqrt(p.near.values[i]);
        far_amp[i] = std::sqrt(p.far.values[i]);
        far_total += p.far.values[i];
    }

    const CenteredDft dft(n);
    AlignedBuffer scratch;
    std::vector<Complex> g(size);
    for (std::size_t i = 0; i < size; ++i) {
        g[i] = near_amp[i] * std::polar(1.0, std::arg(initial[i]));
    }

    RetrievalResult res;
    for (std::size_t k = 0; k < p.max_iterations; ++k) {
        dft.forward(g, scratch);
        double err = 0.0;
        for (std::size_t i = 0; i < size; ++i) {
            const double m = std::abs(g[i]);
            err += (m - far_amp[i]) * (m - far_amp[i]);
            g[i] = far_amp[i] * std::polar(1.0, std::arg(g[i]));
        }
        dft.backward(g, scratch);
        for (std::size_t i = 0; i < size; ++i) {
            g[i] = near_amp[i] * std::polar(1.0, std::arg(g[i]));
        }
        res.error_trace.push_back(std::sqrt(err / far_total));
        if (res.error_trace.back() < p.tolerance) {
            res.converged = true;
            break;
        }
    }
    res.estimate.grid = p.grid;
    res.estimate.samples = std::move(g);
    return res;
}

std::vector<Complex> start_field(const RetrievalProblem& p, PhaseInit init, std::uint64_t seed, unsigned restart)
{
    std::vector<Complex> out(p.grid.size(), Complex(1.0, 0.0));
    if (init == PhaseInit::Random || restart > 0) {
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = std::polar(1.0, kTwoPi * keyed_uniform(seed, kRetrievalStream + restart, i));
        }
    }
    return out;
}

} // namespace

RetrievalResult gerchberg_saxton(const RetrievalProblem& problem, std::span<const Complex> initial)
{
    check_problem(problem);
    if (initial.size() != problem.grid.size()) {
        throw Error(ErrorKind::ShapeMismatch, "initial field does not match the problem grid");
    }
    for (const auto& v : initial) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw Error(ErrorKind::NonFiniteInput, "initial field has non-finite samples");
        }
    }
    auto res = run(problem, initial);
    res.restart_errors = {res.error_trace.back()};
    return res;
}

RetrievalResult gerchberg_saxton(const RetrievalProblem& problem, const RetrievalOptions& options)
{
    check_problem(problem);
    const unsigned restarts = std::max(1u, options.restarts);
    std::vector<RetrievalResult> results(restarts);
    auto work = [&](unsigned first, unsigned step) {
        for (unsigned r = first; r < restarts; r += step) {
            results[r] = run(problem, start_field(problem, options.init, options.seed, r));
        }
    };
    const unsigned threads = std::min(restarts, std::max(1u, options.threads));
    if (threads == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(work, t, threads);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    unsigned best = 0;
    std::vector<double> finals;
    for (unsigned r = 0; r < restarts; ++r) {
        finals.push_back(results[r].error_trace.back());
        if (finals[r] < finals[best]) {
            best = r;
        }
    }
    auto out = std::move(results[best]);
    out.restart = best;
    out.restart_errors = std::move(finals);
    return out;
}

RetrievalProblem extract_intensities(const ReconstructionResult& gi, const ReconstructionResult& gd)
{
    if (gi.plane.fourier) {
        throw Error(ErrorKind::PlaneMismatch, "the near-field input must be a Fresnel-plane reconstruction");
    }
    if (!gd.plane.fourier) {
        throw Error(ErrorKind::PlaneMismatch, "the far-field input must be a Fourier-plane reconstruction");
    }
    if (gi.fingerprint != gd.fingerprint) {
        throw Error(ErrorKind::FingerprintMismatch,
                    "GI (" + gi.fingerprint + ") and GD (" + gd.fingerprint + ") come from different reference arms");
    }
    if (gi.grid.nx != gi.grid.ny) {
        throw Error(ErrorKind::ShapeMismatch, "phase retrieval needs a square GI grid");
    }
    if (gi.g.nx != gi.grid.nx || gi.g.ny != gi.grid.ny || gd.g.nx != gd.grid.nx || gd.g.ny != gd.grid.ny) {
        throw Error(ErrorKind::ShapeMismatch, "reconstruction grid does not match its samples");
    }

    RetrievalProblem p;
    p.grid = gi.grid;
    p.grid.x0 = 0.0;
    p.grid.y0 = 0.0;
    auto clamp_normalize = [](RealGrid g) {
        double total = 0.0;
        for (auto& v : g.values) {
            if (!std::isfinite(v)) {
                throw Error(ErrorKind::NonFiniteInput, "correlation pattern has non-finite samples");
            }
            v = std::max(v, 0.0);
            total += v;
        }
        if (!(total > 0.0)) {
            throw Error(ErrorKind::DegenerateInput, "correlation pattern is non-positive everywhere");
        }
        for (auto& v : g.values) {
            v /= total;
        }
        return g;
    };
    p.near = clamp_normalize(gi.g);

    const std::size_t n = gi.grid.nx;
    const double dk = 2.0 * std::numbers::pi / gi.grid.extent_x();
    RealGrid far(n, n);
    if (gd.grid.nx == n && gd.grid.ny == n && std::abs(gd.grid.pitch - dk) <= 1e-12 * dk) {
        far.values = gd.g.values;
    } else {
        // Bilinear resampling onto k = (i - n/2) dk; zero outside the GD window.
        auto sample = [&](double kx, double ky) {
            const double fx = kx / gd.grid.pitch + static_cast<double>(gd.grid.nx / 2);
            const double fy = ky / gd.grid.pitch + static_cast<double>(gd.grid.ny / 2);
            if (fx < 0.0 || fy < 0.0 || fx > static_cast<double>(gd.grid.nx - 1) ||
                fy > static_cast<double>(gd.grid.ny - 1)) {
                return 0.0;
            }
            const auto x0 = std::min(static_cast<std::size_t>(fx), gd.grid.nx - 2);
            const auto y0 = std::min(static_cast<std::size_t>(fy), gd.grid.ny - 2);
            const double ax = fx - static_cast<double>(x0);
            const double ay = fy - static_cast<double>(y0);
            return (1 - ax) * (1 - ay) * gd.g(x0, y0) + ax * (1 - ay) * gd.g(x0 + 1, y0) +
                   (1 - ax) * ay * gd.g(x0, y0 + 1) + ax * ay * gd.g(x0 + 1, y0 + 1);
        };
        for (std::size_t iy = 0; iy < n; ++iy) {
            for (std::size_t ix = 0; ix < n; ++ix) {
                far(ix, iy) = sample((static_cast<double>(ix) - static_cast<double>(n / 2)) * dk,
                                     (static_cast<double>(iy) - static_cast<double>(n / 2)) * dk);
            }
        }
    }
    p.far = clamp_normalize(std::move(far));
    return p;
}

std::vector<Complex> align_global_phase(std::span<const Complex> estimate, std::span<const Complex> reference)
{
    if (estimate.size() != reference.size()) {
        throw Error(ErrorKind::ShapeMismatch, "cannot align fields of different sizes");
    }
    Complex overlap{};
    for (std::size_t i = 0; i < estimate.size(); ++i) {
        overlap += std::conj(estimate[i]) * reference[i];
    }
    const Complex phasor = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Complex(1.0, 0.0);
    std::vector<Complex> out(estimate.begin(), estimate.end());
    for (auto& v : out) {
        v *= phasor;
    }
    return out;
}

double aligned_error(std::span<const Complex> estimate, std::span<const Complex> reference, std::size_t nx,
                     std::size_t ny)
{
    if (estimate.size() != nx * ny || reference.size() != nx * ny) {
        throw Error(ErrorKind::ShapeMismatch, "field sizes do not match the stated grid");
    }
    const auto direct = align_global_phase(estimate, reference);
    std::vector<Complex> twin(estimate.size());
    for (std::size_t iy = 0; iy < ny; ++iy) {
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const std::size_t rx = (2 * (nx / 2) + nx - ix) % nx;
            const std::size_t ry = (2 * (ny / 2) + ny - iy) % ny;
            twin[iy * nx + ix] = std::conj(estimate[ry * nx + rx]);
        }
    }
    const auto flipped = align_global_phase(twin, reference);
    return std::min(relative_l2(direct, reference), relative_l2(flipped, reference));
}

} // namespace ghost
