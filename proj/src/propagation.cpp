#include "ghost/propagation.hpp"

#include "ghost/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ghost {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kMaxQuadratureSide = 64;

// exp(i pi (offset * pitch)^2 / (lambda z)) on a cyclic array of length m,
// offsets m >= m/2 wrap to negative lags.
std::vector<Complex> chirp_row(std::size_t m, double pitch, double wavelength, double z)
{
    std::vector<Complex> k(m);
    const double a = kPi * pitch * pitch / (wavelength * z);
    for (std::size_t i = 0; i < m; ++i) {
        const double lag = i < m / 2 ? static_cast<double>(i) : static_cast<double>(i) - static_cast<double>(m);
        k[i] = std::polar(1.0, a * lag * lag);
    }
    return k;
}

std::vector<Complex> chirp_spectrum(std::size_t m, double pitch, double wavelength, double z, Complex scale)
{
    AlignedBuffer buf(m);
    const auto row = chirp_row(m, pitch, wavelength, z);
    std::copy(row.begin(), row.end(), buf.data());
    FftPlan::batch_1d(m, 1, FftDirection::Forward)->execute(buf);
    std::vector<Complex> spectrum(m);
    for (std::size_t i = 0; i < m; ++i) {
        spectrum[i] = buf[i] * scale;
    }
    return spectrum;
}

void multiply_rows(AlignedBuffer& buf, std::size_t rows, const std::vector<Complex>& kernel)
{
    const std::size_t m = kernel.size();
    for (std::size_t r = 0; r < rows; ++r) {
        Complex* row = buf.data() + r * m;
        for (std::size_t i = 0; i < m; ++i) {
            row[i] *= kernel[i];
        }
    }
}

void require_spatial(const ComplexField& input)
{
    if (input.domain != Domain::Spatial) {
        throw Error(ErrorKind::PlaneMismatch, "expected a spatial-domain field");
    }
}

} // namespace

SamplingReport check_sampling(const GridSpec& grid, double wavelength, double z, unsigned padding)
{
    SamplingReport report;
    const double extent = std::max(grid.extent_x(), grid.extent_y());
    if (z == 0.0) {
        report.fresnel_number = INFINITY;
        report.max_phase_step = 0.0;
        report.valid = true;
        report.messages.emplace_back("z = 0: identity, no propagation performed");
        return report;
    }
    const double padded = static_cast<double>(std::max<unsigned>(padding, 1)) * extent;
    report.fresnel_number = extent * extent / (4.0 * wavelength * std::abs(z));
    report.max_phase_step = 2.0 * kPi * grid.pitch * (0.5 * padded) / (wavelength * std::abs(z));
    report.valid = report.max_phase_step <= kPi;
    if (!report.valid) {
        std::ostringstream msg;
        msg << "Fresnel chirp undersampled: phase step " << report.max_phase_step
            << " rad/sample exceeds pi at the padded edge; increase |z| or reduce pitch or grid size";
        report.messages.push_back(msg.str());
    }
    return report;
}

FresnelPropagator::FresnelPropagator(const GridSpec& grid, double wavelength, double z, unsigned padding)
    : grid_(grid), wavelength_(wavelength), z_(z), mx_(grid.nx * padding), my_(grid.ny * padding)
{
    grid.validate();
    if (!(wavelength > 0.0)) {
        throw Error(ErrorKind::InvalidParameter, "wavelength must be positive");
    }
    if (padding < 2) {
        throw Error(ErrorKind::InvalidParameter, "two-FFT convolution needs padding >= 2");
    }
    if (z == 0.0) {
        return;
    }
    const auto report = check_sampling(grid, wavelength, z, padding);
    if (!report.valid) {
        throw Error(ErrorKind::SamplingViolation, report.messages.front());
    }
    // Continuous kernel amplitude 1/(i lambda z), times pitch^2 for the discrete sum,
    // times 1/m per axis for FFTW's unnormalized inverse.
    const Complex amplitude = grid.pitch * grid.pitch / (Complex(0.0, 1.0) * wavelength * z);
    kernel_x_ = chirp_spectrum(mx_, grid.pitch, wavelength, z, amplitude / static_cast<double>(mx_));
    kernel_y_ = chirp_spectrum(my_, grid.pitch, wavelength, z, Complex(1.0 / static_cast<double>(my_), 0.0));
    fwd_x_ = FftPlan::batch_1d(mx_, grid.ny, FftDirection::Forward);
    inv_x_ = FftPlan::batch_1d(mx_, grid.ny, FftDirection::Backward);
    fwd_y_ = FftPlan::batch_1d(my_, grid.nx, FftDirection::Forward);
    inv_y_ = FftPlan::batch_1d(my_, grid.nx, FftDirection::Backward);
}

FresnelPropagator::FresnelPropagator(const PropagationPlan& plan)
    : FresnelPropagator(plan.source, plan.wavelength, plan.z, plan.padding)
{
    if (plan.method != PropagationMethod::TwoFftConvolution) {
        throw Error(ErrorKind::InvalidParameter, "FresnelPropagator implements the two-FFT method only");
    }
}

void FresnelPropagator::check_input(const ComplexField& input) const
{
    require_spatial(input);
    if (!input.grid.same_shape(grid_) || input.grid.pitch != grid_.pitch) {
        throw Error(ErrorKind::GridMismatch, "field grid does not match the propagator grid");
    }
    if (input.wavelength != wavelength_) {
        throw Error(ErrorKind::InvalidParameter, "field wavelength does not match the propagator");
    }
}

void FresnelPropagator::convolve(const ComplexField& input, PropagationWorkspace& ws) const
{
    const std::size_t nx = grid_.nx;
    const std::size_t ny = grid_.ny;
    ws.rows.reserve(mx_ * ny);
    ws.cols.reserve(my_ * nx);

    // Pass 1: along x, one zero-padded row per field row.
    for (std::size_t iy = 0; iy < ny; ++iy) {
        Complex* row = ws.rows.data() + iy * mx_;
        std::copy_n(input.samples.data() + iy * nx, nx, row);
        std::fill(row + nx, row + mx_, Complex{});
    }
    fwd_x_->execute(ws.rows);
    multiply_rows(ws.rows, ny, kernel_x_);
    inv_x_->execute(ws.rows);

    // Pass 2: transpose the kept samples so columns become contiguous rows.
    constexpr std::size_t kBlock = 32;
    for (std::size_t by = 0; by < ny; by += kBlock) {
        const std::size_t ey = std::min(by + kBlock, ny);
        for (std::size_t bx = 0; bx < nx; bx += kBlock) {
            const std::size_t ex = std::min(bx + kBlock, nx);
            for (std::size_t iy = by; iy < ey; ++iy) {
                for (std::size_t ix = bx; ix < ex; ++ix) {
                    ws.cols[ix * my_ + iy] = ws.rows[iy * mx_ + ix];
                }
            }
        }
    }
    for (std::size_t ix = 0; ix < nx; ++ix) {
        std::fill(ws.cols.data() + ix * my_ + ny, ws.cols.data() + (ix + 1) * my_, Complex{});
    }
    fwd_y_->execute(ws.cols);
    multiply_rows(ws.cols, nx, kernel_y_);
    inv_y_->execute(ws.cols);
}

void FresnelPropagator::apply(const ComplexField& input, ComplexField& output, PropagationWorkspace& ws) const
{
    check_input(input);
    output.grid = input.grid;
    output.wavelength = input.wavelength;
    output.domain = Domain::Spatial;
    output.z = input.z + z_;
    if (z_ == 0.0) {
        output.samples = input.samples;
        return;
    }
    convolve(input, ws);
    const std::size_t nx = grid_.nx;
    const std::size_t ny = grid_.ny;
    output.samples.resize(nx * ny);
    for (std::size_t ix = 0; ix < nx; ++ix) {
        const Complex* col = ws.cols.data() + ix * my_;
        for (std::size_t iy = 0; iy < ny; ++iy) {
            output.samples[iy * nx + ix] = col[iy];
        }
    }
}

void FresnelPropagator::apply_intensity(const ComplexField& input, RealGrid& intensity, PropagationWorkspace& ws) const
{
    check_input(input);
    const std::size_t nx = grid_.nx;
    const std::size_t ny = grid_.ny;
    intensity.nx = nx;
    intensity.ny = ny;
    intensity.values.resize(nx * ny);
    if (z_ == 0.0) {
        for (std::size_t i = 0; i < input.samples.size(); ++i) {
            intensity.values[i] = std::norm(input.samples[i]);
        }
        return;
    }
    convolve(input, ws);
    for (std::size_t ix = 0; ix < nx; ++ix) {
        const Complex* col = ws.cols.data() + ix * my_;
        for (std::size_t iy = 0; iy < ny; ++iy) {
            intensity.values[iy * nx + ix] = std::norm(col[iy]);
        }
    }
}

ComplexField FresnelPropagator::operator()(const ComplexField& input) const
{
    PropagationWorkspace ws;
    ComplexField out;
    apply(input, out, ws);
    return out;
}

ComplexField fresnel_propagate(const ComplexField& input, double z, unsigned padding)
{
    require_spatial(input);
    if (z == 0.0) {
        return input;
    }
    return FresnelPropagator(input.grid, input.wavelength, z, padding)(input);
}

ComplexField propagate(const ComplexField& input, const PropagationPlan& plan)
{
    if (plan.method == PropagationMethod::DirectQuadrature) {
        return direct_quadrature_propagate(input, plan.z);
    }
    if (plan.z == 0.0) {
        require_spatial(input);
        return input;
    }
    return FresnelPropagator(plan)(input);
}

ComplexField direct_quadrature_propagate(const ComplexField& input, double z)
{
    require_spatial(input);
    const auto& g = input.grid;
    if (g.nx > kMaxQuadratureSide || g.ny > kMaxQuadratureSide) {
        throw Error(ErrorKind::GridTooLarge, "direct quadrature is limited to 64x64 grids");
    }
    if (z == 0.0) {
        return input;
    }
    ComplexField out = input;
    out.z = input.z + z;
    const Complex amplitude = g.pitch * g.pitch / (Complex(0.0, 1.0) * input.wavelength * z);
    const double a = kPi / (input.wavelength * z);
    for (std::size_t iy = 0; iy < g.ny; ++iy) {
        for (std::size_t ix = 0; ix < g.nx; ++ix) {
            Complex acc{};
            for (std::size_t sy = 0; sy < g.ny; ++sy) {
                const double eta = g.y(iy) - g.y(sy);
                for (std::size_t sx = 0; sx < g.nx; ++sx) {
                    const double xi = g.x(ix) - g.x(sx);
                    acc += input(sx, sy) * std::polar(1.0, a * (xi * xi + eta * eta));
                }
            }
            out(ix, iy) = amplitude * acc;
        }
    }
    return out;
}

CenteredDft::CenteredDft(std::size_t n)
    : n_(n), fwd_(FftPlan::full_2d(n, n, FftDirection::Forward)), inv_(FftPlan::full_2d(n, n, FftDirection::Backward))
{
}

void CenteredDft::run(std::span<Complex> values, AlignedBuffer& scratch, const FftPlan& plan) const
{
    const std::size_t n = n_;
    if (values.size() != n * n) {
        throw Error(ErrorKind::ShapeMismatch, "centered DFT input has the wrong size");
    }
    scratch.reserve(n * n);
    const std::size_t c = n / 2;
    // Centered index i maps to FFT bin (i - c) mod n on both sides of the transform.
    for (std::size_t iy = 0; iy < n; ++iy) {
        const std::size_t sy = (iy + n - c) % n;
        for (std::size_t ix = 0; ix < n; ++ix) {
            scratch[sy * n + (ix + n - c) % n] = values[iy * n + ix];
        }
    }
    plan.execute(scratch);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t iy = 0; iy < n; ++iy) {
        const std::size_t sy = (iy + n - c) % n;
        for (std::size_t ix = 0; ix < n; ++ix) {
            values[iy * n + ix] = scratch[sy * n + (ix + n - c) % n] * scale;
        }
    }
}

void CenteredDft::forward(std::span<Complex> values, AlignedBuffer& scratch) const
{
    run(values, scratch, *fwd_);
}

void CenteredDft::backward(std::span<Complex> values, AlignedBuffer& scratch) const
{
    run(values, scratch, *inv_);
}

ComplexField fourier_plane(const ComplexField& input)
{
    require_spatial(input);
    if (input.grid.nx != input.grid.ny) {
        throw Error(ErrorKind::InvalidParameter, "fourier_plane needs a square grid");
    }
    ComplexField out = input;
    AlignedBuffer scratch;
    CenteredDft(input.grid.nx).forward(out.samples, scratch);
    out.domain = Domain::Frequency;
    out.grid.pitch = 2.0 * kPi / input.grid.extent_x();
    out.grid.x0 = 0.0;
    out.grid.y0 = 0.0;
    return out;
}

ComplexField inverse_fourier_plane(const ComplexField& input)
{
    if (input.domain != Domain::Frequency) {
        throw Error(ErrorKind::PlaneMismatch, "expected a frequency-domain field");
    }
    if (input.grid.nx != input.grid.ny) {
        throw Error(ErrorKind::InvalidParameter, "inverse_fourier_plane needs a square grid");
    }
    ComplexField out = input;
    AlignedBuffer scratch;
    CenteredDft(input.grid.nx).backward(out.samples, scratch);
    out.domain = Domain::Spatial;
    out.grid.pitch = 2.0 * kPi / input.grid.extent_x();
    return out;
}

} // namespace ghost
