#pragma once

#include "ghost/fft.hpp"
#include "ghost/grid.hpp"

#include <memory>
#include <string>
#include <vector>

namespace ghost {

enum class PropagationMethod { TwoFftConvolution, DirectQuadrature };

struct PropagationPlan {
    PropagationMethod method = PropagationMethod::TwoFftConvolution;
    unsigned padding = 2;
    double z = 0.0;
    double wavelength = 0.0;
    GridSpec source;
};

struct SamplingReport {
    double fresnel_number = 0.0;
    double max_phase_step = 0.0; // radians per sample at the padded grid edge
    bool valid = true;
    std::vector<std::string> messages;
};

/// Nyquist check on the Fresnel chirp at the edge of the padded grid:
/// step = 2 pi pitch (padded extent / 2) / (lambda |z|), valid iff step <= pi.
SamplingReport check_sampling(const GridSpec& grid, double wavelength, double z, unsigned padding = 2);

/// Reusable scratch for FresnelPropagator::apply. One per thread.
struct PropagationWorkspace {
    AlignedBuffer rows;
    AlignedBuffer cols;
};

/// Discrete Fresnel convolution E(x) * exp(i pi |xi|^2 / (lambda z)) with the
/// paraxial amplitude pitch^2 / (i lambda z); the plane-wave factor exp(ikz) is
/// dropped. The chirp is separable, so the 2D linear convolution runs as two
/// zero-padded batched 1D FFT convolutions (rows, then columns). With padding
/// >= 2 the result equals the direct double sum over the source grid up to FFT
/// round-off, and energy is conserved for fields that stay inside the grid.
///
/// Immutable after construction; apply() may run concurrently with distinct workspaces.
class FresnelPropagator {
public:
    /// Throws SamplingViolation if check_sampling fails, InvalidParameter for padding < 2.
    FresnelPropagator(const GridSpec& grid, double wavelength, double z, unsigned padding = 2);
    explicit FresnelPropagator(const PropagationPlan& plan);

    ComplexField operator()(const ComplexField& input) const;
    void apply(const ComplexField& input, ComplexField& output, PropagationWorkspace& workspace) const;

    /// |propagated field|^2 written straight into `intensity`; skips building a ComplexField.
    void apply_intensity(const ComplexField& input, RealGrid& intensity, PropagationWorkspace& workspace) const;

    const GridSpec& grid() const noexcept { return grid_; }
    double z() const noexcept { return z_; }
    double wavelength() const noexcept { return wavelength_; }

private:
    void check_input(const ComplexField& input) const;
    // Runs both convolution passes; leaves the result transposed in workspace.cols.
    void convolve(const ComplexField& input, PropagationWorkspace& workspace) const;

    GridSpec grid_;
    double wavelength_;
    double z_;
    std::size_t mx_;
    std::size_t my_;
    std::vector<Complex> kernel_x_; // spectrum of the x chirp, normalization folded in
    std::vector<Complex> kernel_y_;
    std::shared_ptr<const FftPlan> fwd_x_, inv_x_, fwd_y_, inv_y_;
};

/// Propagates by z (may be negative). z == 0 returns the input unchanged.
ComplexField fresnel_propagate(const ComplexField& input, double z, unsigned padding = 2);
ComplexField propagate(const ComplexField& input, const PropagationPlan& plan);

/// Literal O(n^4) double sum of the Fresnel integral; oracle only, grids up to 64x64.
ComplexField direct_quadrature_propagate(const ComplexField& input, double z);

/// Centered unitary DFT of a square field; output pitch is 2 pi / (n pitch) in
/// radians per meter with k = 0 at the grid center.
ComplexField fourier_plane(const ComplexField& input);

/// Inverse of fourier_plane; restores the spatial pitch 2 pi / (n dk).
ComplexField inverse_fourier_plane(const ComplexField& input);

/// Reusable centered unitary 2D DFT on square n x n grids.
class CenteredDft {
public:
    explicit CenteredDft(std::size_t n);

    /// Transforms `values` (n*n, row-major) in place.
    void forward(std::span<Complex> values, AlignedBuffer& scratch) const;
    void backward(std::span<Complex> values, AlignedBuffer& scratch) const;

    std::size_t n() const noexcept { return n_; }

private:
    void run(std::span<Complex> values, AlignedBuffer& scratch, const FftPlan& plan) const;

    std::size_t n_;
    std::shared_ptr<const FftPlan> fwd_;
    std::shared_ptr<const FftPlan> inv_;
};

} // namespace ghost
