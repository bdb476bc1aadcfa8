#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace ghost {

using Complex = std::complex<double>;

/// Uniform square-pitch sampling grid. Sample (ix, iy) sits at
/// x0 + (ix - nx/2) * pitch, so index nx/2 (integer division) is the
/// grid center for both odd and even sizes.
struct GridSpec {
    std::size_t nx = 0;
    std::size_t ny = 0;
    double pitch = 0.0;
    double x0 = 0.0;
    double y0 = 0.0;

    /// Throws InvalidParameter unless nx, ny >= 2 and the extent is finite and positive.
    void validate() const;

    std::size_t size() const noexcept { return nx * ny; }
    double extent_x() const noexcept { return static_cast<double>(nx) * pitch; }
    double extent_y() const noexcept { return static_cast<double>(ny) * pitch; }
    std::size_t center_x() const noexcept { return nx / 2; }
    std::size_t center_y() const noexcept { return ny / 2; }

    double x(std::size_t ix) const noexcept
    {
        return x0 + (static_cast<double>(ix) - static_cast<double>(nx / 2)) * pitch;
    }
    double y(std::size_t iy) const noexcept
    {
        return y0 + (static_cast<double>(iy) - static_cast<double>(ny / 2)) * pitch;
    }

    bool same_shape(const GridSpec& other) const noexcept { return nx == other.nx && ny == other.ny; }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Row-major nx-by-ny real array; element (ix, iy) lives at iy * nx + ix.
struct RealGrid {
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::vector<double> values;

    RealGrid() = default;
    RealGrid(std::size_t nx_, std::size_t ny_, double fill = 0.0) : nx(nx_), ny(ny_), values(nx_ * ny_, fill) {}

    std::size_t size() const noexcept { return values.size(); }
    double& operator()(std::size_t ix, std::size_t iy) { return values[iy * nx + ix]; }
    double operator()(std::size_t ix, std::size_t iy) const { return values[iy * nx + ix]; }
    std::span<const double> span() const noexcept { return values; }

    friend bool operator==(const RealGrid&, const RealGrid&) = default;
};

enum class Domain { Spatial, Frequency };

/// Sampled scalar optical field. In the Frequency domain grid.pitch is in
/// radians per meter and the zero frequency sits at the grid center.
struct ComplexField {
    GridSpec grid;
    std::vector<Complex> samples;
    double wavelength = 0.0;
    double z = 0.0;
    Domain domain = Domain::Spatial;

    Complex& operator()(std::size_t ix, std::size_t iy) { return samples[iy * grid.nx + ix]; }
    Complex operator()(std::size_t ix, std::size_t iy) const { return samples[iy * grid.nx + ix]; }

    /// Sum |E|^2 * pitch^2.
    double energy() const;
    RealGrid intensity() const;
    bool all_finite() const;
};

/// Sum |v|^2 without area weighting.
double sum_squared(std::span<const Complex> values);

/// ||a - b|| / ||b|| over complex samples of equal length.
double relative_l2(std::span<const Complex> a, std::span<const Complex> b);
double relative_l2(std::span<const double> a, std::span<const double> b);

} // namespace ghost
