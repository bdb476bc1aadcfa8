#include "ghost/field.hpp"

#include "ghost/error.hpp"
#include "ghost/philox.hpp"

#include <cmath>
#include <numbers>

namespace ghost {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Axis-wise cell index for a sample coordinate, or -1 outside [0, cells).
std::ptrdiff_t cell_index(double coord, double mask_extent, double cell_size, std::size_t cells)
{
    const double u = (coord + 0.5 * mask_extent) / cell_size;
    // Sample centers that land on a cell edge belong to the cell on the right.
    const double k = std::floor(u + 1e-9);
    if (k < 0.0 || k >= static_cast<double>(cells)) {
        return -1;
    }
    return static_cast<std::ptrdiff_t>(k);
}

} // namespace

ComplexField make_gaussian_input(const GridSpec& grid, double waist, double wavelength)
{
    grid.validate();
    if (!(waist > 0.0) || !std::isfinite(waist)) {
        throw Error(ErrorKind::InvalidParameter, "beam waist must be positive");
    }
    if (!(wavelength > 0.0) || !std::isfinite(wavelength)) {
        throw Error(ErrorKind::InvalidParameter, "wavelength must be positive");
    }
    const double reach_x = 0.5 * grid.extent_x() - std::abs(grid.x0);
    const double reach_y = 0.5 * grid.extent_y() - std::abs(grid.y0);
    if (grid.extent_x() < 4.0 * waist || grid.extent_y() < 4.0 * waist || reach_x < 2.0 * waist ||
        reach_y < 2.0 * waist) {
        throw Error(ErrorKind::GridTooSmall, "grid must span at least 4 beam waists around the axis");
    }

    ComplexField field;
    field.grid = grid;
    field.wavelength = wavelength;
    field.z = 0.0;
    field.samples.resize(grid.size());
    const double inv_w2 = 1.0 / (waist * waist);
    for (std::size_t iy = 0; iy < grid.ny; ++iy) {
        const double y = grid.y(iy);
        for (std::size_t ix = 0; ix < grid.nx; ++ix) {
            const double x = grid.x(ix);
            field(ix, iy) = std::exp(-(x * x + y * y) * inv_w2);
        }
    }
    const double scale = 1.0 / std::sqrt(field.energy());
    for (auto& s : field.samples) {
        s *= scale;
    }
    return field;
}

PhaseMask random_phase_mask(std::uint64_t seed, std::uint64_t realization, MacroDims dims, unsigned macro_factor)
{
    if (dims.mx < 1 || dims.my < 1) {
        throw Error(ErrorKind::InvalidParameter, "mask must have at least one cell per axis");
    }
    if (macro_factor < 1) {
        throw Error(ErrorKind::InvalidParameter, "macro factor must be >= 1");
    }
    PhaseMask mask;
    mask.dims = dims;
    mask.macro_factor = macro_factor;
    mask.seed = seed;
    mask.realization = realization;
    mask.phases.resize(dims.mx * dims.my);
    for (std::size_t cell = 0; cell < mask.phases.size(); ++cell) {
        double phase = kTwoPi * keyed_uniform(seed, realization, cell);
        // 2pi * (1 - 2^-53) can round up to 2pi itself.
        if (phase >= kTwoPi) {
            phase = std::nextafter(kTwoPi, 0.0);
        }
        mask.phases[cell] = phase;
    }
    return mask;
}

PhaseMask constant_phase_mask(MacroDims dims, unsigned macro_factor, double phase)
{
    if (dims.mx < 1 || dims.my < 1 || macro_factor < 1) {
        throw Error(ErrorKind::InvalidParameter, "mask dimensions and macro factor must be >= 1");
    }
    PhaseMask mask;
    mask.dims = dims;
    mask.macro_factor = macro_factor;
    mask.phases.assign(dims.mx * dims.my, phase);
    return mask;
}

std::vector<std::ptrdiff_t> mask_cell_map(const GridSpec& grid, const PhaseMask& mask, double slm_pitch)
{
    if (!(slm_pitch > 0.0)) {
        throw Error(ErrorKind::InvalidParameter, "SLM pixel pitch must be positive");
    }
    const double wx = mask.extent_x(slm_pitch);
    const double wy = mask.extent_y(slm_pitch);
    // Tolerate round-off when the mask exactly fills the grid.
    const double slack = 1e-9 * grid.pitch;
    if (wx > grid.extent_x() + slack || wy > grid.extent_y() + slack) {
        throw Error(ErrorKind::GeometryMismatch, "phase mask footprint extends beyond the field grid");
    }
    const double cell = static_cast<double>(mask.macro_factor) * slm_pitch;
    std::vector<std::ptrdiff_t> col(grid.nx);
    std::vector<std::ptrdiff_t> row(grid.ny);
    // The mask is centered on the grid center, not on the physical axis.
    for (std::size_t ix = 0; ix < grid.nx; ++ix) {
        col[ix] = cell_index(grid.x(ix) - grid.x0, wx, cell, mask.dims.mx);
    }
    for (std::size_t iy = 0; iy < grid.ny; ++iy) {
        row[iy] = cell_index(grid.y(iy) - grid.y0, wy, cell, mask.dims.my);
    }
    std::vector<std::ptrdiff_t> map(grid.size(), -1);
    for (std::size_t iy = 0; iy < grid.ny; ++iy) {
        if (row[iy] < 0) {
            continue;
        }
        for (std::size_t ix = 0; ix < grid.nx; ++ix) {
            if (col[ix] >= 0) {
                map[iy * grid.nx + ix] = row[iy] * static_cast<std::ptrdiff_t>(mask.dims.mx) + col[ix];
            }
        }
    }
    return map;
}

void apply_mask_into(const ComplexField& input, const PhaseMask& mask, std::span<const std::ptrdiff_t> cell_map,
                     ComplexField& out)
{
    if (input.z != 0.0) {
        throw Error(ErrorKind::PlaneMismatch, "phase masks apply at the SLM plane (z = 0)");
    }
    if (cell_map.size() != input.samples.size()) {
        throw Error(ErrorKind::GridMismatch, "cell map does not match the field grid");
    }
    out.grid = input.grid;
    out.wavelength = input.wavelength;
    out.z = input.z;
    out.domain = input.domain;
    out.samples.resize(input.samples.size());

    // One exp per macro cell rather than per sample.
    std::vector<Complex> phasors(mask.phases.size());
    for (std::size_t c = 0; c < phasors.size(); ++c) {
        phasors[c] = std::polar(1.0, mask.phases[c]);
    }
    for (std::size_t i = 0; i < input.samples.size(); ++i) {
        const auto cell = cell_map[i];
        out.samples[i] = cell < 0 ? input.samples[i] : input.samples[i] * phasors[static_cast<std::size_t>(cell)];
    }
}

ComplexField apply_mask(const ComplexField& input, const PhaseMask& mask, double slm_pitch)
{
    const auto map = mask_cell_map(input.grid, mask, slm_pitch);
    ComplexField out;
    apply_mask_into(input, mask, map, out);
    return out;
}

} // namespace ghost
