#pragma once

#include "ghost/grid.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ghost {

struct MacroDims {
    std::size_t mx = 0;
    std::size_t my = 0;

    friend bool operator==(const MacroDims&, const MacroDims&) = default;
};

/// Pseudo-random SLM phase pattern. Each macro cell spans macro_factor x
/// macro_factor physical SLM pixels; phases are radians in [0, 2pi).
struct PhaseMask {
    MacroDims dims;
    unsigned macro_factor = 1;
    std::uint64_t seed = 0;
    std::uint64_t realization = 0;
    std::vector<double> phases; // row-major, my rows of mx cells

    double at(std::size_t cx, std::size_t cy) const { return phases[cy * dims.mx + cx]; }

    /// Physical side length of the whole mask along x / y for a given SLM pixel pitch.
    double extent_x(double slm_pitch) const { return static_cast<double>(dims.mx * macro_factor) * slm_pitch; }
    double extent_y(double slm_pitch) const { return static_cast<double>(dims.my * macro_factor) * slm_pitch; }
};

/// E(x, y) = exp(-(x^2 + y^2) / w0^2) centered on the optical axis, scaled to unit energy.
ComplexField make_gaussian_input(const GridSpec& grid, double waist, double wavelength);

/// Uniform i.i.d. phases keyed by (seed, realization, cell index).
PhaseMask random_phase_mask(std::uint64_t seed, std::uint64_t realization, MacroDims dims, unsigned macro_factor);

/// Mask with every cell set to `phase`; used for coherent references and tests.
PhaseMask constant_phase_mask(MacroDims dims, unsigned macro_factor, double phase);

/// Multiplies the field by exp(i phi) of the mask, centered on the grid. Samples
/// outside the mask footprint pass unchanged.
ComplexField apply_mask(const ComplexField& input, const PhaseMask& mask, double slm_pitch);

/// Per-sample macro-cell lookup used by apply_mask: index into mask.phases,
/// or -1 for samples outside the mask footprint.
std::vector<std::ptrdiff_t> mask_cell_map(const GridSpec& grid, const PhaseMask& mask, double slm_pitch);

/// apply_mask with a precomputed cell map; writes into `out` (resized as needed).
void apply_mask_into(const ComplexField& input, const PhaseMask& mask, std::span<const std::ptrdiff_t> cell_map,
                     ComplexField& out);

} // namespace ghost
