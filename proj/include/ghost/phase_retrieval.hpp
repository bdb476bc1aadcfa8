#pragma once

#include "ghost/grid.hpp"
#include "ghost/reconstruct.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ghost {

/// Near-field (object plane) and far-field (fourier_plane axes) intensities of one object.
struct RetrievalProblem {
    GridSpec grid; // object-plane sampling; the far field lives on its conjugate axes
    RealGrid near;
    RealGrid far;
    std::size_t max_iterations = 200;
    double tolerance = 1e-6; // on the far-plane modulus error
};

enum class PhaseInit { Zero, Random };

struct RetrievalOptions {
    PhaseInit init = PhaseInit::Random;
    std::uint64_t seed = 0;
    /// Independent starts; restart 0 uses `init`, the rest use random phases.
    unsigned restarts = 1;
    unsigned threads = 1;
};

struct RetrievalResult {
    /// Object-plane estimate sqrt(near) exp(i phi), taken after the last near-plane projection.
    ComplexField estimate;
    /// E_k = sqrt(sum (|F_k| - sqrt(far))^2 / sum far), one entry per iteration.
    std::vector<double> error_trace;
    bool converged = false;
    unsigned restart = 0; // index of the restart that produced the estimate
    std::vector<double> restart_errors;
};

/// Classic alternating projections between the near-plane modulus and the
/// far-plane modulus. ShapeMismatch if the grids differ, NonFiniteInput or
/// InvalidParameter for negative, non-finite or all-zero intensities.
RetrievalResult gerchberg_saxton(const RetrievalProblem& problem, const RetrievalOptions& options = {});

/// Single run from an explicit initial field; only its phase is used.
RetrievalResult gerchberg_saxton(const RetrievalProblem& problem, std::span<const Complex> initial);

/// Clamps negative correlations to zero, normalizes both patterns to unit
/// total and resamples the GD pattern onto the Fourier axes conjugate to the
/// GI grid. PlaneMismatch unless gi is a Fresnel plane and gd the Fourier
/// plane; FingerprintMismatch if they come from different reference arms.
RetrievalProblem extract_intensities(const ReconstructionResult& gi, const ReconstructionResult& gd);

/// `estimate` times the unit phasor that best aligns it with `reference`.
std::vector<Complex> align_global_phase(std::span<const Complex> estimate, std::span<const Complex> reference);

/// Relative L2 error after global-phase alignment, the smaller of the direct
/// and the conjugate-twin comparison (twin: conj of the point-reflected field).
double aligned_error(std::span<const Complex> estimate, std::span<const Complex> reference, std::size_t nx,
                     std::size_t ny);

} // namespace ghost
