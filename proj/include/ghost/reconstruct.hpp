#pragma once

#include "ghost/config.hpp"
#include "ghost/grid.hpp"
#include "ghost/io.hpp"
#include "ghost/scene.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ghost {

/// Where the reference intensities I_r live: a Fresnel plane at z, or the Fourier plane.
struct Plane {
    bool fourier = false;
    double z = 0.0;

    static Plane fresnel(double z) { return {false, z}; }
    static Plane fourier_plane() { return {true, 0.0}; }

    friend bool operator==(const Plane&, const Plane&) = default;
};

std::string to_string(const Plane& plane);

/// Covariance G(x, y) with the ingredients that produced it.
struct ReconstructionResult {
    RealGrid g;
    RealGrid mean_intensity; // <I>, used to locate the illuminated region
    GridSpec grid;           // pitch in rad/m for the Fourier plane
    Plane plane;
    std::size_t n = 0;
    double mean_bucket = 0.0;
    std::string fingerprint;

    /// G affinely mapped to [0, 1]; for display only.
    RealGrid normalized() const;
};

/// Running sums of B, I and B*I. Each sum carries a Neumaier compensation
/// term, so merge order changes results only at the level of double rounding
/// of the compensated totals.
class CorrelationAccumulator {
public:
    CorrelationAccumulator() = default;
    CorrelationAccumulator(const GridSpec& grid, Plane plane);

    /// Throws GridMismatch on a shape mismatch, InvalidParameter for negative or non-finite b.
    void accumulate(double b, const RealGrid& intensity);
    void accumulate(double b, std::span<const double> intensity);
    /// Componentwise sum; GridMismatch / PlaneMismatch if the two disagree.
    void merge(const CorrelationAccumulator& other);

    std::size_t count() const noexcept { return n_; }
    const GridSpec& grid() const noexcept { return grid_; }
    const Plane& plane() const noexcept { return plane_; }
    double sum_b() const noexcept { return sum_b_ + comp_b_; }
    /// Compensated totals.
    std::vector<double> sum_i() const;
    std::vector<double> sum_bi() const;

private:
    GridSpec grid_;
    Plane plane_;
    std::size_t n_ = 0;
    double sum_b_ = 0.0;
    double comp_b_ = 0.0;
    std::vector<double> sum_i_, comp_i_;
    std::vector<double> sum_bi_, comp_bi_;
};

enum class SingleSample { Reject, Zero };

/// G = sum_BI / N - (sum_B / N)(sum_I / N). InsufficientSamples for N < 2,
/// unless `single` is Zero, in which case N = 1 gives G = 0 (B_1 equals <B>).
ReconstructionResult finalize(const CorrelationAccumulator& acc, const std::string& fingerprint = {},
                              SingleSample single = SingleSample::Reject);

/// Regenerates E_r(x, y, 0) for any realization from the reference arm alone.
class ReferenceSource {
public:
    explicit ReferenceSource(const ReferenceArm& arm);

    /// Writes E_r at z = 0 into `out`.
    void field(std::uint64_t realization, ComplexField& out) const;
    const ReferenceArm& arm() const noexcept { return arm_; }
    const ComplexField& input() const noexcept { return input_; }

private:
    ReferenceArm arm_;
    ComplexField input_;
    std::vector<std::ptrdiff_t> cell_map_;
};

/// Execution knobs shared by every realization loop. Results never depend on `threads`.
struct RunOptions {
    unsigned threads = 0; // 0: hardware concurrency
    /// Realization counts at which `on_checkpoint` receives a snapshot of each plane.
    std::vector<std::size_t> checkpoints;
    std::function<void(std::size_t n, const std::vector<ReconstructionResult>& planes)> on_checkpoint;
};

/// Realizations per work item. Fixed so that the merge tree never depends on the thread count.
inline constexpr std::size_t kChunkRealizations = 32;

unsigned resolve_threads(unsigned requested);

/// Forward simulation of one experiment.
struct SimulationOutput {
    std::optional<RecordSet> bucket;
    std::optional<RecordSet> pinhole;
    std::optional<ReconstructionResult> gi; // bucket against I_r at L
    std::optional<ReconstructionResult> gd; // pinhole against |FT E_r(z = 0)|^2
};

/// Runs realizations 0..N-1 with the detectors chosen in the config. With
/// `correlate` false only the records are produced. Checkpoint snapshots list
/// the GI plane first when present, then GD.
SimulationOutput simulate(const ExperimentConfig& config, const TransmissionObject& object,
                          const RunOptions& options = {}, bool correlate = true);

/// Bucket-detector ghost imaging at the object plane.
struct GiRun {
    ReconstructionResult result;
    RecordSet records;
};
GiRun run_gi(const ExperimentConfig& config, const TransmissionObject& object, const RunOptions& options = {});

/// Replays the records against I_r regenerated at each requested plane, in one
/// pass over the realizations. Checkpoint snapshots follow the order of `planes`.
std::vector<ReconstructionResult> reconstruct_planes(const RecordSet& records, const std::vector<Plane>& planes,
                                                     const RunOptions& options = {});

/// Single Fresnel plane; with z_target = L this repeats the in-focus image.
ReconstructionResult reconstruct_at(const RecordSet& records, double z_target, const RunOptions& options = {});

/// Depth stack over a z list.
std::vector<ReconstructionResult> reconstruct_stack(const RecordSet& records, const std::vector<double>& z_values,
                                                    const RunOptions& options = {});

/// Writes `stem`.raw (G), `stem`.pgm (normalized G) and `stem`.meta with the
/// plane, sampling, N, <B> and fingerprint.
void save_reconstruction(const std::string& stem, const ReconstructionResult& result);
/// Reads a `save_reconstruction` output from its .raw path and .meta sidecar.
/// The mean intensity is not stored and comes back empty.
ReconstructionResult load_reconstruction(const std::string& raw_path);

/// Ghost diffraction from pinhole records. DetectorKindMismatch for bucket records.
ReconstructionResult run_gd(const RecordSet& records, const RunOptions& options = {});

/// Recomputes B_r for one record from (seed, r) and the object.
double replay_measurement(const ReferenceSource& source, const TransmissionObject& object, DetectorKind kind,
                          std::uint64_t realization);

} // namespace ghost
