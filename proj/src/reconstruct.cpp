#include "ghost/reconstruct.hpp"

#include "ghost/error.hpp"
#include "ghost/field.hpp"
#include "ghost/io.hpp"
#include "ghost/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <thread>

namespace ghost {

namespace {

// Neumaier step: sum + value with the rounding error carried in comp.
inline void neumaier(double& sum, double& comp, double value) noexcept
{
    const double t = sum + value;
    if (std::abs(sum) >= std::abs(value)) {
        comp += (sum - t) + value;
    } else {
        comp += (value - t) + sum;
    }
    sum = t;
}

struct ChunkOutput {
    std::vector<CorrelationAccumulator> accs;
    std::vector<double> bucket;
    std::vector<double> pinhole;
};

class ChunkWorker {
public:
    virtual ~ChunkWorker() = default;
    virtual void run(std::size_t begin, std::size_t end, ChunkOutput& out) = 0;
};

using WorkerFactory = std::function<std::unique_ptr<ChunkWorker>()>;
using Absorb = std::function<void(std::size_t end, ChunkOutput& chunk)>;

std::vector<std::size_t> chunk_ends(std::size_t n, const std::vector<std::size_t>& checkpoints)
{
    std::vector<std::size_t> ends;
    for (std::size_t e = kChunkRealizations; e < n; e += kChunkRealizations) {
        ends.push_back(e);
    }
    for (const auto c : checkpoints) {
        if (c > 0 && c < n) {
            ends.push_back(c);
        }
    }
    ends.push_back(n);
    std::sort(ends.begin(), ends.end());
    ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
    return ends;
}

// Fans chunks out to worker threads and hands the results to `absorb` strictly
// in chunk order, so the reduction is the same for every thread count.
void run_chunked(std::size_t n, unsigned threads, const std::vector<std::size_t>& checkpoints,
                 const WorkerFactory& make_worker, const Absorb& absorb)
{
    if (n == 0) {
        return;
    }
    const auto ends = chunk_ends(n, checkpoints);
    const std::size_t chunks = ends.size();
    auto begin_of = [&](std::size_t c) { return c == 0 ? std::size_t{0} : ends[c - 1]; };
    threads = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), chunks));

    if (threads <= 1) {
        auto worker = make_worker();
        for (std::size_t c = 0; c < chunks; ++c) {
            ChunkOutput out;
            worker->run(begin_of(c), ends[c], out);
            absorb(ends[c], out);
        }
        return;
    }

    std::mutex mutex;
    std::condition_variable cv;
    std::size_t next_claim = 0;
    std::size_t next_merge = 0;
    std::map<std::size_t, ChunkOutput> pending;
    std::exception_ptr failure;
    const std::size_t window = 2 * static_cast<std::size_t>(threads);

    auto body = [&] {
        try {
            auto worker = make_worker();
            for (;;) {
                std::size_t c = 0;
                {
                    std::unique_lock lock(mutex);
                    cv.wait(lock, [&] { return failure || next_claim >= chunks || next_claim < next_merge + window; });
                    if (failure || next_claim >= chunks) {
                        return;
                    }
                    c = next_claim++;
                }
                ChunkOutput out;
                worker->run(begin_of(c), ends[c], out);
                std::lock_guard lock(mutex);
                if (failure) {
                    return;
                }
                pending.emplace(c, std::move(out));
                while (!pending.empty() && pending.begin()->first == next_merge) {
                    absorb(ends[next_merge], pending.begin()->second);
                    pending.erase(pending.begin());
                    ++next_merge;
                }
                cv.notify_all();
            }
        } catch (...) {
            std::lock_guard lock(mutex);
            if (!failure) {
                failure = std::current_exception();
            }
            cv.notify_all();
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back(body);
    }
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

void check_checkpoints(const RunOptions& options, std::size_t n)
{
    for (const auto c : options.checkpoints) {
        if (c < 2 || c > n) {
            throw Error(ErrorKind::InsufficientData, "checkpoint " + std::to_string(c) +
                                                         " must lie between 2 and the record count " +
                                                         std::to_string(n));
        }
    }
}

bool is_checkpoint(const RunOptions& options, std::size_t n)
{
    return std::find(options.checkpoints.begin(), options.checkpoints.end(), n) != options.checkpoints.end();
}

std::vector<ReconstructionResult> snapshot(const std::vector<CorrelationAccumulator>& accs, const std::string& fp)
{
    std::vector<ReconstructionResult> out;
    out.reserve(accs.size());
    for (const auto& acc : accs) {
        out.push_back(finalize(acc, fp, SingleSample::Zero));
    }
    return out;
}

GridSpec fourier_grid(const GridSpec& grid)
{
    if (grid.nx != grid.ny) {
        throw Error(ErrorKind::InvalidParameter, "the Fourier plane needs a square grid");
    }
    GridSpec k = grid;
    k.pitch = 2.0 * std::numbers::pi / grid.extent_x();
    k.x0 = 0.0;
    k.y0 = 0.0;
    return k;
}

GridSpec plane_grid(const GridSpec& grid, const Plane& plane)
{
    return plane.fourier ? fourier_grid(grid) : grid;
}

// Shared, immutable per-plane transform; workers bring their own scratch.
struct PlaneOp {
    Plane plane;
    std::unique_ptr<FresnelPropagator> fresnel; // null for z = 0 and for the Fourier plane
    std::unique_ptr<CenteredDft> dft;
};

std::vector<PlaneOp> make_plane_ops(const ReferenceArm& arm, const std::vector<Plane>& planes)
{
    std::vector<PlaneOp> ops;
    for (const auto& p : planes) {
        PlaneOp op;
        op.plane = p;
        if (p.fourier) {
            fourier_grid(arm.grid);
            op.dft = std::make_unique<CenteredDft>(arm.grid.nx);
        } else if (p.z != 0.0) {
            op.fresnel = std::make_unique<FresnelPropagator>(arm.grid, arm.wavelength, p.z, arm.padding);
        }
        ops.push_back(std::move(op));
    }
    return ops;
}

struct PlaneScratch {
    PropagationWorkspace ws;
    AlignedBuffer dft_scratch;
    std::vector<Complex> spectrum;
    RealGrid intensity;
};

void plane_intensity(const PlaneOp& op, const ComplexField& e0, PlaneScratch& s)
{
    if (op.fresnel) {
        op.fresnel->apply_intensity(e0, s.intensity, s.ws);
        return;
    }
    s.intensity.nx = e0.grid.nx;
    s.intensity.ny = e0.grid.ny;
    s.intensity.values.resize(e0.samples.size());
    if (op.dft) {
        s.spectrum = e0.samples;
        op.dft->forward(s.spectrum, s.dft_scratch);
        for (std::size_t i = 0; i < s.spectrum.size(); ++i) {
            s.intensity.values[i] = std::norm(s.spectrum[i]);
        }
    } else {
        for (std::size_t i = 0; i < e0.samples.size(); ++i) {
            s.intensity.values[i] = std::norm(e0.samples[i]);
        }
    }
}

std::vector<CorrelationAccumulator> fresh_accumulators(const ReferenceArm& arm, const std::vector<Plane>& planes)
{
    std::vector<CorrelationAccumulator> accs;
    for (const auto& p : planes) {
        accs.emplace_back(plane_grid(arm.grid, p), p);
    }
    return accs;
}

class ReplayWorker final : public ChunkWorker {
public:
    ReplayWorker(const ReferenceSource& source, const std::vector<PlaneOp>& ops, const std::vector<Plane>& planes,
                 const std::vector<MeasurementRecord>& records)
        : source_(source), ops_(ops), planes_(planes), records_(records)
    {
    }

    void run(std::size_t begin, std::size_t end, ChunkOutput& out) override
    {
        out.accs = fresh_accumulators(source_.arm(), planes_);
        for (std::size_t i = begin; i < end; ++i) {
            const auto& rec = records_[i];
            source_.field(rec.realization, e0_);
            for (std::size_t p = 0; p < ops_.size(); ++p) {
                plane_intensity(ops_[p], e0_, scratch_);
                out.accs[p].accumulate(rec.value, scratch_.intensity);
            }
        }
    }

private:
    const ReferenceSource& source_;
    const std::vector<PlaneOp>& ops_;
    const std::vector<Plane>& planes_;
    const std::vector<MeasurementRecord>& records_;
    ComplexField e0_;
    PlaneScratch scratch_;
};

struct SimulationPlan {
    bool bucket = false;
    bool pinhole = false;
    bool correlate = true;
};

class ForwardWorker final : public ChunkWorker {
public:
    ForwardWorker(const ReferenceSource& source, const FresnelPropagator& to_object, const PlaneOp* fourier,
                  const TransmissionObject& object, SimulationPlan plan, const std::vector<Plane>& planes)
        : source_(source), to_object_(to_object), fourier_(fourier), object_(object), plan_(plan), planes_(planes)
    {
    }

    void run(std::size_t begin, std::size_t end, ChunkOutput& out) override
    {
        if (plan_.correlate) {
            out.accs = fresh_accumulators(source_.arm(), planes_);
        }
        for (std::size_t r = begin; r < end; ++r) {
            source_.field(r, e0_);
            to_object_.apply(e0_, e_obj_, ws_);
            const auto reading = measure_both(e_obj_, object_);
            if (plan_.bucket) {
                out.bucket.push_back(reading.bucket);
            }
            if (plan_.pinhole) {
                out.pinhole.push_back(reading.pinhole);
            }
            if (!plan_.correlate) {
                continue;
            }
            std::size_t p = 0;
            if (plan_.bucket) {
                intensity_.nx = e_obj_.grid.nx;
                intensity_.ny = e_obj_.grid.ny;
                intensity_.values.resize(e_obj_.samples.size());
                for (std::size_t i = 0; i < e_obj_.samples.size(); ++i) {
                    intensity_.values[i] = std::norm(e_obj_.samples[i]);
                }
                out.accs[p++].accumulate(reading.bucket, intensity_);
            }
            if (plan_.pinhole) {
                plane_intensity(*fourier_, e0_, scratch_);
                out.accs[p].accumulate(reading.pinhole, scratch_.intensity);
            }
        }
    }

private:
    const ReferenceSource& source_;
    const FresnelPropagator& to_object_;
    const PlaneOp* fourier_;
    const TransmissionObject& object_;
    SimulationPlan plan_;
    const std::vector<Plane>& planes_;
    ComplexField e0_;
    ComplexField e_obj_;
    PropagationWorkspace ws_;
    RealGrid intensity_;
    PlaneScratch scratch_;
};

void check_arm(const ReferenceArm& arm)
{
    arm.grid.validate();
    if (!(arm.wavelength > 0.0) || !(arm.waist > 0.0) || !(arm.slm_pitch > 0.0)) {
        throw Error(ErrorKind::InvalidParameter, "reference arm needs positive wavelength, waist and SLM pitch");
    }
}

} // namespace

std::string to_string(const Plane& plane)
{
    return plane.fourier ? std::string("fourier") : "z=" + format_double(plane.z);
}

RealGrid ReconstructionResult::normalized() const
{
    return normalize_affine(g);
}

CorrelationAccumulator::CorrelationAccumulator(const GridSpec& grid, Plane plane)
    : grid_(grid), plane_(plane), sum_i_(grid.size(), 0.0), comp_i_(grid.size(), 0.0), sum_bi_(grid.size(), 0.0),
      comp_bi_(grid.size(), 0.0)
{
}

void CorrelationAccumulator::accumulate(double b, const RealGrid& intensity)
{
    if (intensity.nx != grid_.nx || intensity.ny != grid_.ny) {
        throw Error(ErrorKind::GridMismatch, "intensity grid does not match the accumulator");
    }
    accumulate(b, intensity.span());
}

void CorrelationAccumulator::accumulate(double b, std::span<const double> intensity)
{
    if (intensity.size() != sum_i_.size()) {
        throw Error(ErrorKind::GridMismatch, "intensity grid does not match the accumulator");
    }
    if (!(b >= 0.0) || !std::isfinite(b)) {
        throw Error(ErrorKind::InvalidParameter, "detector value must be finite and non-negative");
    }
    ++n_;
    neumaier(sum_b_, comp_b_, b);
    for (std::size_t i = 0; i < intensity.size(); ++i) {
        neumaier(sum_i_[i], comp_i_[i], intensity[i]);
        neumaier(sum_bi_[i], comp_bi_[i], b * intensity[i]);
    }
}

void CorrelationAccumulator::merge(const CorrelationAccumulator& other)
{
    if (other.n_ == 0 && other.sum_i_.empty()) {
        return;
    }
    if (n_ == 0 && sum_i_.empty()) {
        *this = other;
        return;
    }
    if (!grid_.same_shape(other.grid_) || grid_.pitch != other.grid_.pitch) {
        throw Error(ErrorKind::GridMismatch, "cannot merge accumulators on different grids");
    }
    if (!(plane_ == other.plane_)) {
        throw Error(ErrorKind::PlaneMismatch, "cannot merge accumulators for different planes");
    }
    n_ += other.n_;
    neumaier(sum_b_, comp_b_, other.sum_b_);
    comp_b_ += other.comp_b_;
    for (std::size_t i = 0; i < sum_i_.size(); ++i) {
        neumaier(sum_i_[i], comp_i_[i], other.sum_i_[i]);
        comp_i_[i] += other.comp_i_[i];
        neumaier(sum_bi_[i], comp_bi_[i], other.sum_bi_[i]);
        comp_bi_[i] += other.comp_bi_[i];
    }
}

std::vector<double> CorrelationAccumulator::sum_i() const
{
    std::vector<double> out(sum_i_.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = sum_i_[i] + comp_i_[i];
    }
    return out;
}

std::vector<double> CorrelationAccumulator::sum_bi() const
{
    std::vector<double> out(sum_bi_.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = sum_bi_[i] + comp_bi_[i];
    }
    return out;
}

ReconstructionResult finalize(const CorrelationAccumulator& acc, const std::string& fingerprint, SingleSample single)
{
    const std::size_t n = acc.count();
    if (n < 2 && !(n == 1 && single == SingleSample::Zero)) {
        throw Error(ErrorKind::InsufficientSamples,
                    "need at least 2 realizations to estimate a covariance, have " + std::to_string(n));
    }
    ReconstructionResult res;
    res.grid = acc.grid();
    res.plane = acc.plane();
    res.n = n;
    res.fingerprint = fingerprint;
    const double inv_n = 1.0 / static_cast<double>(n);
    const double mean_b = acc.sum_b() * inv_n;
    res.mean_bucket = mean_b;
    const auto si = acc.sum_i();
    const auto sbi = acc.sum_bi();
    res.g = RealGrid(res.grid.nx, res.grid.ny);
    res.mean_intensity = RealGrid(res.grid.nx, res.grid.ny);
    for (std::size_t i = 0; i < si.size(); ++i) {
        const double mean_i = si[i] * inv_n;
        res.mean_intensity.values[i] = mean_i;
        res.g.values[i] = n == 1 ? 0.0 : sbi[i] * inv_n - mean_b * mean_i;
    }
    return res;
}

ReferenceSource::ReferenceSource(const ReferenceArm& arm) : arm_(arm)
{
    check_arm(arm);
    input_ = make_gaussian_input(arm.grid, arm.waist, arm.wavelength);
    const auto probe = constant_phase_mask(arm.mask, arm.macro_factor, 0.0);
    cell_map_ = mask_cell_map(arm.grid, probe, arm.slm_pitch);
}

void ReferenceSource::field(std::uint64_t realization, ComplexField& out) const
{
    const auto mask = random_phase_mask(arm_.seed, realization, arm_.mask, arm_.macro_factor);
    apply_mask_into(input_, mask, cell_map_, out);
}

unsigned resolve_threads(unsigned requested)
{
    if (requested > 0) {
        return requested;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

SimulationOutput simulate(const ExperimentConfig& config, const TransmissionObject& object, const RunOptions& options,
                          bool correlate)
{
    config.validate();
    const auto arm = ReferenceArm::from(config);
    if (!object.grid.same_shape(arm.grid) || object.grid.pitch != arm.grid.pitch) {
        throw Error(ErrorKind::GridMismatch, "object grid differs from the simulation grid");
    }
    if (object.distance != config.distance) {
        throw Error(ErrorKind::PlaneMismatch, "object distance differs from the configured L");
    }
    const std::size_t n = config.realizations;
    if (correlate) {
        check_checkpoints(options, n);
    }

    SimulationPlan plan;
    plan.bucket = config.detector != DetectorSelection::Pinhole;
    plan.pinhole = config.detector != DetectorSelection::Bucket;
    plan.correlate = correlate;

    std::vector<Plane> planes;
    if (plan.bucket) {
        planes.push_back(Plane::fresnel(config.distance));
    }
    if (plan.pinhole) {
        planes.push_back(Plane::fourier_plane());
    }

    const ReferenceSource source(arm);
    const FresnelPropagator to_object(arm.grid, arm.wavelength, config.distance, arm.padding);
    std::vector<PlaneOp> fourier_ops;
    if (plan.pinhole && correlate) {
        fourier_ops = make_plane_ops(arm, {Plane::fourier_plane()});
    }
    const PlaneOp* fourier = fourier_ops.empty() ? nullptr : &fourier_ops.front();

    std::vector<CorrelationAccumulator> totals = correlate ? fresh_accumulators(arm, planes)
                                                           : std::vector<CorrelationAccumulator>{};
    SimulationOutput out;
    auto make_set = [&](DetectorKind kind) {
        RecordSet set;
        set.arm = arm;
        set.distance = config.distance;
        set.kind = kind;
        set.records.reserve(n);
        return set;
    };
    if (plan.bucket) {
        out.bucket = make_set(DetectorKind::Bucket);
    }
    if (plan.pinhole) {
        out.pinhole = make_set(DetectorKind::Pinhole);
    }
    const auto fp = arm.fingerprint();

    auto absorb = [&](std::size_t end, ChunkOutput& chunk) {
        auto append = [&](std::optional<RecordSet>& set, const std::vector<double>& values) {
            if (!set) {
                return;
            }
            for (const double v : values) {
                const auto r = static_cast<std::uint64_t>(set->records.size());
                set->records.push_back({r, set->kind, v, arm.seed});
            }
        };
        append(out.bucket, chunk.bucket);
        append(out.pinhole, chunk.pinhole);
        for (std::size_t p = 0; p < chunk.accs.size(); ++p) {
            totals[p].merge(chunk.accs[p]);
        }
        if (correlate && options.on_checkpoint && is_checkpoint(options, end)) {
            options.on_checkpoint(end, snapshot(totals, fp));
        }
    };
    run_chunked(
        n, options.threads, correlate ? options.checkpoints : std::vector<std::size_t>{},
        [&] { return std::make_unique<ForwardWorker>(source, to_object, fourier, object, plan, planes); }, absorb);

    if (correlate) {
        std::size_t p = 0;
        if (plan.bucket) {
            out.gi = finalize(totals[p++], fp, SingleSample::Zero);
        }
        if (plan.pinhole) {
            out.gd = finalize(totals[p], fp, SingleSample::Zero);
        }
    }
    return out;
}

GiRun run_gi(const ExperimentConfig& config, const TransmissionObject& object, const RunOptions& options)
{
    auto cfg = config;
    cfg.detector = DetectorSelection::Bucket;
    auto sim = simulate(cfg, object, options, true);
    return {std::move(*sim.gi), std::move(*sim.bucket)};
}

std::vector<ReconstructionResult> reconstruct_planes(const RecordSet& records, const std::vector<Plane>& planes,
                                                     const RunOptions& options)
{
    const std::size_t n = records.records.size();
    if (n == 0) {
        throw Error(ErrorKind::InsufficientSamples, "no measurement records to correlate");
    }
    if (planes.empty()) {
        throw Error(ErrorKind::InvalidParameter, "no reconstruction planes requested");
    }
    check_checkpoints(options, n);
    for (const auto& rec : records.records) {
        if (rec.seed != records.arm.seed) {
            throw Error(ErrorKind::FingerprintMismatch, "record seed differs from the record set header");
        }
    }
    const ReferenceSource source(records.arm);
    const auto ops = make_plane_ops(records.arm, planes);
    auto totals = fresh_accumulators(records.arm, planes);
    const auto fp = records.arm.fingerprint();
    auto absorb = [&](std::size_t end, ChunkOutput& chunk) {
        for (std::size_t p = 0; p < chunk.accs.size(); ++p) {
            totals[p].merge(chunk.accs[p]);
        }
        if (options.on_checkpoint && is_checkpoint(options, end)) {
            options.on_checkpoint(end, snapshot(totals, fp));
        }
    };
    run_chunked(
        n, options.threads, options.checkpoints,
        [&] { return std::make_unique<ReplayWorker>(source, ops, planes, records.records); }, absorb);
    return snapshot(totals, fp);
}

ReconstructionResult reconstruct_at(const RecordSet& records, double z_target, const RunOptions& options)
{
    return std::move(reconstruct_planes(records, {Plane::fresnel(z_target)}, options).front());
}

std::vector<ReconstructionResult> reconstruct_stack(const RecordSet& records, const std::vector<double>& z_values,
                                                    const RunOptions& options)
{
    std::vector<Plane> planes;
    for (const double z : z_values) {
        planes.push_back(Plane::fresnel(z));
    }
    return reconstruct_planes(records, planes, options);
}

ReconstructionResult run_gd(const RecordSet& records, const RunOptions& options)
{
    if (records.kind != DetectorKind::Pinhole) {
        throw Error(ErrorKind::DetectorKindMismatch,
                    "ghost diffraction needs pinhole-detector records, got " + std::string(to_string(records.kind)));
    }
    return std::move(reconstruct_planes(records, {Plane::fourier_plane()}, options).front());
}

double replay_measurement(const ReferenceSource& source, const TransmissionObject& object, DetectorKind kind,
                          std::uint64_t realization)
{
    ComplexField e0;
    source.field(realization, e0);
    const auto e = fresnel_propagate(e0, object.distance, source.arm().padding);
    return kind == DetectorKind::Bucket ? bucket_measure(e, object) : pinhole_measure(e, object);
}

void save_reconstruction(const std::string& stem, const ReconstructionResult& result)
{
    write_raw(stem + ".raw", result.g);
    write_pgm16(stem + ".pgm", result.g);
    write_metadata(stem + ".meta", {{"plane", result.plane.fourier ? "fourier" : "fresnel"},
                                    {"z_m", format_double(result.plane.z)},
                                    {"nx", std::to_string(result.grid.nx)},
                                    {"ny", std::to_string(result.grid.ny)},
                                    {"pitch", format_double(result.grid.pitch)},
                                    {"pitch_unit", result.plane.fourier ? "rad/m" : "m"},
                                    {"realizations", std::to_string(result.n)},
                                    {"mean_bucket", format_double(result.mean_bucket)},
                                    {"fingerprint", result.fingerprint}});
}

ReconstructionResult load_reconstruction(const std::string& raw_path)
{
    const std::string suffix = ".raw";
    if (raw_path.size() <= suffix.size() || raw_path.compare(raw_path.size() - suffix.size(), suffix.size(), suffix)) {
        throw Error(ErrorKind::InvalidParameter, raw_path + ": expected a .raw file");
    }
    const auto meta_path = raw_path.substr(0, raw_path.size() - suffix.size()) + ".meta";
    const auto meta = read_metadata(meta_path);
    auto field = [&](const char* key) {
        auto v = metadata_value(meta, key);
        if (v.empty()) {
            throw Error(ErrorKind::ParseError, meta_path + ": missing key " + key);
        }
        return v;
    };
    ReconstructionResult r;
    r.g = read_raw(raw_path);
    const auto plane = field("plane");
    if (plane == "fourier") {
        r.plane = Plane::fourier_plane();
    } else if (plane == "fresnel") {
        r.plane = Plane::fresnel(parse_double(field("z_m")));
    } else {
        throw Error(ErrorKind::ParseError, meta_path + ": unknown plane " + plane);
    }
    r.grid.nx = parse_u64(field("nx"));
    r.grid.ny = parse_u64(field("ny"));
    r.grid.pitch = parse_double(field("pitch"));
    if (r.grid.nx != r.g.nx || r.grid.ny != r.g.ny) {
        throw Error(ErrorKind::ShapeMismatch, meta_path + ": shape disagrees with " + raw_path);
    }
    r.n = parse_u64(field("realizations"));
    r.mean_bucket = parse_double(field("mean_bucket"));
    r.fingerprint = field("fingerprint");
    return r;
}

} // namespace ghost
