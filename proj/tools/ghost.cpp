// ghost: command-line runner for the ghost imaging simulator.
// Exit codes: 0 success, 1 usage or config error, 2 runtime (sampling/data) error.

#include "ghost/analysis.hpp"
#include "ghost/config.hpp"
#include "ghost/error.hpp"
#include "ghost/field.hpp"
#include "ghost/io.hpp"
#include "ghost/phase_retrieval.hpp"
#include "ghost/propagation.hpp"
#include "ghost/reconstruct.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace ghost;

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

// Config and argument problems: exit code 1.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigFlags {
    std::string preset;
    std::string config_path;
};

ExperimentConfig load_experiment(const ConfigFlags& flags)
{
    try {
        if (!flags.preset.empty() && !flags.config_path.empty()) {
            throw UsageError("--preset and --config are mutually exclusive");
        }
        auto config = flags.config_path.empty() ? preset(flags.preset.empty() ? "desk" : flags.preset)
                                                : load_config_file(flags.config_path);
        config.validate();
        return config;
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

// --out beats GHOST_OUTPUT_DIR, which beats the fallback.
std::string output_dir(const std::string& flag, const std::string& fallback)
{
    std::string dir = flag;
    if (dir.empty()) {
        if (const char* env = std::getenv("GHOST_OUTPUT_DIR"); env != nullptr && *env != '\0') {
            dir = env;
        }
    }
    if (dir.empty()) {
        dir = fallback;
    }
    fs::create_directories(dir);
    return dir;
}

std::string parent_or_dot(const std::string& path)
{
    const auto parent = fs::path(path).parent_path();
    return parent.empty() ? std::string(".") : parent.string();
}

void report(const std::string& path)
{
    std::cout << "wrote " << path << "\n";
}

void save(const std::string& stem, const ReconstructionResult& result)
{
    save_reconstruction(stem, result);
    report(stem + ".raw");
    report(stem + ".pgm");
    report(stem + ".meta");
}

// ---- simulate ----

struct SimulateArgs {
    ConfigFlags config;
    std::optional<std::size_t> realizations;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    std::string out;
};

int cmd_simulate(const SimulateArgs& args)
{
    auto config = load_experiment(args.config);
    if (args.realizations) {
        config.realizations = *args.realizations;
    }
    if (args.seed) {
        config.seed = *args.seed;
    }
    try {
        config.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    if (config.realizations == 1) {
        std::cerr << "warning: a single realization carries no correlation; G is identically zero\n";
    }
    const auto dir = output_dir(args.out, config.output_dir);
    config.output_dir = dir;
    const auto object = make_object(config);

    RunOptions options;
    options.threads = args.threads;
    const auto out = simulate(config, object, options);

    write_text_file(dir + "/config.txt", serialize(config));
    report(dir + "/config.txt");
    const auto arm = ReferenceArm::from(config);
    write_metadata(dir + "/run.meta", {{"config", "config.txt"},
                                       {"fingerprint", arm.fingerprint()},
                                       {"detector", std::string(to_string(config.detector))},
                                       {"realizations", std::to_string(config.realizations)},
                                       {"seed", std::to_string(config.seed)},
                                       {"distance_m", format_double(config.distance)}});
    report(dir + "/run.meta");
    if (out.bucket) {
        write_records(dir + "/records-bucket.txt", *out.bucket);
        report(dir + "/records-bucket.txt");
        save(dir + "/gi", *out.gi);
    }
    if (out.pinhole) {
        write_records(dir + "/records-pinhole.txt", *out.pinhole);
        report(dir + "/records-pinhole.txt");
        save(dir + "/gd", *out.gd);
    }
    return 0;
}

// ---- reconstruct ----

struct ReconstructArgs {
    std::string records;
    std::vector<double> z;
    bool fourier = false;
    unsigned threads = 0;
    std::string out;
};

int cmd_reconstruct(const ReconstructArgs& args)
{
    const auto records = read_records(args.records);
    const auto dir = output_dir(args.out, parent_or_dot(args.records));
    RunOptions options;
    options.threads = args.threads;
    if (args.fourier) {
        save(dir + "/gd-fourier", run_gd(records, options));
        return 0;
    }
    if (records.kind == DetectorKind::Pinhole) {
        std::cerr << "warning: ghost imaging from pinhole records has a much lower SNR than from bucket records\n";
    }
    const auto z_values = args.z.empty() ? std::vector<double>{records.distance} : args.z;
    const auto stack = reconstruct_stack(records, z_values, options);

    // One region for every plane: where <I> at the plane nearest to L reaches half its maximum.
    std::size_t ref = 0;
    for (std::size_t i = 1; i < z_values.size(); ++i) {
        if (std::abs(z_values[i] - records.distance) < std::abs(z_values[ref] - records.distance)) {
            ref = i;
        }
    }
    const auto region = threshold_region(stack[ref].mean_intensity, 0.5);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < stack.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "/stack-%02zu", i);
        save(dir + name, stack[i]);
        double s = std::numeric_limits<double>::quiet_NaN();
        try {
            s = sharpness(stack[i].g, region);
        } catch (const Error& e) {
            std::cerr << "warning: no sharpness at z=" << format_double(z_values[i]) << ": " << e.what() << "\n";
        }
        rows.push_back({z_values[i], s});
    }
    write_csv(dir + "/sharpness.csv", {{"records", args.records}, {"realizations", std::to_string(records.records.size())}},
              {"z_m", "sharpness"}, rows);
    report(dir + "/sharpness.csv");
    return 0;
}

// ---- analyze ----

struct AnalyzeArgs {
    std::string records;
    ConfigFlags config;
    std::vector<std::size_t> counts;
    std::size_t speckle = 200;
    unsigned threads = 0;
    std::string out;
};

std::vector<std::size_t> default_counts(std::size_t n)
{
    std::vector<std::size_t> counts;
    for (std::size_t c = 250; c <= n; c *= 2) {
        counts.push_back(c);
    }
    if (counts.size() < 2) {
        counts.clear();
        for (std::size_t c = n / 4; c <= n && c >= 2; c *= 2) {
            counts.push_back(c);
        }
    }
    return counts;
}

void speckle_report(const std::string& dir, const RecordSet& records, std::size_t realizations)
{
    const ReferenceSource source(records.arm);
    const FresnelPropagator prop(records.arm.grid, records.arm.wavelength, records.distance, records.arm.padding);
    PropagationWorkspace ws;
    ComplexField field;
    RealGrid intensity(records.arm.grid.nx, records.arm.grid.ny);

    // First pass: the mean intensity locates the illuminated region.
    RealGrid mean(records.arm.grid.nx, records.arm.grid.ny);
    for (std::size_t r = 0; r < realizations; ++r) {
        source.field(r, field);
        prop.apply_intensity(field, intensity, ws);
        for (std::size_t i = 0; i < mean.size(); ++i) {
            mean.values[i] += intensity.values[i];
        }
    }
    const auto region = threshold_region(mean, 0.5);
    const auto res = theoretical_resolution(records.arm.wavelength, records.arm.waist, records.distance);
    const auto max_lag = static_cast<std::size_t>(std::ceil(3.0 * res.dx / records.arm.grid.pitch)) + 2;
    SpeckleAccumulator acc(records.arm.grid, region, max_lag, records.arm.grid.center_x(), records.arm.grid.center_y());
    for (std::size_t r = 0; r < realizations; ++r) {
        source.field(r, field);
        prop.apply_intensity(field, intensity, ws);
        acc.add(intensity);
    }
    const auto s = acc.result();
    const auto c = acc.autocovariance();
    std::vector<std::vector<double>> rows;
    for (std::size_t lag = 0; lag < c.size(); ++lag) {
        rows.push_back({static_cast<double>(lag) * records.arm.grid.pitch, c[lag]});
    }
    write_csv(dir + "/speckle.csv",
              {{"realizations", std::to_string(s.realizations)},
               {"contrast", format_double(s.contrast)},
               {"coherence_width_m", format_double(s.coherence_width)},
               {"hwhm_m", format_double(s.hwhm)},
               {"ks_statistic", format_double(s.ks_statistic)},
               {"ks_p_value", format_double(s.ks_p_value)}},
              {"lag_m", "autocovariance"}, rows);
    report(dir + "/speckle.csv");
}

int cmd_analyze(const AnalyzeArgs& args)
{
    const auto config = load_experiment(args.config);
    const auto records = read_records(args.records);
    if (records.records.empty()) {
        throw Error(ErrorKind::InsufficientData, args.records + ": no measurement records");
    }
    if (records.arm != ReferenceArm::from(config)) {
        throw Error(ErrorKind::FingerprintMismatch, "records (" + records.arm.fingerprint() +
                                                        ") were not produced by this config (" +
                                                        ReferenceArm::from(config).fingerprint() + ")");
    }
    const auto dir = output_dir(args.out, parent_or_dot(args.records));

    const auto res = theoretical_resolution(records.arm.wavelength, records.arm.waist, records.distance);
    write_csv(dir + "/resolution.csv",
              {{"wavelength_m", format_double(records.arm.wavelength)}, {"waist_m", format_double(records.arm.waist)}},
              {"z_m", "delta_x_m", "delta_z_m", "delta_k_per_m", "product"},
              {{records.distance, res.dx, res.dz, res.dk, res.product}});
    report(dir + "/resolution.csv");
    std::cout << "resolution at z=" << format_double(records.distance) << ": dx=" << res.dx << " m, dz=" << res.dz
              << " m, dk=" << res.dk << " rad/m\n";

    int status = 0;
    try {
        if (records.kind != DetectorKind::Bucket) {
            throw Error(ErrorKind::DetectorKindMismatch, "the SNR law needs bucket records");
        }
        RunOptions options;
        options.threads = args.threads;
        const auto counts = args.counts.empty() ? default_counts(records.records.size()) : args.counts;
        const auto curve = snr_curve(records, make_object(config), counts, options);
        std::vector<std::vector<double>> rows;
        for (const auto& p : curve.points) {
            rows.push_back({static_cast<double>(p.n), p.snr});
        }
        write_csv(dir + "/snr.csv",
                  {{"slope", format_double(curve.slope)},
                   {"intercept", format_double(curve.intercept)},
                   {"n_s", format_double(curve.n_s)}},
                  {"N", "snr"}, rows);
        report(dir + "/snr.csv");
        std::cout << "snr slope " << curve.slope << "\n";
    } catch (const Error& e) {
        std::cerr << "error: SNR curve: " << e.what()
                  << "\n  hint: it needs bucket records and at least two counts (--counts) no larger than N\n";
        status = kRuntimeError;
    }
    try {
        speckle_report(dir, records, args.speckle);
    } catch (const Error& e) {
        std::cerr << "error: speckle statistics: " << e.what()
                  << "\n  hint: raise --speckle (at least 100) or use a grid spanning more coherence cells\n";
        status = kRuntimeError;
    }
    return status;
}

// ---- retrieve ----

struct RetrieveArgs {
    std::string gi;
    std::string gd;
    std::size_t iterations = 200;
    double tolerance = 1e-6;
    unsigned restarts = 1;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string out;
};

int cmd_retrieve(const RetrieveArgs& args)
{
    const auto gi = load_reconstruction(args.gi);
    const auto gd = load_reconstruction(args.gd);
    auto problem = extract_intensities(gi, gd);
    problem.max_iterations = args.iterations;
    problem.tolerance = args.tolerance;
    RetrievalOptions options;
    options.seed = args.seed;
    options.restarts = args.restarts;
    options.threads = args.threads;
    const auto result = gerchberg_saxton(problem, options);

    const auto dir = output_dir(args.out, parent_or_dot(args.gi));
    const auto n = result.estimate.grid.nx;
    RealGrid amplitude(n, n);
    RealGrid phase(n, n);
    for (std::size_t i = 0; i < amplitude.size(); ++i) {
        amplitude.values[i] = std::abs(result.estimate.samples[i]);
        phase.values[i] = std::arg(result.estimate.samples[i]);
    }
    for (const auto& [name, grid] : {std::pair{"amplitude", &amplitude}, std::pair{"phase", &phase}}) {
        write_raw(dir + "/" + name + ".raw", *grid);
        write_pgm16(dir + "/" + name + ".pgm", *grid);
        report(dir + "/" + name + ".raw");
        report(dir + "/" + name + ".pgm");
    }
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < result.error_trace.size(); ++k) {
        rows.push_back({static_cast<double>(k + 1), result.error_trace[k]});
    }
    write_csv(dir + "/error.csv", {{"restart", std::to_string(result.restart)}}, {"iter", "error"}, rows);
    report(dir + "/error.csv");
    std::string errors;
    for (const double e : result.restart_errors) {
        errors += (errors.empty() ? "" : ",") + format_double(e);
    }
    write_metadata(dir + "/retrieve.meta", {{"gi", args.gi},
                                            {"gd", args.gd},
                                            {"fingerprint", gi.fingerprint},
                                            {"converged", result.converged ? "true" : "false"},
                                            {"iterations", std::to_string(result.error_trace.size())},
                                            {"final_error", format_double(result.error_trace.back())},
                                            {"restarts", std::to_string(result.restart_errors.size())},
                                            {"best_restart", std::to_string(result.restart)},
                                            {"restart_errors", errors}});
    report(dir + "/retrieve.meta");
    std::cout << "best restart " << result.restart << " of " << result.restart_errors.size() << ", error "
              << result.error_trace.back() << (result.converged ? " (converged)" : " (not converged)") << "\n";
    return 0;
}

void add_config_flags(CLI::App* cmd, ConfigFlags& flags)
{
    cmd->add_option("--preset", flags.preset, "Named parameter set (" + [] {
        std::string names;
        for (const auto& n : preset_names()) {
            names += (names.empty() ? "" : ", ") + n;
        }
        return names;
    }() + ")");
    cmd->add_option("--config", flags.config_path, "key = value config file")->check(CLI::ExistingFile);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Computational ghost imaging and ghost diffraction simulator"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "Run the experiment and write records and G images");
    add_config_flags(simulate_cmd, sim.config);
    simulate_cmd->add_option("-N,--realizations", sim.realizations, "Realization count");
    simulate_cmd->add_option("--seed", sim.seed, "Master seed");
    simulate_cmd->add_option("--threads", sim.threads, "Worker cap (0: all cores); results do not depend on it");
    simulate_cmd->add_option("--out", sim.out, "Output directory (else GHOST_OUTPUT_DIR, else the config's)");

    ReconstructArgs rec;
    auto* reconstruct_cmd = app.add_subcommand("reconstruct", "Correlate saved records at Fresnel planes or the Fourier plane");
    reconstruct_cmd->add_option("records", rec.records, "Records file")->required()->check(CLI::ExistingFile);
    auto* z_opt = reconstruct_cmd->add_option("--z", rec.z, "Comma-separated planes in meters (default: L)")
                      ->delimiter(',');
    reconstruct_cmd->add_flag("--fourier", rec.fourier, "Ghost diffraction at the Fourier plane")->excludes(z_opt);
    reconstruct_cmd->add_option("--threads", rec.threads, "Worker cap (0: all cores)");
    reconstruct_cmd->add_option("--out", rec.out, "Output directory (else GHOST_OUTPUT_DIR, else next to the records)");

    AnalyzeArgs ana;
    auto* analyze_cmd = app.add_subcommand("analyze", "SNR law, speckle statistics and resolution report");
    analyze_cmd->add_option("records", ana.records, "Records file")->required()->check(CLI::ExistingFile);
    add_config_flags(analyze_cmd, ana.config);
    analyze_cmd->add_option("--counts", ana.counts, "Comma-separated realization counts for the SNR law")
        ->delimiter(',');
    analyze_cmd->add_option("--speckle", ana.speckle, "Realizations for the speckle statistics")
        ->capture_default_str();
    analyze_cmd->add_option("--threads", ana.threads, "Worker cap (0: all cores)");
    analyze_cmd->add_option("--out", ana.out, "Output directory (else GHOST_OUTPUT_DIR, else next to the records)");

    RetrieveArgs ret;
    auto* retrieve_cmd = app.add_subcommand("retrieve", "Gerchberg-Saxton phase retrieval from a GI/GD pair");
    retrieve_cmd->add_option("--gi", ret.gi, "GI raw file with its .meta sidecar")->required()->check(CLI::ExistingFile);
    retrieve_cmd->add_option("--gd", ret.gd, "GD raw file with its .meta sidecar")->required()->check(CLI::ExistingFile);
    retrieve_cmd->add_option("--iterations", ret.iterations, "Iteration cap")->capture_default_str();
    retrieve_cmd->add_option("--tolerance", ret.tolerance, "Far-plane error at which to stop")->capture_default_str();
    retrieve_cmd->add_option("--restarts", ret.restarts, "Independent random starts")->capture_default_str();
    retrieve_cmd->add_option("--seed", ret.seed, "Seed for the random starting phases")->capture_default_str();
    retrieve_cmd->add_option("--threads", ret.threads, "Workers across restarts")->capture_default_str();
    retrieve_cmd->add_option("--out", ret.out, "Output directory (else GHOST_OUTPUT_DIR, else next to --gi)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsageError;
    }

    try {
        if (*simulate_cmd) {
            return cmd_simulate(sim);
        }
        if (*reconstruct_cmd) {
            return cmd_reconstruct(rec);
        }
        if (*analyze_cmd) {
            return cmd_analyze(ana);
        }
        return cmd_retrieve(ret);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
}
