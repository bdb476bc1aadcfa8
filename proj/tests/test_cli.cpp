#include "ghost/config.hpp"
#include "ghost/io.hpp"
#include "ghost/propagation.hpp"
#include "ghost/reconstruct.hpp"
#include "ghost/scene.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

using namespace ghost;
namespace fs = std::filesystem;

namespace {

const std::string kCli = GHOST_CLI;

fs::path scratch(const std::string& name)
{
    const auto dir = fs::path(GHOST_SCRATCH) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Runs the CLI with stdout and stderr captured into files under `dir`; returns the exit code.
int run(const std::string& args, const fs::path& dir, const std::string& env = {})
{
    const auto cmd = env + (env.empty() ? "" : " ") + kCli + " " + args + " >" + (dir / "stdout.txt").string() +
                     " 2>" + (dir / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string stderr_of(const fs::path& dir)
{
    return read_text_file((dir / "stderr.txt").string());
}

// 128 x 128 arm with a 200 um beam; a few hundred realizations run in about a second.
ExperimentConfig tiny_config(const fs::path& out)
{
    auto c = preset("desk");
    c.waist = 200e-6;
    c.mask = {32, 32};
    c.grid = GridSpec{128, 128, 8e-6};
    c.object.slit_width = 60e-6;
    c.object.slit_separation = 160e-6;
    c.object.slit_height = 300e-6;
    c.distance = 0.03;
    c.detector = DetectorSelection::Both;
    c.realizations = 600;
    c.seed = 11;
    c.output_dir = out.string();
    return c;
}

fs::path write_config(const fs::path& dir, const ExperimentConfig& c)
{
    const auto path = dir / "tiny.cfg";
    write_text_file(path.string(), serialize(c));
    return path;
}

} // namespace

TEST_CASE("simulate writes records, images and a config that re-runs the experiment")
{
    const auto dir = scratch("simulate");
    const auto out = dir / "run";
    const auto config = tiny_config(out);
    const auto cfg = write_config(dir, config);
    REQUIRE(run("simulate --config " + cfg.string() + " --threads 1", dir) == 0);
    for (const char* f : {"config.txt", "run.meta", "records-bucket.txt", "records-pinhole.txt", "gi.raw", "gi.pgm",
                          "gi.meta", "gd.raw", "gd.pgm", "gd.meta"}) {
        CHECK_MESSAGE(fs::exists(out / f), f);
    }
    CHECK(load_config_file((out / "config.txt").string()) == config);
    const auto meta = read_metadata((out / "run.meta").string());
    CHECK(metadata_value(meta, "fingerprint") == ReferenceArm::from(config).fingerprint());

    const auto gi = load_reconstruction((out / "gi.raw").string());
    CHECK(gi.plane == Plane::fresnel(0.03));
    CHECK(gi.n == 600);
    CHECK(gi.fingerprint == ReferenceArm::from(config).fingerprint());
    const auto records = read_records((out / "records-bucket.txt").string());
    CHECK(records.records.size() == 600);

    // The saved config alone reproduces the records, with any worker count.
    const auto again = dir / "again";
    REQUIRE(run("simulate --config " + (out / "config.txt").string() + " --threads 3 --out " + again.string(), dir) ==
            0);
    CHECK(read_text_file((again / "records-bucket.txt").string()) ==
          read_text_file((out / "records-bucket.txt").string()));
    CHECK(read_text_file((again / "gi.raw").string()) == read_text_file((out / "gi.raw").string()));
    CHECK(read_text_file((again / "gd.raw").string()) == read_text_file((out / "gd.raw").string()));
}

TEST_CASE("simulate overrides: -N, --seed and the output directory variable")
{
    const auto dir = scratch("overrides");
    const auto cfg = write_config(dir, tiny_config(dir / "from-config"));

    const auto env_dir = dir / "from-env";
    REQUIRE(run("simulate --config " + cfg.string() + " -N 40 --seed 5", dir, "GHOST_OUTPUT_DIR=" + env_dir.string()) ==
            0);
    CHECK_FALSE(fs::exists(dir / "from-config"));
    const auto records = read_records((env_dir / "records-bucket.txt").string());
    CHECK(records.records.size() == 40);
    CHECK(records.arm.seed == 5);

    // --out wins over the variable.
    const auto flag_dir = dir / "from-flag";
    REQUIRE(run("simulate --config " + cfg.string() + " -N 40 --out " + flag_dir.string(), dir,
                "GHOST_OUTPUT_DIR=" + env_dir.string() + "-unused") == 0);
    CHECK(fs::exists(flag_dir / "records-bucket.txt"));
    CHECK_FALSE(fs::exists(env_dir.string() + "-unused"));
}

TEST_CASE("simulate -N 1 warns and writes G identically zero")
{
    const auto dir = scratch("single");
    const auto cfg = write_config(dir, tiny_config(dir / "out"));
    REQUIRE(run("simulate --config " + cfg.string() + " -N 1", dir) == 0);
    CHECK(stderr_of(dir).find("warning") != std::string::npos);
    const auto g = read_raw((dir / "out" / "gi.raw").string());
    for (const double v : g.values) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("usage and config errors exit 1, sampling errors exit 2")
{
    const auto dir = scratch("errors");
    CHECK(run("", dir) == 1);
    CHECK(run("frobnicate", dir) == 1);
    CHECK(run("simulate --preset no-such-preset", dir) == 1);
    CHECK(run("simulate --realizations many", dir) == 1);
    write_text_file((dir / "broken.cfg").string(), "wavelength = 6.328e-07\nwaist = \n");
    CHECK(run("simulate --config " + (dir / "broken.cfg").string(), dir) == 1);
    CHECK(stderr_of(dir).find("line 2") != std::string::npos);

    auto c = tiny_config(dir / "out");
    c.distance = 0.01; // below the chirp sampling limit of this grid
    const auto cfg = write_config(dir, c);
    CHECK(run("simulate --config " + cfg.string(), dir) == 2);
    CHECK(stderr_of(dir).find("SamplingViolation") != std::string::npos);
}

TEST_CASE("reconstruct: depth stack with sharpness table, and the Fourier plane")
{
    const auto dir = scratch("reconstruct");
    const auto out = dir / "run";
    const auto cfg = write_config(dir, tiny_config(out));
    REQUIRE(run("simulate --config " + cfg.string(), dir) == 0);
    const auto bucket = (out / "records-bucket.txt").string();
    const auto pinhole = (out / "records-pinhole.txt").string();

    const auto stack_dir = dir / "stack";
    REQUIRE(run("reconstruct " + bucket + " --z 0.03,0.035,0.04 --out " + stack_dir.string(), dir) == 0);
    for (const char* f : {"stack-00.raw", "stack-01.raw", "stack-02.pgm", "stack-02.meta"}) {
        CHECK_MESSAGE(fs::exists(stack_dir / f), f);
    }
    const auto csv = read_text_file((stack_dir / "sharpness.csv").string());
    CHECK(csv.find("z_m,sharpness\n0.03,") != std::string::npos);
    CHECK(csv.find("\n0.04,") != std::string::npos);
    // The plane at L repeats the simulated image.
    const auto in_focus = read_raw((stack_dir / "stack-00.raw").string());
    const auto simulated = read_raw((out / "gi.raw").string());
    CHECK(relative_l2(in_focus.span(), simulated.span()) < 1e-12);
    CHECK(load_reconstruction((stack_dir / "stack-01.raw").string()).plane == Plane::fresnel(0.035));

    // No --z: the recorded distance.
    REQUIRE(run("reconstruct " + bucket + " --out " + (dir / "default").string(), dir) == 0);
    CHECK(load_reconstruction((dir / "default" / "stack-00.raw").string()).plane == Plane::fresnel(0.03));

    const auto gd_dir = dir / "gd";
    REQUIRE(run("reconstruct " + pinhole + " --fourier --out " + gd_dir.string(), dir) == 0);
    const auto gd = read_raw((gd_dir / "gd-fourier.raw").string());
    CHECK(relative_l2(gd.span(), read_raw((out / "gd.raw").string()).span()) < 1e-12);

    // GI from pinhole records is allowed with a warning; GD from bucket records is not.
    CHECK(run("reconstruct " + pinhole + " --out " + (dir / "pgi").string(), dir) == 0);
    CHECK(stderr_of(dir).find("warning") != std::string::npos);
    CHECK(run("reconstruct " + bucket + " --fourier --out " + gd_dir.string(), dir) == 2);
    CHECK(stderr_of(dir).find("DetectorKindMismatch") != std::string::npos);
    CHECK(run("reconstruct " + bucket + " --z 0.01 --out " + gd_dir.string(), dir) == 2);
    CHECK(run("reconstruct " + bucket + " --z 0.03 --fourier", dir) == 1);

    write_text_file((dir / "bad-records.txt").string(), read_text_file(bucket) + "oops\n");
    CHECK(run("reconstruct " + (dir / "bad-records.txt").string(), dir) == 2);
    CHECK(stderr_of(dir).find("line 603") != std::string::npos);
}

TEST_CASE("analyze: resolution and SNR reports, data errors exit non-zero")
{
    const auto dir = scratch("analyze");
    const auto out = dir / "run";
    const auto config = tiny_config(out);
    const auto cfg = write_config(dir, config);
    REQUIRE(run("simulate --config " + cfg.string(), dir) == 0);
    const auto bucket = (out / "records-bucket.txt").string();

    // The 128-sample grid is too small for speckle statistics, which is reported as a data error.
    CHECK(run("analyze " + bucket + " --config " + cfg.string() + " --counts 150,300,600 --speckle 100", dir) == 2);
    CHECK(stderr_of(dir).find("hint") != std::string::npos);
    const auto snr = read_text_file((out / "snr.csv").string());
    CHECK(snr.rfind("# slope=", 0) == 0);
    CHECK(snr.find("N,snr\n150,") != std::string::npos);
    CHECK(snr.find("\n600,") != std::string::npos);
    const auto res = read_text_file((out / "resolution.csv").string());
    CHECK(res.find("z_m,delta_x_m,delta_z_m,delta_k_per_m,product\n0.03,") != std::string::npos);

    write_text_file((dir / "empty.txt").string(), "");
    CHECK(run("analyze " + (dir / "empty.txt").string() + " --config " + cfg.string(), dir) != 0);

    auto other = config;
    other.seed = 12;
    const auto other_cfg = dir / "other.cfg";
    write_text_file(other_cfg.string(), serialize(other));
    CHECK(run("analyze " + bucket + " --config " + other_cfg.string(), dir) == 2);
    CHECK(stderr_of(dir).find("FingerprintMismatch") != std::string::npos);
}

TEST_CASE("retrieve: a consistent synthetic pair converges, a mismatched pair is rejected")
{
    const auto dir = scratch("retrieve");
    const std::size_t n = 64;
    const GridSpec grid{n, n, 10e-6};
    auto object = make_double_slit(60e-6, 140e-6, 200e-6, grid, 0.0);
    ComplexField t;
    t.grid = grid;
    t.wavelength = 632.8e-9;
    t.samples = object.samples;
    for (std::size_t iy = 0; iy < n; ++iy) {
        for (std::size_t ix = n / 2; ix < n; ++ix) {
            t(ix, iy) *= std::polar(1.0, 1.0);
        }
    }
    const auto ft = fourier_plane(t);

    ReconstructionResult gi;
    gi.g = t.intensity();
    gi.grid = grid;
    gi.plane = Plane::fresnel(0.1);
    gi.n = 1000;
    gi.fingerprint = "synthetic";
    ReconstructionResult gd = gi;
    gd.g = ft.intensity();
    gd.grid = ft.grid;
    gd.plane = Plane::fourier_plane();
    save_reconstruction((dir / "gi").string(), gi);
    save_reconstruction((dir / "gd").string(), gd);
    gd.fingerprint = "elsewhere";
    save_reconstruction((dir / "gd-other").string(), gd);

    const auto out = dir / "out";
    REQUIRE(run("retrieve --gi " + (dir / "gi.raw").string() + " --gd " + (dir / "gd.raw").string() +
                    " --tolerance 1e-3 --restarts 8 --seed 2 --out " + out.string(),
                dir) == 0);
    const auto meta = read_metadata((out / "retrieve.meta").string());
    CHECK(metadata_value(meta, "converged") == "true");
    CHECK(metadata_value(meta, "restarts") == "8");
    const auto best = metadata_value(meta, "best_restart");
    CHECK_FALSE(best.empty());
    CHECK(read_text_file((dir / "stdout.txt").string()).find("best restart " + best + " of 8") != std::string::npos);
    for (const char* f : {"amplitude.raw", "amplitude.pgm", "phase.raw", "phase.pgm", "error.csv"}) {
        CHECK_MESSAGE(fs::exists(out / f), f);
    }
    CHECK(read_text_file((out / "error.csv").string()).find("iter,error\n1,") != std::string::npos);

    CHECK(run("retrieve --gi " + (dir / "gi.raw").string() + " --gd " + (dir / "gd-other.raw").string(), dir) == 2);
    CHECK(stderr_of(dir).find("FingerprintMismatch") != std::string::npos);
    CHECK(run("retrieve --gi " + (dir / "gd.raw").string() + " --gd " + (dir / "gi.raw").string(), dir) == 2);
}
