#pragma once

#include "ghost/field.hpp"
#include "ghost/grid.hpp"
#include "ghost/scene.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ghost {

enum class ObjectKind { DoubleSlit, Square, Open, Raster };

struct ObjectSpec {
    ObjectKind kind = ObjectKind::DoubleSlit;
    double slit_width = 170e-6;
    double slit_separation = 400e-6;
    double slit_height = 1e-3;
    double square_width = 2e-3; // Square: side of a centered open square
    std::string raster_path;    // Raster: PGM (P5) file
    double raster_width = 0.0;  // Raster: physical width of the image

    friend bool operator==(const ObjectSpec&, const ObjectSpec&) = default;
};

enum class DetectorSelection { Bucket, Pinhole, Both };

/// Everything one run needs. Lengths are meters throughout.
struct ExperimentConfig {
    double wavelength = 632.8e-9;
    double waist = 740e-6;
    double slm_pitch = 8e-6;
    MacroDims mask{128, 128};
    unsigned macro_factor = 3;
    GridSpec grid{512, 512, 8e-6, 0.0, 0.0};
    unsigned padding = 2;
    ObjectSpec object;
    double distance = 0.11;
    DetectorSelection detector = DetectorSelection::Bucket;
    std::size_t realizations = 8000;
    std::uint64_t seed = 42;
    std::string output_dir = "ghost-out";

    /// Throws InvalidParameter on non-physical values.
    void validate() const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// The computable reference arm: what is needed to regenerate E_r(x, y, 0) for any r.
struct ReferenceArm {
    std::uint64_t seed = 0;
    double wavelength = 0.0;
    double waist = 0.0;
    double slm_pitch = 0.0;
    MacroDims mask;
    unsigned macro_factor = 1;
    GridSpec grid;
    unsigned padding = 2;

    static ReferenceArm from(const ExperimentConfig& config);

    /// "seed=..;lambda=..;w0=..;grid=NXxNY@PITCH" - identifies compatible reconstructions.
    std::string fingerprint() const;

    friend bool operator==(const ReferenceArm&, const ReferenceArm&) = default;
};

/// Flat `key = value` text, one entry per line; '#' starts a comment.
std::string serialize(const ExperimentConfig& config);
ExperimentConfig parse_config(std::string_view text);

ExperimentConfig load_config_file(const std::string& path);

/// Named parameter sets: "desk" (default), "desk-fig2", "desk-fig3",
/// "paper-fig2", "paper-fig3". Throws InvalidParameter for unknown names.
ExperimentConfig preset(std::string_view name);
std::vector<std::string> preset_names();

/// Builds the transmission object described by the config on its grid at its distance.
TransmissionObject make_object(const ExperimentConfig& config);

std::string_view to_string(DetectorSelection selection) noexcept;
DetectorSelection parse_detector_selection(std::string_view text);

/// Shortest decimal that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);
std::uint64_t parse_u64(std::string_view text);

} // namespace ghost
