#pragma once

#include "ghost/grid.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ghost {

/// Complex amplitude transmission t(x, y) on the field grid at distance L.
struct TransmissionObject {
    GridSpec grid;
    std::vector<Complex> samples;
    double distance = 0.0;
    /// |t| > half of max |t|; used by the analysis code, not by the detectors.
    std::vector<std::uint8_t> support;

    double support_area() const;
    std::size_t support_count() const;
    RealGrid intensity_transmission() const; // |t|^2
};

/// Builds the support mask from the samples and checks |t| <= 1 and a non-empty support.
void finish_object(TransmissionObject& object);

/// Two vertical slits of equal width, centers `separation` apart, rasterized to
/// whole samples: width round(width / pitch), center gap round(separation / pitch).
TransmissionObject make_double_slit(double slit_width, double separation, double slit_height, const GridSpec& grid,
                                    double distance);

/// t = value everywhere; an open aperture for value 1.
TransmissionObject make_uniform_object(const GridSpec& grid, double distance, Complex value = 1.0);

/// Single-channel raster, gray levels already scaled to [0, 1].
struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> levels; // row-major, row 0 at the top
};

/// Centers the image on the grid extent with the given physical width, area-averages
/// its gray levels onto the grid samples, zero phase.
TransmissionObject load_object(const GrayImage& image, double physical_width, const GridSpec& grid, double distance);

enum class DetectorKind { Bucket, Pinhole };

std::string_view to_string(DetectorKind kind) noexcept;
DetectorKind parse_detector(std::string_view text);

struct MeasurementRecord {
    std::uint64_t realization = 0;
    DetectorKind kind = DetectorKind::Bucket;
    double value = 0.0;
    std::uint64_t seed = 0;

    friend bool operator==(const MeasurementRecord&, const MeasurementRecord&) = default;
};

/// Sum |E|^2 |t|^2 pitch^2 over the grid.
double bucket_measure(const ComplexField& field, const TransmissionObject& object);

/// |Sum E t exp(-i k.x) pitch^2|^2: the transmitted field's Fourier component at
/// (kx, ky), i.e. an ideal lens with a one-sample pinhole. Defaults to on-axis.
double pinhole_measure(const ComplexField& field, const TransmissionObject& object, double kx = 0.0, double ky = 0.0);

/// Both detector readings from one field in a single pass.
struct DetectorPair {
    double bucket = 0.0;
    double pinhole = 0.0;
};
DetectorPair measure_both(const ComplexField& field, const TransmissionObject& object);

} // namespace ghost
