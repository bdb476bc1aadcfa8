#include "ghost/scene.hpp"

#include "ghost/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ghost {

namespace {

void check_plane(const ComplexField& field, const TransmissionObject& object)
{
    if (field.domain != Domain::Spatial) {
        throw Error(ErrorKind::PlaneMismatch, "detectors read spatial-domain fields");
    }
    if (!field.grid.same_shape(object.grid) || field.grid.pitch != object.grid.pitch) {
        throw Error(ErrorKind::GridMismatch, "field and object grids differ");
    }
    if (std::abs(field.z - object.distance) > field.grid.pitch) {
        throw Error(ErrorKind::PlaneMismatch, "field plane z = " + std::to_string(field.z) +
                                                  " m does not match object distance " +
                                                  std::to_string(object.distance) + " m");
    }
}

struct Overlap {
    std::size_t index;
    double weight;
};

// Fractional overlap of each grid sample cell with each image pixel along one axis,
// normalized by the sample cell length.
std::vector<std::vector<Overlap>> axis_overlaps(std::size_t samples, double pitch, double first_center,
                                                std::size_t pixels, double pixel_size)
{
    const double image_start = -0.5 * static_cast<double>(pixels) * pixel_size;
    std::vector<std::vector<Overlap>> out(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        const double center = first_center + static_cast<double>(i) * pitch;
        const double a = (center - 0.5 * pitch - image_start) / pixel_size;
        const double b = (center + 0.5 * pitch - image_start) / pixel_size;
        const double lo = std::max(a, 0.0);
        const double hi = std::min(b, static_cast<double>(pixels));
        if (hi <= lo) {
            continue;
        }
        for (auto j = static_cast<std::size_t>(std::floor(lo)); j < pixels && static_cast<double>(j) < hi; ++j) {
            const double len = std::min(hi, static_cast<double>(j + 1)) - std::max(lo, static_cast<double>(j));
            if (len > 0.0) {
                out[i].push_back({j, len / (b - a)});
            }
        }
    }
    return out;
}

} // namespace

double TransmissionObject::support_area() const
{
    return static_cast<double>(support_count()) * grid.pitch * grid.pitch;
}

std::size_t TransmissionObject::support_count() const
{
    return static_cast<std::size_t>(std::count(support.begin(), support.end(), std::uint8_t{1}));
}

RealGrid TransmissionObject::intensity_transmission() const
{
    RealGrid out(grid.nx, grid.ny);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        out.values[i] = std::norm(samples[i]);
    }
    return out;
}

void finish_object(TransmissionObject& object)
{
    double peak = 0.0;
    for (const auto& t : object.samples) {
        const double a = std::abs(t);
        if (!std::isfinite(a)) {
            throw Error(ErrorKind::NonFiniteInput, "object transmission is not finite");
        }
        if (a > 1.0 + 1e-12) {
            throw Error(ErrorKind::InvalidParameter, "object transmission modulus exceeds 1");
        }
        peak = std::max(peak, a);
    }
    if (peak == 0.0) {
        throw Error(ErrorKind::EmptyImage, "object transmits nothing (support area is zero)");
    }
    object.support.resize(object.samples.size());
    for (std::size_t i = 0; i < object.samples.size(); ++i) {
        object.support[i] = std::abs(object.samples[i]) > 0.5 * peak ? 1 : 0;
    }
}

TransmissionObject make_double_slit(double slit_width, double separation, double slit_height, const GridSpec& grid,
                                    double distance)
{
    grid.validate();
    if (!(slit_width > 0.0) || !(slit_height > 0.0)) {
        throw Error(ErrorKind::InvalidParameter, "slit width and height must be positive");
    }
    if (!(separation > slit_width)) {
        throw Error(ErrorKind::InvalidParameter, "slit separation must exceed the slit width");
    }
    const auto width = static_cast<std::ptrdiff_t>(std::lround(slit_width / grid.pitch));
    const auto gap = static_cast<std::ptrdiff_t>(std::lround(separation / grid.pitch));
    const auto height = static_cast<std::ptrdiff_t>(std::lround(slit_height / grid.pitch));
    if (width < 1 || height < 1 || gap <= width) {
        throw Error(ErrorKind::GeometryMismatch, "slits are not resolved by the grid pitch");
    }
    const auto cx = static_cast<std::ptrdiff_t>(grid.center_x());
    const auto cy = static_cast<std::ptrdiff_t>(grid.center_y());
    const std::ptrdiff_t left_center = cx - gap / 2;
    const std::ptrdiff_t centers[2] = {left_center, left_center + gap};
    const std::ptrdiff_t y_begin = cy - height / 2;
    const std::ptrdiff_t y_end = y_begin + height;
    const auto nx = static_cast<std::ptrdiff_t>(grid.nx);
    const auto ny = static_cast<std::ptrdiff_t>(grid.ny);
    if (centers[0] - width / 2 < 0 || centers[1] - width / 2 + width > nx || y_begin < 0 || y_end > ny) {
        throw Error(ErrorKind::GeometryMismatch, "double slit does not fit on the grid");
    }

    TransmissionObject obj;
    obj.grid = grid;
    obj.distance = distance;
    obj.samples.assign(grid.size(), Complex{});
    for (const auto center : centers) {
        const std::ptrdiff_t x_begin = center - width / 2;
        for (std::ptrdiff_t iy = y_begin; iy < y_end; ++iy) {
            for (std::ptrdiff_t ix = x_begin; ix < x_begin + width; ++ix) {
                obj.samples[static_cast<std::size_t>(iy * nx + ix)] = 1.0;
            }
        }
    }
    finish_object(obj);
    return obj;
}

TransmissionObject make_uniform_object(const GridSpec& grid, double distance, Complex value)
{
    grid.validate();
    TransmissionObject obj;
    obj.grid = grid;
    obj.distance = distance;
    obj.samples.assign(grid.size(), value);
    finish_object(obj);
    return obj;
}

TransmissionObject load_object(const GrayImage& image, double physical_width, const GridSpec& grid, double distance)
{
    grid.validate();
    if (image.width == 0 || image.height == 0 || image.levels.size() != image.width * image.height) {
        throw Error(ErrorKind::EmptyImage, "raster has no pixels");
    }
    if (!(physical_width > 0.0)) {
        throw Error(ErrorKind::InvalidParameter, "physical width must be positive");
    }
    const double pixel = physical_width / static_cast<double>(image.width);
    // Image centered on the grid extent, so a raster as wide as the grid covers every sample cell.
    const double half_x = 0.5 * static_cast<double>(grid.nx - 1) * grid.pitch;
    const double half_y = 0.5 * static_cast<double>(grid.ny - 1) * grid.pitch;
    const auto cols = axis_overlaps(grid.nx, grid.pitch, -half_x, image.width, pixel);
    const auto rows = axis_overlaps(grid.ny, grid.pitch, -half_y, image.height, pixel);

    TransmissionObject obj;
    obj.grid = grid;
    obj.distance = distance;
    obj.samples.assign(grid.size(), Complex{});
    std::vector<double> row_mix(image.width);
    for (std::size_t iy = 0; iy < grid.ny; ++iy) {
        if (rows[iy].empty()) {
            continue;
        }
        std::fill(row_mix.begin(), row_mix.end(), 0.0);
        for (const auto& r : rows[iy]) {
            const double* src = image.levels.data() + r.index * image.width;
            for (std::size_t j = 0; j < image.width; ++j) {
                row_mix[j] += r.weight * src[j];
            }
        }
        for (std::size_t ix = 0; ix < grid.nx; ++ix) {
            double acc = 0.0;
            for (const auto& c : cols[ix]) {
                acc += c.weight * row_mix[c.index];
            }
            obj.samples[iy * grid.nx + ix] = std::clamp(acc, 0.0, 1.0);
        }
    }
    finish_object(obj);
    return obj;
}

std::string_view to_string(DetectorKind kind) noexcept
{
    return kind == DetectorKind::Bucket ? "bucket" : "pinhole";
}

DetectorKind parse_detector(std::string_view text)
{
    if (text == "bucket") {
        return DetectorKind::Bucket;
    }
    if (text == "pinhole") {
        return DetectorKind::Pinhole;
    }
    throw Error(ErrorKind::ParseError, "unknown detector kind '" + std::string(text) + "'");
}

double bucket_measure(const ComplexField& field, const TransmissionObject& object)
{
    check_plane(field, object);
    double acc = 0.0;
    for (std::size_t i = 0; i < field.samples.size(); ++i) {
        acc += std::norm(field.samples[i]) * std::norm(object.samples[i]);
    }
    return acc * field.grid.pitch * field.grid.pitch;
}

double pinhole_measure(const ComplexField& field, const TransmissionObject& object, double kx, double ky)
{
    check_plane(field, object);
    const auto& g = field.grid;
    Complex acc{};
    if (kx == 0.0 && ky == 0.0) {
        for (std::size_t i = 0; i < field.samples.size(); ++i) {
            acc += field.samples[i] * object.samples[i];
        }
    } else {
        for (std::size_t iy = 0; iy < g.ny; ++iy) {
            for (std::size_t ix = 0; ix < g.nx; ++ix) {
                const std::size_t i = iy * g.nx + ix;
                acc += field.samples[i] * object.samples[i] * std::polar(1.0, -(kx * g.x(ix) + ky * g.y(iy)));
            }
        }
    }
    return std::norm(acc * (g.pitch * g.pitch));
}

DetectorPair measure_both(const ComplexField& field, const TransmissionObject& object)
{
    check_plane(field, object);
    double bucket = 0.0;
    Complex coherent{};
    for (std::size_t i = 0; i < field.samples.size(); ++i) {
        const Complex transmitted = field.samples[i] * object.samples[i];
        bucket += std::norm(transmitted);
        coherent += transmitted;
    }
    const double area = field.grid.pitch * field.grid.pitch;
    return {bucket * area, std::norm(coherent * area)};
}

} // namespace ghost
