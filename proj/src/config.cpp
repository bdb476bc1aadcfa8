#include "ghost/config.hpp"

#include "ghost/error.hpp"
#include "ghost/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace ghost {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

void require_positive(double value, const char* name)
{
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw Error(ErrorKind::InvalidParameter, std::string(name) + " must be positive and finite");
    }
}

std::string_view object_kind_name(ObjectKind kind)
{
    switch (kind) {
    case ObjectKind::DoubleSlit: return "double_slit";
    case ObjectKind::Square: return "square";
    case ObjectKind::Open: return "open";
    case ObjectKind::Raster: return "raster";
    }
    return "double_slit";
}

ObjectKind parse_object_kind(std::string_view text)
{
    if (text == "double_slit") {
        return ObjectKind::DoubleSlit;
    }
    if (text == "square") {
        return ObjectKind::Square;
    }
    if (text == "open") {
        return ObjectKind::Open;
    }
    if (text == "raster") {
        return ObjectKind::Raster;
    }
    throw Error(ErrorKind::ParseError, "unknown object kind '" + std::string(text) + "'");
}

// "NXxNY"
std::pair<std::size_t, std::size_t> parse_dims(std::string_view text)
{
    const auto x = text.find('x');
    if (x == std::string_view::npos) {
        throw Error(ErrorKind::ParseError, "expected NXxNY, got '" + std::string(text) + "'");
    }
    return {parse_u64(text.substr(0, x)), parse_u64(text.substr(x + 1))};
}

std::string dims(std::size_t a, std::size_t b)
{
    return std::to_string(a) + "x" + std::to_string(b);
}

} // namespace

std::string format_double(double value)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text)
{
    text = trim(text);
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw Error(ErrorKind::ParseError, "not a number: '" + std::string(text) + "'");
    }
    return value;
}

std::uint64_t parse_u64(std::string_view text)
{
    text = trim(text);
    std::uint64_t value = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw Error(ErrorKind::ParseError, "not an unsigned integer: '" + std::string(text) + "'");
    }
    return value;
}

void ExperimentConfig::validate() const
{
    require_positive(wavelength, "wavelength");
    require_positive(waist, "waist");
    require_positive(slm_pitch, "slm_pitch");
    require_positive(distance, "distance");
    grid.validate();
    if (mask.mx < 1 || mask.my < 1 || macro_factor < 1) {
        throw Error(ErrorKind::InvalidParameter, "mask dims and macro factor must be >= 1");
    }
    if (padding < 2) {
        throw Error(ErrorKind::InvalidParameter, "padding must be >= 2");
    }
    if (realizations < 1) {
        throw Error(ErrorKind::InvalidParameter, "need at least one realization");
    }
    switch (object.kind) {
    case ObjectKind::DoubleSlit:
        require_positive(object.slit_width, "slit_width");
        require_positive(object.slit_separation, "slit_separation");
        require_positive(object.slit_height, "slit_height");
        break;
    case ObjectKind::Square: require_positive(object.square_width, "square_width"); break;
    case ObjectKind::Raster:
        require_positive(object.raster_width, "raster_width");
        if (object.raster_path.empty()) {
            throw Error(ErrorKind::InvalidParameter, "raster object needs raster_path");
        }
        break;
    case ObjectKind::Open: break;
    }
}

ReferenceArm ReferenceArm::from(const ExperimentConfig& config)
{
    ReferenceArm arm;
    arm.seed = config.seed;
    arm.wavelength = config.wavelength;
    arm.waist = config.waist;
    arm.slm_pitch = config.slm_pitch;
    arm.mask = config.mask;
    arm.macro_factor = config.macro_factor;
    arm.grid = config.grid;
    arm.padding = config.padding;
    return arm;
}

std::string ReferenceArm::fingerprint() const
{
    return "seed=" + std::to_string(seed) + ";lambda=" + format_double(wavelength) + ";w0=" + format_double(waist) +
           ";grid=" + dims(grid.nx, grid.ny) + "@" + format_double(grid.pitch);
}

std::string serialize(const ExperimentConfig& c)
{
    std::ostringstream out;
    out << "# ghost experiment config, lengths in meters\n";
    out << "wavelength = " << format_double(c.wavelength) << '\n';
    out << "waist = " << format_double(c.waist) << '\n';
    out << "slm_pitch = " << format_double(c.slm_pitch) << '\n';
    out << "mask = " << dims(c.mask.mx, c.mask.my) << '\n';
    out << "macro_factor = " << c.macro_factor << '\n';
    out << "grid = " << dims(c.grid.nx, c.grid.ny) << '\n';
    out << "pitch = " << format_double(c.grid.pitch) << '\n';
    out << "grid_x0 = " << format_double(c.grid.x0) << '\n';
    out << "grid_y0 = " << format_double(c.grid.y0) << '\n';
    out << "padding = " << c.padding << '\n';
    out << "object = " << object_kind_name(c.object.kind) << '\n';
    out << "slit_width = " << format_double(c.object.slit_width) << '\n';
    out << "slit_separation = " << format_double(c.object.slit_separation) << '\n';
    out << "slit_height = " << format_double(c.object.slit_height) << '\n';
    out << "square_width = " << format_double(c.object.square_width) << '\n';
    out << "raster_path = " << c.object.raster_path << '\n';
    out << "raster_width = " << format_double(c.object.raster_width) << '\n';
    out << "distance = " << format_double(c.distance) << '\n';
    out << "detector = " << to_string(c.detector) << '\n';
    out << "realizations = " << c.realizations << '\n';
    out << "seed = " << c.seed << '\n';
    out << "output_dir = " << c.output_dir << '\n';
    return out.str();
}

ExperimentConfig parse_config(std::string_view text)
{
    ExperimentConfig c;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        try {
            if (key == "wavelength") {
                c.wavelength = parse_double(value);
            } else if (key == "waist") {
                c.waist = parse_double(value);
            } else if (key == "slm_pitch") {
                c.slm_pitch = parse_double(value);
            } else if (key == "mask") {
                const auto [mx, my] = parse_dims(value);
                c.mask = {mx, my};
            } else if (key == "macro_factor") {
                c.macro_factor = static_cast<unsigned>(parse_u64(value));
            } else if (key == "grid") {
                const auto [nx, ny] = parse_dims(value);
                c.grid.nx = nx;
                c.grid.ny = ny;
            } else if (key == "pitch") {
                c.grid.pitch = parse_double(value);
            } else if (key == "grid_x0") {
                c.grid.x0 = parse_double(value);
            } else if (key == "grid_y0") {
                c.grid.y0 = parse_double(value);
            } else if (key == "padding") {
                c.padding = static_cast<unsigned>(parse_u64(value));
            } else if (key == "object") {
                c.object.kind = parse_object_kind(value);
            } else if (key == "slit_width") {
                c.object.slit_width = parse_double(value);
            } else if (key == "slit_separation") {
                c.object.slit_separation = parse_double(value);
            } else if (key == "slit_height") {
                c.object.slit_height = parse_double(value);
            } else if (key == "square_width") {
                c.object.square_width = parse_double(value);
            } else if (key == "raster_path") {
                c.object.raster_path = std::string(value);
            } else if (key == "raster_width") {
                c.object.raster_width = parse_double(value);
            } else if (key == "distance") {
                c.distance = parse_double(value);
            } else if (key == "detector") {
                c.detector = parse_detector_selection(value);
            } else if (key == "realizations") {
                c.realizations = parse_u64(value);
            } else if (key == "seed") {
                c.seed = parse_u64(value);
            } else if (key == "output_dir") {
                c.output_dir = std::string(value);
            } else {
                throw Error(ErrorKind::ParseError, "unknown key '" + std::string(key) + "'");
            }
        } catch (const Error& e) {
            throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": " + e.detail());
        }
    }
    return c;
}

ExperimentConfig load_config_file(const std::string& path)
{
    return parse_config(read_text_file(path));
}

ExperimentConfig preset(std::string_view name)
{
    ExperimentConfig c;
    // Common to every preset: HeNe laser, 740 um waist on an 8 um pitch SLM.
    c.wavelength = 632.8e-9;
    c.waist = 740e-6;
    c.slm_pitch = 8e-6;
    c.seed = 42;
    c.padding = 2;
    if (name == "desk" || name == "desk-fig3") {
        c.grid = GridSpec{512, 512, 8e-6};
        c.mask = {128, 128};
        c.macro_factor = 3;
        c.distance = 0.11;
        c.object = ObjectSpec{};
        c.object.kind = ObjectKind::DoubleSlit;
        c.detector = DetectorSelection::Both;
        c.realizations = 8000;
    } else if (name == "desk-fig2") {
        c.grid = GridSpec{512, 512, 16e-6};
        c.mask = {128, 128};
        c.macro_factor = 4;
        c.distance = 0.84;
        c.object.kind = ObjectKind::Square;
        c.object.square_width = 2e-3;
        c.detector = DetectorSelection::Bucket;
        c.realizations = 16000;
    } else if (name == "paper-fig2") {
        // 300 x 300 cells of 3 x 3 SLM pixels need a 7.2 mm field grid; the 2 cm
        // plate is scaled down to fit it.
        c.grid = GridSpec{900, 900, 8e-6};
        c.mask = {300, 300};
        c.macro_factor = 3;
        c.distance = 0.84;
        c.object.kind = ObjectKind::Square;
        c.object.square_width = 4e-3;
        c.detector = DetectorSelection::Bucket;
        c.realizations = 16000;
    } else if (name == "paper-fig3") {
        // At 11 cm the chirp sampling limit forces pitch <= lambda L / (2 * 7.2 mm).
        c.grid = GridSpec{1536, 1536, 7.2e-3 / 1536.0};
        c.mask = {300, 300};
        c.macro_factor = 3;
        c.distance = 0.11;
        c.object = ObjectSpec{};
        c.object.kind = ObjectKind::DoubleSlit;
        c.detector = DetectorSelection::Both;
        c.realizations = 8000;
    } else {
        throw Error(ErrorKind::InvalidParameter, "unknown preset '" + std::string(name) + "'");
    }
    c.output_dir = "ghost-out/" + std::string(name);
    return c;
}

std::vector<std::string> preset_names()
{
    return {"desk", "desk-fig2", "desk-fig3", "paper-fig2", "paper-fig3"};
}

TransmissionObject make_object(const ExperimentConfig& config)
{
    const auto& o = config.object;
    switch (o.kind) {
    case ObjectKind::DoubleSlit:
        return make_double_slit(o.slit_width, o.slit_separation, o.slit_height, config.grid, config.distance);
    case ObjectKind::Open: return make_uniform_object(config.grid, config.distance);
    case ObjectKind::Square: {
        const auto side = static_cast<std::size_t>(std::lround(o.square_width / config.grid.pitch));
        if (side < 1 || side > config.grid.nx || side > config.grid.ny) {
            throw Error(ErrorKind::GeometryMismatch, "square object does not fit the grid");
        }
        GrayImage img{1, 1, {1.0}};
        return load_object(img, static_cast<double>(side) * config.grid.pitch, config.grid, config.distance);
    }
    case ObjectKind::Raster:
        return load_object(read_pgm(o.raster_path), o.raster_width, config.grid, config.distance);
    }
    throw Error(ErrorKind::InvalidParameter, "unhandled object kind");
}

std::string_view to_string(DetectorSelection selection) noexcept
{
    switch (selection) {
    case DetectorSelection::Bucket: return "bucket";
    case DetectorSelection::Pinhole: return "pinhole";
    case DetectorSelection::Both: return "both";
    }
    return "bucket";
}

DetectorSelection parse_detector_selection(std::string_view text)
{
    if (text == "bucket") {
        return DetectorSelection::Bucket;
    }
    if (text == "pinhole") {
        return DetectorSelection::Pinhole;
    }
    if (text == "both") {
        return DetectorSelection::Both;
    }
    throw Error(ErrorKind::ParseError, "unknown detector '" + std::string(text) + "'");
}

} // namespace ghost
