#include "ghost/io.hpp"

#include "ghost/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace ghost {

namespace {

std::string read_binary(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::IoError, "cannot open '" + path + "' for reading");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_binary(const std::string& path, std::string_view bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::IoError, "cannot open '" + path + "' for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorKind::IoError, "write to '" + path + "' failed");
    }
}

// Whitespace-separated header token; PGM allows '#' comments between tokens.
std::string_view next_pgm_token(std::string_view bytes, std::size_t& pos)
{
    while (pos < bytes.size()) {
        const char c = bytes[pos];
        if (c == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') {
                ++pos;
            }
        } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            ++pos;
        } else {
            break;
        }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
    }
    if (start == pos) {
        throw Error(ErrorKind::UnsupportedFormat, "truncated PGM header");
    }
    return bytes.substr(start, pos - start);
}

std::vector<std::string_view> split_ws(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) {
            ++pos;
        }
        const std::size_t start = pos;
        while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') {
            ++pos;
        }
        if (pos > start) {
            out.push_back(line.substr(start, pos - start));
        }
    }
    return out;
}

std::map<std::string, std::string, std::less<>> header_fields(std::string_view line)
{
    std::map<std::string, std::string, std::less<>> out;
    for (const auto token : split_ws(line.substr(1))) {
        const auto eq = token.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorKind::ParseError, "expected key=value, got '" + std::string(token) + "'");
        }
        out.emplace(std::string(token.substr(0, eq)), std::string(token.substr(eq + 1)));
    }
    return out;
}

std::string_view field(const std::map<std::string, std::string, std::less<>>& fields, std::string_view key)
{
    const auto it = fields.find(key);
    if (it == fields.end()) {
        throw Error(ErrorKind::ParseError, "missing header field '" + std::string(key) + "'");
    }
    return it->second;
}

std::pair<std::size_t, std::size_t> parse_pair(std::string_view text, char sep)
{
    const auto at = text.find(sep);
    if (at == std::string_view::npos) {
        throw Error(ErrorKind::ParseError, "malformed '" + std::string(text) + "'");
    }
    return {parse_u64(text.substr(0, at)), parse_u64(text.substr(at + 1))};
}

} // namespace

std::string read_text_file(const std::string& path)
{
    return read_binary(path);
}

void write_text_file(const std::string& path, std::string_view text)
{
    write_binary(path, text);
}

GrayImage parse_pgm(std::string_view bytes)
{
    if (bytes.size() < 2 || bytes[0] != 'P') {
        throw Error(ErrorKind::UnsupportedFormat, "not a portable graymap");
    }
    if (bytes[1] != '5') {
        throw Error(ErrorKind::UnsupportedFormat, std::string("only binary P5 graymaps are supported, got P") + bytes[1]);
    }
    std::size_t pos = 2;
    GrayImage img;
    std::size_t maxval = 0;
    try {
        img.width = parse_u64(next_pgm_token(bytes, pos));
        img.height = parse_u64(next_pgm_token(bytes, pos));
        maxval = parse_u64(next_pgm_token(bytes, pos));
    } catch (const Error& e) {
        throw Error(ErrorKind::UnsupportedFormat, "bad PGM header: " + e.detail());
    }
    if (img.width == 0 || img.height == 0) {
        throw Error(ErrorKind::EmptyImage, "PGM has no pixels");
    }
    if (maxval == 0 || maxval > 65535) {
        throw Error(ErrorKind::UnsupportedFormat, "PGM maxval out of range");
    }
    ++pos; // single whitespace byte before the raster
    const std::size_t bytes_per = maxval > 255 ? 2 : 1;
    const std::size_t count = img.width * img.height;
    if (bytes.size() < pos + count * bytes_per) {
        throw Error(ErrorKind::UnsupportedFormat, "PGM raster is truncated");
    }
    img.levels.resize(count);
    const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
    for (std::size_t i = 0; i < count; ++i) {
        const unsigned v = bytes_per == 2 ? (unsigned{raw[2 * i]} << 8) | raw[2 * i + 1] : raw[i];
        img.levels[i] = std::min(1.0, static_cast<double>(v) / static_cast<double>(maxval));
    }
    return img;
}

GrayImage read_pgm(const std::string& path)
{
    return parse_pgm(read_binary(path));
}

RealGrid normalize_affine(const RealGrid& grid)
{
    RealGrid out(grid.nx, grid.ny);
    if (grid.values.empty()) {
        return out;
    }
    const auto [lo, hi] = std::minmax_element(grid.values.begin(), grid.values.end());
    const double span = *hi - *lo;
    if (!(span > 0.0)) {
        return out;
    }
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
        out.values[i] = (grid.values[i] - *lo) / span;
    }
    return out;
}

void write_pgm16(const std::string& path, const RealGrid& grid)
{
    const auto norm = normalize_affine(grid);
    std::string bytes = "P5\n" + std::to_string(grid.nx) + " " + std::to_string(grid.ny) + "\n65535\n";
    const std::size_t header = bytes.size();
    bytes.resize(header + 2 * norm.values.size());
    for (std::size_t i = 0; i < norm.values.size(); ++i) {
        const auto v = static_cast<unsigned>(std::lround(norm.values[i] * 65535.0));
        bytes[header + 2 * i] = static_cast<char>(v >> 8);
        bytes[header + 2 * i + 1] = static_cast<char>(v & 0xff);
    }
    write_binary(path, bytes);
}

void write_raw(const std::string& path, const RealGrid& grid)
{
    static_assert(std::endian::native == std::endian::little, "raw dumps assume a little-endian host");
    std::string bytes = "ghost-raw f64le " + std::to_string(grid.nx) + " " + std::to_string(grid.ny) + "\n";
    const std::size_t header = bytes.size();
    bytes.resize(header + grid.values.size() * sizeof(double));
    std::memcpy(bytes.data() + header, grid.values.data(), grid.values.size() * sizeof(double));
    write_binary(path, bytes);
}

RealGrid read_raw(const std::string& path)
{
    const auto bytes = read_binary(path);
    const auto nl = bytes.find('\n');
    if (nl == std::string::npos) {
        throw Error(ErrorKind::UnsupportedFormat, "raw dump has no header line");
    }
    const auto tokens = split_ws(std::string_view(bytes).substr(0, nl));
    if (tokens.size() != 4 || tokens[0] != "ghost-raw" || tokens[1] != "f64le") {
        throw Error(ErrorKind::UnsupportedFormat, "'" + path + "' is not a ghost raw dump");
    }
    RealGrid grid(parse_u64(tokens[2]), parse_u64(tokens[3]));
    if (bytes.size() - nl - 1 != grid.values.size() * sizeof(double)) {
        throw Error(ErrorKind::UnsupportedFormat, "raw dump size does not match its header");
    }
    std::memcpy(grid.values.data(), bytes.data() + nl + 1, grid.values.size() * sizeof(double));
    return grid;
}

void write_metadata(const std::string& path, const Metadata& meta)
{
    std::string text;
    for (const auto& [k, v] : meta) {
        text += k + "=" + v + "\n";
    }
    write_binary(path, text);
}

Metadata read_metadata(const std::string& path)
{
    const auto text = read_binary(path);
    Metadata meta;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::ParseError, path + ":" + std::to_string(line_no) + ": expected key=value");
        }
        meta.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
    return meta;
}

std::string metadata_value(const Metadata& meta, std::string_view key)
{
    for (const auto& [k, v] : meta) {
        if (k == key) {
            return v;
        }
    }
    return {};
}

std::string format_records(const RecordSet& set)
{
    const auto& a = set.arm;
    std::string out;
    out += "# seed=" + std::to_string(a.seed) + " lambda=" + format_double(a.wavelength) +
           " w0=" + format_double(a.waist) + " L=" + format_double(set.distance) + " grid=" + std::to_string(a.grid.nx) +
           "x" + std::to_string(a.grid.ny) + "@" + format_double(a.grid.pitch) +
           " detector=" + std::string(to_string(set.kind)) + "\n";
    out += "# slm_pitch=" + format_double(a.slm_pitch) + " mask=" + std::to_string(a.mask.mx) + "x" +
           std::to_string(a.mask.my) + " macro_factor=" + std::to_string(a.macro_factor) +
           " padding=" + std::to_string(a.padding) + " origin=" + format_double(a.grid.x0) + "," +
           format_double(a.grid.y0) + "\n";
    for (const auto& rec : set.records) {
        out += std::to_string(rec.realization);
        out += '\t';
        out += format_double(rec.value);
        out += '\n';
    }
    return out;
}

RecordSet parse_records(std::string_view text)
{
    RecordSet set;
    std::size_t line_no = 0;
    bool have_first = false;
    bool have_second = false;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        try {
            if (line_no == 1) {
                if (line.empty() || line[0] != '#') {
                    throw Error(ErrorKind::ParseError, "missing '# seed=...' header");
                }
                const auto f = header_fields(line);
                set.arm.seed = parse_u64(field(f, "seed"));
                set.arm.wavelength = parse_double(field(f, "lambda"));
                set.arm.waist = parse_double(field(f, "w0"));
                set.distance = parse_double(field(f, "L"));
                const auto grid = field(f, "grid");
                const auto at = grid.find('@');
                if (at == std::string_view::npos) {
                    throw Error(ErrorKind::ParseError, "grid must be NXxNY@PITCH");
                }
                const auto [nx, ny] = parse_pair(grid.substr(0, at), 'x');
                set.arm.grid.nx = nx;
                set.arm.grid.ny = ny;
                set.arm.grid.pitch = parse_double(grid.substr(at + 1));
                set.kind = parse_detector(field(f, "detector"));
                have_first = true;
                continue;
            }
            if (!line.empty() && line[0] == '#') {
                if (line_no == 2) {
                    const auto f = header_fields(line);
                    set.arm.slm_pitch = parse_double(field(f, "slm_pitch"));
                    const auto [mx, my] = parse_pair(field(f, "mask"), 'x');
                    set.arm.mask = {mx, my};
                    set.arm.macro_factor = static_cast<unsigned>(parse_u64(field(f, "macro_factor")));
                    set.arm.padding = static_cast<unsigned>(parse_u64(field(f, "padding")));
                    if (const auto it = f.find("origin"); it != f.end()) {
                        const std::string_view origin = it->second;
                        const auto comma = origin.find(',');
                        if (comma == std::string_view::npos) {
                            throw Error(ErrorKind::ParseError, "origin must be X0,Y0");
                        }
                        set.arm.grid.x0 = parse_double(origin.substr(0, comma));
                        set.arm.grid.y0 = parse_double(origin.substr(comma + 1));
                    }
                    have_second = true;
                }
                continue;
            }
            if (line.empty()) {
                continue;
            }
            if (!have_second) {
                throw Error(ErrorKind::ParseError, "missing '# slm_pitch=...' header");
            }
            const auto tab = line.find('\t');
            if (tab == std::string_view::npos) {
                throw Error(ErrorKind::ParseError, "expected 'r<TAB>value'");
            }
            MeasurementRecord rec;
            rec.realization = parse_u64(line.substr(0, tab));
            rec.value = parse_double(line.substr(tab + 1));
            if (!std::isfinite(rec.value) || rec.value < 0.0) {
                throw Error(ErrorKind::ParseError, "detector value must be finite and non-negative");
            }
            rec.kind = set.kind;
            rec.seed = set.arm.seed;
            set.records.push_back(rec);
        } catch (const Error& e) {
            throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": " + e.detail());
        }
    }
    if (!have_first || !have_second) {
        throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no + 1) + ": records header is incomplete");
    }
    return set;
}

void write_records(const std::string& path, const RecordSet& set)
{
    write_binary(path, format_records(set));
}

RecordSet read_records(const std::string& path)
{
    try {
        return parse_records(read_binary(path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ParseError) {
            throw Error(ErrorKind::ParseError, path + ": " + e.detail());
        }
        throw;
    }
}

void write_csv(const std::string& path, const Metadata& header, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows)
{
    std::string text;
    for (const auto& [k, v] : header) {
        text += "# " + k + "=" + v + "\n";
    }
    for (std::size_t i = 0; i < columns.size(); ++i) {
        text += (i ? "," : "") + columns[i];
    }
    text += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) {
                text += ',';
            }
            text += format_double(row[i]);
        }
        text += '\n';
    }
    write_binary(path, text);
}

} // namespace ghost
