#pragma once

#include "ghost/config.hpp"
#include "ghost/grid.hpp"
#include "ghost/scene.hpp"

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ghost {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

/// Binary PGM (P5), 8 or 16 bits per sample; levels scaled to [0, 1].
GrayImage parse_pgm(std::string_view bytes);
GrayImage read_pgm(const std::string& path);

/// Affine rescale to [0, 1] by min/max; a constant grid maps to all zeros.
RealGrid normalize_affine(const RealGrid& grid);

/// 16-bit P5 of normalize_affine(grid), row 0 first.
void write_pgm16(const std::string& path, const RealGrid& grid);

/// "ghost-raw f64le NX NY\n" followed by NX*NY little-endian doubles.
void write_raw(const std::string& path, const RealGrid& grid);
RealGrid read_raw(const std::string& path);

/// Ordered `key=value` lines; the sidecar format for images and run directories.
using Metadata = std::vector<std::pair<std::string, std::string>>;
void write_metadata(const std::string& path, const Metadata& meta);
Metadata read_metadata(const std::string& path);
/// Value for `key`, or empty if absent.
std::string metadata_value(const Metadata& meta, std::string_view key);

/// One detector's measurement series plus what is needed to regenerate the
/// reference arm for every record.
struct RecordSet {
    ReferenceArm arm;
    double distance = 0.0;
    DetectorKind kind = DetectorKind::Bucket;
    std::vector<MeasurementRecord> records;

    friend bool operator==(const RecordSet&, const RecordSet&) = default;
};

/// Two header lines then `r<TAB>B_r` per record, shortest round-trip decimals.
std::string format_records(const RecordSet& set);
/// ParseError messages carry the 1-based line number.
RecordSet parse_records(std::string_view text);
void write_records(const std::string& path, const RecordSet& set);
RecordSet read_records(const std::string& path);

/// `# key=value` header lines, a column header, then comma-separated rows.
void write_csv(const std::string& path, const Metadata& header, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

} // namespace ghost
