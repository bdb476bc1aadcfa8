#include "ghost/grid.hpp"

#include "ghost/error.hpp"

#include <cmath>
#include <string>

namespace ghost {

void GridSpec::validate() const
{
    if (nx < 2 || ny < 2) {
        throw Error(ErrorKind::InvalidParameter,
                    "grid must be at least 2x2, got " + std::to_string(nx) + "x" + std::to_string(ny));
    }
    if (!(pitch > 0.0) || !std::isfinite(pitch)) {
        throw Error(ErrorKind::InvalidParameter, "grid pitch must be positive and finite");
    }
    if (!std::isfinite(extent_x()) || !std::isfinite(extent_y()) || !std::isfinite(x0) || !std::isfinite(y0)) {
        throw Error(ErrorKind::InvalidParameter, "grid extent must be finite");
    }
}

double ComplexField::energy() const
{
    return sum_squared(samples) * grid.pitch * grid.pitch;
}

RealGrid ComplexField::intensity() const
{
    RealGrid out(grid.nx, grid.ny);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        out.values[i] = std::norm(samples[i]);
    }
    return out;
}

bool ComplexField::all_finite() const
{
    for (const auto& s : samples) {
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
            return false;
        }
    }
    return true;
}

double sum_squared(std::span<const Complex> values)
{
    double acc = 0.0;
    for (const auto& v : values) {
        acc += std::norm(v);
    }
    return acc;
}

double relative_l2(std::span<const Complex> a, std::span<const Complex> b)
{
    if (a.size() != b.size()) {
        throw Error(ErrorKind::ShapeMismatch, "relative_l2 on arrays of different length");
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a[i] - b[i]);
        den += std::norm(b[i]);
    }
    if (den == 0.0) {
        return num == 0.0 ? 0.0 : INFINITY;
    }
    return std::sqrt(num / den);
}

double relative_l2(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) {
        throw Error(ErrorKind::ShapeMismatch, "relative_l2 on arrays of different length");
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    if (den == 0.0) {
        return num == 0.0 ? 0.0 : INFINITY;
    }
    return std::sqrt(num / den);
}

} // namespace ghost
