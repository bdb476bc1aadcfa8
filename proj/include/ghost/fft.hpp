#pragma once

#include "ghost/grid.hpp"

#include <cstddef>
#include <memory>

namespace ghost {

/// fftw_malloc'd complex array. Every transform in the library runs on these
/// buffers so that cached plans always see the same alignment.
class AlignedBuffer {
public:
    AlignedBuffer() = default;
    explicit AlignedBuffer(std::size_t n);
    ~AlignedBuffer();

    AlignedBuffer(AlignedBuffer&& other) noexcept;
    AlignedBuffer& operator=(AlignedBuffer&& other) noexcept;
    AlignedBuffer(const AlignedBuffer&) = delete;
    AlignedBuffer& operator=(const AlignedBuffer&) = delete;

    Complex* data() noexcept { return data_; }
    const Complex* data() const noexcept { return data_; }
    std::size_t size() const noexcept { return size_; }
    Complex& operator[](std::size_t i) noexcept { return data_[i]; }
    const Complex& operator[](std::size_t i) const noexcept { return data_[i]; }

    /// Grows (never shrinks) the buffer; contents are unspecified afterwards.
    void reserve(std::size_t n);

private:
    Complex* data_ = nullptr;
    std::size_t size_ = 0;
};

enum class FftDirection { Forward, Backward };

/// Unnormalized in-place FFTW plan. Plans are created through a process-wide
/// cache (creation is serialized); execution is safe from any thread.
class FftPlan {
public:
    /// `howmany` contiguous transforms of length n, rows back to back.
    static std::shared_ptr<const FftPlan> batch_1d(std::size_t n, std::size_t howmany, FftDirection dir);
    /// Row-major 2D transform with nx columns and ny rows.
    static std::shared_ptr<const FftPlan> full_2d(std::size_t nx, std::size_t ny, FftDirection dir);

    ~FftPlan();
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    void execute(AlignedBuffer& buffer) const;
    std::size_t length() const noexcept { return total_; }

private:
    FftPlan(void* plan, std::size_t total) : plan_(plan), total_(total) {}

    void* plan_;
    std::size_t total_;
};

} // namespace ghost
