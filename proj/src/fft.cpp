#include "ghost/fft.hpp"

#include "ghost/error.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <new>
#include <tuple>
#include <utility>

namespace ghost {

static_assert(sizeof(Complex) == sizeof(fftw_complex), "std::complex<double> must match fftw_complex");

AlignedBuffer::AlignedBuffer(std::size_t n)
{
    reserve(n);
}

AlignedBuffer::~AlignedBuffer()
{
    fftw_free(data_);
}

AlignedBuffer::AlignedBuffer(AlignedBuffer&& other) noexcept
    : data_(std::exchange(other.data_, nullptr)), size_(std::exchange(other.size_, 0))
{
}

AlignedBuffer& AlignedBuffer::operator=(AlignedBuffer&& other) noexcept
{
    if (this != &other) {
        fftw_free(data_);
        data_ = std::exchange(other.data_, nullptr);
        size_ = std::exchange(other.size_, 0);
    }
    return *this;
}

void AlignedBuffer::reserve(std::size_t n)
{
    if (n <= size_) {
        return;
    }
    auto* fresh = reinterpret_cast<Complex*>(fftw_alloc_complex(n));
    if (fresh == nullptr) {
        throw std::bad_alloc();
    }
    fftw_free(data_);
    data_ = fresh;
    size_ = n;
}

namespace {

// FFTW's planner is not reentrant.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

using PlanKey = std::tuple<int, std::size_t, std::size_t, int>;

std::map<PlanKey, std::shared_ptr<const FftPlan>>& plan_cache()
{
    static std::map<PlanKey, std::shared_ptr<const FftPlan>> cache;
    return cache;
}

int fftw_sign(FftDirection dir)
{
    return dir == FftDirection::Forward ? FFTW_FORWARD : FFTW_BACKWARD;
}

} // namespace

std::shared_ptr<const FftPlan> FftPlan::batch_1d(std::size_t n, std::size_t howmany, FftDirection dir)
{
    const PlanKey key{1, n, howmany, static_cast<int>(dir)};
    std::lock_guard lock(planner_mutex());
    auto& cache = plan_cache();
    if (auto it = cache.find(key); it != cache.end()) {
        return it->second;
    }
    AlignedBuffer scratch(n * howmany);
    auto* data = reinterpret_cast<fftw_complex*>(scratch.data());
    const int len = static_cast<int>(n);
    // FFTW_ESTIMATE keeps the chosen algorithm, and hence the rounding, identical run to run.
    fftw_plan plan = fftw_plan_many_dft(1, &len, static_cast<int>(howmany), data, nullptr, 1, len, data, nullptr, 1,
                                        len, fftw_sign(dir), FFTW_ESTIMATE);
    if (plan == nullptr) {
        throw Error(ErrorKind::InvalidParameter, "FFTW could not plan a 1D batch transform");
    }
    std::shared_ptr<const FftPlan> result(new FftPlan(plan, n * howmany));
    cache.emplace(key, result);
    return result;
}

std::shared_ptr<const FftPlan> FftPlan::full_2d(std::size_t nx, std::size_t ny, FftDirection dir)
{
    const PlanKey key{2, nx, ny, static_cast<int>(dir)};
    std::lock_guard lock(planner_mutex());
    auto& cache = plan_cache();
    if (auto it = cache.find(key); it != cache.end()) {
        return it->second;
    }
    AlignedBuffer scratch(nx * ny);
    auto* data = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan =
        fftw_plan_dft_2d(static_cast<int>(ny), static_cast<int>(nx), data, data, fftw_sign(dir), FFTW_ESTIMATE);
    if (plan == nullptr) {
        throw Error(ErrorKind::InvalidParameter, "FFTW could not plan a 2D transform");
    }
    std::shared_ptr<const FftPlan> result(new FftPlan(plan, nx * ny));
    cache.emplace(key, result);
    return result;
}

FftPlan::~FftPlan()
{
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
}

void FftPlan::execute(AlignedBuffer& buffer) const
{
    if (buffer.size() < total_) {
        throw Error(ErrorKind::ShapeMismatch, "FFT buffer smaller than the planned transform");
    }
    auto* data = reinterpret_cast<fftw_complex*>(buffer.data());
    fftw_execute_dft(static_cast<fftw_plan>(plan_), data, data);
}

} // namespace ghost
