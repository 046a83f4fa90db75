#include "gsle/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "gsle/error.hpp"

namespace gsle {

namespace {

struct PlanPair {
    fftw_plan forward;
    fftw_plan inverse;
};

// The FFTW planner is not reentrant; plans are made once and shared for the process lifetime.
PlanPair plans_for(std::size_t n)
{
    static std::mutex mutex;
    static std::map<std::size_t, PlanPair> cache;
    std::lock_guard lock(mutex);
    if (auto it = cache.find(n); it != cache.end()) return it->second;

    std::vector<std::complex<double>> scratch(n);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    const int len = static_cast<int>(n);
    PlanPair p{fftw_plan_dft_1d(len, buf, buf, FFTW_FORWARD, flags),
               fftw_plan_dft_1d(len, buf, buf, FFTW_BACKWARD, flags)};
    if (!p.forward || !p.inverse) throw Error(ErrorCode::InvalidGrid, "FFTW could not plan transform");
    cache.emplace(n, p);
    return p;
}

} // namespace

Fft::Fft(std::size_t n) : n_(n)
{
    auto p = plans_for(n);
    forward_plan_ = p.forward;
    inverse_plan_ = p.inverse;
}

void Fft::forward(std::span<std::complex<double>> data) const
{
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), buf, buf);
}

void Fft::inverse(std::span<std::complex<double>> data) const
{
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(static_cast<fftw_plan>(inverse_plan_), buf, buf);
    const double scale = 1.0 / static_cast<double>(n_);
    for (auto& v : data) v *= scale;
}

} // namespace gsle
