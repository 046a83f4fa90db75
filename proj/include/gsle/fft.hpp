#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace gsle {

/// In-place complex DFT of a fixed length backed by FFTW.
/// Plans are created once per length under a lock; execution is thread-safe.
class Fft {
public:
    explicit Fft(std::size_t n);

    std::size_t size() const { return n_; }
    /// Unnormalized forward transform, sum_j a_j exp(-2 pi i jk/n).
    void forward(std::span<std::complex<double>> data) const;
    /// Inverse transform including the 1/n factor.
    void inverse(std::span<std::complex<double>> data) const;

private:
    std::size_t n_;
    void* forward_plan_;
    void* inverse_plan_;
};

} // namespace gsle
