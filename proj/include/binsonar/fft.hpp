#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace binsonar {

/// Iterative radix-2 FFT plan. Immutable once built, so one plan can be
/// shared by every thread.
class Fft {
public:
    explicit Fft(std::size_t n);

    std::size_t size() const { return n_; }

    /// Unnormalized forward transform X[k] = sum_j x[j] e^{-2 pi i jk/n}.
    void forward(std::span<std::complex<double>> data) const;
    /// Inverse transform including the 1/n factor.
    void inverse(std::span<std::complex<double>> data) const;

private:
    void transform(std::span<std::complex<double>> data, bool inverse) const;

    std::size_t n_;
    std::vector<std::size_t> bitrev_;
    std::vector<std::complex<double>> twiddle_;  // e^{-2 pi i k / n}, k < n/2
};

constexpr bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// 2-D transform of a row-major rows x cols array, both powers of two.
void fft2d(std::span<std::complex<double>> data, std::size_t rows, std::size_t cols, bool inverse);

}  // namespace binsonar
