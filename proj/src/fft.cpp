#include "binsonar/fft.hpp"

#include <cmath>
#include <numbers>

#include "binsonar/error.hpp"

namespace binsonar {

Fft::Fft(std::size_t n) : n_(n), bitrev_(n), twiddle_(n / 2) {
    if (!is_power_of_two(n)) throw InvalidArgument("FFT length must be a power of two, got " + std::to_string(n));
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = 0;
        for (std::size_t b = 0; b < bits; ++b)
            if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
        bitrev_[i] = r;
    }
    for (std::size_t k = 0; k < n / 2; ++k) {
        const double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        twiddle_[k] = {std::cos(a), std::sin(a)};
    }
}

void Fft::forward(std::span<std::complex<double>> data) const { transform(data, false); }

void Fft::inverse(std::span<std::complex<double>> data) const {
    transform(data, true);
    const double scale = 1.0 / static_cast<double>(n_);
    for (auto& v : data) v *= scale;
}

void Fft::transform(std::span<std::complex<double>> data, bool inverse) const {
    if (data.size() != n_) throw InvalidArgument("FFT input length does not match plan");
    for (std::size_t i = 0; i < n_; ++i)
        if (i < bitrev_[i]) std::swap(data[i], data[bitrev_[i]]);
    for (std::size_t len = 2; len <= n_; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t stride = n_ / len;
        for (std::size_t start = 0; start < n_; start += len) {
            for (std::size_t j = 0; j < half; ++j) {
                auto w = twiddle_[j * stride];
                if (inverse) w = std::conj(w);
                const auto u = data[start + j];
                const auto x = data[start + j + half];
                const std::complex<double> v{x.real() * w.real() - x.imag() * w.imag(),
                                             x.real() * w.imag() + x.imag() * w.real()};
                data[start + j] = u + v;
                data[start + j + half] = u - v;
            }
        }
    }
}

void fft2d(std::span<std::complex<double>> data, std::size_t rows, std::size_t cols, bool inverse) {
    const Fft row_plan(cols);
    const Fft col_plan(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        auto row = data.subspan(r * cols, cols);
        inverse ? row_plan.inverse(row) : row_plan.forward(row);
    }
    std::vector<std::complex<double>> column(rows);
    for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t r = 0; r < rows; ++r) column[r] = data[r * cols + c];
        inverse ? col_plan.inverse(column) : col_plan.forward(column);
        for (std::size_t r = 0; r < rows; ++r) data[r * cols + c] = column[r];
    }
}

}  // namespace binsonar
