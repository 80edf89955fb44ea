#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "binsonar/error.hpp"
#include "binsonar/fft.hpp"
#include "binsonar/rng.hpp"
#include "binsonar/spectral.hpp"
#include "oracles.hpp"

using namespace binsonar;

namespace {

Grid random_frames(std::size_t rows, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    Grid g(rows, n);
    for (auto& v : g.data) v = 2 * uniform_unit(gen) - 1;
    return g;
}

Signal tone(double hz, std::size_t n, double amplitude = 0.5) {
    Signal s;
    s.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.samples[i] = amplitude * std::sin(2 * std::numbers::pi * hz * double(i) / kSampleRate);
    return s;
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("FFT matches the naive DFT and inverts") {
    std::mt19937_64 gen(1);
    std::vector<double> x(64);
    for (auto& v : x) v = uniform_unit(gen) - 0.5;
    std::vector<std::complex<double>> c(x.begin(), x.end());
    const Fft plan(64);
    plan.forward(c);
    const auto ref = oracle::dft(x);
    for (std::size_t k = 0; k < 64; ++k) CHECK(std::abs(c[k] - ref[k]) < 1e-12);
    plan.inverse(c);
    for (std::size_t k = 0; k < 64; ++k) CHECK(std::abs(c[k] - x[k]) < 1e-14);
    CHECK_THROWS_AS(Fft(48), InvalidArgument);
}

TEST_CASE("stft_power of zero frames is zero") {
    const auto s = stft_power(Grid(3, 2048));
    CHECK(s.power.rows == 3);
    CHECK(s.power.cols == 1025);
    for (double v : s.power.data) CHECK(v == 0.0);
    CHECK(s.bin_hz[1] == doctest::Approx(22050.0 / 2048));
    CHECK(s.bin_hz[1024] == doctest::Approx(11025.0));
}

TEST_CASE("on-bin sinusoid peaks at its bin") {
    Grid frame(1, 2048);
    const auto w = hann_window(2048);
    for (std::size_t t = 0; t < 2048; ++t) frame(0, t) = w[t] * std::cos(2 * std::numbers::pi * 512.0 * double(t) / 2048.0);
    const auto s = stft_power(frame);
    const auto row = s.power.row(0);
    CHECK(std::max_element(row.begin(), row.end()) - row.begin() == 512);
}

TEST_CASE("stft_power matches the naive DFT oracle on random frames") {
    const auto frames = random_frames(4, 2048, 7);
    const auto s = stft_power(frames);
    for (std::size_t f = 0; f < frames.rows; ++f) {
        const std::vector<double> x(frames.row(f).begin(), frames.row(f).end());
        const auto ref = oracle::dft_power(x);
        const double scale = *std::max_element(ref.begin(), ref.end());
        for (std::size_t k = 0; k < ref.size(); ++k) CHECK(std::abs(s.power(f, k) - ref[k]) <= 1e-9 * scale);
    }
    CHECK_THROWS_AS(stft_power(Grid(1, 1000)), InvalidArgument);
}

TEST_CASE("Parseval holds per frame") {
    const auto frames = random_frames(5, 2048, 8);
    const Fft plan(2048);
    for (std::size_t f = 0; f < frames.rows; ++f) {
        std::vector<std::complex<double>> c(frames.row(f).begin(), frames.row(f).end());
        double time_energy = 0;
        for (auto v : frames.row(f)) time_energy += v * v;
        plan.forward(c);
        double freq_energy = 0;
        for (auto v : c) freq_energy += std::norm(v);
        CHECK(std::abs(time_energy - freq_energy / 2048.0) <= 1e-9 * time_energy);
    }
}

TEST_CASE("streaming STFT equals STFT of materialized frames") {
    Signal s;
    std::mt19937_64 gen(3);
    s.samples.resize(9000);
    for (auto& v : s.samples) v = uniform_unit(gen) - 0.5;
    const FrameParams p;
    CHECK(stft_power(s, p).power == stft_power(frame_signal(s, p)).power);
}

TEST_CASE("parallel kernels are bit-identical to the serial reference") {
    const auto frames = random_frames(37, 2048, 9);
    const auto par = stft_power(frames);
    const auto ser = serial::stft_power(frames);
    CHECK(par.power == ser.power);

    const auto fb = build_mel_filterbank(kSampleRate, 2048, 128, 0, kSampleRate / 2);
    CHECK(apply_mel(par, fb) == serial::apply_mel(ser, fb));

    Signal s;
    std::mt19937_64 gen(4);
    s.samples.resize(20000);
    for (auto& v : s.samples) v = uniform_unit(gen) - 0.5;
    const auto kernels = build_cqt_kernels();
    CHECK(cqt_power(s, kernels, 512) == serial::cqt_power(s, kernels, 512));
}

TEST_CASE("mel filterbank shape, sign and centres") {
    const auto fb = build_mel_filterbank(kSampleRate, 2048, 128, 0, kSampleRate / 2);
    CHECK(fb.weights.rows == 128);
    CHECK(fb.weights.cols == 1025);
    for (double v : fb.weights.data) CHECK(v >= 0.0);
    const double top = 2595.0 * std::log10(1.0 + 11025.0 / 700.0);
    for (std::size_t m = 0; m < 128; ++m) {
        const double expected = 700.0 * (std::pow(10.0, top * double(m + 1) / 129.0 / 2595.0) - 1.0);
        CHECK(fb.center_hz[m] == doctest::Approx(expected).epsilon(1e-12));
        if (m > 0) CHECK(fb.center_hz[m] > fb.center_hz[m - 1]);
    }
    // contiguous support and non-decreasing peak bins
    std::size_t prev_peak = 0;
    for (std::size_t m = 0; m < 128; ++m) {
        const auto row = fb.weights.row(m);
        const auto [lo, hi] = fb.support[m];
        for (std::size_t k = 0; k < row.size(); ++k) CHECK((row[k] > 0) == (k >= lo && k < hi));
        const auto peak = std::size_t(std::max_element(row.begin(), row.end()) - row.begin());
        CHECK(peak >= prev_peak);
        prev_peak = peak;
    }
}

TEST_CASE("mel filterbank matches the oracle weights") {
    const auto fb = build_mel_filterbank(kSampleRate, 2048, 128, 0, kSampleRate / 2);
    const auto ref = oracle::mel_filters(kSampleRate, 2048, 128);
    for (std::size_t m = 0; m < 128; ++m)
        for (std::size_t k = 0; k < 1025; ++k) CHECK(std::abs(fb.weights(m, k) - ref[m][k]) <= 1e-12);
}

TEST_CASE("mel filterbank argument checks") {
    CHECK_THROWS_AS(build_mel_filterbank(kSampleRate, 2048, 0, 0, 11025), InvalidArgument);
    CHECK_THROWS_AS(build_mel_filterbank(kSampleRate, 2048, 10, 500, 400), InvalidArgument);
    CHECK_THROWS_AS(build_mel_filterbank(kSampleRate, 2048, 10, 0, 20000), InvalidArgument);
}

TEST_CASE("apply_mel: zero, impulse and brute-force summation") {
    const auto fb = build_mel_filterbank(kSampleRate, 2048, 128, 0, kSampleRate / 2);
    Spectrogram zero{Grid(2, 1025), {}};
    for (double v : apply_mel(zero, fb).data) CHECK(v == 0.0);

    Spectrogram impulse{Grid(1, 1025), {}};
    impulse.power(0, 300) = 1.0;
    const auto col = apply_mel(impulse, fb);
    for (std::size_t m = 0; m < 128; ++m) CHECK(col(0, m) == fb.weights(m, 300));

    std::mt19937_64 gen(12);
    Spectrogram rnd{Grid(6, 1025), {}};
    for (auto& v : rnd.power.data) v = uniform_unit(gen) * 10;
    const auto mel = apply_mel(rnd, fb);
    for (std::size_t f = 0; f < 6; ++f)
        for (std::size_t m = 0; m < 128; ++m) {
            double acc = 0;
            for (std::size_t k = 0; k < 1025; ++k) acc += fb.weights(m, k) * rnd.power(f, k);
            CHECK(std::abs(mel(f, m) - acc) <= 1e-12 * std::max(1.0, acc));
            CHECK(mel(f, m) >= 0.0);
        }

    Spectrogram wrong{Grid(1, 513), {}};
    CHECK_THROWS_AS(apply_mel(wrong, fb), InvalidArgument);
}

TEST_CASE("power_to_db reference points and floor clip") {
    Grid g(1, 3);
    g.data = {1.0, 1e-12, 0.0};
    const auto db = power_to_db(g);
    CHECK(db.data[0] == 0.0);
    CHECK(db.data[1] == -80.0);
    CHECK(db.data[2] == -80.0);

    Grid z(1, 2);
    const auto dz = power_to_db(z);
    CHECK(dz.data[0] == doctest::Approx(-100.0));
    CHECK(dz.data[1] == doctest::Approx(-100.0));
}

TEST_CASE("DCT-II: constant vector, closed form and orthonormality") {
    const std::vector<double> c(16, 3.0);
    const auto y = dct_ii(c, 16);
    CHECK(y[0] == doctest::Approx(3.0 * 4.0));
    for (std::size_t k = 1; k < 16; ++k) CHECK(std::abs(y[k]) < 1e-12);

    const std::vector<double> e0{1, 0, 0, 0};
    const auto d = dct_ii(e0, 4);
    const auto ref = oracle::dct2({1, 0, 0, 0}, 4);
    CHECK(d[0] == doctest::Approx(0.5).epsilon(1e-15));
    for (std::size_t k = 1; k < 4; ++k)
        CHECK(d[k] == doctest::Approx(std::sqrt(0.5) * std::cos(std::numbers::pi * double(k) / 8.0)).epsilon(1e-14));
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(d[k] - ref[k]) < 1e-15);

    std::mt19937_64 gen(13);
    std::vector<double> v(128);
    for (auto& x : v) x = uniform_unit(gen) * 100 - 50;
    const DctII full(128, 128);
    std::vector<double> fwd(128);
    full.apply(v, fwd);
    // transpose of an orthonormal basis is its inverse
    for (std::size_t j = 0; j < 128; ++j) {
        double back = 0;
        for (std::size_t k = 0; k < 128; ++k) back += full.basis()(k, j) * fwd[k];
        CHECK(std::abs(back - v[j]) < 1e-12 * 50);
    }

    CHECK_THROWS_AS(dct_ii(v, 0), InvalidArgument);
    CHECK_THROWS_AS(dct_ii(v, 129), InvalidArgument);
}

TEST_CASE("constant-Q kernel geometry") {
    const auto k = build_cqt_kernels();
    CHECK(k.n_bins() == 84);
    CHECK(k.q == doctest::Approx(1.0 / (std::pow(2.0, 1.0 / 12) - 1)));
    CHECK(k.freqs[24] == doctest::Approx(32.703 * 4));
    for (std::size_t b = 0; b < 84; ++b) CHECK(k.lengths[b] == std::size_t(std::ceil(k.q * kSampleRate / k.freqs[b])));
    const auto clipped = build_cqt_kernels(kSampleRate, kCqtFmin, 12, 84, 4000);
    CHECK(clipped.lengths[0] == 4000);
    CHECK(clipped.lengths[83] == k.lengths[83]);
    const auto reused = clip_cqt_kernels(k, 4000);
    CHECK(reused.lengths == clipped.lengths);
    CHECK(reused.re == clipped.re);
    CHECK(reused.im == clipped.im);
}

TEST_CASE("cqt_power: zero signal, tone at C3 and direct oracle") {
    Signal zero;
    zero.samples.assign(4096, 0.0);
    const auto kernels = build_cqt_kernels();
    for (double v : cqt_power(zero, kernels).data) CHECK(v == 0.0);
    CHECK(cqt_power(zero, kernels).rows == 1 + 4096 / 512);

    const auto c3 = tone(kCqtFmin * 4, 30000);
    const auto grid = cqt_power(c3, kernels);
    for (std::size_t f = 0; f < grid.rows; ++f) {
        const auto row = grid.row(f);
        CHECK(std::max_element(row.begin(), row.end()) - row.begin() == 24);
    }

    std::mt19937_64 gen(14);
    Signal rnd;
    rnd.samples.resize(6000);
    for (auto& v : rnd.samples) v = uniform_unit(gen) * 2 - 1;
    const auto clipped = build_cqt_kernels(kSampleRate, kCqtFmin, 12, 84, rnd.samples.size());
    const auto g = cqt_power(rnd, clipped);
    for (std::size_t f = 0; f < g.rows; f += 3)
        for (std::size_t b = 0; b < 84; ++b) {
            const double ref = oracle::cqt_bin(rnd.samples, kSampleRate, kCqtFmin, b, f * 512);
            CHECK(std::abs(g(f, b) - ref) <= 1e-9 * ref);
        }
}

}
