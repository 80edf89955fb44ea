#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace binsonar {

/// Dense row-major matrix of doubles. Rows are frames throughout the DSP code.
struct Grid {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Grid() = default;
    Grid(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    bool operator==(const Grid&) const = default;
};

}  // namespace binsonar
