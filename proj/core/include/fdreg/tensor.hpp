#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdreg {

// Dense row-major array of 64-bit floats. This is the universal value carrier:
// matrices are 2-D tensors, conv activations are (batch, channel, length) 3-D
// tensors. Shape is dynamic; there is no broadcasting and no views.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
        data.assign(numel_of(shape), 0.0);
    }

    Tensor(std::vector<std::size_t> s, std::vector<double> d)
        : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != numel_of(shape))
            throw std::invalid_argument("Tensor: data length does not match shape");
    }

    static std::size_t numel_of(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (std::size_t d : s) {
            if (d == 0) throw std::invalid_argument("Tensor: zero dimension");
            n *= d;
        }
        return n;
    }

    std::size_t numel() const { return data.size(); }
    std::size_t ndim() const { return shape.size(); }

    std::size_t rows() const { require_ndim(2); return shape[0]; }
    std::size_t cols() const { require_ndim(2); return shape[1]; }

    double& operator()(std::size_t i) { return data[i]; }
    double operator()(std::size_t i) const { return data[i]; }

    double& operator()(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * shape[1] + j]; }

    double& operator()(std::size_t i, std::size_t j, std::size_t k) {
        return data[(i * shape[1] + j) * shape[2] + k];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return data[(i * shape[1] + j) * shape[2] + k];
    }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void require_ndim(std::size_t n) const {
        if (shape.size() != n)
            throw std::invalid_argument("Tensor: expected " + std::to_string(n) +
                                        "-D, got " + std::to_string(shape.size()) + "-D");
    }

    // Convenience builder for small literal matrices in tests and docs.
    static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows_init) {
        std::size_t r = rows_init.size();
        if (r == 0) throw std::invalid_argument("Tensor::matrix: empty");
        std::size_t c = rows_init.begin()->size();
        Tensor t({r, c});
        std::size_t i = 0;
        for (const auto& row : rows_init) {
            if (row.size() != c)
                throw std::invalid_argument("Tensor::matrix: ragged rows");
            for (double v : row) t.data[i++] = v;
        }
        return t;
    }
};

}  // namespace fdreg
