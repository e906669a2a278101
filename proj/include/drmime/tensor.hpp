#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "drmime/errors.hpp"

namespace drmime::ad {

// Dense row-major tensor of doubles. Rank 1 and 2 cover nearly everything;
// rank 3 appears only as image grids for the sampling op. Value semantics.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape)
        : shape_(std::move(shape)), data_(count(shape_), 0.0) {}

    Tensor(std::vector<std::size_t> shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != count(shape_))
            throw InvalidArgument("Tensor: data size does not match shape");
    }

    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }

    static Tensor full(std::vector<std::size_t> shape, double v) {
        Tensor t(std::move(shape));
        for (double& x : t.data_) x = v;
        return t;
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t numel() const { return data_.size(); }

    std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
    std::size_t cols() const {
        if (rank() == 1) return 1;
        if (rank() == 2) return shape_[1];
        throw InvalidArgument("Tensor::cols: rank > 2");
    }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& vec() { return data_; }
    const std::vector<double>& vec() const { return data_; }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    bool all_finite() const {
        for (double x : data_)
            if (!std::isfinite(x)) return false;
        return true;
    }

    static std::size_t count(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t d : shape) {
            if (d == 0) throw InvalidArgument("Tensor: zero-sized dimension");
            n *= d;
        }
        return shape.empty() ? 0 : n;
    }

    static std::string shape_str(const std::vector<std::size_t>& shape) {
        std::string s = "{";
        for (std::size_t i = 0; i < shape.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(shape[i]);
        }
        return s + "}";
    }

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

} // namespace drmime::ad
