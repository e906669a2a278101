#pragma once

#include <cstddef>
#include <vector>

#include "drmime/errors.hpp"

namespace drmime {

// Intensity image, row-major, channel-interleaved, values in [0,1].
// Grayscale (C=1) or RGB (C=3); at least 8x8.
class Image {
public:
    Image(std::size_t height, std::size_t width, std::size_t channels, double fill = 0.0)
        : h_(height), w_(width), c_(channels), data_(height * width * channels, fill) {
        validate_dims();
        if (fill < 0.0 || fill > 1.0) throw InvalidArgument("Image: fill outside [0,1]");
    }

    Image(std::size_t height, std::size_t width, std::size_t channels, std::vector<double> data)
        : h_(height), w_(width), c_(channels), data_(std::move(data)) {
        validate_dims();
        if (data_.size() != h_ * w_ * c_)
            throw InvalidArgument("Image: data size does not match dims");
        validate_range();
    }

    std::size_t height() const { return h_; }
    std::size_t width() const { return w_; }
    std::size_t channels() const { return c_; }
    std::size_t pixel_count() const { return h_ * w_; }

    double& at(std::size_t row, std::size_t col, std::size_t ch = 0) {
        return data_[(row * w_ + col) * c_ + ch];
    }
    double at(std::size_t row, std::size_t col, std::size_t ch = 0) const {
        return data_[(row * w_ + col) * c_ + ch];
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    // Re-check the [0,1] invariant after in-place edits.
    void validate_range() const {
        for (double v : data_)
            if (!(v >= 0.0 && v <= 1.0))
                throw InvalidArgument("Image: intensity outside [0,1]");
    }

private:
    void validate_dims() const {
        if (c_ != 1 && c_ != 3) throw InvalidArgument("Image: channels must be 1 or 3");
        if (h_ < 8 || w_ < 8) throw InvalidArgument("Image: dims must be at least 8x8");
    }

    std::size_t h_, w_, c_;
    std::vector<double> data_;
};

// gray = 0.299 R + 0.587 G + 0.114 B; C=1 input returned unchanged.
Image to_grayscale(const Image& img);

} // namespace drmime
