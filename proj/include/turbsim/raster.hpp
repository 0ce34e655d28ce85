#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace turbsim {

/// Integer-valued image: 1 or 3 interleaved channels at 8 or 16 bits per sample.
///
/// Samples are stored row-major as uint16_t regardless of bit depth so the
/// processing code has a single path; `max_value()` bounds them.
class RasterImage {
public:
    RasterImage() = default;
    RasterImage(int width, int height, int channels, int bit_depth);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    int bit_depth() const noexcept { return bit_depth_; }
    bool empty() const noexcept { return samples_.empty(); }
    std::uint32_t max_value() const noexcept { return (1u << bit_depth_) - 1u; }

    std::uint16_t at(int x, int y, int c = 0) const {
        return samples_[index(x, y, c)];
    }
    std::uint16_t& at(int x, int y, int c = 0) { return samples_[index(x, y, c)]; }

    const std::vector<std::uint16_t>& samples() const noexcept { return samples_; }
    std::vector<std::uint16_t>& samples() noexcept { return samples_; }

    bool operator==(const RasterImage&) const = default;

private:
    std::size_t index(int x, int y, int c) const noexcept {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 1;
    int bit_depth_ = 8;
    std::vector<std::uint16_t> samples_;
};

/// Single-channel real-valued grid, row-major. Used for noise, shift
/// components and floating-point image planes.
struct Plane {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    Plane() = default;
    Plane(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    double operator()(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    double& operator()(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }

    bool operator==(const Plane&) const = default;
};

/// i.i.d. standard-normal samples.
using NoiseField = Plane;

/// Per-pixel backward displacement in pixels.
struct DistortionField {
    Plane du;
    Plane dv;

    int width() const noexcept { return du.width; }
    int height() const noexcept { return du.height; }

    bool operator==(const DistortionField&) const = default;
};

/// Splits an image into per-channel double planes.
std::vector<Plane> to_planes(const RasterImage& image);

/// Rounds half away from zero, clamps to [0, 2^bit_depth - 1], interleaves.
RasterImage quantize(const std::vector<Plane>& planes, int bit_depth);

}  // namespace turbsim
