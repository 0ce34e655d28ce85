#include "turbsim/raster.hpp"

#include <algorithm>
#include <cmath>

#include "turbsim/error.hpp"

namespace turbsim {

RasterImage::RasterImage(int width, int height, int channels, int bit_depth)
    : width_(width), height_(height), channels_(channels), bit_depth_(bit_depth) {
    if (width < 1 || height < 1) throw ParameterError("image dimensions must be >= 1");
    if (channels != 1 && channels != 3) throw ParameterError("image must have 1 or 3 channels");
    if (bit_depth != 8 && bit_depth != 16) throw ParameterError("bit depth must be 8 or 16");
    samples_.assign(static_cast<std::size_t>(width) * height * channels, 0);
}

std::vector<Plane> to_planes(const RasterImage& image) {
    std::vector<Plane> planes;
    planes.reserve(image.channels());
    for (int c = 0; c < image.channels(); ++c) {
        Plane p(image.width(), image.height());
        for (int y = 0; y < image.height(); ++y)
            for (int x = 0; x < image.width(); ++x) p(x, y) = image.at(x, y, c);
        planes.push_back(std::move(p));
    }
    return planes;
}

RasterImage quantize(const std::vector<Plane>& planes, int bit_depth) {
    if (planes.empty()) throw ParameterError("quantize: no planes");
    const int w = planes.front().width;
    const int h = planes.front().height;
    RasterImage out(w, h, static_cast<int>(planes.size()), bit_depth);
    const double top = out.max_value();
    for (int c = 0; c < out.channels(); ++c) {
        const Plane& p = planes[static_cast<std::size_t>(c)];
        if (p.width != w || p.height != h) throw ParameterError("quantize: plane size mismatch");
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                // std::round is half-away-from-zero
                const double v = std::clamp(std::round(p(x, y)), 0.0, top);
                out.at(x, y, c) = static_cast<std::uint16_t>(v);
            }
        }
    }
    return out;
}

}  // namespace turbsim
