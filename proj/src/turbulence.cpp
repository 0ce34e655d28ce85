#include "turbsim/turbulence.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <random>
#include <string>

#include "turbsim/error.hpp"

namespace turbsim {

int min_correlation_radius(double sigma_d2) {
    return static_cast<int>(std::ceil(4.0 * std::sqrt(sigma_d2)));
}

int min_blur_radius(double sigma_b2) {
    return static_cast<int>(std::ceil(3.0 * std::sqrt(sigma_b2)));
}

TurbulenceParams TurbulenceParams::make(double gamma, double sigma_d2, double sigma_b2) {
    TurbulenceParams p;
    p.gamma = gamma;
    p.sigma_d2 = sigma_d2;
    p.sigma_b2 = sigma_b2;
    p.correlation_radius = sigma_d2 > 0.0 ? std::max(1, min_correlation_radius(sigma_d2)) : 0;
    p.blur_radius = sigma_b2 > 0.0 ? std::max(1, min_blur_radius(sigma_b2)) : 0;
    p.validate();
    return p;
}

void TurbulenceParams::validate() const {
    if (!std::isfinite(gamma) || gamma < 0.0) throw ParameterError("gamma must be finite and >= 0");
    if (!std::isfinite(sigma_d2) || sigma_d2 <= 0.0) throw ParameterError("sigma_d2 must be > 0");
    if (!std::isfinite(sigma_b2) || sigma_b2 < 0.0) throw ParameterError("sigma_b2 must be >= 0");
    if (correlation_radius < std::max(1, min_correlation_radius(sigma_d2)))
        throw ParameterError("correlation_radius must be >= ceil(4 * sqrt(sigma_d2)), got " +
                             std::to_string(correlation_radius));
    if (sigma_b2 > 0.0 && blur_radius < std::max(1, min_blur_radius(sigma_b2)))
        throw ParameterError("blur_radius must be >= ceil(3 * sqrt(sigma_b2)), got " +
                             std::to_string(blur_radius));
}

GaussianKernel gaussian_kernel_1d(double sigma, int radius, KernelMode mode) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParameterError("kernel sigma must be > 0");
    if (radius < 1) throw ParameterError("kernel radius must be >= 1");

    GaussianKernel k;
    k.radius = radius;
    k.mode = mode;
    k.weights.resize(static_cast<std::size_t>(2 * radius + 1));
    const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sigma);
    for (int i = -radius; i <= radius; ++i) {
        const double x = static_cast<double>(i);
        k.weights[static_cast<std::size_t>(i + radius)] = norm * std::exp(-x * x / (2.0 * sigma * sigma));
    }
    if (mode == KernelMode::Normalized) {
        double sum = 0.0;
        for (double w : k.weights) sum += w;
        for (double& w : k.weights) w /= sum;
    }
    return k;
}

int reflect_index(int i, int n) noexcept {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

namespace {

constexpr int kBlock = 8;

// Four-lane accumulators; each lane owns one output pixel, so taps are summed
// in ascending order per pixel exactly as in the scalar tail loops.
using Vec4 = double __attribute__((vector_size(32)));

// Vectors never cross a non-inlined boundary, so the ABI note does not apply.
#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wpsabi"

inline Vec4 load4(const double* p) {
    Vec4 v;
    std::memcpy(&v, p, sizeof v);
    return v;
}

inline void store4(double* p, Vec4 v) { std::memcpy(p, &v, sizeof v); }

// AVX2 clone where available; no FMA, so results match the baseline path bit for bit.
#if defined(__GNUC__) && defined(__x86_64__) && !defined(__clang__)
#define TURBSIM_CLONES __attribute__((target_clones("avx2", "default")))
#else
#define TURBSIM_CLONES
#endif

// out[x] = sum_k taps[k] * src[x + k] for x in [0, n), k ascending from -r.
TURBSIM_CLONES void correlate_row(const double* src, const double* taps, int r, int n, double* out) {
    int x = 0;
    for (; x + kBlock <= n; x += kBlock) {
        Vec4 a0 = {}, a1 = {};
        for (int k = -r; k <= r; ++k) {
            const double t = taps[k];
            const double* s = src + x + k;
            a0 += t * load4(s);
            a1 += t * load4(s + 4);
        }
        store4(out + x, a0);
        store4(out + x + 4, a1);
    }
    for (; x < n; ++x) {
        double acc = 0.0;
        for (int k = -r; k <= r; ++k) acc += taps[k] * src[x + k];
        out[x] = acc;
    }
}

// out[x] = sum_k taps[k] * row[k][x]: one output row of the vertical pass.
TURBSIM_CLONES void correlate_column_block(const double* const* row, const double* taps, int r, int n, double* out) {
    int x = 0;
    for (; x + kBlock <= n; x += kBlock) {
        Vec4 a0 = {}, a1 = {};
        for (int k = -r; k <= r; ++k) {
            const double t = taps[k];
            const double* s = row[k] + x;
            a0 += t * load4(s);
            a1 += t * load4(s + 4);
        }
        store4(out + x, a0);
        store4(out + x + 4, a1);
    }
    for (; x < n; ++x) {
        double acc = 0.0;
        for (int k = -r; k <= r; ++k) acc += taps[k] * row[k][x];
        out[x] = acc;
    }
}

#pragma GCC diagnostic pop

}  // namespace

Plane convolve_separable(const Plane& input, const GaussianKernel& kernel) {
    const int w = input.width;
    const int h = input.height;
    const int r = kernel.radius;
    const double* taps = kernel.weights.data() + r;

    // Horizontal pass over a mirror-padded copy of each row.
    Plane horiz(w, h);
    std::vector<double> padded(static_cast<std::size_t>(w + 2 * r));
    for (int y = 0; y < h; ++y) {
        for (int x = -r; x < w + r; ++x) padded[static_cast<std::size_t>(x + r)] = input(reflect_index(x, w), y);
        correlate_row(padded.data() + r, taps, r, w, &horiz(0, y));
    }

    // Vertical pass: same kernel down each column, handled a block of columns at a time.
    Plane out(w, h);
    std::vector<const double*> rows(static_cast<std::size_t>(2 * r + 1));
    for (int y = 0; y < h; ++y) {
        for (int k = -r; k <= r; ++k) rows[static_cast<std::size_t>(k + r)] = &horiz(0, reflect_index(y + k, h));
        correlate_column_block(rows.data() + r, taps, r, w, &out(0, y));
    }
    return out;
}

NoiseField generate_noise_field(int width, int height, std::uint64_t seed) {
    if (width < 1 || height < 1) throw ParameterError("noise field dimensions must be >= 1");
    NoiseField field(width, height);
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& v : field.data) v = normal(engine);
    return field;
}

Plane correlate_field(const NoiseField& noise, const TurbulenceParams& params) {
    params.validate();
    if (noise.width < 1 || noise.height < 1) throw ParameterError("noise field is empty");
    if (params.gamma == 0.0) return Plane(noise.width, noise.height, 0.0);

    const auto kernel =
        gaussian_kernel_1d(std::sqrt(params.sigma_d2), params.correlation_radius, KernelMode::Density);
    Plane out = convolve_separable(noise, kernel);
    for (double& v : out.data) v *= params.gamma;
    return out;
}

DistortionField generate_distortion_field(int width, int height, const TurbulenceParams& params,
                                          std::uint64_t seed) {
    DistortionField field;
    field.du = correlate_field(generate_noise_field(width, height, seed), params);
    field.dv = correlate_field(generate_noise_field(width, height, seed ^ kVerticalStreamKey), params);
    return field;
}

std::vector<Plane> blur_planes(const std::vector<Plane>& planes, double sigma_b2, int radius) {
    if (!std::isfinite(sigma_b2) || sigma_b2 < 0.0) throw ParameterError("sigma_b2 must be >= 0");
    if (sigma_b2 == 0.0) return planes;
    if (radius < std::max(1, min_blur_radius(sigma_b2)))
        throw ParameterError("blur radius must be >= ceil(3 * sqrt(sigma_b2))");

    const auto kernel = gaussian_kernel_1d(std::sqrt(sigma_b2), radius, KernelMode::Normalized);
    std::vector<Plane> out;
    out.reserve(planes.size());
    for (const Plane& p : planes) out.push_back(convolve_separable(p, kernel));
    return out;
}

std::vector<Plane> warp_planes(const std::vector<Plane>& planes, const DistortionField& field) {
    if (planes.empty()) throw ParameterError("warp: no planes");
    const int w = planes.front().width;
    const int h = planes.front().height;
    if (field.du.width != w || field.du.height != h || field.dv.width != w || field.dv.height != h)
        throw ParameterError("warp: field dimensions " + std::to_string(field.width()) + "x" +
                             std::to_string(field.height()) + " do not match image " +
                             std::to_string(w) + "x" + std::to_string(h));

    std::vector<Plane> out(planes.size(), Plane(w, h));
    const double xmax = w - 1;
    const double ymax = h - 1;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double sx = std::clamp(x + field.du(x, y), 0.0, xmax);
            const double sy = std::clamp(y + field.dv(x, y), 0.0, ymax);
            const int x0 = static_cast<int>(std::floor(sx));
            const int y0 = static_cast<int>(std::floor(sy));
            const int x1 = std::min(x0 + 1, w - 1);
            const int y1 = std::min(y0 + 1, h - 1);
            const double fx = sx - x0;
            const double fy = sy - y0;
            for (std::size_t c = 0; c < planes.size(); ++c) {
                const Plane& p = planes[c];
                const double top = p(x0, y0) + fx * (p(x1, y0) - p(x0, y0));
                const double bottom = p(x0, y1) + fx * (p(x1, y1) - p(x0, y1));
                out[c](x, y) = top + fy * (bottom - top);
            }
        }
    }
    return out;
}

RasterImage blur_image(const RasterImage& image, double sigma_b2, int radius) {
    if (image.empty()) throw ParameterError("blur: empty image");
    if (sigma_b2 == 0.0) return image;
    return quantize(blur_planes(to_planes(image), sigma_b2, radius), image.bit_depth());
}

RasterImage warp_image(const RasterImage& image, const DistortionField& field) {
    if (image.empty()) throw ParameterError("warp: empty image");
    return quantize(warp_planes(to_planes(image), field), image.bit_depth());
}

TurbulenceResult simulate_turbulence(const RasterImage& image, const TurbulenceParams& params,
                                     std::uint64_t seed) {
    params.validate();
    if (image.empty()) throw ParameterError("simulate: empty image");

    TurbulenceResult result;
    result.field = generate_distortion_field(image.width(), image.height(), params, seed);
    auto planes = blur_planes(to_planes(image), params.sigma_b2, params.blur_radius);
    result.image = quantize(warp_planes(planes, result.field), image.bit_depth());
    return result;
}

}  // namespace turbsim
