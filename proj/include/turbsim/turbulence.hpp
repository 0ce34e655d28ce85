#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "turbsim/raster.hpp"

namespace turbsim {

/// Geometric turbulence model parameters.
///
/// `gamma` scales the correlated displacement, `sigma_d2` is the variance of
/// the Gaussian that correlates the raw noise, `sigma_b2` the variance of the
/// blur applied before warping. Radii are kernel half-widths in pixels.
struct TurbulenceParams {
    double gamma = 0.0;
    double sigma_d2 = 25.0;
    double sigma_b2 = 1.0;
    int correlation_radius = 20;
    int blur_radius = 3;

    /// Fills both radii with their minimum admissible values
    /// (ceil(4 sigma_D) and ceil(3 sigma_B)) and validates.
    static TurbulenceParams make(double gamma, double sigma_d2, double sigma_b2);

    /// Throws ParameterError if any invariant is violated.
    void validate() const;
};

int min_correlation_radius(double sigma_d2);
int min_blur_radius(double sigma_b2);

enum class KernelMode {
    Density,     // raw pdf samples
    Normalized,  // rescaled to unit sum
};

struct GaussianKernel {
    int radius = 0;
    KernelMode mode = KernelMode::Density;
    std::vector<double> weights;  // 2 * radius + 1 taps, weights[radius] is the center

    double operator[](int offset) const { return weights[static_cast<std::size_t>(offset + radius)]; }
};

GaussianKernel gaussian_kernel_1d(double sigma, int radius, KernelMode mode);

/// Maps an out-of-range index back into [0, n) by mirror reflection about the
/// edge samples (..., 2, 1, 0, 1, 2, ...).
int reflect_index(int i, int n) noexcept;

/// Separable convolution with `kernel` along both axes, mirror boundary.
Plane convolve_separable(const Plane& input, const GaussianKernel& kernel);

/// Seeded i.i.d. standard-normal field.
NoiseField generate_noise_field(int width, int height, std::uint64_t seed);

/// gamma * (G_D * noise), G_D in density mode with sigma = sqrt(sigma_d2).
Plane correlate_field(const NoiseField& noise, const TurbulenceParams& params);

/// Seed offset for the vertical shift component.
inline constexpr std::uint64_t kVerticalStreamKey = 0x9E3779B97F4A7C15ULL;

/// Both shift components for a width x height frame.
DistortionField generate_distortion_field(int width, int height, const TurbulenceParams& params,
                                          std::uint64_t seed);

/// Floating-point planes of `image` blurred with a normalized Gaussian of
/// variance sigma_b2. sigma_b2 == 0 returns the planes unchanged.
std::vector<Plane> blur_planes(const std::vector<Plane>& planes, double sigma_b2, int radius);

/// Backward bilinear warp of floating-point planes; sample coordinates clamp to the frame.
std::vector<Plane> warp_planes(const std::vector<Plane>& planes, const DistortionField& field);

RasterImage blur_image(const RasterImage& image, double sigma_b2, int radius);
RasterImage warp_image(const RasterImage& image, const DistortionField& field);

struct TurbulenceResult {
    RasterImage image;
    DistortionField field;
};

/// Blur then warp. Quantizes once, at the end.
TurbulenceResult simulate_turbulence(const RasterImage& image, const TurbulenceParams& params,
                                     std::uint64_t seed);

}  // namespace turbsim
