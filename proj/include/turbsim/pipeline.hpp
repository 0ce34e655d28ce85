#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "turbsim/manifest.hpp"
#include "turbsim/raster.hpp"

namespace turbsim {

inline constexpr std::uint64_t kFnvOffsetBasis = 0xCBF29CE484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001B3ULL;

/// FNV-1a, 64-bit. Chain calls by passing the previous result as `state`.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t state = kFnvOffsetBasis);

/// Hash of base_seed (8 bytes LE) || file_name (UTF-8) || gamma_index (8 bytes LE).
std::uint64_t derive_seed(std::uint64_t base_seed, std::string_view file_name, std::uint64_t gamma_index);

enum class BboxPolicy {
    Passthrough,  // boxes copied verbatim
    Dilate,       // grown by ceil(mean shift) px per side, clamped to the image
};

BboxPolicy parse_bbox_policy(std::string_view name);

struct AugmentationJob {
    DatasetManifest manifest;
    std::vector<double> gammas{25.0, 50.0, 100.0, 150.0};
    double sigma_d2 = 25.0;
    double sigma_b2 = 1.0;
    std::uint64_t base_seed = 0;
    BboxPolicy bbox_policy = BboxPolicy::Passthrough;
    bool keep_clean = false;
    int jobs = 1;
    /// Name of the manifest written into the output root; empty to skip.
    std::string manifest_name = "manifest.json";
};

/// Thrown after a full scan when one or more items failed.
class AugmentError : public std::runtime_error {
public:
    explicit AugmentError(std::vector<std::string> items);
    const std::vector<std::string>& items() const noexcept { return items_; }

private:
    std::vector<std::string> items_;
};

/// Directory name for one severity level, e.g. "g25" or "g12.5".
std::string severity_dir(double gamma);

/// Grows [x, y, w, h] by `margin` px per side, clamped to width x height.
std::array<double, 4> dilate_bbox(const std::array<double, 4>& bbox, int margin, int width, int height);

/// Writes each (image, gamma) pair to output_root/g{gamma}/file_name and
/// returns the merged manifest. Clean originals, when kept, are copied to
/// output_root/clean/file_name.
DatasetManifest augment_dataset(const AugmentationJob& job, const std::filesystem::path& input_root,
                                const std::filesystem::path& output_root);

struct PreviewOptions {
    std::vector<double> gammas{25.0, 50.0, 100.0, 150.0};
    double sigma_d2 = 25.0;
    double sigma_b2 = 1.0;
    std::uint64_t seed = 0;
    std::vector<std::array<double, 4>> boxes;  // drawn on every panel
};

/// Original followed by one panel per gamma, side by side.
RasterImage render_montage(const RasterImage& image, std::string_view seed_name, const PreviewOptions& options);

/// Reads `image_path`, renders the montage and writes it as PNG.
RasterImage preview_montage(const std::filesystem::path& image_path, const PreviewOptions& options,
                            const std::filesystem::path& out_path);

}  // namespace turbsim
