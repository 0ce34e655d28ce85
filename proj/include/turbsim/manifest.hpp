#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace turbsim {

/// Parameters that produced an augmented image; stored under `turbulence`.
struct TurbulenceRecord {
    double gamma = 0.0;
    double sigma_d2 = 0.0;
    double sigma_b2 = 0.0;
    std::uint64_t seed = 0;

    bool operator==(const TurbulenceRecord&) const = default;
};

struct ImageEntry {
    std::int64_t id = 0;
    std::string file_name;
    int width = 0;
    int height = 0;
    std::optional<TurbulenceRecord> turbulence;

    bool operator==(const ImageEntry&) const = default;
};

struct Annotation {
    std::int64_t id = 0;
    std::int64_t image_id = 0;
    std::int64_t category_id = 0;
    std::array<double, 4> bbox{};  // x, y, w, h in pixels

    bool operator==(const Annotation&) const = default;
};

struct Category {
    std::int64_t id = 0;
    std::string name;

    bool operator==(const Category&) const = default;
};

/// COCO-style dataset description restricted to boxes.
struct DatasetManifest {
    std::vector<ImageEntry> images;
    std::vector<Annotation> annotations;
    std::vector<Category> categories;

    const ImageEntry* find_image(std::int64_t id) const;

    bool operator==(const DatasetManifest&) const = default;
};

/// Parses and validates. Unknown keys are ignored. Throws LoadError with a
/// kind identifying the failure.
DatasetManifest parse_manifest(const nlohmann::json& doc);
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Checks id uniqueness, reference resolution and bbox bounds.
void validate_manifest(const DatasetManifest& manifest);

void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

/// Keeps only the named categories and the annotations that use them.
DatasetManifest filter_categories(const DatasetManifest& manifest, std::span<const std::string> names);

void to_json(nlohmann::json& j, const DatasetManifest& m);

}  // namespace turbsim
