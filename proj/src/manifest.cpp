#include "turbsim/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "turbsim/error.hpp"

namespace turbsim {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& what) {
    throw LoadError(LoadError::Kind::Schema, "manifest: " + what);
}

const json& require(const json& obj, const char* key, const char* where) {
    if (!obj.is_object()) schema_error(std::string(where) + " entry is not an object");
    auto it = obj.find(key);
    if (it == obj.end()) schema_error(std::string(where) + " entry missing '" + key + "'");
    return *it;
}

std::int64_t require_int(const json& obj, const char* key, const char* where) {
    const json& v = require(obj, key, where);
    if (!v.is_number_integer()) schema_error(std::string(where) + "." + key + " must be an integer");
    return v.get<std::int64_t>();
}

const json& require_array(const json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end()) schema_error(std::string("missing top-level '") + key + "'");
    if (!it->is_array()) schema_error(std::string("'") + key + "' must be an array");
    return *it;
}

}  // namespace

const ImageEntry* DatasetManifest::find_image(std::int64_t id) const {
    auto it = std::find_if(images.begin(), images.end(), [id](const ImageEntry& e) { return e.id == id; });
    return it == images.end() ? nullptr : &*it;
}

DatasetManifest parse_manifest(const json& doc) {
    if (!doc.is_object()) schema_error("top level must be an object");

    DatasetManifest m;
    for (const json& j : require_array(doc, "images")) {
        ImageEntry e;
        e.id = require_int(j, "id", "image");
        const json& name = require(j, "file_name", "image");
        if (!name.is_string() || name.get_ref<const std::string&>().empty())
            schema_error("image.file_name must be a non-empty string");
        e.file_name = name.get<std::string>();
        e.width = static_cast<int>(require_int(j, "width", "image"));
        e.height = static_cast<int>(require_int(j, "height", "image"));
        if (e.width < 1 || e.height < 1) schema_error("image " + e.file_name + " has non-positive size");
        if (auto t = j.find("turbulence"); t != j.end() && t->is_object()) {
            TurbulenceRecord r;
            r.gamma = t->value("gamma", 0.0);
            r.sigma_d2 = t->value("sigma_d2", 0.0);
            r.sigma_b2 = t->value("sigma_b2", 0.0);
            r.seed = t->value("seed", std::uint64_t{0});
            e.turbulence = r;
        }
        m.images.push_back(std::move(e));
    }
    for (const json& j : require_array(doc, "annotations")) {
        Annotation a;
        a.id = require_int(j, "id", "annotation");
        a.image_id = require_int(j, "image_id", "annotation");
        a.category_id = require_int(j, "category_id", "annotation");
        const json& bbox = require(j, "bbox", "annotation");
        if (!bbox.is_array() || bbox.size() != 4) schema_error("annotation.bbox must be [x, y, w, h]");
        for (std::size_t i = 0; i < 4; ++i) {
            if (!bbox[i].is_number()) schema_error("annotation.bbox entries must be numbers");
            a.bbox[i] = bbox[i].get<double>();
        }
        m.annotations.push_back(a);
    }
    // Categories are optional in some exports; treat absence as empty.
    if (doc.contains("categories")) {
        for (const json& j : require_array(doc, "categories")) {
            Category c;
            c.id = require_int(j, "id", "category");
            const json& name = require(j, "name", "category");
            if (!name.is_string()) schema_error("category.name must be a string");
            c.name = name.get<std::string>();
            m.categories.push_back(std::move(c));
        }
    }
    validate_manifest(m);
    return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError(LoadError::Kind::MissingFile, "manifest not found: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw LoadError(LoadError::Kind::MalformedJson, path.string() + ": " + e.what());
    }
    return parse_manifest(doc);
}

void validate_manifest(const DatasetManifest& m) {
    std::unordered_map<std::int64_t, const ImageEntry*> images;
    for (const auto& e : m.images) {
        if (!images.emplace(e.id, &e).second)
            throw LoadError(LoadError::Kind::DuplicateId, "duplicate image id " + std::to_string(e.id));
    }
    std::unordered_set<std::int64_t> categories;
    for (const auto& c : m.categories) {
        if (!categories.insert(c.id).second)
            throw LoadError(LoadError::Kind::DuplicateId, "duplicate category id " + std::to_string(c.id));
    }
    std::unordered_set<std::int64_t> annotation_ids;
    for (const auto& a : m.annotations) {
        const std::string tag = "annotation " + std::to_string(a.id);
        if (!annotation_ids.insert(a.id).second)
            throw LoadError(LoadError::Kind::DuplicateId, "duplicate " + tag);
        auto img = images.find(a.image_id);
        if (img == images.end())
            throw LoadError(LoadError::Kind::DanglingReference,
                            tag + " references missing image_id " + std::to_string(a.image_id));
        if (!categories.contains(a.category_id))
            throw LoadError(LoadError::Kind::DanglingReference,
                            tag + " references missing category_id " + std::to_string(a.category_id));
        const auto [x, y, w, h] = a.bbox;
        const ImageEntry& e = *img->second;
        if (!(x >= 0.0 && y >= 0.0 && w >= 0.0 && h >= 0.0 && x + w <= e.width && y + h <= e.height))
            throw LoadError(LoadError::Kind::BboxOutOfBounds,
                            tag + " bbox lies outside " + e.file_name + " (" + std::to_string(e.width) + "x" +
                                std::to_string(e.height) + ")");
    }
}

void to_json(json& j, const DatasetManifest& m) {
    json images = json::array();
    for (const auto& e : m.images) {
        json img{{"id", e.id}, {"file_name", e.file_name}, {"width", e.width}, {"height", e.height}};
        if (e.turbulence) {
            img["turbulence"] = {{"gamma", e.turbulence->gamma},
                                 {"sigma_d2", e.turbulence->sigma_d2},
                                 {"sigma_b2", e.turbulence->sigma_b2},
                                 {"seed", e.turbulence->seed}};
        }
        images.push_back(std::move(img));
    }
    json annotations = json::array();
    for (const auto& a : m.annotations) {
        annotations.push_back({{"id", a.id},
                               {"image_id", a.image_id},
                               {"category_id", a.category_id},
                               {"bbox", a.bbox},
                               {"area", a.bbox[2] * a.bbox[3]},
                               {"iscrowd", 0}});
    }
    json categories = json::array();
    for (const auto& c : m.categories) categories.push_back({{"id", c.id}, {"name", c.name}});
    j = json{{"images", std::move(images)},
             {"annotations", std::move(annotations)},
             {"categories", std::move(categories)}};
}

void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw WriteError("cannot write manifest " + path.string());
    out << json(manifest).dump(2) << '\n';
    if (!out) throw WriteError("failed writing manifest " + path.string());
}

DatasetManifest filter_categories(const DatasetManifest& manifest, std::span<const std::string> names) {
    DatasetManifest out;
    out.images = manifest.images;
    std::unordered_set<std::int64_t> kept;
    for (const auto& c : manifest.categories) {
        if (std::find(names.begin(), names.end(), c.name) != names.end()) {
            out.categories.push_back(c);
            kept.insert(c.id);
        }
    }
    for (const auto& a : manifest.annotations)
        if (kept.contains(a.category_id)) out.annotations.push_back(a);
    return out;
}

}  // namespace turbsim
