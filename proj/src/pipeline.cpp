#include "turbsim/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

#include "turbsim/calibration.hpp"
#include "turbsim/error.hpp"
#include "turbsim/png_io.hpp"
#include "turbsim/turbulence.hpp"

namespace turbsim {

namespace fs = std::filesystem;

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t state) {
    for (std::uint8_t b : bytes) {
        state ^= b;
        state *= kFnvPrime;
    }
    return state;
}

namespace {

std::array<std::uint8_t, 8> le_bytes(std::uint64_t v) {
    std::array<std::uint8_t, 8> out{};
    for (std::size_t i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
    return out;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base_seed, std::string_view file_name, std::uint64_t gamma_index) {
    std::uint64_t h = fnv1a64(le_bytes(base_seed));
    h = fnv1a64({reinterpret_cast<const std::uint8_t*>(file_name.data()), file_name.size()}, h);
    return fnv1a64(le_bytes(gamma_index), h);
}

BboxPolicy parse_bbox_policy(std::string_view name) {
    if (name == "passthrough") return BboxPolicy::Passthrough;
    if (name == "dilate") return BboxPolicy::Dilate;
    throw ParameterError("unknown bbox policy '" + std::string(name) + "'");
}

AugmentError::AugmentError(std::vector<std::string> items)
    : std::runtime_error(std::to_string(items.size()) + " item(s) failed" +
                         (items.empty() ? std::string() : ", first: " + items.front())),
      items_(std::move(items)) {}

std::string severity_dir(double gamma) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, gamma);
    return "g" + std::string(buf, end);
}

std::array<double, 4> dilate_bbox(const std::array<double, 4>& bbox, int margin, int width, int height) {
    const double x0 = std::max(0.0, bbox[0] - margin);
    const double y0 = std::max(0.0, bbox[1] - margin);
    const double x1 = std::min(static_cast<double>(width), bbox[0] + bbox[2] + margin);
    const double y1 = std::min(static_cast<double>(height), bbox[1] + bbox[3] + margin);
    return {x0, y0, x1 - x0, y1 - y0};
}

namespace {

// One output image. gamma_index < 0 marks a clean copy.
struct WorkItem {
    const ImageEntry* source = nullptr;
    int gamma_index = -1;
    std::string out_name;
    std::uint64_t seed = 0;
};

std::string generic(const fs::path& p) { return p.generic_string(); }

template <class Fn>
void run_parallel(std::size_t count, int jobs, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(std::max(1, jobs), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) fn(i);
        });
    }
}

}  // namespace

DatasetManifest augment_dataset(const AugmentationJob& job, const fs::path& input_root, const fs::path& output_root) {
    if (job.gammas.empty()) throw ParameterError("at least one gamma is required");
    for (double g : job.gammas)
        if (!std::isfinite(g) || g < 0.0) throw ParameterError("gamma values must be finite and >= 0");
    validate_manifest(job.manifest);
    // Validates sigma_d2 / sigma_b2 up front.
    (void)TurbulenceParams::make(job.gammas.front(), job.sigma_d2, job.sigma_b2);

    std::vector<const ImageEntry*> sources;
    for (const auto& e : job.manifest.images) sources.push_back(&e);
    std::sort(sources.begin(), sources.end(),
              [](const ImageEntry* a, const ImageEntry* b) { return a->file_name < b->file_name; });
    for (std::size_t i = 1; i < sources.size(); ++i)
        if (sources[i]->file_name == sources[i - 1]->file_name)
            throw ParameterError("duplicate file_name in manifest: " + sources[i]->file_name);

    std::vector<WorkItem> items;
    for (const ImageEntry* src : sources) {
        if (job.keep_clean) items.push_back({src, -1, generic(fs::path("clean") / src->file_name), 0});
        for (std::size_t gi = 0; gi < job.gammas.size(); ++gi) {
            items.push_back({src, static_cast<int>(gi), generic(fs::path(severity_dir(job.gammas[gi])) / src->file_name),
                             derive_seed(job.base_seed, src->file_name, gi)});
        }
    }

    // Pre-scan: every input readable and matching its manifest size.
    std::vector<std::string> errors;
    for (const ImageEntry* src : sources) {
        try {
            const auto info = read_png_info(input_root / src->file_name);
            if (info.width != src->width || info.height != src->height) {
                errors.push_back(src->file_name + ": size " + std::to_string(info.width) + "x" +
                                 std::to_string(info.height) + " does not match manifest " +
                                 std::to_string(src->width) + "x" + std::to_string(src->height));
            }
        } catch (const std::exception& e) {
            errors.push_back(e.what());
        }
    }
    if (!errors.empty()) throw AugmentError(std::move(errors));

    try {
        for (const auto& item : items) fs::create_directories((output_root / item.out_name).parent_path());
    } catch (const fs::filesystem_error& e) {
        throw AugmentError({e.what()});
    }

    std::mutex error_mutex;
    std::vector<std::pair<std::size_t, std::string>> failures;
    run_parallel(items.size(), job.jobs, [&](std::size_t i) {
        const WorkItem& item = items[i];
        try {
            const fs::path in = input_root / item.source->file_name;
            const fs::path out = output_root / item.out_name;
            if (item.gamma_index < 0) {
                fs::copy_file(in, out, fs::copy_options::overwrite_existing);
                return;
            }
            const auto params = TurbulenceParams::make(job.gammas[static_cast<std::size_t>(item.gamma_index)],
                                                       job.sigma_d2, job.sigma_b2);
            const RasterImage image = read_png(in);
            write_png(out, simulate_turbulence(image, params, item.seed).image);
        } catch (const std::exception& e) {
            std::lock_guard lock(error_mutex);
            failures.emplace_back(i, item.out_name + ": " + e.what());
        }
    });
    if (!failures.empty()) {
        std::sort(failures.begin(), failures.end());
        for (auto& f : failures) errors.push_back(std::move(f.second));
        throw AugmentError(std::move(errors));
    }

    // Ordered assembly.
    std::vector<const Annotation*> annotations;
    for (const auto& a : job.manifest.annotations) annotations.push_back(&a);
    std::sort(annotations.begin(), annotations.end(),
              [](const Annotation* a, const Annotation* b) { return a->id < b->id; });

    DatasetManifest out;
    out.categories = job.manifest.categories;
    std::int64_t next_annotation = 1;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const WorkItem& item = items[i];
        ImageEntry e;
        e.id = static_cast<std::int64_t>(i) + 1;
        e.file_name = item.out_name;
        e.width = item.source->width;
        e.height = item.source->height;
        int margin = 0;
        if (item.gamma_index >= 0) {
            const double gamma = job.gammas[static_cast<std::size_t>(item.gamma_index)];
            e.turbulence = TurbulenceRecord{gamma, job.sigma_d2, job.sigma_b2, item.seed};
            if (job.bbox_policy == BboxPolicy::Dilate)
                margin = static_cast<int>(std::ceil(mean_pixel_shift(gamma, job.sigma_d2)));
        }
        for (const Annotation* a : annotations) {
            if (a->image_id != item.source->id) continue;
            Annotation copy = *a;
            copy.id = next_annotation++;
            copy.image_id = e.id;
            if (margin > 0) copy.bbox = dilate_bbox(a->bbox, margin, e.width, e.height);
            out.annotations.push_back(copy);
        }
        out.images.push_back(std::move(e));
    }

    if (!job.manifest_name.empty()) save_manifest(output_root / job.manifest_name, out);
    return out;
}

namespace {

void draw_rect(RasterImage& img, int x_offset, const std::array<double, 4>& box, int panel_width) {
    const int x0 = std::clamp(static_cast<int>(std::floor(box[0])), 0, panel_width - 1);
    const int y0 = std::clamp(static_cast<int>(std::floor(box[1])), 0, img.height() - 1);
    const int x1 = std::clamp(static_cast<int>(std::ceil(box[0] + box[2])) - 1, x0, panel_width - 1);
    const int y1 = std::clamp(static_cast<int>(std::ceil(box[1] + box[3])) - 1, y0, img.height() - 1);
    const auto v = static_cast<std::uint16_t>(img.max_value());
    for (int c = 0; c < img.channels(); ++c) {
        for (int x = x0; x <= x1; ++x) {
            img.at(x_offset + x, y0, c) = v;
            img.at(x_offset + x, y1, c) = v;
        }
        for (int y = y0; y <= y1; ++y) {
            img.at(x_offset + x0, y, c) = v;
            img.at(x_offset + x1, y, c) = v;
        }
    }
}

}  // namespace

RasterImage render_montage(const RasterImage& image, std::string_view seed_name, const PreviewOptions& options) {
    if (image.empty()) throw ParameterError("montage: empty image");
    const int w = image.width();
    const int panels = static_cast<int>(options.gammas.size()) + 1;
    RasterImage montage(w * panels, image.height(), image.channels(), image.bit_depth());

    auto place = [&](const RasterImage& panel, int index) {
        for (int y = 0; y < panel.height(); ++y)
            for (int x = 0; x < w; ++x)
                for (int c = 0; c < panel.channels(); ++c) montage.at(index * w + x, y, c) = panel.at(x, y, c);
        for (const auto& box : options.boxes) draw_rect(montage, index * w, box, w);
    };

    place(image, 0);
    for (std::size_t gi = 0; gi < options.gammas.size(); ++gi) {
        const auto params = TurbulenceParams::make(options.gammas[gi], options.sigma_d2, options.sigma_b2);
        place(simulate_turbulence(image, params, derive_seed(options.seed, seed_name, gi)).image,
              static_cast<int>(gi) + 1);
    }
    return montage;
}

RasterImage preview_montage(const fs::path& image_path, const PreviewOptions& options, const fs::path& out_path) {
    const RasterImage image = read_png(image_path);
    RasterImage montage = render_montage(image, image_path.filename().string(), options);
    write_png(out_path, montage);
    return montage;
}

}  // namespace turbsim
