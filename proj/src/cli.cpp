#include "turbsim/cli.hpp"

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "turbsim/calibration.hpp"
#include "turbsim/error.hpp"
#include "turbsim/manifest.hpp"
#include "turbsim/pipeline.hpp"
#include "turbsim/stats.hpp"
#include "turbsim/turbulence.hpp"

namespace turbsim::cli {

using nlohmann::json;

namespace {

struct CommonFlags {
    double sigma_d2 = 25.0;
    double sigma_b2 = 1.0;
    std::vector<double> gammas{25.0, 50.0, 100.0, 150.0};
    std::uint64_t seed = 0;
};

struct AugmentFlags {
    std::string manifest;
    std::string input_root;
    std::string output_root;
    bool keep_clean = false;
    std::string bbox_policy = "passthrough";
    int jobs = 1;
    std::vector<std::string> categories;
};

struct PreviewFlags {
    std::string image;
    std::string out;
    std::string manifest;
};

struct CalibrateFlags {
    double depth_m = 100.0;
    double hfov = kFlirTau2.hfov_deg;
    double vfov = kFlirTau2.vfov_deg;
    int width = kFlirTau2.width_px;
    int height = kFlirTau2.height_px;
    double gamma_for_shift = -1.0;
};

struct ValidateFlags {
    int fields = 50;
    int spacing = 32;
    int field_width = 640;
    int field_height = 512;
    double tolerance = 0.03;
    double ks_threshold = 0.02;
};

// One object for one result, an array otherwise.
json collapse(json array) { return array.size() == 1 ? array.front() : array; }

void check_common(const CommonFlags& c) {
    if (c.gammas.empty()) throw ParameterError("--gamma needs at least one value");
    for (double g : c.gammas) (void)TurbulenceParams::make(g, c.sigma_d2, c.sigma_b2);
}

int do_augment(const CommonFlags& c, const AugmentFlags& a, std::ostream& out, std::ostream& err) {
    AugmentationJob job;
    job.manifest = load_manifest(a.manifest);
    if (!a.categories.empty()) job.manifest = filter_categories(job.manifest, a.categories);
    job.gammas = c.gammas;
    job.sigma_d2 = c.sigma_d2;
    job.sigma_b2 = c.sigma_b2;
    job.base_seed = c.seed;
    job.bbox_policy = parse_bbox_policy(a.bbox_policy);
    job.keep_clean = a.keep_clean;
    job.jobs = a.jobs;

    err << "augmenting " << job.manifest.images.size() << " image(s) at " << job.gammas.size()
        << " severity level(s)\n";
    const auto result = augment_dataset(job, a.input_root, a.output_root);
    out << json{{"manifest", (std::filesystem::path(a.output_root) / job.manifest_name).generic_string()},
                {"images", result.images.size()},
                {"annotations", result.annotations.size()}}
               .dump(2)
        << '\n';
    return kSuccess;
}

int do_preview(const CommonFlags& c, const PreviewFlags& p, std::ostream& out) {
    PreviewOptions options;
    options.gammas = c.gammas;
    options.sigma_d2 = c.sigma_d2;
    options.sigma_b2 = c.sigma_b2;
    options.seed = c.seed;
    if (!p.manifest.empty()) {
        const auto manifest = load_manifest(p.manifest);
        const std::string name = std::filesystem::path(p.image).filename().string();
        for (const auto& img : manifest.images) {
            if (std::filesystem::path(img.file_name).filename().string() != name) continue;
            for (const auto& a : manifest.annotations)
                if (a.image_id == img.id) options.boxes.push_back(a.bbox);
        }
    }
    const auto montage = preview_montage(p.image, options, p.out);
    out << json{{"out", p.out}, {"width", montage.width()}, {"height", montage.height()},
                {"panels", c.gammas.size() + 1}}
               .dump(2)
        << '\n';
    return kSuccess;
}

int do_calibrate(const CommonFlags& c, const CalibrateFlags& f, std::ostream& out) {
    const CameraModel camera{f.hfov, f.vfov, f.width, f.height};
    if (f.gamma_for_shift >= 0.0) {
        const double gamma = gamma_for_shift(f.gamma_for_shift, c.sigma_d2, f.depth_m, camera);
        json j = calibrate(gamma, c.sigma_d2, f.depth_m, camera);
        j["gamma"] = gamma;
        out << j.dump(2) << '\n';
        return kSuccess;
    }
    json reports = json::array();
    for (double g : c.gammas) {
        json j = calibrate(g, c.sigma_d2, f.depth_m, camera);
        j["gamma"] = g;
        reports.push_back(std::move(j));
    }
    out << collapse(std::move(reports)).dump(2) << '\n';
    return kSuccess;
}

int do_validate(const CommonFlags& c, const ValidateFlags& f, std::ostream& out, std::ostream& err) {
    ValidationProtocol protocol;
    protocol.field_count = f.fields;
    protocol.spacing = f.spacing;
    protocol.field_width = f.field_width;
    protocol.field_height = f.field_height;
    protocol.moment_tolerance = f.tolerance;
    protocol.ks_threshold = f.ks_threshold;
    protocol.seed = c.seed;

    json reports = json::array();
    bool all_pass = true;
    for (double g : c.gammas) {
        const auto report = validate_model(TurbulenceParams::make(g, c.sigma_d2, c.sigma_b2), protocol);
        if (!report.pass()) {
            all_pass = false;
            err << "validation failed for gamma=" << g << '\n';
        }
        reports.push_back(report);
    }
    out << collapse(std::move(reports)).dump(2) << '\n';
    return all_pass ? kSuccess : kFailure;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Synthetic atmospheric turbulence for annotated image datasets", "turbsim"};
    app.fallthrough();
    app.require_subcommand(1);

    CommonFlags common;
    app.add_option("--sigma-d2", common.sigma_d2, "Variance of the correlation kernel (px^2)")->capture_default_str();
    app.add_option("--sigma-b2", common.sigma_b2, "Variance of the blur kernel (px^2)")->capture_default_str();
    app.add_option("--gamma", common.gammas, "Comma-separated distortion amplitudes")
        ->delimiter(',')
        ->capture_default_str();
    app.add_option("--seed", common.seed, "Base RNG seed")->envname("TURBSIM_SEED")->capture_default_str();

    AugmentFlags augment;
    auto* augment_cmd = app.add_subcommand("augment", "Write turbulent copies of a dataset");
    augment_cmd->add_option("--manifest", augment.manifest, "Input manifest (JSON)")->required();
    augment_cmd->add_option("--input-root", augment.input_root, "Directory holding the input images")->required();
    augment_cmd->add_option("--output-root", augment.output_root, "Destination directory")->required();
    augment_cmd->add_flag("--keep-clean", augment.keep_clean, "Also copy the original images");
    augment_cmd->add_option("--bbox-policy", augment.bbox_policy, "passthrough or dilate")
        ->check(CLI::IsMember({"passthrough", "dilate"}))
        ->capture_default_str();
    augment_cmd->add_option("--jobs", augment.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    augment_cmd->add_option("--categories", augment.categories, "Keep only these category names")->delimiter(',');

    PreviewFlags preview;
    auto* preview_cmd = app.add_subcommand("preview", "Render a severity montage of one image");
    preview_cmd->add_option("--image", preview.image, "Input PNG")->required();
    preview_cmd->add_option("--out", preview.out, "Output PNG")->required();
    preview_cmd->add_option("--manifest", preview.manifest, "Manifest with boxes to overlay");

    CalibrateFlags calib;
    auto* calibrate_cmd = app.add_subcommand("calibrate", "Convert distortion parameters to meters");
    calibrate_cmd->add_option("--depth-m", calib.depth_m, "Scene depth (m)")->capture_default_str();
    calibrate_cmd->add_option("--hfov", calib.hfov, "Horizontal field of view (deg)")->capture_default_str();
    calibrate_cmd->add_option("--vfov", calib.vfov, "Vertical field of view (deg)")->capture_default_str();
    calibrate_cmd->add_option("--width", calib.width, "Sensor width (px)")->capture_default_str();
    calibrate_cmd->add_option("--height", calib.height, "Sensor height (px)")->capture_default_str();
    calibrate_cmd->add_option("--gamma-for-shift", calib.gamma_for_shift,
                              "Solve for gamma giving this horizontal shift (m)");

    ValidateFlags validate;
    auto* validate_cmd = app.add_subcommand("validate", "Check generated fields against closed-form statistics");
    validate_cmd->add_option("--fields", validate.fields, "Independent fields")->capture_default_str();
    validate_cmd->add_option("--spacing", validate.spacing, "Sampling stride (px)")->capture_default_str();
    validate_cmd->add_option("--field-width", validate.field_width, "Field width (px)")->capture_default_str();
    validate_cmd->add_option("--field-height", validate.field_height, "Field height (px)")->capture_default_str();
    validate_cmd->add_option("--tolerance", validate.tolerance, "Relative tolerance on moments")->capture_default_str();
    validate_cmd->add_option("--ks-threshold", validate.ks_threshold, "Maximum KS statistic")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsage;
    }

    try {
        check_common(common);
        if (*calibrate_cmd) {
            if (calib.gamma_for_shift < 0.0 && calibrate_cmd->count("--gamma-for-shift"))
                throw ParameterError("--gamma-for-shift must be >= 0");
            (void)real_world_shift(0.0, common.sigma_d2, calib.depth_m,
                                   CameraModel{calib.hfov, calib.vfov, calib.width, calib.height});
        }
        if (*validate_cmd && (validate.fields < 1 || validate.spacing < 1))
            throw ParameterError("--fields and --spacing must be >= 1");
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    try {
        if (*augment_cmd) return do_augment(common, augment, out, err);
        if (*preview_cmd) return do_preview(common, preview, out);
        if (*calibrate_cmd) return do_calibrate(common, calib, out);
        if (*validate_cmd) return do_validate(common, validate, out, err);
    } catch (const AugmentError& e) {
        for (const auto& item : e.items()) err << "error: " << item << '\n';
        return kFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kUsage;
}

}  // namespace turbsim::cli
