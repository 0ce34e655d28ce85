#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "test_support.hpp"
#include "turbsim/calibration.hpp"
#include "turbsim/error.hpp"
#include "turbsim/manifest.hpp"
#include "turbsim/pipeline.hpp"
#include "turbsim/png_io.hpp"
#include "turbsim/turbulence.hpp"

namespace turbsim {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::random_image;
using testing::scratch_dir;

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

LoadError::Kind load_error_kind(const fs::path& p) {
    try {
        load_manifest(p);
    } catch (const LoadError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected LoadError for " << p;
    return LoadError::Kind::Image;
}

/// Writes `count` small images plus a manifest with two boxes per image
/// across three categories.
fs::path make_dataset(const fs::path& root, int count, int w = 48, int h = 40) {
    json images = json::array(), annotations = json::array();
    int ann = 100;
    for (int i = 0; i < count; ++i) {
        const std::string name = "img_" + std::to_string(i) + ".png";
        write_png(root / name, random_image(w, h, i % 3 == 0 ? 3 : 1, 8, static_cast<std::uint32_t>(i)));
        images.push_back({{"id", 10 + i}, {"file_name", name}, {"width", w}, {"height", h}, {"extra", "ignored"}});
        annotations.push_back({{"id", ann++}, {"image_id", 10 + i}, {"category_id", 1}, {"bbox", {2, 3, 10, 12}}});
        annotations.push_back(
            {{"id", ann++}, {"image_id", 10 + i}, {"category_id", 3}, {"bbox", {w - 8.5, h - 6.0, 8.5, 6.0}}});
    }
    json doc{{"images", images},
             {"annotations", annotations},
             {"categories", {{{"id", 1}, {"name", "person"}}, {{"id", 2}, {"name", "bike"}}, {{"id", 3}, {"name", "car"}}}},
             {"info", {{"description", "test"}}}};
    write_text(root / "manifest.json", doc.dump());
    return root / "manifest.json";
}

// ---------------------------------------------------------------------------
// PNG

TEST(Png, RoundTripsSupportedFormats) {
    const auto dir = scratch_dir("png_roundtrip");
    for (auto [channels, depth] : {std::pair{1, 8}, std::pair{1, 16}, std::pair{3, 8}}) {
        const auto img = random_image(31, 17, channels, depth, 5);
        const auto path = dir / ("img_" + std::to_string(channels) + "_" + std::to_string(depth) + ".png");
        write_png(path, img);
        EXPECT_EQ(read_png(path), img);
        const auto info = read_png_info(path);
        EXPECT_EQ(info.width, 31);
        EXPECT_EQ(info.height, 17);
    }
}

TEST(Png, EqualImagesGiveEqualBytes) {
    const auto dir = scratch_dir("png_bytes");
    const auto img = random_image(20, 20, 3, 8, 1);
    write_png(dir / "a.png", img);
    write_png(dir / "b.png", img);
    EXPECT_EQ(testing::read_bytes(dir / "a.png"), testing::read_bytes(dir / "b.png"));
}

TEST(Png, ReadErrors) {
    const auto dir = scratch_dir("png_errors");
    EXPECT_THROW(read_png(dir / "missing.png"), LoadError);
    write_text(dir / "junk.png", "definitely not a png");
    EXPECT_THROW(read_png(dir / "junk.png"), LoadError);

    write_png(dir / "ok.png", random_image(64, 64, 1, 8, 2));
    auto bytes = testing::read_bytes(dir / "ok.png");
    bytes.resize(bytes.size() / 2);
    std::ofstream(dir / "truncated.png", std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    EXPECT_THROW(read_png(dir / "truncated.png"), LoadError);
}

TEST(Png, WriteErrors) {
    EXPECT_THROW(write_png("/nonexistent_dir/x.png", random_image(2, 2, 1, 8, 0)), WriteError);
}

// ---------------------------------------------------------------------------
// Manifest

TEST(Manifest, MinimalLoads) {
    const auto dir = scratch_dir("manifest_min");
    write_text(dir / "m.json",
               R"({"images":[{"id":1,"file_name":"a.png","width":4,"height":3}],"annotations":[],"categories":[]})");
    const auto m = load_manifest(dir / "m.json");
    ASSERT_EQ(m.images.size(), 1u);
    EXPECT_TRUE(m.annotations.empty());
    EXPECT_EQ(m.images[0].file_name, "a.png");
}

TEST(Manifest, DistinctErrorKinds) {
    const auto dir = scratch_dir("manifest_errors");
    EXPECT_EQ(load_error_kind(dir / "nope.json"), LoadError::Kind::MissingFile);

    write_text(dir / "bad.json", "{ images: ");
    EXPECT_EQ(load_error_kind(dir / "bad.json"), LoadError::Kind::MalformedJson);

    write_text(dir / "schema.json", R"({"images":[{"id":1,"width":4,"height":3}],"annotations":[]})");
    EXPECT_EQ(load_error_kind(dir / "schema.json"), LoadError::Kind::Schema);

    write_text(dir / "dup.json", R"({"images":[{"id":1,"file_name":"a.png","width":4,"height":3},
        {"id":1,"file_name":"b.png","width":4,"height":3}],"annotations":[]})");
    EXPECT_EQ(load_error_kind(dir / "dup.json"), LoadError::Kind::DuplicateId);

    write_text(dir / "dangling.json", R"({"images":[{"id":1,"file_name":"a.png","width":4,"height":3}],
        "annotations":[{"id":1,"image_id":2,"category_id":1,"bbox":[0,0,1,1]}],
        "categories":[{"id":1,"name":"car"}]})");
    EXPECT_EQ(load_error_kind(dir / "dangling.json"), LoadError::Kind::DanglingReference);

    write_text(dir / "dangling_cat.json", R"({"images":[{"id":1,"file_name":"a.png","width":4,"height":3}],
        "annotations":[{"id":1,"image_id":1,"category_id":7,"bbox":[0,0,1,1]}],
        "categories":[{"id":1,"name":"car"}]})");
    EXPECT_EQ(load_error_kind(dir / "dangling_cat.json"), LoadError::Kind::DanglingReference);

    write_text(dir / "oob.json", R"({"images":[{"id":1,"file_name":"a.png","width":4,"height":3}],
        "annotations":[{"id":1,"image_id":1,"category_id":1,"bbox":[2,0,3,1]}],
        "categories":[{"id":1,"name":"car"}]})");
    EXPECT_EQ(load_error_kind(dir / "oob.json"), LoadError::Kind::BboxOutOfBounds);
}

TEST(Manifest, FilterToCarAndPerson) {
    const auto dir = scratch_dir("manifest_filter");
    const auto m = load_manifest(make_dataset(dir, 3));
    const std::vector<std::string> keep{"car", "person"};
    const auto filtered = filter_categories(m, keep);
    EXPECT_EQ(filtered.categories.size(), 2u);
    EXPECT_EQ(filtered.annotations.size(), 6u);
    EXPECT_NO_THROW(validate_manifest(filtered));

    const std::vector<std::string> only_bike{"bike"};
    EXPECT_TRUE(filter_categories(m, only_bike).annotations.empty());
}

TEST(Manifest, SaveLoadRoundTrip) {
    const auto dir = scratch_dir("manifest_roundtrip");
    DatasetManifest m;
    m.images.push_back({1, "g25/a.png", 10, 8, TurbulenceRecord{25.0, 25.0, 1.0, 0xFFFFFFFFFFFFFFFFULL}});
    m.images.push_back({2, "clean/a.png", 10, 8, std::nullopt});
    m.categories.push_back({4, "car"});
    m.annotations.push_back({1, 1, 4, {0.5, 1.0, 3.25, 2.0}});
    save_manifest(dir / "m.json", m);
    EXPECT_EQ(load_manifest(dir / "m.json"), m);
}

// ---------------------------------------------------------------------------
// Seeds

TEST(Fnv1a, ReferenceVectors) {
    EXPECT_EQ(fnv1a64({}), 0xCBF29CE484222325ULL);
    const std::uint8_t a[] = {'a'};
    EXPECT_EQ(fnv1a64(a), 0xAF63DC4C8601EC8CULL);
}

TEST(DeriveSeed, MatchesByteLayout) {
    // Expected values from an independent FNV-1a over the concatenated bytes.
    EXPECT_EQ(derive_seed(0, "img_000.png", 1), 0x625A2C75C015BC7BULL);
    EXPECT_EQ(derive_seed(12345, "donn\xC3\xA9" "es/\xCE\xB1.png", 3), 0xB865A27323A11661ULL);
    EXPECT_EQ(derive_seed(7, "x.png", 2), derive_seed(7, "x.png", 2));
}

TEST(DeriveSeed, NoCollisionsAcrossCorpus) {
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 2500; ++i)
        for (std::uint64_t g = 0; g < 4; ++g)
            seen.insert(derive_seed(0, "frame_" + std::to_string(i) + ".png", g));
    EXPECT_EQ(seen.size(), 10000u);
}

// ---------------------------------------------------------------------------
// Augmentation

TEST(SeverityDir, Formatting) {
    EXPECT_EQ(severity_dir(25.0), "g25");
    EXPECT_EQ(severity_dir(150.0), "g150");
    EXPECT_EQ(severity_dir(12.5), "g12.5");
    EXPECT_EQ(severity_dir(0.0), "g0");
}

TEST(DilateBbox, GrowsAndClamps) {
    EXPECT_EQ(dilate_bbox({20, 20, 10, 10}, 11, 100, 100), (std::array<double, 4>{9, 9, 32, 32}));
    EXPECT_EQ(dilate_bbox({2, 3, 10, 10}, 11, 100, 100), (std::array<double, 4>{0, 0, 23, 24}));
    EXPECT_EQ(dilate_bbox({90, 95, 10, 5}, 11, 100, 100), (std::array<double, 4>{79, 84, 21, 16}));
}

TEST(AugmentDataset, CardinalityAndLayout) {
    const auto root = scratch_dir("augment_card");
    fs::create_directories(root / "in");
    AugmentationJob job;
    job.manifest = load_manifest(make_dataset(root / "in", 10));
    const auto out = augment_dataset(job, root / "in", root / "out");

    EXPECT_EQ(out.images.size(), 40u);
    EXPECT_EQ(out.annotations.size(), 80u);
    EXPECT_EQ(out.categories, job.manifest.categories);
    for (const char* g : {"g25", "g50", "g100", "g150"})
        for (int i = 0; i < 10; ++i) EXPECT_TRUE(fs::exists(root / "out" / g / ("img_" + std::to_string(i) + ".png")));

    // Closed loop: the written manifest re-validates and matches the return value.
    EXPECT_EQ(load_manifest(root / "out" / "manifest.json"), out);

    std::set<std::int64_t> ids;
    for (const auto& img : out.images) {
        ids.insert(img.id);
        ASSERT_TRUE(img.turbulence);
        EXPECT_EQ(img.turbulence->sigma_d2, 25.0);
        EXPECT_EQ(img.turbulence->sigma_b2, 1.0);
        const auto written = read_png(root / "out" / img.file_name);
        EXPECT_EQ(written.width(), img.width);
        EXPECT_EQ(written.height(), img.height);
    }
    EXPECT_EQ(ids.size(), 40u);

    // Ordered by (file_name, gamma index).
    EXPECT_EQ(out.images[0].file_name, "g25/img_0.png");
    EXPECT_EQ(out.images[1].file_name, "g50/img_0.png");
    EXPECT_EQ(out.images[4].file_name, "g25/img_1.png");
    EXPECT_EQ(out.images[1].turbulence->seed, derive_seed(0, "img_0.png", 1));
}

TEST(AugmentDataset, OutputMatchesSingleImageSimulation) {
    const auto root = scratch_dir("augment_single");
    fs::create_directories(root / "in");
    AugmentationJob job;
    job.manifest = load_manifest(make_dataset(root / "in", 2));
    job.gammas = {100.0};
    job.base_seed = 77;
    augment_dataset(job, root / "in", root / "out");

    const auto input = read_png(root / "in" / "img_1.png");
    const auto expected =
        simulate_turbulence(input, TurbulenceParams::make(100.0, 25.0, 1.0), derive_seed(77, "img_1.png", 0)).image;
    EXPECT_EQ(read_png(root / "out" / "g100" / "img_1.png"), expected);
}

TEST(AugmentDataset, KeepClean) {
    const auto root = scratch_dir("augment_clean");
    fs::create_directories(root / "in");
    AugmentationJob job;
    job.manifest = load_manifest(make_dataset(root / "in", 3));
    job.keep_clean = true;
    const auto out = augment_dataset(job, root / "in", root / "out");
    EXPECT_EQ(out.images.size(), 15u);
    EXPECT_EQ(out.images[0].file_name, "clean/img_0.png");
    EXPECT_FALSE(out.images[0].turbulence);
    EXPECT_EQ(testing::read_bytes(root / "out/clean/img_0.png"), testing::read_bytes(root / "in/img_0.png"));
}

TEST(AugmentDataset, PassthroughKeepsBoxes) {
    const auto root = scratch_dir("augment_pass");
    fs::create_directories(root / "in");
    AugmentationJob job;
    job.manifest = load_manifest(make_dataset(root / "in", 2));
    const auto out = augment_dataset(job, root / "in", root / "out");
    for (const auto& a : out.annotations) {
        const bool first = a.category_id == 1;
        EXPECT_EQ(a.bbox, first ? (std::array<double, 4>{2, 3, 10, 12}) : (std::array<double, 4>{39.5, 34, 8.5, 6}));
    }
}

TEST(AugmentDataset, DilateGrowsByCeilMeanShift) {
    const auto root = scratch_dir("augment_dilate");
    fs::create_directories(root / "in");
    AugmentationJob job;
    job.manifest = load_manifest(make_dataset(root / "in", 1, 100, 80));
    job.gammas = {150.0, 25.0};
    job.bbox_policy = BboxPolicy::Dilate;
    const auto out = augment_dataset(job, root / "in", root / "out");
    ASSERT_EQ(std::ceil(mean_pixel_shift(150.0, 25.0)), 11.0);
    ASSERT_EQ(std::ceil(mean_pixel_shift(25.0, 25.0)), 2.0);

    ASSERT_EQ(out.annotations.size(), 4u);
    // gamma 150: first box clamps at the origin, second at the far corner.
    EXPECT_EQ(out.annotations[0].bbox, (std::array<double, 4>{0, 0, 23, 26}));
    EXPECT_EQ(out.annotations[1].bbox, (std::array<double, 4>{80.5, 63, 19.5, 17}));
    // gamma 25: grown by 2 px per side.
    EXPECT_EQ(out.annotations[2].bbox, (std::array<double, 4>{0, 1, 14, 16}));
    for (const auto& a : out.annotations) {
        const auto* img = out.find_image(a.image_id);
        ASSERT_NE(img, nullptr);
        EXPECT_LE(a.bbox[0] + a.bbox[2], img->width);
        EXPECT_LE(a.bbox[1] + a.bbox[3], img->height);
    }
}

TEST(AugmentDataset, DeterministicAndOrderIndependent) {
    const auto root = scratch_dir("augment_determinism");
    fs::create_directories(root / "in");
    AugmentationJob job;
    job.manifest = load_manifest(make_dataset(root / "in", 6));
    job.base_seed = 5;
    augment_dataset(job, root / "in", root / "serial");
    job.jobs = 4;
    augment_dataset(job, root / "in", root / "parallel");
    // Reversed manifest order must not matter either.
    std::reverse(job.manifest.images.begin(), job.manifest.images.end());
    std::reverse(job.manifest.annotations.begin(), job.manifest.annotations.end());
    augment_dataset(job, root / "in", root / "reversed");

    EXPECT_TRUE(testing::trees_equal(root / "serial", root / "parallel"));
    EXPECT_TRUE(testing::trees_equal(root / "serial", root / "reversed"));
}

TEST(AugmentDataset, SixteenBitDepthPreserved) {
    const auto root = scratch_dir("augment_16");
    fs::create_directories(root / "in");
    write_png(root / "in" / "t.png", random_image(30, 20, 1, 16, 9));
    AugmentationJob job;
    job.manifest.images.push_back({1, "t.png", 30, 20, std::nullopt});
    job.gammas = {50.0};
    augment_dataset(job, root / "in", root / "out");
    EXPECT_EQ(read_png(root / "out" / "g50" / "t.png").bit_depth(), 16);
}

TEST(AugmentDataset, FailuresAbortAfterFullScan) {
    const auto root = scratch_dir("augment_fail");
    fs::create_directories(root / "in");
    AugmentationJob job;
    job.manifest = load_manifest(make_dataset(root / "in", 4));
    fs::remove(root / "in" / "img_1.png");
    job.manifest.images[3].width = 99;  // img_3 size mismatch
    job.manifest.annotations.clear();
    try {
        augment_dataset(job, root / "in", root / "out");
        FAIL() << "expected AugmentError";
    } catch (const AugmentError& e) {
        EXPECT_EQ(e.items().size(), 2u);
    }
    EXPECT_FALSE(fs::exists(root / "out" / "manifest.json"));
    EXPECT_FALSE(fs::exists(root / "out" / "g25"));
}

TEST(AugmentDataset, RejectsBadJobs) {
    const auto root = scratch_dir("augment_badjob");
    AugmentationJob job;
    job.gammas = {};
    EXPECT_THROW(augment_dataset(job, root, root / "out"), ParameterError);
    job.gammas = {-5.0};
    EXPECT_THROW(augment_dataset(job, root, root / "out"), ParameterError);
    job.gammas = {5.0};
    job.sigma_d2 = 0.0;
    EXPECT_THROW(augment_dataset(job, root, root / "out"), ParameterError);
    EXPECT_THROW(parse_bbox_policy("shrink"), ParameterError);
}

// ---------------------------------------------------------------------------
// Preview

TEST(PreviewMontage, PanelLayout) {
    const auto dir = scratch_dir("preview");
    const auto img = random_image(40, 30, 1, 8, 3);
    write_png(dir / "in.png", img);

    PreviewOptions options;
    options.gammas = {50.0, 100.0};
    const auto montage = preview_montage(dir / "in.png", options, dir / "out.png");
    EXPECT_EQ(montage.width(), 120);
    EXPECT_EQ(montage.height(), 30);
    EXPECT_EQ(read_png(dir / "out.png"), montage);
    for (int y = 0; y < 30; ++y)
        for (int x = 0; x < 40; ++x) ASSERT_EQ(montage.at(x, y), img.at(x, y));

    options.gammas = {};
    EXPECT_EQ(preview_montage(dir / "in.png", options, dir / "single.png"), img);

    options.gammas = {25.0, 50.0, 100.0, 150.0};
    EXPECT_EQ(preview_montage(dir / "in.png", options, dir / "sweep.png").width(), 200);
}

TEST(PreviewMontage, DrawsBoxesOnEveryPanel) {
    RasterImage img(20, 20, 3, 8);
    PreviewOptions options;
    options.gammas = {50.0};
    options.boxes = {{2, 3, 5, 4}};
    const auto m = render_montage(img, "x.png", options);
    for (int panel = 0; panel < 2; ++panel) {
        const int off = panel * 20;
        EXPECT_EQ(m.at(off + 2, 3, 1), 255);  // top-left corner
        EXPECT_EQ(m.at(off + 6, 6, 1), 255);  // bottom-right corner
        EXPECT_EQ(m.at(off + 4, 3, 0), 255);  // top edge
        EXPECT_EQ(m.at(off + 4, 5, 0), 0);    // interior untouched
    }
}

TEST(PreviewMontage, UnreadableInput) {
    const auto dir = scratch_dir("preview_bad");
    EXPECT_THROW(preview_montage(dir / "missing.png", {}, dir / "o.png"), LoadError);
}

}  // namespace
}  // namespace turbsim
