#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include <sstream>

#include "turbsim/calibration.hpp"
#include "turbsim/cli.hpp"
#include "turbsim/error.hpp"
#include "turbsim/manifest.hpp"
#include "turbsim/pipeline.hpp"
#include "turbsim/stats.hpp"
#include "turbsim/turbulence.hpp"

namespace py = pybind11;
using namespace turbsim;

namespace {

template <class T>
RasterImage image_from_array(const py::array_t<T, py::array::c_style | py::array::forcecast>& arr, int bit_depth) {
    if (arr.ndim() != 2 && arr.ndim() != 3) throw ParameterError("image must be HxW or HxWx3");
    const int h = static_cast<int>(arr.shape(0));
    const int w = static_cast<int>(arr.shape(1));
    const int c = arr.ndim() == 3 ? static_cast<int>(arr.shape(2)) : 1;
    RasterImage img(w, h, c, bit_depth);
    const T* src = arr.data();
    std::copy(src, src + img.samples().size(), img.samples().begin());
    return img;
}

RasterImage to_raster(const py::array& arr) {
    if (py::isinstance<py::array_t<std::uint8_t>>(arr)) return image_from_array<std::uint8_t>(arr, 8);
    if (py::isinstance<py::array_t<std::uint16_t>>(arr)) return image_from_array<std::uint16_t>(arr, 16);
    throw ParameterError("image dtype must be uint8 or uint16");
}

template <class T>
py::array_t<T> array_from_image(const RasterImage& img) {
    std::vector<py::ssize_t> shape{img.height(), img.width()};
    if (img.channels() == 3) shape.push_back(3);
    py::array_t<T> out(shape);
    std::copy(img.samples().begin(), img.samples().end(), out.mutable_data());
    return out;
}

py::array to_array(const RasterImage& img) {
    if (img.bit_depth() == 8) return array_from_image<std::uint8_t>(img);
    return array_from_image<std::uint16_t>(img);
}

py::array_t<double> plane_to_array(const Plane& p) {
    py::array_t<double> out({p.height, p.width});
    std::copy(p.data.begin(), p.data.end(), out.mutable_data());
    return out;
}

Plane array_to_plane(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 2) throw ParameterError("field component must be 2-D");
    Plane p(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)));
    std::copy(arr.data(), arr.data() + p.data.size(), p.data.begin());
    return p;
}

// JSON values cross the boundary as Python objects via the json module.
py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

}  // namespace

PYBIND11_MODULE(_turbsim, m) {
    m.doc() = "Geometric atmospheric turbulence simulation for annotated image datasets";

    py::register_exception<LoadError>(m, "LoadError", PyExc_IOError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ParameterError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const AugmentError& e) {
            PyErr_SetString(PyExc_RuntimeError, e.what());
        }
    });

    m.def(
        "simulate_turbulence",
        [](const py::array& image, double gamma, double sigma_d2, double sigma_b2, std::uint64_t seed) {
            const auto params = TurbulenceParams::make(gamma, sigma_d2, sigma_b2);
            TurbulenceResult r;
            {
                const RasterImage input = to_raster(image);
                py::gil_scoped_release release;
                r = simulate_turbulence(input, params, seed);
            }
            return py::make_tuple(to_array(r.image), plane_to_array(r.field.du), plane_to_array(r.field.dv));
        },
        py::arg("image"), py::arg("gamma"), py::arg("sigma_d2") = 25.0, py::arg("sigma_b2") = 1.0,
        py::arg("seed") = 0,
        "Blur then warp an HxW or HxWx3 uint8/uint16 image; returns (image, du, dv).");

    m.def(
        "distortion_field",
        [](int width, int height, double gamma, double sigma_d2, std::uint64_t seed) {
            const auto params = TurbulenceParams::make(gamma, sigma_d2, 0.0);
            const auto f = generate_distortion_field(width, height, params, seed);
            return py::make_tuple(plane_to_array(f.du), plane_to_array(f.dv));
        },
        py::arg("width"), py::arg("height"), py::arg("gamma"), py::arg("sigma_d2") = 25.0, py::arg("seed") = 0);

    m.def(
        "blur_image",
        [](const py::array& image, double sigma_b2) {
            return to_array(blur_image(to_raster(image), sigma_b2, sigma_b2 > 0 ? min_blur_radius(sigma_b2) : 0));
        },
        py::arg("image"), py::arg("sigma_b2"));

    m.def(
        "warp_image",
        [](const py::array& image, const py::array& du, const py::array& dv) {
            return to_array(warp_image(to_raster(image), DistortionField{array_to_plane(du), array_to_plane(dv)}));
        },
        py::arg("image"), py::arg("du"), py::arg("dv"));

    m.def("component_variance", &component_variance, py::arg("gamma"), py::arg("sigma_d2"));
    m.def("mean_pixel_shift", &mean_pixel_shift, py::arg("gamma"), py::arg("sigma_d2"));
    m.def(
        "real_world_shift",
        [](double gamma, double sigma_d2, double depth_m, double hfov, double vfov, int width, int height) {
            const auto s = real_world_shift(gamma, sigma_d2, depth_m, CameraModel{hfov, vfov, width, height});
            return py::make_tuple(s.horizontal_m, s.vertical_m);
        },
        py::arg("gamma"), py::arg("sigma_d2"), py::arg("depth_m"), py::arg("hfov") = 45.0, py::arg("vfov") = 37.0,
        py::arg("width") = 640, py::arg("height") = 512);
    m.def(
        "gamma_for_shift",
        [](double target, double sigma_d2, double depth_m, double hfov, double vfov, int width, int height) {
            return gamma_for_shift(target, sigma_d2, depth_m, CameraModel{hfov, vfov, width, height});
        },
        py::arg("target_h_m"), py::arg("sigma_d2"), py::arg("depth_m"), py::arg("hfov") = 45.0,
        py::arg("vfov") = 37.0, py::arg("width") = 640, py::arg("height") = 512);
    m.def(
        "calibrate",
        [](double gamma, double sigma_d2, double depth_m, double hfov, double vfov, int width, int height) {
            return to_python(calibrate(gamma, sigma_d2, depth_m, CameraModel{hfov, vfov, width, height}));
        },
        py::arg("gamma"), py::arg("sigma_d2") = 25.0, py::arg("depth_m") = 100.0, py::arg("hfov") = 45.0,
        py::arg("vfov") = 37.0, py::arg("width") = 640, py::arg("height") = 512);

    m.def(
        "validate_model",
        [](double gamma, double sigma_d2, int fields, int spacing, int field_width, int field_height,
           std::uint64_t seed) {
            ValidationProtocol protocol;
            protocol.field_count = fields;
            protocol.spacing = spacing;
            protocol.field_width = field_width;
            protocol.field_height = field_height;
            protocol.seed = seed;
            const auto params = TurbulenceParams::make(gamma, sigma_d2, 0.0);
            ValidationReport report;
            {
                py::gil_scoped_release release;
                report = validate_model(params, protocol);
            }
            return to_python(report);
        },
        py::arg("gamma"), py::arg("sigma_d2") = 25.0, py::arg("fields") = 50, py::arg("spacing") = 32,
        py::arg("field_width") = 640, py::arg("field_height") = 512, py::arg("seed") = 0);

    m.def("derive_seed", &derive_seed, py::arg("base_seed"), py::arg("file_name"), py::arg("gamma_index"));
    m.def(
        "fnv1a64",
        [](const py::bytes& data) {
            const std::string s = data;
            return fnv1a64({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
        },
        py::arg("data"));

    m.def(
        "load_manifest", [](const std::string& path) { return to_python(load_manifest(path)); }, py::arg("path"));

    m.def(
        "augment_dataset",
        [](const std::string& manifest, const std::string& input_root, const std::string& output_root,
           std::vector<double> gammas, double sigma_d2, double sigma_b2, std::uint64_t seed,
           const std::string& bbox_policy, bool keep_clean, int jobs) {
            AugmentationJob job;
            job.manifest = load_manifest(manifest);
            job.gammas = std::move(gammas);
            job.sigma_d2 = sigma_d2;
            job.sigma_b2 = sigma_b2;
            job.base_seed = seed;
            job.bbox_policy = parse_bbox_policy(bbox_policy);
            job.keep_clean = keep_clean;
            job.jobs = jobs;
            DatasetManifest result;
            {
                py::gil_scoped_release release;
                result = augment_dataset(job, input_root, output_root);
            }
            return to_python(result);
        },
        py::arg("manifest"), py::arg("input_root"), py::arg("output_root"),
        py::arg("gammas") = std::vector<double>{25.0, 50.0, 100.0, 150.0}, py::arg("sigma_d2") = 25.0,
        py::arg("sigma_b2") = 1.0, py::arg("seed") = 0, py::arg("bbox_policy") = "passthrough",
        py::arg("keep_clean") = false, py::arg("jobs") = 1);

    m.def(
        "cli_main",
        [](const std::vector<std::string>& args) {
            std::vector<const char*> argv{"turbsim"};
            for (const auto& a : args) argv.push_back(a.c_str());
            std::ostringstream out, err;
            const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run the command line in-process; returns (exit_code, stdout, stderr).");
}
