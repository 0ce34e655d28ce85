#include "turbsim/png_io.hpp"

#include <csetjmp>
#include <cstdio>
#include <memory>
#include <vector>

#include <png.h>

#include "turbsim/error.hpp"

namespace turbsim {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

class PngReader {
public:
    explicit PngReader(const std::filesystem::path& path) : path_(path) {
        file_.reset(std::fopen(path.c_str(), "rb"));
        if (!file_) fail("cannot open");
        png_byte sig[8];
        if (std::fread(sig, 1, 8, file_.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) fail("not a PNG file");
        png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        if (!png_) fail("out of memory");
        info_ = png_create_info_struct(png_);
        if (!info_) fail("out of memory");
    }
    ~PngReader() { png_destroy_read_struct(&png_, &info_, nullptr); }
    PngReader(const PngReader&) = delete;
    PngReader& operator=(const PngReader&) = delete;

    [[noreturn]] void fail(const char* why) const {
        throw LoadError(LoadError::Kind::Image, path_.string() + ": " + why);
    }

    png_structp png_ = nullptr;
    png_infop info_ = nullptr;
    FilePtr file_;
    std::filesystem::path path_;
};

// libpng reports errors by longjmp; these helpers keep every C++ object with
// a destructor outside the setjmp frame.
bool read_header(png_structp png, png_infop info, std::FILE* file) {
    if (setjmp(png_jmpbuf(png))) return false;
    png_init_io(png, file);
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if ((color & PNG_COLOR_MASK_COLOR) && depth == 16) png_set_strip_16(png);
    png_read_update_info(png, info);
    return true;
}

bool read_rows(png_structp png, png_bytepp rows) {
    if (setjmp(png_jmpbuf(png))) return false;
    png_read_image(png, rows);
    png_read_end(png, nullptr);
    return true;
}

}  // namespace

PngInfo read_png_info(const std::filesystem::path& path) {
    PngReader r(path);
    if (!read_header(r.png_, r.info_, r.file_.get())) r.fail("corrupt PNG header");
    return {static_cast<int>(png_get_image_width(r.png_, r.info_)),
            static_cast<int>(png_get_image_height(r.png_, r.info_))};
}

RasterImage read_png(const std::filesystem::path& path) {
    PngReader r(path);
    if (!read_header(r.png_, r.info_, r.file_.get())) r.fail("corrupt PNG header");

    const int w = static_cast<int>(png_get_image_width(r.png_, r.info_));
    const int h = static_cast<int>(png_get_image_height(r.png_, r.info_));
    const int channels = png_get_channels(r.png_, r.info_);
    const int depth = png_get_bit_depth(r.png_, r.info_);
    if (channels != 1 && channels != 3) r.fail("unsupported channel layout");
    if (depth != 8 && depth != 16) r.fail("unsupported bit depth");

    RasterImage image(w, h, channels, depth);
    const std::size_t row_bytes = png_get_rowbytes(r.png_, r.info_);
    std::vector<png_byte> buffer(row_bytes * static_cast<std::size_t>(h));
    std::vector<png_bytep> rows(static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y) rows[static_cast<std::size_t>(y)] = buffer.data() + row_bytes * y;
    if (!read_rows(r.png_, rows.data())) r.fail("corrupt PNG data");

    auto& samples = image.samples();
    if (depth == 8) {
        for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = buffer[i];
    } else {
        // PNG stores 16-bit samples big-endian
        for (std::size_t i = 0; i < samples.size(); ++i)
            samples[i] = static_cast<std::uint16_t>((buffer[2 * i] << 8) | buffer[2 * i + 1]);
    }
    return image;
}

namespace {

bool write_rows(png_structp png, png_infop info, std::FILE* file, int w, int h, int depth, int channels,
                png_bytepp rows) {
    if (setjmp(png_jmpbuf(png))) return false;
    png_init_io(png, file);
    png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), depth,
                 channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);
    png_write_info(png, info);
    png_write_image(png, rows);
    png_write_end(png, nullptr);
    return true;
}

}  // namespace

void write_png(const std::filesystem::path& path, const RasterImage& image) {
    if (image.empty()) throw WriteError(path.string() + ": empty image");
    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) throw WriteError(path.string() + ": cannot open for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw WriteError(path.string() + ": out of memory");
    }

    const int w = image.width();
    const int h = image.height();
    const int channels = image.channels();
    const int depth = image.bit_depth();
    const std::size_t bytes_per_sample = depth == 16 ? 2 : 1;
    const std::size_t row_bytes = static_cast<std::size_t>(w) * channels * bytes_per_sample;

    // Big-endian for 16-bit, which is PNG's native order.
    std::vector<png_byte> buffer(row_bytes * h);
    const auto& samples = image.samples();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (depth == 8) {
            buffer[i] = static_cast<png_byte>(samples[i]);
        } else {
            buffer[2 * i] = static_cast<png_byte>(samples[i] >> 8);
            buffer[2 * i + 1] = static_cast<png_byte>(samples[i] & 0xFF);
        }
    }
    std::vector<png_bytep> rows(static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y) rows[static_cast<std::size_t>(y)] = buffer.data() + row_bytes * y;

    const bool ok = write_rows(png, info, file.get(), w, h, depth, channels, rows.data());
    png_destroy_write_struct(&png, &info);
    if (!ok) throw WriteError(path.string() + ": libpng write failure");

    if (std::fflush(file.get()) != 0) throw WriteError(path.string() + ": flush failed");
}

}  // namespace turbsim
