#include "ordirs/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstring>
#include <fstream>

#include "ordirs/errors.hpp"
#include "ordirs/util/fsio.hpp"

namespace ordirs::img {

namespace {

struct MemReader {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos;
};

void read_fn(png_structp png, png_bytep out, png_size_t count) {
    auto* r = static_cast<MemReader*>(png_get_io_ptr(png));
    if (r->pos + count > r->size) {
        png_error(png, "unexpected end of PNG data");
    }
    std::memcpy(out, r->data + r->pos, count);
    r->pos += count;
}

void write_fn(png_structp png, png_bytep data, png_size_t count) {
    auto* buf = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    buf->insert(buf->end(), data, data + count);
}

void flush_fn(png_structp) {}

std::vector<std::uint8_t> encode_common(int width, int height, int bit_depth,
                                        int color_type,
                                        const std::vector<png_bytep>& rows) {
    std::vector<std::uint8_t> out;
    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("PNG encode failed");
    }
    png_set_write_fn(png, &out, write_fn, flush_fn);
    // Fixed compression settings keep re-runs byte-identical.
    png_set_compression_level(png, 6);
    png_set_filter(png, 0, PNG_FILTER_NONE);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width),
                 static_cast<png_uint_32>(height), bit_depth, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (bit_depth == 16) png_set_swap(png);  // samples held little-endian in memory
    png_write_image(png, const_cast<png_bytepp>(rows.data()));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

}  // namespace

std::vector<std::uint8_t> encode_png_rgb8(const ImageRgb8& image) {
    if (image.empty()) throw InputError("cannot encode empty image");
    std::vector<png_bytep> rows(static_cast<std::size_t>(image.height));
    for (int y = 0; y < image.height; ++y) {
        rows[static_cast<std::size_t>(y)] = const_cast<png_bytep>(image.at(y, 0));
    }
    return encode_common(image.width, image.height, 8, PNG_COLOR_TYPE_RGB, rows);
}

std::vector<std::uint8_t> encode_png_gray16(const DepthMap& depth) {
    if (depth.empty()) throw InputError("cannot encode empty depth map");
    std::vector<std::uint16_t> samples(depth.values.size());
    for (std::size_t i = 0; i < depth.values.size(); ++i) {
        float v = depth.values[i];
        if (v < 0.0f) v = 0.0f;
        if (v > 1.0f) v = 1.0f;
        samples[i] = static_cast<std::uint16_t>(std::lround(v * 65535.0f));
    }
    std::vector<png_bytep> rows(static_cast<std::size_t>(depth.height));
    for (int y = 0; y < depth.height; ++y) {
        rows[static_cast<std::size_t>(y)] = reinterpret_cast<png_bytep>(
            samples.data() + static_cast<std::size_t>(y) * depth.width);
    }
    return encode_common(depth.width, depth.height, 16, PNG_COLOR_TYPE_GRAY, rows);
}

namespace {

struct Decoded {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~Decoded() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    }
};

}  // namespace

ImageRgb8 decode_png_rgb8(const std::uint8_t* data, std::size_t size) {
    Decoded d;
    d.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!d.png) throw Error("png_create_read_struct failed");
    d.info = png_create_info_struct(d.png);
    if (!d.info) throw Error("png_create_info_struct failed");
    if (setjmp(png_jmpbuf(d.png))) throw InputError("malformed PNG data");

    MemReader reader{data, size, 0};
    png_set_read_fn(d.png, &reader, read_fn);
    png_read_info(d.png, d.info);

    png_uint_32 w = png_get_image_width(d.png, d.info);
    png_uint_32 h = png_get_image_height(d.png, d.info);

    // Normalize any input layout to 8-bit RGB.
    png_set_expand(d.png);
    png_set_strip_16(d.png);
    png_set_strip_alpha(d.png);
    png_set_gray_to_rgb(d.png);
    png_read_update_info(d.png, d.info);

    ImageRgb8 image(static_cast<int>(w), static_cast<int>(h));
    std::vector<png_bytep> rows(h);
    for (png_uint_32 y = 0; y < h; ++y) {
        rows[y] = image.at(static_cast<int>(y), 0);
    }
    png_read_image(d.png, rows.data());
    png_read_end(d.png, nullptr);
    return image;
}

DepthMap decode_png_gray16(const std::uint8_t* data, std::size_t size) {
    Decoded d;
    d.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!d.png) throw Error("png_create_read_struct failed");
    d.info = png_create_info_struct(d.png);
    if (!d.info) throw Error("png_create_info_struct failed");
    if (setjmp(png_jmpbuf(d.png))) throw InputError("malformed PNG data");

    MemReader reader{data, size, 0};
    png_set_read_fn(d.png, &reader, read_fn);
    png_read_info(d.png, d.info);

    png_uint_32 w = png_get_image_width(d.png, d.info);
    png_uint_32 h = png_get_image_height(d.png, d.info);
    int color = png_get_color_type(d.png, d.info);
    int depth_bits = png_get_bit_depth(d.png, d.info);
    if (color != PNG_COLOR_TYPE_GRAY || depth_bits != 16) {
        throw InputError("depth sidecar must be 16-bit grayscale PNG");
    }
    png_set_swap(d.png);
    png_read_update_info(d.png, d.info);

    std::vector<std::uint16_t> samples(static_cast<std::size_t>(w) * h);
    std::vector<png_bytep> rows(h);
    for (png_uint_32 y = 0; y < h; ++y) {
        rows[y] = reinterpret_cast<png_bytep>(samples.data() +
                                              static_cast<std::size_t>(y) * w);
    }
    png_read_image(d.png, rows.data());
    png_read_end(d.png, nullptr);

    DepthMap map(static_cast<int>(w), static_cast<int>(h));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        map.values[i] = static_cast<float>(samples[i]) / 65535.0f;
    }
    return map;
}

void save_png_rgb8(const std::filesystem::path& path, const ImageRgb8& image) {
    auto bytes = encode_png_rgb8(image);
    util::atomic_write(path, std::string_view(
        reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

ImageRgb8 load_png_rgb8(const std::filesystem::path& path) {
    std::string content = util::read_file(path);
    return decode_png_rgb8(reinterpret_cast<const std::uint8_t*>(content.data()),
                           content.size());
}

void save_png_gray16(const std::filesystem::path& path, const DepthMap& depth) {
    auto bytes = encode_png_gray16(depth);
    util::atomic_write(path, std::string_view(
        reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

DepthMap load_png_gray16(const std::filesystem::path& path) {
    std::string content = util::read_file(path);
    return decode_png_gray16(reinterpret_cast<const std::uint8_t*>(content.data()),
                             content.size());
}

}  // namespace ordirs::img
