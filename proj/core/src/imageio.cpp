#include "imageio.hpp"

#include <cstdio>
#include <csetjmp>
#include <memory>
#include <stdexcept>

#include <jpeglib.h>
#include <png.h>

namespace vlcurate::imageio {

namespace {

std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    // Rounded integer BT.601 luma.
    return static_cast<std::uint8_t>((299 * r + 587 * g + 114 * b + 500) / 1000);
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw std::runtime_error("cannot open image: " + path);
    return f;
}

enum class Format { png, jpeg, unknown };

Format sniff(std::FILE* f) {
    unsigned char magic[8] = {};
    const std::size_t n = std::fread(magic, 1, sizeof(magic), f);
    std::rewind(f);
    if (n >= 8 && png_sig_cmp(magic, 0, 8) == 0) return Format::png;
    if (n >= 2 && magic[0] == 0xFF && magic[1] == 0xD8) return Format::jpeg;
    return Format::unknown;
}

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;

    PngReader() {
        png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        if (png) info = png_create_info_struct(png);
        if (!png || !info) throw std::runtime_error("libpng initialization failed");
    }
    ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
    PngReader(const PngReader&) = delete;
    PngReader& operator=(const PngReader&) = delete;
};

DecodedImage decode_png(std::FILE* f, const std::string& path, bool header_only) {
    PngReader reader;
    if (setjmp(png_jmpbuf(reader.png))) {
        throw std::runtime_error("PNG decode failed: " + path);
    }
    png_init_io(reader.png, f);
    png_read_info(reader.png, reader.info);

    DecodedImage out;
    out.width = static_cast<int>(png_get_image_width(reader.png, reader.info));
    out.height = static_cast<int>(png_get_image_height(reader.png, reader.info));
    if (out.width <= 0 || out.height <= 0) throw std::runtime_error("PNG has empty dimensions: " + path);
    if (header_only) return out;

    // Normalize every variant to 8-bit RGB or gray.
    png_set_strip_16(reader.png);
    png_set_palette_to_rgb(reader.png);
    png_set_expand_gray_1_2_4_to_8(reader.png);
    if (png_get_valid(reader.png, reader.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(reader.png);
    png_set_strip_alpha(reader.png);
    png_set_interlace_handling(reader.png);
    png_read_update_info(reader.png, reader.info);

    const png_byte channels = png_get_channels(reader.png, reader.info);
    if (channels != 1 && channels != 3) {
        throw std::runtime_error("unsupported PNG channel layout: " + path);
    }
    const std::size_t stride = static_cast<std::size_t>(out.width) * channels;
    std::vector<std::uint8_t> pixels(stride * static_cast<std::size_t>(out.height));
    std::vector<png_bytep> rows(static_cast<std::size_t>(out.height));
    for (int y = 0; y < out.height; ++y) {
        rows[static_cast<std::size_t>(y)] = pixels.data() + static_cast<std::size_t>(y) * stride;
    }
    png_read_image(reader.png, rows.data());

    out.gray.resize(static_cast<std::size_t>(out.width) * static_cast<std::size_t>(out.height));
    if (channels == 1) {
        out.gray = std::move(pixels);
    } else {
        for (std::size_t i = 0; i < out.gray.size(); ++i) {
            const std::uint8_t* px = pixels.data() + i * 3;
            out.gray[i] = luma(px[0], px[1], px[2]);
        }
    }
    return out;
}

struct JpegErrorMgr {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* mgr = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    std::longjmp(mgr->jump, 1);
}

DecodedImage decode_jpeg(std::FILE* f, const std::string& path, bool header_only) {
    jpeg_decompress_struct cinfo{};
    JpegErrorMgr err{};
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = jpeg_error_exit;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw std::runtime_error("JPEG decode failed: " + path);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, f);
    jpeg_read_header(&cinfo, TRUE);

    DecodedImage out;
    out.width = static_cast<int>(cinfo.image_width);
    out.height = static_cast<int>(cinfo.image_height);
    if (header_only) {
        jpeg_destroy_decompress(&cinfo);
        return out;
    }

    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    const int channels = cinfo.output_components;
    if (channels != 3) {
        jpeg_destroy_decompress(&cinfo);
        throw std::runtime_error("unsupported JPEG channel layout: " + path);
    }
    const std::size_t stride = static_cast<std::size_t>(out.width) * static_cast<std::size_t>(channels);
    std::vector<std::uint8_t> row(stride);
    out.gray.resize(static_cast<std::size_t>(out.width) * static_cast<std::size_t>(out.height));
    while (cinfo.output_scanline < cinfo.output_height) {
        const std::size_t y = cinfo.output_scanline;
        JSAMPROW rowp = row.data();
        jpeg_read_scanlines(&cinfo, &rowp, 1);
        for (int x = 0; x < out.width; ++x) {
            const std::uint8_t* px = row.data() + static_cast<std::size_t>(x) * 3;
            out.gray[y * static_cast<std::size_t>(out.width) + static_cast<std::size_t>(x)] =
                luma(px[0], px[1], px[2]);
        }
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return out;
}

DecodedImage decode_impl(const std::string& path, bool header_only) {
    FilePtr f = open_file(path);
    switch (sniff(f.get())) {
        case Format::png: return decode_png(f.get(), path, header_only);
        case Format::jpeg: return decode_jpeg(f.get(), path, header_only);
        case Format::unknown: break;
    }
    throw std::runtime_error("unsupported image format (not PNG or JPEG): " + path);
}

}  // namespace

DecodedImage decode_gray(const std::string& path) { return decode_impl(path, false); }

std::pair<int, int> probe_dims(const std::string& path) {
    const DecodedImage img = decode_impl(path, true);
    return {img.width, img.height};
}

}  // namespace vlcurate::imageio
