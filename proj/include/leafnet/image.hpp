#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "leafnet/error.hpp"

#ifdef LEAFNET_WITH_PNG
#include <png.h>
#endif
#ifdef LEAFNET_WITH_JPEG
#include <csetjmp>
#include <jpeglib.h>
#endif

namespace leafnet {

/// 8-bit image, row-major, channel-interleaved. Channels are 1, 3 or 4.
struct RawImage {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;
    std::vector<std::uint8_t> pixels;

    RawImage() = default;
    RawImage(std::size_t h, std::size_t w, std::size_t c, std::uint8_t fill = 0)
        : height(h), width(w), channels(c), pixels(h * w * c, fill) {}
    RawImage(std::size_t h, std::size_t w, std::size_t c, std::vector<std::uint8_t> data)
        : height(h), width(w), channels(c), pixels(std::move(data)) {
        if (pixels.size() != h * w * c) {
            throw Error(ErrorCode::InvalidSize, "pixel buffer does not match " + std::to_string(h) + "x" +
                                                    std::to_string(w) + "x" + std::to_string(c));
        }
    }

    std::uint8_t& at(std::size_t row, std::size_t col, std::size_t ch) noexcept {
        return pixels[(row * width + col) * channels + ch];
    }
    std::uint8_t at(std::size_t row, std::size_t col, std::size_t ch) const noexcept {
        return pixels[(row * width + col) * channels + ch];
    }

    friend bool operator==(const RawImage&, const RawImage&) = default;
};

namespace detail {

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class PnmReader {
public:
    explicit PnmReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    std::optional<std::size_t> number() {
        skip_space_and_comments();
        std::size_t value = 0;
        bool any = false;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
            if (value > (1u << 24)) {
                return std::nullopt;
            }
            ++pos_;
            any = true;
        }
        return any ? std::optional(value) : std::nullopt;
    }

    std::size_t pos() const noexcept { return pos_; }
    void advance(std::size_t n) noexcept { pos_ += n; }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
                    ++pos_;
                }
            } else {
                break;
            }
        }
    }

    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 2;
};

inline std::optional<RawImage> decode_pnm(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '6' && bytes[1] != '5')) {
        return std::nullopt;
    }
    const std::size_t channels = bytes[1] == '6' ? 3 : 1;
    PnmReader reader(bytes);
    auto width = reader.number();
    auto height = reader.number();
    auto maxval = reader.number();
    if (!width || !height || !maxval || *width == 0 || *height == 0 || *maxval != 255) {
        return std::nullopt;
    }
    reader.advance(1); // single whitespace byte before the raster
    const std::size_t count = *width * *height * channels;
    if (reader.pos() + count > bytes.size()) {
        return std::nullopt;
    }
    std::vector<std::uint8_t> pixels(bytes.begin() + static_cast<std::ptrdiff_t>(reader.pos()),
                                     bytes.begin() + static_cast<std::ptrdiff_t>(reader.pos() + count));
    return RawImage(*height, *width, channels, std::move(pixels));
}

#ifdef LEAFNET_WITH_PNG
inline std::optional<RawImage> decode_png(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
        return std::nullopt;
    }
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        return std::nullopt;
    }
    const bool alpha = (image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
    const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    std::size_t channels = 3;
    if (color) {
        image.format = alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
        channels = alpha ? 4 : 3;
    } else if (alpha) {
        image.format = PNG_FORMAT_RGBA;
        channels = 4;
    } else {
        image.format = PNG_FORMAT_GRAY;
        channels = 1;
    }
    std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
        png_image_free(&image);
        return std::nullopt;
    }
    return RawImage(image.height, image.width, channels, std::move(pixels));
}
#endif

#ifdef LEAFNET_WITH_JPEG
struct JpegErrorManager {
    jpeg_error_mgr base;
    std::jmp_buf jump;
};

inline void jpeg_error_exit(j_common_ptr info) {
    auto* manager = reinterpret_cast<JpegErrorManager*>(info->err);
    std::longjmp(manager->jump, 1);
}

inline std::optional<RawImage> decode_jpeg(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 3 || bytes[0] != 0xFF || bytes[1] != 0xD8 || bytes[2] != 0xFF) {
        return std::nullopt;
    }
    jpeg_decompress_struct info{};
    JpegErrorManager errors{};
    info.err = jpeg_std_error(&errors.base);
    errors.base.error_exit = jpeg_error_exit;
    std::vector<std::uint8_t> pixels;
    std::size_t height = 0, width = 0, channels = 0;
    if (setjmp(errors.jump)) {
        jpeg_destroy_decompress(&info);
        return std::nullopt;
    }
    jpeg_create_decompress(&info);
    jpeg_mem_src(&info, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&info, TRUE);
    info.out_color_space = info.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
    jpeg_start_decompress(&info);
    height = info.output_height;
    width = info.output_width;
    channels = static_cast<std::size_t>(info.output_components);
    pixels.resize(height * width * channels);
    while (info.output_scanline < info.output_height) {
        JSAMPROW row = pixels.data() + info.output_scanline * width * channels;
        jpeg_read_scanlines(&info, &row, 1);
    }
    jpeg_finish_decompress(&info);
    jpeg_destroy_decompress(&info);
    return RawImage(height, width, channels, std::move(pixels));
}
#endif

} // namespace detail

/// Decodes an in-memory image. PPM (P6) and PGM (P5) with maxval 255 are
/// always supported; PNG and JPEG when built against libpng / libjpeg.
/// Returns nullopt for anything that is not a decodable image.
inline std::optional<RawImage> decode_image(const std::vector<std::uint8_t>& bytes) {
    if (auto pnm = detail::decode_pnm(bytes)) {
        return pnm;
    }
#ifdef LEAFNET_WITH_PNG
    if (auto png = detail::decode_png(bytes)) {
        return png;
    }
#endif
#ifdef LEAFNET_WITH_JPEG
    if (auto jpeg = detail::decode_jpeg(bytes)) {
        return jpeg;
    }
#endif
    return std::nullopt;
}

inline std::optional<RawImage> try_read_image(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        return std::nullopt;
    }
    return decode_image(detail::read_file_bytes(path));
}

inline RawImage read_image(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw Error(ErrorCode::IoError, "no such file " + path.string());
    }
    auto image = try_read_image(path);
    if (!image) {
        throw Error(ErrorCode::UnsupportedFormat, "cannot decode " + path.string());
    }
    return std::move(*image);
}

/// Binary PPM (3 channels) or PGM (1 channel) bytes.
inline std::vector<std::uint8_t> encode_pnm(const RawImage& image) {
    if (image.channels != 3 && image.channels != 1) {
        throw Error(ErrorCode::UnsupportedFormat, "PNM output needs 1 or 3 channels");
    }
    const std::string header = std::string(image.channels == 3 ? "P6\n" : "P5\n") + std::to_string(image.width) +
                               " " + std::to_string(image.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), image.pixels.begin(), image.pixels.end());
    return out;
}

inline void write_pnm(const RawImage& image, const std::filesystem::path& path) {
    const auto bytes = encode_pnm(image);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorCode::IoError, "short write to " + path.string());
    }
}

} // namespace leafnet
