#include <registra/raster.hpp>
#include <registra/error.hpp>

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace registra {

namespace {

// ---------------------------------------------------------------------------
// PGM
// ---------------------------------------------------------------------------

class PgmReader {
public:
    explicit PgmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const auto c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(c)) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    long read_int() {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
            throw Error(ErrorCode::CorruptFile, "PGM: expected integer at byte " + std::to_string(pos_));
        }
        long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_] - '0');
            if (v > 1'000'000'000) throw Error(ErrorCode::CorruptFile, "PGM: integer overflow");
            ++pos_;
        }
        return v;
    }

    std::size_t pos() const { return pos_; }
    void advance(std::size_t n) { pos_ += n; }
    std::size_t remaining() const { return bytes_.size() - pos_; }
    std::uint8_t byte_at(std::size_t i) const { return bytes_[i]; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

Image decode_pgm(std::span<const std::uint8_t> bytes) {
    const bool binary = bytes[1] == '5';
    PgmReader r(bytes);
    r.advance(2);
    const long width = r.read_int();
    const long height = r.read_int();
    const long maxval = r.read_int();
    if (width <= 0 || height <= 0 || maxval <= 0) {
        throw Error(ErrorCode::CorruptFile, "PGM: invalid header values");
    }
    if (maxval > 255) {
        throw Error(ErrorCode::UnsupportedFormat, "PGM: only 8-bit depth is supported");
    }
    const auto count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::vector<float> pixels(count);
    const auto scale = static_cast<float>(maxval);
    if (binary) {
        // Exactly one whitespace byte separates the header from raster data.
        if (r.remaining() < 1) throw Error(ErrorCode::CorruptFile, "PGM: truncated header");
        r.advance(1);
        if (r.remaining() < count) throw Error(ErrorCode::CorruptFile, "PGM: truncated raster");
        for (std::size_t i = 0; i < count; ++i) {
            const auto v = r.byte_at(r.pos() + i);
            if (v > maxval) throw Error(ErrorCode::CorruptFile, "PGM: sample exceeds maxval");
            pixels[i] = static_cast<float>(v) / scale;
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            const long v = r.read_int();
            if (v > maxval) throw Error(ErrorCode::CorruptFile, "PGM: sample exceeds maxval");
            pixels[i] = static_cast<float>(v) / scale;
        }
    }
    return Image(static_cast<int>(width), static_cast<int>(height), std::move(pixels));
}

// ---------------------------------------------------------------------------
// PNG via libpng with in-memory streams
// ---------------------------------------------------------------------------

struct ReadCursor {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;
};

void png_read_cb(png_structp png, png_bytep out, png_size_t n) {
    auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
    if (cur->pos + n > cur->bytes.size()) {
        png_error(png, "truncated PNG stream");
    }
    std::memcpy(out, cur->bytes.data() + cur->pos, n);
    cur->pos += n;
}

void png_write_cb(png_structp png, png_bytep data, png_size_t n) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + n);
}

void png_flush_cb(png_structp) {}

[[noreturn]] void png_error_cb(png_structp png, png_const_charp msg) {
    auto* err = static_cast<std::string*>(png_get_error_ptr(png));
    if (err) *err = msg;
    png_longjmp(png, 1);
}

void png_warning_cb(png_structp, png_const_charp) {}

Image decode_png(std::span<const std::uint8_t> bytes) {
    std::string err;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_cb, png_warning_cb);
    if (!png) throw Error(ErrorCode::IoFailure, "PNG: cannot allocate reader");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw Error(ErrorCode::IoFailure, "PNG: cannot allocate info");
    }
    ReadCursor cursor{bytes, 0};
    std::vector<std::uint8_t> raw;
    std::vector<png_bytep> rows;
    png_uint_32 width = 0, height = 0;
    int channels = 0;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(ErrorCode::CorruptFile, "PNG: " + err);
    }
    png_set_read_fn(png, &cursor, png_read_cb);
    png_read_info(png, info);
    width = png_get_image_width(png, info);
    height = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);
    channels = png_get_channels(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    raw.resize(stride * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = raw.data() + y * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    if (width == 0 || height == 0 || (channels != 1 && channels != 3)) {
        throw Error(ErrorCode::UnsupportedFormat, "PNG: unsupported channel layout");
    }
    std::vector<float> pixels(static_cast<std::size_t>(width) * height);
    for (png_uint_32 y = 0; y < height; ++y) {
        const std::uint8_t* row = raw.data() + y * stride;
        for (png_uint_32 x = 0; x < width; ++x) {
            float v = 0.0f;
            if (channels == 1) {
                v = static_cast<float>(row[x]) / 255.0f;
            } else {
                const double lum = 0.299 * row[3 * x] + 0.587 * row[3 * x + 1] + 0.114 * row[3 * x + 2];
                v = static_cast<float>(std::min(lum / 255.0, 1.0));
            }
            pixels[static_cast<std::size_t>(y) * width + x] = v;
        }
    }
    return Image(static_cast<int>(width), static_cast<int>(height), std::move(pixels));
}

std::vector<std::uint8_t> encode_png_rows(int width, int height, int color_type,
                                          const std::vector<std::uint8_t>& raw, int channels) {
    std::string err;
    std::vector<std::uint8_t> out;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_cb, png_warning_cb);
    if (!png) throw Error(ErrorCode::IoFailure, "PNG: cannot allocate writer");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error(ErrorCode::IoFailure, "PNG: cannot allocate info");
    }
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y) {
        rows[y] = const_cast<png_bytep>(raw.data() + static_cast<std::size_t>(y) * width * channels);
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorCode::IoFailure, "PNG: " + err);
    }
    png_set_write_fn(png, &out, png_write_cb, png_flush_cb);
    // Fixed settings keep the encoded bytes reproducible.
    png_set_compression_level(png, 6);
    png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

}  // namespace

Image decode_image(std::span<const std::uint8_t> bytes) {
    static constexpr std::uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngMagic, 8) == 0) {
        return decode_png(bytes);
    }
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '2' || bytes[1] == '5')) {
        return decode_pgm(bytes);
    }
    if (bytes.size() < 2) {
        throw Error(ErrorCode::CorruptFile, "image data too short");
    }
    throw Error(ErrorCode::UnsupportedFormat, "unrecognized image format");
}

Image load_image(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    return decode_image(bytes);
}

std::vector<std::uint8_t> encode_png(const Image& image) {
    std::vector<std::uint8_t> raw;
    raw.reserve(image.pixels().size());
    for (float v : image.pixels()) raw.push_back(to_byte(v));
    return encode_png_rows(image.width(), image.height(), PNG_COLOR_TYPE_GRAY, raw, 1);
}

std::vector<std::uint8_t> encode_png(const RgbImage& image) {
    std::vector<std::uint8_t> raw;
    raw.reserve(image.pixels.size() * 3);
    for (const Rgb& c : image.pixels) {
        raw.push_back(c.r);
        raw.push_back(c.g);
        raw.push_back(c.b);
    }
    return encode_png_rows(image.width, image.height, PNG_COLOR_TYPE_RGB, raw, 3);
}

std::vector<std::uint8_t> encode_pgm(const Image& image) {
    const std::string header =
        "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + image.pixels().size());
    for (float v : image.pixels()) out.push_back(to_byte(v));
    return out;
}

void save_image(const Image& image, const std::filesystem::path& path) {
    const std::string ext = lower_extension(path);
    if (ext == ".png") {
        write_file(path, encode_png(image));
    } else if (ext == ".pgm") {
        write_file(path, encode_pgm(image));
    } else {
        throw Error(ErrorCode::UnsupportedFormat, "cannot write '" + ext + "' images");
    }
}

void save_png(const RgbImage& image, const std::filesystem::path& path) {
    write_file(path, encode_png(image));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw Error(ErrorCode::IoFailure, "read error on '" + path.string() + "'");
    return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoFailure, "write error on '" + path.string() + "'");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace registra
