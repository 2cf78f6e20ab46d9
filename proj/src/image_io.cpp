#include "image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

#include "errors.hpp"

namespace typeclust {

namespace {

std::vector<unsigned char> quantize(const GlyphImage& img)
{
    std::vector<unsigned char> bytes(img.pixels.size());
    std::transform(img.pixels.begin(), img.pixels.end(), bytes.begin(), [](double v) {
        return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    });
    return bytes;
}

// Skips whitespace and '#' comments in a PNM header.
void skip_pnm_space(std::istream& in)
{
    for (;;) {
        int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (c != EOF && std::isspace(c)) {
            in.get();
        } else {
            return;
        }
    }
}

GlyphImage read_pgm(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open image: " + path.string());
    char magic[2] = {};
    in.read(magic, 2);
    if (magic[0] != 'P' || magic[1] != '5')
        throw FormatError("not a binary grayscale PGM (P5): " + path.string());
    int w = 0, h = 0, maxval = 0;
    skip_pnm_space(in);
    in >> w;
    skip_pnm_space(in);
    in >> h;
    skip_pnm_space(in);
    in >> maxval;
    if (!in || w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
        throw FormatError("unsupported PGM header (need 8-bit P5): " + path.string());
    in.get(); // single whitespace before raster
    std::vector<unsigned char> raw(std::size_t(w) * h);
    in.read(reinterpret_cast<char*>(raw.data()), std::streamsize(raw.size()));
    if (in.gcount() != std::streamsize(raw.size()))
        throw FormatError("truncated PGM raster: " + path.string());

    GlyphImage img(h, w);
    for (std::size_t i = 0; i < raw.size(); ++i)
        img.pixels[i] = double(raw[i]) / maxval;
    return img;
}

GlyphImage read_png(const std::filesystem::path& path)
{
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.string().c_str()))
        throw FormatError("cannot decode PNG " + path.string() + ": " + image.message);
    if (image.format & (PNG_FORMAT_FLAG_COLOR | PNG_FORMAT_FLAG_ALPHA)) {
        png_image_free(&image);
        throw FormatError("PNG is not grayscale: " + path.string());
    }
    image.format = PNG_FORMAT_GRAY;
    std::vector<unsigned char> raw(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, raw.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw FormatError("cannot decode PNG " + path.string() + ": " + msg);
    }
    GlyphImage img(int(image.height), int(image.width));
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        img.pixels[i] = raw[i] / 255.0;
    return img;
}

bool has_png_signature(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    unsigned char sig[8] = {};
    in.read(reinterpret_cast<char*>(sig), 8);
    return in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

} // namespace

GlyphImage read_image(const std::filesystem::path& path)
{
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec))
        throw IoError("image not found: " + path.string());
    if (has_png_signature(path))
        return read_png(path);
    return read_pgm(path);
}

void write_pgm(const GlyphImage& img, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write image: " + path.string());
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    auto bytes = quantize(img);
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out)
        throw IoError("write failed: " + path.string());
}

void write_png(const GlyphImage& img, const std::filesystem::path& path)
{
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = png_uint_32(img.width);
    image.height = png_uint_32(img.height);
    image.format = PNG_FORMAT_GRAY;
    auto bytes = quantize(img);
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, bytes.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw IoError("cannot write PNG " + path.string() + ": " + msg);
    }
}

void save_image(const GlyphImage& img, const std::filesystem::path& path)
{
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    if (ext == ".png")
        write_png(img, path);
    else
        write_pgm(img, path);
}

} // namespace typeclust
