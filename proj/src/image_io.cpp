#include "drmime/image_io.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>

#include "drmime/errors.hpp"

namespace drmime {

Image to_grayscale(const Image& img) {
    if (img.channels() == 1) return img;
    Image out(img.height(), img.width(), 1);
    for (std::size_t r = 0; r < img.height(); ++r)
        for (std::size_t c = 0; c < img.width(); ++c)
            out.at(r, c) = 0.299 * img.at(r, c, 0) + 0.587 * img.at(r, c, 1) +
                           0.114 * img.at(r, c, 2);
    return out;
}

namespace {

// Skips whitespace and '#' comment lines, then reads one ASCII integer.
std::size_t read_pnm_int(std::istream& in, const std::string& path) {
    int ch = in.get();
    for (;;) {
        while (ch != EOF && std::isspace(ch)) ch = in.get();
        if (ch == '#') {
            while (ch != EOF && ch != '\n') ch = in.get();
            continue;
        }
        break;
    }
    if (ch == EOF || !std::isdigit(ch)) throw IoError("malformed PNM header: " + path);
    std::size_t v = 0;
    while (ch != EOF && std::isdigit(ch)) {
        v = v * 10 + static_cast<std::size_t>(ch - '0');
        ch = in.get();
    }
    if (ch != EOF) in.unget();
    return v;
}

} // namespace

Image load_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open image: " + path);
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || (m1 != '5' && m1 != '6'))
        throw IoError("unsupported image format (need binary PGM/PPM): " + path);
    const std::size_t channels = (m1 == '5') ? 1 : 3;
    const std::size_t w = read_pnm_int(in, path);
    const std::size_t h = read_pnm_int(in, path);
    const std::size_t maxval = read_pnm_int(in, path);
    if (w == 0 || h == 0) throw IoError("zero-size image: " + path);
    if (maxval != 255 && maxval != 65535)
        throw IoError("unsupported PNM maxval (need 255 or 65535): " + path);
    in.get(); // single whitespace separating header from raster

    const std::size_t n = h * w * channels;
    std::vector<double> data(n);
    if (maxval == 255) {
        std::vector<unsigned char> raw(n);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in.gcount()) != n)
            throw IoError("truncated image data: " + path);
        for (std::size_t i = 0; i < n; ++i) data[i] = raw[i] / 255.0;
    } else {
        std::vector<unsigned char> raw(2 * n);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(2 * n));
        if (static_cast<std::size_t>(in.gcount()) != 2 * n)
            throw IoError("truncated image data: " + path);
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint16_t v =
                static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]); // big-endian
            data[i] = v / 65535.0;
        }
    }
    try {
        return Image(h, w, channels, std::move(data));
    } catch (const InvalidArgument& e) {
        throw IoError(std::string(e.what()) + ": " + path);
    }
}

void save_image(const std::string& path, const Image& img) {
    const auto dot = path.rfind('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    if (ext == ".pgm") {
        if (img.channels() != 1)
            throw InvalidArgument("save_image: .pgm requires a grayscale image");
    } else if (ext == ".ppm") {
        if (img.channels() != 3) throw InvalidArgument("save_image: .ppm requires an RGB image");
    } else {
        throw IoError("unsupported output extension (use .pgm or .ppm): " + path);
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write image: " + path);
    out << (img.channels() == 1 ? "P5" : "P6") << "\n"
        << img.width() << " " << img.height() << "\n255\n";
    std::vector<unsigned char> raw(img.data().size());
    for (std::size_t i = 0; i < raw.size(); ++i)
        raw[i] = static_cast<unsigned char>(std::lround(img.data()[i] * 255.0));
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw IoError("write failed: " + path);
}

} // namespace drmime
