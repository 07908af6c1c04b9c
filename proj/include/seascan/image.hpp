#ifndef SEASCAN_IMAGE_HPP
#define SEASCAN_IMAGE_HPP

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace seascan {

// Non-owning grayscale view; detectors run on this so they work on tiles and
// raw test buffers alike.
struct GrayView {
    const uint8_t* data = nullptr;
    int rows = 0;
    int cols = 0;
    ptrdiff_t stride = 0;  // elements per row

    const uint8_t* row(int r) const { return data + static_cast<ptrdiff_t>(r) * stride; }
    uint8_t at(int r, int c) const { return row(r)[c]; }
    size_t pixel_count() const { return static_cast<size_t>(rows) * static_cast<size_t>(cols); }
};

struct Image8 {
    int rows = 0;
    int cols = 0;
    std::vector<uint8_t> px;

    Image8() = default;
    Image8(int r, int c, uint8_t fill = 0)
        : rows(r), cols(c), px(static_cast<size_t>(r) * static_cast<size_t>(c), fill) {}

    uint8_t& at(int r, int c) { return px[static_cast<size_t>(r) * cols + c]; }
    uint8_t at(int r, int c) const { return px[static_cast<size_t>(r) * cols + c]; }
    GrayView view() const { return {px.data(), rows, cols, cols}; }
};

struct ImageRgb {
    int rows = 0;
    int cols = 0;
    std::vector<uint8_t> px;  // interleaved r,g,b

    ImageRgb() = default;
    ImageRgb(int r, int c) : rows(r), cols(c), px(static_cast<size_t>(r) * c * 3, 0) {}

    void set(int r, int c, uint8_t red, uint8_t green, uint8_t blue) {
        size_t i = (static_cast<size_t>(r) * cols + c) * 3;
        px[i] = red;
        px[i + 1] = green;
        px[i + 2] = blue;
    }
    void get(int r, int c, uint8_t& red, uint8_t& green, uint8_t& blue) const {
        size_t i = (static_cast<size_t>(r) * cols + c) * 3;
        red = px[i];
        green = px[i + 1];
        blue = px[i + 2];
    }
    bool in_bounds(int r, int c) const { return r >= 0 && r < rows && c >= 0 && c < cols; }
};

inline void write_pgm(const std::filesystem::path& path, const GrayView& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "P5\n" << img.cols << " " << img.rows << "\n255\n";
    for (int r = 0; r < img.rows; ++r)
        out.write(reinterpret_cast<const char*>(img.row(r)), img.cols);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline void write_ppm(const std::filesystem::path& path, const ImageRgb& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "P6\n" << img.cols << " " << img.rows << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.px.data()), static_cast<std::streamsize>(img.px.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace detail {
inline int pnm_next_int(std::istream& in) {
    int c = in.get();
    while (c == '#' || std::isspace(c)) {
        if (c == '#')
            while (c != '\n' && c != EOF) c = in.get();
        c = in.get();
    }
    int v = 0;
    while (std::isdigit(c)) {
        v = v * 10 + (c - '0');
        c = in.get();
    }
    return v;
}
}  // namespace detail

inline ImageRgb read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    std::string magic(2, '\0');
    in.read(magic.data(), 2);
    if (magic != "P6") throw std::runtime_error("not a P6 ppm: " + path.string());
    int cols = detail::pnm_next_int(in);
    int rows = detail::pnm_next_int(in);
    detail::pnm_next_int(in);  // maxval
    ImageRgb img(rows, cols);
    in.read(reinterpret_cast<char*>(img.px.data()), static_cast<std::streamsize>(img.px.size()));
    if (!in) throw std::runtime_error("short ppm: " + path.string());
    return img;
}

inline Image8 read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    std::string magic(2, '\0');
    in.read(magic.data(), 2);
    if (magic != "P5") throw std::runtime_error("not a P5 pgm: " + path.string());
    int cols = detail::pnm_next_int(in);
    int rows = detail::pnm_next_int(in);
    detail::pnm_next_int(in);
    Image8 img(rows, cols);
    in.read(reinterpret_cast<char*>(img.px.data()), static_cast<std::streamsize>(img.px.size()));
    if (!in) throw std::runtime_error("short pgm: " + path.string());
    return img;
}

}  // namespace seascan

#endif  // SEASCAN_IMAGE_HPP
