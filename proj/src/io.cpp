/**
 * @file io.cpp
 * @brief PGM/PNG/CSV/SVG serialization and threshold segmentation.
 */
#include "unwrap/io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "unwrap/errors.hpp"
#include "unwrap/geometry.hpp"

namespace unwrap::io {

namespace {

std::string lower_ext(const std::string& path) {
    size_t dot = path.find_last_of('.');
    if (dot == std::string::npos) return "";
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    return ext;
}

void skip_pgm_junk(std::istream& in) {
    while (true) {
        int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// PGM
// ---------------------------------------------------------------------------

Image8 read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_pgm: cannot open " + path);
    std::string magic;
    in >> magic;
    if (magic != "P2" && magic != "P5")
        throw IoError("read_pgm: not a PGM file: " + path);
    skip_pgm_junk(in);
    int w, h, maxv;
    in >> w;
    skip_pgm_junk(in);
    in >> h;
    skip_pgm_junk(in);
    in >> maxv;
    if (w <= 0 || h <= 0 || maxv <= 0)
        throw IoError("read_pgm: bad header in " + path);

    Image8 img(w, h);
    size_t count = static_cast<size_t>(w) * h;
    if (magic == "P2") {
        for (size_t i = 0; i < count; ++i) {
            long v;
            in >> v;
            img.pixels[i] = static_cast<uint8_t>(
                std::clamp<long>(maxv > 255 ? v * 255 / maxv : v, 0, 255));
        }
    } else {
        in.get();  // single whitespace after maxval
        if (maxv <= 255) {
            in.read(reinterpret_cast<char*>(img.pixels.data()), count);
        } else {
            std::vector<uint8_t> raw(count * 2);
            in.read(reinterpret_cast<char*>(raw.data()), raw.size());
            for (size_t i = 0; i < count; ++i) {
                int v = (raw[2 * i] << 8) | raw[2 * i + 1];
                img.pixels[i] = static_cast<uint8_t>(v * 255 / maxv);
            }
        }
    }
    if (!in) throw IoError("read_pgm: truncated file " + path);
    return img;
}

void write_pgm(const Image8& image, const std::string& path, bool binary) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_pgm: cannot open " + path);
    out << (binary ? "P5" : "P2") << "\n"
        << image.width << " " << image.height << "\n255\n";
    if (binary) {
        out.write(reinterpret_cast<const char*>(image.pixels.data()),
                  image.pixels.size());
    } else {
        for (int y = 0; y < image.height; ++y) {
            for (int x = 0; x < image.width; ++x)
                out << static_cast<int>(image.at(x, y))
                    << (x + 1 < image.width ? ' ' : '\n');
        }
    }
    if (!out) throw IoError("write_pgm: write failure " + path);
}

void write_field_pgm16(const ScalarField& field, const std::string& path) {
    double lo = 1e300, hi = -1e300;
    for (double v : field.values())
        if (!std::isnan(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (hi < lo) {
        lo = 0.0;
        hi = 1.0;
    }
    double span = hi > lo ? hi - lo : 1.0;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_field_pgm16: cannot open " + path);
    out << "P5\n" << field.width() << " " << field.height() << "\n65535\n";
    for (int y = 0; y < field.height(); ++y)
        for (int x = 0; x < field.width(); ++x) {
            double v = field.defined(x, y) ? field.at(x, y) : lo;
            int q = static_cast<int>(std::lround((v - lo) / span * 65535.0));
            out.put(static_cast<char>((q >> 8) & 0xff));
            out.put(static_cast<char>(q & 0xff));
        }

    std::ofstream side(path + ".minmax.txt");
    side << lo << " " << hi << "\n";
}

// ---------------------------------------------------------------------------
// PNG
// ---------------------------------------------------------------------------

Image8 read_png(const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw IoError("read_png: cannot open " + path);
    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw IoError("read_png: decode failure " + path);
    }
    png_init_io(png, fp);
    png_read_info(png, info);

    png_set_strip_16(png);
    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    int color = png_get_color_type(png, info);
    if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
        color == PNG_COLOR_TYPE_PALETTE)
        png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    png_read_update_info(png, info);

    Image8 img(static_cast<int>(png_get_image_width(png, info)),
               static_cast<int>(png_get_image_height(png, info)));
    std::vector<png_bytep> rows(img.height);
    for (int y = 0; y < img.height; ++y)
        rows[y] = img.pixels.data() + static_cast<size_t>(y) * img.width;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return img;
}

void write_png(const Image8& image, const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw IoError("write_png: cannot open " + path);
    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError("write_png: encode failure " + path);
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < image.height; ++y)
        png_write_row(png, const_cast<png_bytep>(image.pixels.data() +
                                                 static_cast<size_t>(y) *
                                                     image.width));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

// ---------------------------------------------------------------------------
// Masks
// ---------------------------------------------------------------------------

Image8 read_image_any(const std::string& path) {
    return lower_ext(path) == "png" ? read_png(path) : read_pgm(path);
}

BinaryMask read_mask(const std::string& path) {
    return mask_from_image(read_image_any(path));
}

void write_mask(const BinaryMask& mask, const std::string& path) {
    Image8 img = image_from_mask(mask);
    if (lower_ext(path) == "png")
        write_png(img, path);
    else
        write_pgm(img, path);
}

Image8 image_from_mask(const BinaryMask& mask) {
    Image8 img(mask.width(), mask.height(), 0);
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) img.set(x, y, 255);
    return img;
}

BinaryMask mask_from_image(const Image8& image, int threshold) {
    BinaryMask mask(image.width, image.height);
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x)
            mask.set(x, y, image.at(x, y) >= threshold);
    return mask;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<double>> read_csv_columns(const std::string& path,
                                                  const std::string& header,
                                                  size_t columns) {
    std::ifstream in(path);
    if (!in) throw IoError("read_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind(header, 0) != 0)
        throw IoError("read_csv: missing header '" + header + "' in " + path);
    std::vector<std::vector<double>> cols(columns);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        for (size_t c = 0; c < columns; ++c) {
            if (!std::getline(ss, cell, ','))
                throw IoError("read_csv: short row in " + path);
            cols[c].push_back(std::stod(cell));
        }
    }
    return cols;
}

}  // namespace

void write_contour_csv(const Contour& contour, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("write_contour_csv: cannot open " + path);
    out << "x,y,s\n";
    out.precision(10);
    for (size_t i = 0; i < contour.points.size(); ++i)
        out << contour.points[i].x << ',' << contour.points[i].y << ','
            << contour.cumulative_length[i] << '\n';
}

Contour read_contour_csv(const std::string& path) {
    auto cols = read_csv_columns(path, "x,y,s", 3);
    Contour c;
    for (size_t i = 0; i < cols[0].size(); ++i) {
        c.points.push_back({cols[0][i], cols[1][i]});
        c.cumulative_length.push_back(cols[2][i]);
    }
    return c;
}

void write_profile_csv(const Profile& profile, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("write_profile_csv: cannot open " + path);
    out << "lambda_x,half_width\n";
    out.precision(10);
    for (size_t i = 0; i < profile.station.size(); ++i)
        out << profile.station[i] << ',' << profile.half_width[i] << '\n';
}

Profile read_profile_csv(const std::string& path) {
    auto cols = read_csv_columns(path, "lambda_x,half_width", 2);
    Profile p;
    p.station = std::move(cols[0]);
    p.half_width = std::move(cols[1]);
    return p;
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

namespace {

void svg_polyline(std::ostream& out, const std::vector<Vec2>& pts,
                  const char* color, double width, bool close) {
    out << "  <path d=\"";
    for (size_t i = 0; i < pts.size(); ++i)
        out << (i == 0 ? "M " : "L ") << pts[i].x << ' ' << pts[i].y << ' ';
    if (close) out << "Z";
    out << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width
        << "\"/>\n";
}

}  // namespace

void write_svg(const SvgOverlay& overlay, int width, int height,
               const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("write_svg: cannot open " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
        << height << "\">\n";
    out.precision(6);
    if (overlay.contour)
        svg_polyline(out, overlay.contour->points, "#202020", 1.0,
                     overlay.contour->closed);
    if (overlay.sections) {
        for (const neutral::CrossSection& s : *overlay.sections)
            out << "  <line x1=\"" << s.p_i.x << "\" y1=\"" << s.p_i.y
                << "\" x2=\"" << s.p_ii.x << "\" y2=\"" << s.p_ii.y
                << "\" stroke=\"#4488cc\" stroke-width=\"0.4\"/>\n";
    }
    if (overlay.neutral_line)
        svg_polyline(out, *overlay.neutral_line, "#cc3333", 1.2, false);
    if (overlay.reference)
        svg_polyline(out, *overlay.reference, "#33aa33", 1.2, false);
    out << "</svg>\n";
}

// ---------------------------------------------------------------------------
// Segmentation
// ---------------------------------------------------------------------------

namespace {

BinaryMask binary_extreme(const BinaryMask& mask, bool dilate) {
    BinaryMask out(mask.width(), mask.height());
    static const int offs[5][2] = {{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x) {
            bool v = dilate ? false : true;
            for (const auto& o : offs) {
                bool cell = mask.at(x + o[0], y + o[1]);
                v = dilate ? (v || cell) : (v && cell);
            }
            out.set(x, y, v);
        }
    return out;
}

}  // namespace

BinaryMask clean_mask(const BinaryMask& mask) {
    BinaryMask m = binary_extreme(binary_extreme(mask, false), true);  // open
    m = binary_extreme(binary_extreme(m, true), false);                // close
    return m;
}

SegmentResult segment_threshold(const Image8& image) {
    std::array<double, 256> hist{};
    for (uint8_t v : image.pixels) hist[v] += 1.0;

    // 5-bin moving average
    std::array<double, 256> smooth{};
    for (int i = 0; i < 256; ++i) {
        double acc = 0.0;
        int cnt = 0;
        for (int k = -2; k <= 2; ++k) {
            int j = i + k;
            if (j < 0 || j > 255) continue;
            acc += hist[j];
            ++cnt;
        }
        smooth[i] = acc / cnt;
    }

    int mode = 0;
    for (int i = 1; i < 256; ++i)
        if (smooth[i] > smooth[mode]) mode = i;

    // walk down from the background mode to the first local minimum
    SegmentResult result;
    int threshold = -1;
    for (int i = mode - 1; i >= 1; --i) {
        if (smooth[i] <= smooth[i - 1] && smooth[i] <= smooth[i + 1] &&
            smooth[i] < smooth[mode]) {
            threshold = i;
            break;
        }
    }
    if (threshold <= 0) {
        // unimodal: median fallback
        result.fallback = true;
        size_t total = image.pixels.size(), acc = 0;
        for (int i = 0; i < 256; ++i) {
            acc += static_cast<size_t>(hist[i]);
            if (acc >= total / 2) {
                threshold = i;
                break;
            }
        }
    }
    result.threshold = threshold;

    BinaryMask mask(image.width, image.height);
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x)
            mask.set(x, y, image.at(x, y) < threshold);

    mask = clean_mask(mask);
    mask = geom::largest_component(mask);
    mask = geom::fill_small_holes(mask);
    mask = geom::pad_to_margin(mask, 2);
    result.mask = std::move(mask);
    return result;
}

}  // namespace unwrap::io
