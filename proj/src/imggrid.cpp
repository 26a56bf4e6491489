#include "seamtrace/imggrid.hpp"

#include "seamtrace/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

namespace seamtrace {

const char* stage_name(Stage stage) noexcept {
    switch (stage) {
        case Stage::Io: return "io";
        case Stage::InitCurve: return "initcurve";
        case Stage::SeamCut: return "seamcut";
        case Stage::Integrate: return "integrate";
        case Stage::Metrics: return "metrics";
        case Stage::Synth: return "synth";
        case Stage::Config: return "config";
    }
    return "unknown";
}

ScalarField::ScalarField(int w, int h, double fill)
    : width(w), height(h), values(static_cast<size_t>(w) * static_cast<size_t>(h), fill) {}

ScalarField::ScalarField(int w, int h, std::vector<double> v)
    : width(w), height(h), values(std::move(v)) {
    if (values.size() != static_cast<size_t>(w) * static_cast<size_t>(h)) {
        throw Error(Stage::Io, "field storage does not match dimensions");
    }
}

double ScalarField::max_value() const {
    return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

void RgbImage::set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const size_t at = (static_cast<size_t>(y) * width + x) * 3;
    rgb[at] = r;
    rgb[at + 1] = g;
    rgb[at + 2] = b;
}

// -----------------------------------------------------------------------------
// Netpbm
// -----------------------------------------------------------------------------

namespace {

class HeaderReader {
public:
    explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::string magic() {
        if (bytes_.size() < 2) throw Error(Stage::Io, "malformed header: file too short");
        pos_ = 2;
        return {static_cast<char>(bytes_[0]), static_cast<char>(bytes_[1])};
    }

    long number() {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
            throw Error(Stage::Io, "malformed header: expected a number");
        }
        long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_] - '0');
            if (v > 1'000'000'000L) throw Error(Stage::Io, "malformed header: number too large");
            ++pos_;
        }
        return v;
    }

    /// Consumes the single whitespace byte separating header from payload.
    size_t payload_offset() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
            throw Error(Stage::Io, "malformed header: missing separator before payload");
        }
        return pos_ + 1;
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Stage::Io, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Stage::Io, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Stage::Io, "write failed for " + path.string());
}

std::uint8_t quantize(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

std::vector<std::uint8_t> header(const char* magic, int w, int h) {
    const std::string s = std::string(magic) + "\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
    return {s.begin(), s.end()};
}

}  // namespace

ImageGrid decode_netpbm(std::span<const std::uint8_t> bytes) {
    HeaderReader reader(bytes);
    const std::string magic = reader.magic();
    if (magic != "P5" && magic != "P6") {
        throw Error(Stage::Io, "malformed header: unsupported magic '" + magic + "'");
    }
    const long w = reader.number();
    const long h = reader.number();
    const long maxval = reader.number();
    if (w < 1 || h < 1) throw Error(Stage::Io, "malformed header: empty image");
    if (maxval != 255) throw Error(Stage::Io, "unsupported maxval " + std::to_string(maxval));
    const size_t offset = reader.payload_offset();

    const size_t channels = magic == "P5" ? 1 : 3;
    const size_t count = static_cast<size_t>(w) * static_cast<size_t>(h);
    if (bytes.size() - offset < count * channels) throw Error(Stage::Io, "truncated payload");

    ImageGrid img(static_cast<int>(w), static_cast<int>(h));
    const std::uint8_t* p = bytes.data() + offset;
    for (size_t k = 0; k < count; ++k) {
        if (channels == 1) {
            img.values[k] = p[k] / 255.0;
        } else {
            const std::uint8_t* px = p + 3 * k;
            img.values[k] = (0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]) / 255.0;
        }
    }
    return img;
}

ImageGrid load_image(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    return decode_netpbm(bytes);
}

std::vector<std::uint8_t> encode_pgm(const ImageGrid& img) {
    auto out = header("P5", img.width, img.height);
    out.reserve(out.size() + img.values.size());
    for (double v : img.values) out.push_back(quantize(v));
    return out;
}

void save_pgm(const std::filesystem::path& path, const ImageGrid& img) {
    write_file(path, encode_pgm(img));
}

std::vector<std::uint8_t> encode_ppm(const RgbImage& img) {
    auto out = header("P6", img.width, img.height);
    out.insert(out.end(), img.rgb.begin(), img.rgb.end());
    return out;
}

void save_ppm(const std::filesystem::path& path, const RgbImage& img) {
    write_file(path, encode_ppm(img));
}

RgbImage to_rgb(const ImageGrid& img) {
    RgbImage out{img.width, img.height, {}};
    out.rgb.reserve(img.values.size() * 3);
    for (double v : img.values) {
        const auto q = quantize(v);
        out.rgb.insert(out.rgb.end(), {q, q, q});
    }
    return out;
}

// -----------------------------------------------------------------------------
// Gradients and sampling
// -----------------------------------------------------------------------------

void normalize_to_unit_max(ScalarField& field) {
    const double m = field.max_value();
    if (m <= 0.0) return;
    for (double& v : field.values) v /= m;
}

GradField gradient_magnitude(const ImageGrid& img) {
    const int w = img.width;
    const int h = img.height;
    auto px = [&](int x, int y) {
        return img.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1));
    };

    GradField out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double gx = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1))
                            - (px(x - 1, y - 1) + 2.0 * px(x - 1, y) + px(x - 1, y + 1));
            const double gy = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1))
                            - (px(x - 1, y - 1) + 2.0 * px(x, y - 1) + px(x + 1, y - 1));
            out.at(x, y) = std::sqrt(gx * gx + gy * gy);
        }
    }
    normalize_to_unit_max(out);
    return out;
}

double sample_bilinear(const ScalarField& field, double x, double y) {
    x = std::clamp(x, 0.0, static_cast<double>(field.width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(field.height - 1));
    const int x0 = std::min(static_cast<int>(x), field.width - 1);
    const int y0 = std::min(static_cast<int>(y), field.height - 1);
    const int x1 = std::min(x0 + 1, field.width - 1);
    const int y1 = std::min(y0 + 1, field.height - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const double top = field.at(x0, y0) * (1.0 - fx) + field.at(x1, y0) * fx;
    const double bottom = field.at(x0, y1) * (1.0 - fx) + field.at(x1, y1) * fx;
    return top * (1.0 - fy) + bottom * fy;
}

// -----------------------------------------------------------------------------
// Patches
// -----------------------------------------------------------------------------

Vec2 PatchFrame::to_global(double i, double j) const {
    const double c = (side - 1) / 2.0;
    const double dx = j - c;
    const double dy = i - c;
    const double cs = std::cos(angle);
    const double sn = std::sin(angle);
    return {center.x + cs * dx - sn * dy, center.y + sn * dx + cs * dy};
}

Vec2 PatchFrame::to_patch(Vec2 global) const {
    const double c = (side - 1) / 2.0;
    const Vec2 d = global - center;
    const double cs = std::cos(angle);
    const double sn = std::sin(angle);
    // R^T * d
    return {cs * d.x + sn * d.y + c, -sn * d.x + cs * d.y + c};
}

Vec2 PatchFrame::row_axis() const {
    return {-std::sin(angle), std::cos(angle)};
}

SquarePatch extract_patch(const ImageGrid& img, const GradField& grads, Vec2 center,
                          double angle, int side) {
    if (side < 8) throw Error(Stage::SeamCut, "patch side must be at least 8");
    SquarePatch patch{PatchFrame{side, center, angle}, ScalarField(side, side), ScalarField(side, side)};
    for (int i = 0; i < side; ++i) {
        for (int j = 0; j < side; ++j) {
            const Vec2 g = patch.frame.to_global(i, j);
            patch.pixels.at(j, i) = sample_bilinear(img, g.x, g.y);
            patch.grads.at(j, i) = sample_bilinear(grads, g.x, g.y);
        }
    }
    normalize_to_unit_max(patch.grads);
    return patch;
}

Vec2 patch_to_global(const SquarePatch& patch, int i, int j) {
    return patch.frame.to_global(i, j);
}

}  // namespace seamtrace
