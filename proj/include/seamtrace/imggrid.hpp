/**
 * @file imggrid.hpp
 * @brief Intensity images, gradient fields, bilinear sampling and rotated
 *        square patches.
 *
 * Coordinates are (x, y) with the origin at the centre of the top-left pixel
 * and y pointing down. Pixel (x, y) is stored at index y * width + x.
 */
#pragma once

#include "seamtrace/geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace seamtrace {

/// Row-major scalar field. Shared storage for images, gradients and patches.
struct ScalarField {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    ScalarField() = default;
    ScalarField(int w, int h, double fill = 0.0);
    ScalarField(int w, int h, std::vector<double> v);

    double at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
    double& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }

    double max_value() const;
};

/// Intensity image with values in [0,1].
struct ImageGrid : ScalarField {
    using ScalarField::ScalarField;
};

/// Gradient magnitudes normalized so the field maximum is 1 (or all zero).
struct GradField : ScalarField {
    using ScalarField::ScalarField;
};

/// 8-bit RGB raster used for overlays.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;  // 3 bytes per pixel, row-major

    void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b);
};

// --- Netpbm I/O -------------------------------------------------------------

/// Reads binary P5 (gray) or P6 (converted to luma). maxval must be 255.
ImageGrid load_image(const std::filesystem::path& path);
ImageGrid decode_netpbm(std::span<const std::uint8_t> bytes);

/// Writes P5; intensities are quantized with round(v * 255).
void save_pgm(const std::filesystem::path& path, const ImageGrid& img);
std::vector<std::uint8_t> encode_pgm(const ImageGrid& img);

void save_ppm(const std::filesystem::path& path, const RgbImage& img);
std::vector<std::uint8_t> encode_ppm(const RgbImage& img);

/// Gray image replicated into RGB with the same 8-bit quantization as save_pgm.
RgbImage to_rgb(const ImageGrid& img);

// --- Gradients and sampling ---------------------------------------------------

/// 3x3 Sobel with replicated borders, L2 magnitude, divided by the field max.
GradField gradient_magnitude(const ImageGrid& img);

/// Bilinear sample; coordinates outside the field clamp to the border.
double sample_bilinear(const ScalarField& field, double x, double y);

// --- Square patches -----------------------------------------------------------

/// Rigid map between patch cells (row i, column j) and image coordinates:
/// global = center + R(angle) * (j - c, i - c), c = (side - 1) / 2.
struct PatchFrame {
    int side = 0;
    Vec2 center;
    double angle = 0.0;

    Vec2 to_global(double i, double j) const;
    /// Inverse of to_global; returns (i, j) packed as {x = j, y = i}.
    Vec2 to_patch(Vec2 global) const;
    /// Unit vector along increasing row index i, in image coordinates.
    Vec2 row_axis() const;
};

/// N x N window resampled from the image along a rotated frame.
struct SquarePatch {
    PatchFrame frame;
    ScalarField pixels;  // width = height = side; at(j, i)
    ScalarField grads;   // renormalized to [0,1] within the patch

    int side() const { return frame.side; }
};

SquarePatch extract_patch(const ImageGrid& img, const GradField& grads, Vec2 center,
                          double angle, int side);

/// Global point sampled for patch cell (i, j).
Vec2 patch_to_global(const SquarePatch& patch, int i, int j);

/// Scales a field in place so its maximum is 1; no-op when the max is 0.
void normalize_to_unit_max(ScalarField& field);

}  // namespace seamtrace
