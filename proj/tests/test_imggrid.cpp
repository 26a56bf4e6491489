#include "seamtrace/error.hpp"
#include "seamtrace/imggrid.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace seamtrace {
namespace {

using testing::random_image;

std::vector<std::uint8_t> pnm(const std::string& header, std::vector<std::uint8_t> payload) {
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.insert(bytes.end(), payload.begin(), payload.end());
    return bytes;
}

std::string error_message(const std::vector<std::uint8_t>& bytes) {
    try {
        decode_netpbm(bytes);
    } catch (const Error& e) {
        EXPECT_EQ(e.stage(), Stage::Io);
        return e.what();
    }
    return "";
}

TEST(Netpbm, DecodesGrayBytesDividedBy255) {
    const auto img = decode_netpbm(pnm("P5\n2 2\n255\n", {0, 255, 128, 64}));
    ASSERT_EQ(img.width, 2);
    ASSERT_EQ(img.height, 2);
    EXPECT_DOUBLE_EQ(img.at(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(img.at(1, 0), 1.0);
    EXPECT_DOUBLE_EQ(img.at(0, 1), 128.0 / 255.0);
    EXPECT_DOUBLE_EQ(img.at(1, 1), 64.0 / 255.0);
}

TEST(Netpbm, ColorPixelBecomesLuma) {
    const auto img = decode_netpbm(pnm("P6 1 1 255\n", {255, 0, 0}));
    EXPECT_NEAR(img.at(0, 0), 0.299, 1e-12);
}

TEST(Netpbm, HeaderCommentsAreSkipped) {
    const auto img = decode_netpbm(pnm("P5\n# made by hand\n1 1\n# max\n255\n", {51}));
    EXPECT_DOUBLE_EQ(img.at(0, 0), 0.2);
}

TEST(Netpbm, RejectsWideMaxval) {
    EXPECT_NE(error_message(pnm("P5\n1 1\n65535\n", {0, 0})).find("unsupported maxval"), std::string::npos);
}

TEST(Netpbm, RejectsTruncatedPayload) {
    EXPECT_NE(error_message(pnm("P5\n2 2\n255\n", {1, 2, 3})).find("truncated payload"), std::string::npos);
}

TEST(Netpbm, RejectsMalformedHeader) {
    EXPECT_NE(error_message(pnm("P3\n1 1\n255\n", {0})).find("malformed header"), std::string::npos);
    EXPECT_NE(error_message(pnm("P5\nx 1\n255\n", {0})).find("malformed header"), std::string::npos);
    EXPECT_NE(error_message(pnm("P", {})).find("malformed header"), std::string::npos);
}

TEST(Netpbm, GrayRoundTripIsBitExact) {
    XorShift64Star rng(11);
    std::vector<std::uint8_t> payload(37 * 23);
    for (auto& b : payload) b = static_cast<std::uint8_t>(rng.next() >> 56);
    const auto bytes = pnm("P5\n37 23\n255\n", payload);
    EXPECT_EQ(encode_pgm(decode_netpbm(bytes)), bytes);
}

TEST(Netpbm, FileRoundTrip) {
    testing::TempDir dir("netpbm");
    XorShift64Star rng(3);
    ImageGrid img(9, 4);
    for (double& v : img.values) v = static_cast<double>(rng.next() >> 56) / 255.0;
    save_pgm(dir / "a.pgm", img);
    const ImageGrid back = load_image(dir / "a.pgm");
    EXPECT_EQ(back.values, img.values);
    EXPECT_THROW(load_image(dir / "missing.pgm"), Error);
}

TEST(Netpbm, RgbEncodingReplicatesGray) {
    ImageGrid img(2, 1);
    img.at(0, 0) = 0.2;
    img.at(1, 0) = 1.0;
    const auto bytes = encode_ppm(to_rgb(img));
    const std::string header = "P6\n2 1\n255\n";
    ASSERT_EQ(bytes.size(), header.size() + 6);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + static_cast<long>(header.size())), header);
    const std::vector<std::uint8_t> px(bytes.begin() + static_cast<long>(header.size()), bytes.end());
    EXPECT_EQ(px, (std::vector<std::uint8_t>{51, 51, 51, 255, 255, 255}));
}

// Sobel with index clamping, written out term by term.
double sobel_oracle(const ImageGrid& img, int x, int y) {
    auto p = [&](int dx, int dy) {
        const int xx = std::clamp(x + dx, 0, img.width - 1);
        const int yy = std::clamp(y + dy, 0, img.height - 1);
        return img.at(xx, yy);
    };
    const double gx = (p(1, -1) + 2 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2 * p(-1, 0) + p(-1, 1));
    const double gy = (p(-1, 1) + 2 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2 * p(0, -1) + p(1, -1));
    return std::sqrt(gx * gx + gy * gy);
}

TEST(Gradient, ConstantImageIsZero) {
    ImageGrid img(6, 5, 0.4);
    const GradField g = gradient_magnitude(img);
    for (double v : g.values) EXPECT_EQ(v, 0.0);
}

TEST(Gradient, VerticalStepPeaksAtTheStep) {
    ImageGrid img(10, 6);
    for (int y = 0; y < 6; ++y) {
        for (int x = 5; x < 10; ++x) img.at(x, y) = 1.0;
    }
    const GradField g = gradient_magnitude(img);
    EXPECT_DOUBLE_EQ(g.max_value(), 1.0);
    for (int y = 0; y < 6; ++y) {
        EXPECT_DOUBLE_EQ(g.at(4, y), 1.0);
        EXPECT_DOUBLE_EQ(g.at(5, y), 1.0);
        EXPECT_EQ(g.at(2, y), 0.0);
        EXPECT_EQ(g.at(8, y), 0.0);
    }
}

TEST(Gradient, MatchesConvolutionOracle) {
    XorShift64Star rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const ImageGrid img = random_image(5, 5, rng);
        const GradField g = gradient_magnitude(img);
        double mx = 0.0;
        for (int y = 0; y < 5; ++y) {
            for (int x = 0; x < 5; ++x) mx = std::max(mx, sobel_oracle(img, x, y));
        }
        for (int y = 0; y < 5; ++y) {
            for (int x = 0; x < 5; ++x) EXPECT_NEAR(g.at(x, y), sobel_oracle(img, x, y) / mx, 1e-12);
        }
    }
}

TEST(Bilinear, IntegerCoordinatesAreExact) {
    XorShift64Star rng(8);
    const ImageGrid img = random_image(7, 4, rng);
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 7; ++x) EXPECT_EQ(sample_bilinear(img, x, y), img.at(x, y));
    }
}

TEST(Bilinear, MidpointAndClamping) {
    ImageGrid img(2, 2, std::vector<double>{0.0, 0.0, 1.0, 1.0});
    EXPECT_DOUBLE_EQ(sample_bilinear(img, 0.5, 0.5), 0.5);
    EXPECT_DOUBLE_EQ(sample_bilinear(img, -5.0, -5.0), img.at(0, 0));
    EXPECT_DOUBLE_EQ(sample_bilinear(img, 9.0, 9.0), img.at(1, 1));
}

TEST(Bilinear, StaysWithinNeighbourRange) {
    XorShift64Star rng(21);
    const ImageGrid img = random_image(8, 8, rng);
    for (int t = 0; t < 500; ++t) {
        const double x = rng.uniform(0.0, 7.0);
        const double y = rng.uniform(0.0, 7.0);
        const int x0 = static_cast<int>(std::floor(x));
        const int y0 = static_cast<int>(std::floor(y));
        const int x1 = std::min(x0 + 1, 7);
        const int y1 = std::min(y0 + 1, 7);
        const double lo = std::min({img.at(x0, y0), img.at(x1, y0), img.at(x0, y1), img.at(x1, y1)});
        const double hi = std::max({img.at(x0, y0), img.at(x1, y0), img.at(x0, y1), img.at(x1, y1)});
        const double v = sample_bilinear(img, x, y);
        EXPECT_GE(v, lo - 1e-15);
        EXPECT_LE(v, hi + 1e-15);
    }
}

TEST(Patch, IdentityAngleIsAxisAlignedCrop) {
    XorShift64Star rng(4);
    const ImageGrid img = random_image(20, 20, rng);
    const GradField g = gradient_magnitude(img);
    // side 8, c = 3.5: centre (10.5, 9.5) puts cell (0,0) on pixel (7, 6).
    const SquarePatch p = extract_patch(img, g, {10.5, 9.5}, 0.0, 8);
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) EXPECT_NEAR(p.pixels.at(j, i), img.at(7 + j, 6 + i), 1e-12);
    }
}

TEST(Patch, HalfTurnIsRotatedCrop) {
    XorShift64Star rng(6);
    const ImageGrid img = random_image(20, 20, rng);
    const GradField g = gradient_magnitude(img);
    const SquarePatch p = extract_patch(img, g, {10.5, 9.5}, kPi, 8);
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) EXPECT_NEAR(p.pixels.at(j, i), img.at(14 - j, 13 - i), 1e-9);
    }
}

TEST(Patch, DiagonalStepTurnsVertical) {
    // Step across the line x + y = 40; its direction (1, -1) is the row axis at angle pi/4.
    ImageGrid img(40, 40);
    for (int y = 0; y < 40; ++y) {
        for (int x = 0; x < 40; ++x) img.at(x, y) = x + y > 40 ? 1.0 : 0.0;
    }
    const GradField g = gradient_magnitude(img);
    const Vec2 c{20.0, 20.0};
    const double angle = kPi / 4.0;
    const SquarePatch p = extract_patch(img, g, c, angle, 15);
    const double half = 7.0;
    for (int i = 0; i < 15; ++i) {
        for (int j = 0; j < 15; ++j) {
            // Rotate the cell offset by hand and interpolate from the four pixels.
            const double u = j - half;
            const double v = i - half;
            const double x = c.x + std::cos(angle) * u - std::sin(angle) * v;
            const double y = c.y + std::sin(angle) * u + std::cos(angle) * v;
            const int x0 = static_cast<int>(std::floor(x));
            const int y0 = static_cast<int>(std::floor(y));
            const double fx = x - x0;
            const double fy = y - y0;
            const double want = (1 - fx) * (1 - fy) * img.at(x0, y0) + fx * (1 - fy) * img.at(x0 + 1, y0) +
                                (1 - fx) * fy * img.at(x0, y0 + 1) + fx * fy * img.at(x0 + 1, y0 + 1);
            EXPECT_NEAR(p.pixels.at(j, i), want, 1e-9);
        }
    }
    // Every row crosses the step at the same column.
    auto crossing = [&](int i) {
        int j = 0;
        while (j < 15 && p.pixels.at(j, i) < 0.5) ++j;
        return j;
    };
    for (int i = 1; i < 15; ++i) EXPECT_EQ(crossing(i), crossing(0));
}

TEST(Patch, GradientsRenormalizedPerPatch) {
    XorShift64Star rng(9);
    const ImageGrid img = random_image(30, 30, rng);
    const GradField g = gradient_magnitude(img);
    const SquarePatch p = extract_patch(img, g, {15.2, 14.7}, 0.3, 10);
    EXPECT_DOUBLE_EQ(p.grads.max_value(), 1.0);
    for (double v : p.grads.values) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(Patch, SideBelowEightThrows) {
    ImageGrid img(20, 20);
    const GradField g = gradient_magnitude(img);
    EXPECT_THROW(extract_patch(img, g, {10, 10}, 0.0, 7), Error);
}

TEST(PatchFrame, CentreCellMapsToCentre) {
    const PatchFrame f{9, {31.25, 12.5}, 1.1};
    const Vec2 g = f.to_global(4, 4);
    EXPECT_NEAR(g.x, 31.25, 1e-12);
    EXPECT_NEAR(g.y, 12.5, 1e-12);
}

TEST(PatchFrame, IdentityAngleIsTranslation) {
    const PatchFrame f{10, {50.0, 40.0}, 0.0};
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) {
            const Vec2 g = f.to_global(i, j);
            EXPECT_DOUBLE_EQ(g.x, 50.0 + (j - 4.5));
            EXPECT_DOUBLE_EQ(g.y, 40.0 + (i - 4.5));
        }
    }
}

TEST(PatchFrame, IsometryAndRoundTrip) {
    XorShift64Star rng(12);
    for (int t = 0; t < 200; ++t) {
        const PatchFrame f{12, {rng.uniform(0, 100), rng.uniform(0, 100)}, rng.uniform(-kPi, kPi)};
        const int i1 = static_cast<int>(rng.next() % 12), j1 = static_cast<int>(rng.next() % 12);
        const int i2 = static_cast<int>(rng.next() % 12), j2 = static_cast<int>(rng.next() % 12);
        const double patch_dist = std::hypot(i1 - i2, j1 - j2);
        EXPECT_NEAR(distance(f.to_global(i1, j1), f.to_global(i2, j2)), patch_dist, 1e-9);
        const Vec2 back = f.to_patch(f.to_global(i1, j1));
        EXPECT_NEAR(back.x, j1, 1e-9);
        EXPECT_NEAR(back.y, i1, 1e-9);
    }
}

TEST(PatchFrame, RowAxisFollowsRowIndex) {
    const PatchFrame f{8, {0, 0}, 0.7};
    const Vec2 d = f.to_global(5, 2) - f.to_global(4, 2);
    EXPECT_NEAR(d.x, f.row_axis().x, 1e-12);
    EXPECT_NEAR(d.y, f.row_axis().y, 1e-12);
}

}  // namespace
}  // namespace seamtrace
