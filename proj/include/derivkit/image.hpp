#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "derivkit/rng.hpp"

namespace derivkit {

enum class Facing { left, right };
enum class GlyphColor { blue, red };

/// One vehicle glyph: a solid triangle whose apex points in the facing direction.
struct Glyph {
    Facing facing = Facing::left;
    GlyphColor color = GlyphColor::blue;
    int x = 0;  // top-left column
    int y = 0;  // top-left row
    int w = 0;
    int h = 0;

    bool operator==(const Glyph&) const = default;
};

struct Rgb {
    std::uint8_t r = 255;
    std::uint8_t g = 255;
    std::uint8_t b = 255;
    bool operator==(const Rgb&) const = default;
};

inline constexpr Rgb kBackground{255, 255, 255};
inline constexpr Rgb kBlue{0, 0, 255};
inline constexpr Rgb kRed{255, 0, 0};

/// Row-major RGB8 raster plus the glyph list it was drawn from (ground truth).
struct SceneImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // width * height * 3
    std::vector<Glyph> glyphs;

    Rgb pixel(int row, int col) const;
    void set_pixel(int row, int col, Rgb c);

    bool operator==(const SceneImage&) const = default;
};

struct SceneRequest {
    int left = 0;
    int right = 0;
    int width = 96;
    int height = 64;
    int glyph_w = 10;
    int glyph_h = 7;
    int max_attempts = 2000;
};

/// Draws glyphs onto a white canvas. Left-facing glyphs are blue, right-facing red,
/// unless the glyph carries a different colour (as after a mirror).
SceneImage rasterize(int width, int height, std::vector<Glyph> glyphs);

/// Places the requested glyphs at random, non-touching positions one pixel clear of
/// the border. Throws GenerationError when placement fails after max_attempts.
SceneImage render_scene(const SceneRequest& req, Rng& rng);

SceneImage flip_horizontal(const SceneImage& img);
SceneImage concat_vertical(const SceneImage& img);

struct GlyphCounts {
    int left = 0;
    int right = 0;
    bool operator==(const GlyphCounts&) const = default;
};

/// Counts from the glyph list (generator ground truth).
GlyphCounts ground_truth_counts(const SceneImage& img);

/// Counts from pixels alone: 4-connected non-background components, each classified
/// by which half of its bounding box carries more mass (the apex side is lighter).
GlyphCounts count_glyphs(int width, int height, std::span<const std::uint8_t> pixels);
GlyphCounts count_glyphs(const SceneImage& img);

/// Binary PPM (P6, maxval 255).
std::vector<std::uint8_t> encode_ppm(const SceneImage& img);
/// Decodes a P6 payload into a raster with an empty glyph list.
SceneImage decode_ppm(std::span<const std::uint8_t> bytes);

}  // namespace derivkit
