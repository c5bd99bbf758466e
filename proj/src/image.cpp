#include "derivkit/image.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "derivkit/errors.hpp"

namespace derivkit {

Rgb SceneImage::pixel(int row, int col) const {
    const auto i = (static_cast<std::size_t>(row) * static_cast<std::size_t>(width) + static_cast<std::size_t>(col)) * 3;
    return Rgb{pixels.at(i), pixels.at(i + 1), pixels.at(i + 2)};
}

void SceneImage::set_pixel(int row, int col, Rgb c) {
    const auto i = (static_cast<std::size_t>(row) * static_cast<std::size_t>(width) + static_cast<std::size_t>(col)) * 3;
    pixels.at(i) = c.r;
    pixels.at(i + 1) = c.g;
    pixels.at(i + 2) = c.b;
}

namespace {

// Half-height of a left-facing glyph at relative column c; grows from the apex.
int half_extent(int c, int w, int h) {
    if (w <= 1) return h / 2;
    return (c * (h / 2)) / (w - 1);
}

void validate_glyph(const Glyph& g, int width, int height) {
    if (g.w < 1 || g.h < 1 || g.x < 0 || g.y < 0 || g.x + g.w > width || g.y + g.h > height) {
        throw ContractViolation("glyph lies outside the canvas");
    }
}

}  // namespace

SceneImage rasterize(int width, int height, std::vector<Glyph> glyphs) {
    if (width <= 0 || height <= 0) throw ContractViolation("canvas must be non-empty");
    SceneImage img;
    img.width = width;
    img.height = height;
    img.pixels.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3, 255);
    for (const auto& g : glyphs) {
        validate_glyph(g, width, height);
        const Rgb colour = g.color == GlyphColor::blue ? kBlue : kRed;
        const int centre = g.h / 2;
        for (int c = 0; c < g.w; ++c) {
            const int ext = half_extent(g.facing == Facing::left ? c : g.w - 1 - c, g.w, g.h);
            for (int r = centre - ext; r <= centre + ext; ++r) img.set_pixel(g.y + r, g.x + c, colour);
        }
    }
    img.glyphs = std::move(glyphs);
    return img;
}

SceneImage render_scene(const SceneRequest& req, Rng& rng) {
    if (req.left < 0 || req.right < 0) throw ContractViolation("glyph counts must be non-negative");
    if (req.width < req.glyph_w + 2 || req.height < req.glyph_h + 2) {
        throw GenerationError("canvas too small for a glyph");
    }
    std::vector<Facing> facings(static_cast<std::size_t>(req.left), Facing::left);
    facings.insert(facings.end(), static_cast<std::size_t>(req.right), Facing::right);
    rng.shuffle(std::span(facings));

    for (int attempt = 0; attempt < req.max_attempts; ++attempt) {
        std::vector<Glyph> placed;
        bool ok = true;
        for (auto facing : facings) {
            Glyph g;
            g.facing = facing;
            g.color = facing == Facing::left ? GlyphColor::blue : GlyphColor::red;
            g.w = req.glyph_w;
            g.h = req.glyph_h;
            g.x = rng.uniform_int(1, req.width - 1 - g.w);
            g.y = rng.uniform_int(1, req.height - 1 - g.h);
            // Boxes must be separated by at least one blank row or column.
            const bool clash = std::any_of(placed.begin(), placed.end(), [&](const Glyph& o) {
                return !(g.x + g.w < o.x || o.x + o.w < g.x || g.y + g.h < o.y || o.y + o.h < g.y);
            });
            if (clash) {
                ok = false;
                break;
            }
            placed.push_back(g);
        }
        if (ok) return rasterize(req.width, req.height, std::move(placed));
    }
    throw GenerationError("could not place " + std::to_string(facings.size()) + " glyphs without overlap");
}

SceneImage flip_horizontal(const SceneImage& img) {
    SceneImage out = img;
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) out.set_pixel(r, img.width - 1 - c, img.pixel(r, c));
    }
    for (auto& g : out.glyphs) {
        g.x = img.width - g.x - g.w;
        g.facing = g.facing == Facing::left ? Facing::right : Facing::left;
    }
    return out;
}

SceneImage concat_vertical(const SceneImage& img) {
    SceneImage out = img;
    out.height = img.height * 2;
    out.pixels.insert(out.pixels.end(), img.pixels.begin(), img.pixels.end());
    for (auto g : img.glyphs) {
        g.y += img.height;
        out.glyphs.push_back(g);
    }
    return out;
}

GlyphCounts ground_truth_counts(const SceneImage& img) {
    GlyphCounts counts;
    for (const auto& g : img.glyphs) (g.facing == Facing::left ? counts.left : counts.right)++;
    return counts;
}

GlyphCounts count_glyphs(int width, int height, std::span<const std::uint8_t> pixels) {
    if (width <= 0 || height <= 0 ||
        pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3) {
        throw ContractViolation("pixel buffer does not match the stated dimensions");
    }
    const auto at = [&](int r, int c) { return static_cast<std::size_t>(r) * static_cast<std::size_t>(width) + static_cast<std::size_t>(c); };
    const auto ink = [&](int r, int c) {
        const auto i = at(r, c) * 3;
        return !(pixels[i] == 255 && pixels[i + 1] == 255 && pixels[i + 2] == 255);
    };

    std::vector<bool> seen(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), false);
    GlyphCounts counts;
    std::vector<std::pair<int, int>> stack, component;
    for (int r0 = 0; r0 < height; ++r0) {
        for (int c0 = 0; c0 < width; ++c0) {
            if (seen[at(r0, c0)] || !ink(r0, c0)) continue;
            component.clear();
            stack.assign(1, {r0, c0});
            seen[at(r0, c0)] = true;
            int lo = c0, hi = c0;
            while (!stack.empty()) {
                const auto [r, c] = stack.back();
                stack.pop_back();
                component.push_back({r, c});
                lo = std::min(lo, c);
                hi = std::max(hi, c);
                constexpr int dr[] = {-1, 1, 0, 0};
                constexpr int dc[] = {0, 0, -1, 1};
                for (int k = 0; k < 4; ++k) {
                    const int nr = r + dr[k], nc = c + dc[k];
                    if (nr < 0 || nc < 0 || nr >= height || nc >= width) continue;
                    if (seen[at(nr, nc)] || !ink(nr, nc)) continue;
                    seen[at(nr, nc)] = true;
                    stack.push_back({nr, nc});
                }
            }
            // Compare mass in the left and right halves of the bounding box; the middle
            // column of an odd-width box counts for neither.
            long left_mass = 0, right_mass = 0;
            for (const auto& [r, c] : component) {
                if (2 * (c - lo) < hi - lo) ++left_mass;
                else if (2 * (c - lo) > hi - lo) ++right_mass;
            }
            // The base is the heavy side; the apex points the other way.
            (right_mass >= left_mass ? counts.left : counts.right)++;
        }
    }
    return counts;
}

GlyphCounts count_glyphs(const SceneImage& img) { return count_glyphs(img.width, img.height, img.pixels); }

std::vector<std::uint8_t> encode_ppm(const SceneImage& img) {
    const std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

SceneImage decode_ppm(std::span<const std::uint8_t> bytes) {
    std::size_t pos = 0;
    auto skip_space = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto token = [&] {
        skip_space();
        std::string t;
        while (pos < bytes.size() && !std::isspace(bytes[pos])) t.push_back(static_cast<char>(bytes[pos++]));
        return t;
    };
    auto number = [&] {
        const auto t = token();
        if (t.empty() || !std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) ||
            t.size() > 6) {
            throw ProtocolError("malformed PPM header");
        }
        return std::stoi(t);
    };
    if (token() != "P6") throw ProtocolError("not a binary PPM image");
    SceneImage img;
    img.width = number();
    img.height = number();
    if (number() != 255) throw ProtocolError("only 8-bit PPM images are supported");
    if (img.width <= 0 || img.height <= 0) throw ProtocolError("PPM image has no pixels");
    ++pos;  // single whitespace byte before the raster
    const auto expected = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height) * 3;
    if (pos > bytes.size() || bytes.size() - pos != expected) throw ProtocolError("PPM raster size mismatch");
    img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
    return img;
}

}  // namespace derivkit
