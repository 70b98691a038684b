#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "error.hpp"
#include "ifs_core.hpp"
#include "spaces.hpp"
#include "symbolic.hpp"

namespace ifs {

/// 8-bit RGB raster written as binary PPM (P6).
class PpmImage {
public:
    using Rgb = std::array<std::uint8_t, 3>;

    static constexpr Rgb background{16, 16, 24};
    static constexpr Rgb ink{255, 196, 64};

    PpmImage(std::size_t width, std::size_t height)
        : width_(width), height_(height), pixels_(width * height * 3)
    {
        if (width == 0 || height == 0 || width > 8192 || height > 8192) {
            throw Error(ErrorKind::InvalidParameter, "image size must be within 1..8192");
        }
        for (std::size_t i = 0; i < width * height; ++i) {
            set_index(i, background);
        }
    }

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }

    void set(std::size_t x, std::size_t y, Rgb c)
    {
        if (x < width_ && y < height_) {
            set_index(y * width_ + x, c);
        }
    }

    Rgb at(std::size_t x, std::size_t y) const
    {
        const std::size_t i = (y * width_ + x) * 3;
        return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
    }

    std::string header() const
    {
        return "P6\n" + std::to_string(width_) + " " + std::to_string(height_) + "\n255\n";
    }

    std::string bytes() const
    {
        std::string out = header();
        out.append(reinterpret_cast<const char*>(pixels_.data()), pixels_.size());
        return out;
    }

private:
    void set_index(std::size_t i, Rgb c)
    {
        pixels_[3 * i] = c[0];
        pixels_[3 * i + 1] = c[1];
        pixels_[3 * i + 2] = c[2];
    }

    std::size_t width_;
    std::size_t height_;
    std::vector<std::uint8_t> pixels_;
};

struct RenderOptions {
    std::size_t width = 512;
    std::size_t height = 512;
    std::size_t steps = 100000;
    std::size_t burn_in = 100;
};

struct PixelIndex {
    std::size_t x;
    std::size_t y;
    friend bool operator==(const PixelIndex&, const PixelIndex&) = default;
};

namespace detail {
inline std::size_t to_pixel(double v, std::size_t size)
{
    const double clamped = std::clamp(v, 0.0, static_cast<double>(size) - 1.0);
    return static_cast<std::size_t>(std::lround(clamped));
}

/// Orthographic view basis: looking from direction (1,1,1)/sqrt3 with z up.
inline std::array<Vec3, 3> sphere_view()
{
    const double s3 = 1.0 / std::sqrt(3.0);
    const Vec3 view{s3, s3, s3};
    Vec3 right = cross(Vec3{0, 0, 1}, view);
    right = scaled(right, 1.0 / norm(right));
    const Vec3 up = cross(view, right);
    return {right, up, view};
}
}  // namespace detail

/*!
 * Pixels covered by a point of the space, or nothing for points hidden in
 * the current view. Circle: a ring of radius 0.4 min(w, h). Interval: a
 * vertical bar in the middle half of the image. Sphere: orthographic
 * projection of the visible hemisphere.
 */
inline std::vector<PixelIndex> pixels_of(const SpacePoint& p, std::size_t w, std::size_t h)
{
    const double cx = 0.5 * static_cast<double>(w - 1);
    const double cy = 0.5 * static_cast<double>(h - 1);
    const double radius = 0.4 * static_cast<double>(std::min(w, h));
    switch (p.kind()) {
    case SpaceKind::Circle: {
        const double th = p.angle();
        return {{detail::to_pixel(cx + radius * std::cos(th), w),
                 detail::to_pixel(cy - radius * std::sin(th), h)}};
    }
    case SpaceKind::Interval: {
        const std::size_t x = detail::to_pixel(p.value() * static_cast<double>(w - 1), w);
        std::vector<PixelIndex> out;
        for (std::size_t y = h / 4; y < h - h / 4; ++y) {
            out.push_back({x, y});
        }
        return out;
    }
    case SpaceKind::Sphere2: {
        static const auto basis = detail::sphere_view();
        const Vec3& v = p.vec();
        if (dot(v, basis[2]) < 0.0) {
            return {};
        }
        return {{detail::to_pixel(cx + radius * dot(v, basis[0]), w),
                 detail::to_pixel(cy - radius * dot(v, basis[1]), h)}};
    }
    case SpaceKind::FiniteGrid: break;
    }
    throw Error(ErrorKind::Unsupported, "rendering supports circle, interval and sphere2");
}

/// Pixels of the drawn ring for the circle layout (fine sampling of the ring).
inline std::vector<PixelIndex> ring_pixels(std::size_t w, std::size_t h)
{
    std::vector<char> seen(w * h, 0);
    std::vector<PixelIndex> out;
    const std::size_t samples = 64 * (w + h);
    for (std::size_t i = 0; i < samples; ++i) {
        const double th = two_pi * static_cast<double>(i) / static_cast<double>(samples);
        for (const auto& px : pixels_of(SpacePoint::circle(th), w, h)) {
            if (!seen[px.y * w + px.x]) {
                seen[px.y * w + px.x] = 1;
                out.push_back(px);
            }
        }
    }
    return out;
}

/*!
 * Chaos-game picture: iterate from x along the word stream keyed by seed,
 * discard burn_in points, then plot `steps` points.
 */
inline PpmImage render_attractor(const IfsSystem& sys, const SpacePoint& x, std::uint64_t seed,
                                 const RenderOptions& opts = {})
{
    const auto kind = sys.space().kind;
    if (kind != SpaceKind::Circle && kind != SpaceKind::Interval && kind != SpaceKind::Sphere2) {
        throw Error(ErrorKind::Unsupported,
                    std::string("cannot render a ") + to_string(kind) + " system");
    }
    require_in(sys.space(), x);
    PpmImage img(opts.width, opts.height);
    const WordStream omega(seed, sys.weights());
    SpacePoint p = x;
    for (std::size_t i = 0; i < opts.burn_in + opts.steps; ++i) {
        p = sys.apply(omega[i], p);
        if (i >= opts.burn_in) {
            for (const auto& px : pixels_of(p, opts.width, opts.height)) {
                img.set(px.x, px.y, PpmImage::ink);
            }
        }
    }
    return img;
}

}  // namespace ifs
