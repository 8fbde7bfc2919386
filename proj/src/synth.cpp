#include <registra/synth.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace registra::synth {

namespace {

bool inside_polygon(const std::vector<Point2>& poly, double x, double y) {
    bool in = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const Point2& a = poly[i];
        const Point2& b = poly[j];
        if ((a.y > y) != (b.y > y) && x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x) in = !in;
    }
    return in;
}

bool inside(const Shape& s, double x, double y) {
    if (s.kind == Shape::Kind::Circle) {
        const double dx = x - s.center.x, dy = y - s.center.y;
        return dx * dx + dy * dy <= s.radius * s.radius;
    }
    return inside_polygon(s.vertices, x, y);
}

void bounds(const Shape& s, double& x0, double& y0, double& x1, double& y1) {
    if (s.kind == Shape::Kind::Circle) {
        x0 = s.center.x - s.radius;
        x1 = s.center.x + s.radius;
        y0 = s.center.y - s.radius;
        y1 = s.center.y + s.radius;
        return;
    }
    x0 = y0 = 1e300;
    x1 = y1 = -1e300;
    for (const Point2& p : s.vertices) {
        x0 = std::min(x0, p.x);
        y0 = std::min(y0, p.y);
        x1 = std::max(x1, p.x);
        y1 = std::max(y1, p.y);
    }
}

}  // namespace

Shape rectangle(double x0, double y0, double x1, double y1, float value) {
    return polygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}, value);
}

Shape polygon(std::vector<Point2> vertices, float value) {
    Shape s;
    s.kind = Shape::Kind::Polygon;
    s.vertices = std::move(vertices);
    s.value = value;
    return s;
}

Shape circle(Point2 center, double radius, float value) {
    Shape s;
    s.kind = Shape::Kind::Circle;
    s.center = center;
    s.radius = radius;
    s.value = value;
    return s;
}

std::vector<float> smooth_noise(int width, int height, int cell, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> uni(-1.0f, 1.0f);
    const int gw = width / cell + 2;
    const int gh = height / cell + 2;
    std::vector<float> grid(static_cast<std::size_t>(gw) * gh);
    for (auto& g : grid) g = uni(rng);
    std::vector<float> fine(static_cast<std::size_t>(width) * height);
    for (auto& f : fine) f = uni(rng);
    std::vector<float> out(fine.size());
    for (int y = 0; y < height; ++y) {
        const double gy = static_cast<double>(y) / cell;
        const int iy = static_cast<int>(gy);
        const double fy = gy - iy;
        for (int x = 0; x < width; ++x) {
            const double gx = static_cast<double>(x) / cell;
            const int ix = static_cast<int>(gx);
            const double fx = gx - ix;
            const auto g = [&](int i, int j) { return grid[static_cast<std::size_t>(j) * gw + i]; };
            const double top = g(ix, iy) + fx * (g(ix + 1, iy) - g(ix, iy));
            const double bot = g(ix, iy + 1) + fx * (g(ix + 1, iy + 1) - g(ix, iy + 1));
            const double coarse = top + fy * (bot - top);
            const std::size_t k = static_cast<std::size_t>(y) * width + x;
            out[k] = static_cast<float>(std::clamp(0.8 * coarse + 0.2 * fine[k], -1.0, 1.0));
        }
    }
    return out;
}

Image render(const Scene& scene) {
    const int w = scene.width, h = scene.height;
    std::vector<float> px(static_cast<std::size_t>(w) * h, scene.background);
    constexpr int kSub = 4;
    for (const Shape& s : scene.shapes) {
        double x0, y0, x1, y1;
        bounds(s, x0, y0, x1, y1);
        const int px0 = std::max(0, static_cast<int>(std::floor(x0)) - 1);
        const int py0 = std::max(0, static_cast<int>(std::floor(y0)) - 1);
        const int px1 = std::min(w - 1, static_cast<int>(std::ceil(x1)) + 1);
        const int py1 = std::min(h - 1, static_cast<int>(std::ceil(y1)) + 1);
        for (int y = py0; y <= py1; ++y) {
            for (int x = px0; x <= px1; ++x) {
                // Pixel (x, y) covers [x-0.5, x+0.5] x [y-0.5, y+0.5].
                int hits = 0;
                for (int sy = 0; sy < kSub; ++sy) {
                    for (int sx = 0; sx < kSub; ++sx) {
                        if (inside(s, x - 0.5 + (sx + 0.5) / kSub, y - 0.5 + (sy + 0.5) / kSub)) ++hits;
                    }
                }
                if (hits == 0) continue;
                const float cov = static_cast<float>(hits) / (kSub * kSub);
                float& p = px[static_cast<std::size_t>(y) * w + x];
                p = p * (1.0f - cov) + s.value * cov;
            }
        }
    }
    if (scene.texture_amplitude > 0.0) {
        const auto tex = smooth_noise(w, h, 16, scene.texture_seed);
        for (std::size_t k = 0; k < px.size(); ++k) {
            px[k] = std::clamp(px[k] + static_cast<float>(scene.texture_amplitude) * tex[k], 0.0f, 1.0f);
        }
    }
    return Image(w, h, std::move(px));
}

Image add_gaussian_noise(const Image& image, double sigma, std::uint64_t seed) {
    if (sigma <= 0.0) return image;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    std::vector<float> px(image.pixels().begin(), image.pixels().end());
    for (auto& p : px) p = static_cast<float>(std::clamp(p + noise(rng), 0.0, 1.0));
    return Image(image.width(), image.height(), std::move(px));
}

Image textured_image(int width, int height, std::uint64_t seed) {
    const auto coarse = smooth_noise(width, height, 12, seed);
    const auto mid = smooth_noise(width, height, 5, seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<float> px(coarse.size());
    for (std::size_t k = 0; k < px.size(); ++k) {
        px[k] = std::clamp(0.5f + 0.3f * coarse[k] + 0.15f * mid[k], 0.0f, 1.0f);
    }
    return Image(width, height, std::move(px));
}

Transform similarity_about(Point2 pivot, double shift_x, double shift_y, double theta_deg, double scale) {
    const Transform to_origin = from_similarity(-pivot.x, -pivot.y, 0.0, 1.0);
    const Transform rs = from_similarity(0.0, 0.0, theta_deg, scale);
    const Transform back = from_similarity(pivot.x + shift_x, pivot.y + shift_y, 0.0, 1.0);
    return compose(back, compose(rs, to_origin));
}

}  // namespace registra::synth
