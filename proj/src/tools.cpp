#include <registra/tools.hpp>
#include <registra/error.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

namespace registra {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Mapped corners are inside the target and the grid is convex, so only
// floating-point slack can push a sample out; clamp it back.
float sample_clamped(const Image& img, Point2 p) {
    p.x = std::clamp(p.x, 0.0, static_cast<double>(img.width() - 1));
    p.y = std::clamp(p.y, 0.0, static_cast<double>(img.height() - 1));
    return sample_bilinear_unchecked(img, p);
}

int grid_count(double extent) { return std::max(1, static_cast<int>(std::floor(extent + 1e-9))); }

double parabola_offset(double left, double mid, double right) {
    const double denom = left - 2.0 * mid + right;
    if (!(denom < 0.0)) return 0.0;
    return std::clamp(0.5 * (left - right) / denom, -0.5, 0.5);
}

struct UnionFind {
    std::vector<int> parent;
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

}  // namespace

std::string_view to_string(MeasurementKind kind) noexcept {
    switch (kind) {
        case MeasurementKind::AngleDeg: return "angle_deg";
        case MeasurementKind::DistancePx: return "distance_px";
        case MeasurementKind::IntensityMean: return "intensity_mean";
        case MeasurementKind::BlobCount: return "blob_count";
        case MeasurementKind::BlobAreaPx2: return "blob_area_px2";
        case MeasurementKind::Score: return "score";
    }
    return "score";
}

void validate(const EdgeParams& p) {
    if (!(p.min_contrast > 0.0 && p.min_contrast <= 1.0)) {
        throw Error(ErrorCode::InvalidParams, "min_contrast must be in (0, 1]");
    }
    if (p.num_scanlines < 2) throw Error(ErrorCode::InvalidParams, "num_scanlines must be >= 2");
}

void validate(const BlobParams& p) {
    if (!(p.threshold > 0.0 && p.threshold < 1.0)) {
        throw Error(ErrorCode::InvalidParams, "blob threshold must be in (0, 1)");
    }
}

void check_roi_inside(const ToolContext& ctx, const Roi& roi) {
    const Transform m = compose(ctx.transform, roi_to_parent(roi));
    for (const Point2& c : roi_local_corners(roi)) {
        if (!contains(ctx.target, apply(m, c))) {
            throw Error(ErrorCode::RoiOutsideTarget, "mapped ROI leaves the target image");
        }
    }
}

LineExtraction extract_line(const ToolContext& ctx, const Roi& roi, const EdgeParams& params) {
    validate(params);
    check_roi_inside(ctx, roi);
    const Transform local_to_target = compose(ctx.transform, roi_to_parent(roi));
    const Transform target_to_source = invert(ctx.transform);
    const int n = static_cast<int>(std::floor(roi.width + 1e-9)) + 1;
    if (n < 3) throw Error(ErrorCode::InvalidParams, "line ROI must be at least 2 px wide");

    std::vector<double> profile(n), smooth(n), grad(n, 0.0);
    LineExtraction out;
    std::vector<Point2> source_pts;
    for (int j = 0; j < params.num_scanlines; ++j) {
        const double y = roi.height * (j + 0.5) / params.num_scanlines;
        for (int i = 0; i < n; ++i) profile[i] = sample_clamped(ctx.target, apply(local_to_target, {double(i), y}));
        if (params.smoothing == Smoothing::Binomial3) {
            smooth.front() = profile.front();
            smooth.back() = profile.back();
            for (int i = 1; i + 1 < n; ++i) smooth[i] = 0.25 * (profile[i - 1] + 2.0 * profile[i] + profile[i + 1]);
        } else {
            smooth = profile;
        }
        // Signed response: larger is better for the requested polarity.
        for (int i = 1; i + 1 < n; ++i) {
            const double g = 0.5 * (smooth[i + 1] - smooth[i - 1]);
            switch (params.polarity) {
                case Polarity::DarkToLight: grad[i] = g; break;
                case Polarity::LightToDark: grad[i] = -g; break;
                case Polarity::Any: grad[i] = std::abs(g); break;
            }
        }
        int peak = -1;
        double peak_value = params.min_contrast;
        for (int i = 1; i + 1 < n; ++i) {
            if (grad[i] >= peak_value && (peak < 0 || grad[i] > grad[peak])) {
                peak = i;
                peak_value = grad[i];
            }
        }
        if (peak < 0) continue;
        double offset = 0.0;
        if (peak >= 2 && peak + 2 < n) offset = parabola_offset(grad[peak - 1], grad[peak], grad[peak + 1]);
        const Point2 local{peak + offset, y};
        out.local_edges.push_back(local);
        source_pts.push_back(apply(target_to_source, apply(local_to_target, local)));
    }
    if (source_pts.size() < 2) {
        throw Error(ErrorCode::InsufficientEdgePoints,
                    "only " + std::to_string(source_pts.size()) + " scanline(s) found an edge");
    }

    // Total least squares: principal axis of the scatter matrix.
    Point2 c{0.0, 0.0};
    for (const Point2& p : source_pts) {
        c.x += p.x;
        c.y += p.y;
    }
    c.x /= static_cast<double>(source_pts.size());
    c.y /= static_cast<double>(source_pts.size());
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const Point2& p : source_pts) {
        const double dx = p.x - c.x, dy = p.y - c.y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx + syy <= 1e-18) throw Error(ErrorCode::DegenerateFit, "edge points coincide");
    const double phi = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    Point2 dir{std::cos(phi), std::sin(phi)};
    // Orient along the ROI's local +y axis expressed in the source frame.
    const double t = roi.theta_deg / kRadToDeg;
    if (dir.x * -std::sin(t) + dir.y * std::cos(t) < 0.0) dir = {-dir.x, -dir.y};
    const double norm = std::hypot(dir.x, dir.y);
    dir = {dir.x / norm, dir.y / norm};

    double ss = 0.0;
    for (const Point2& p : source_pts) {
        const double r = -(p.x - c.x) * dir.y + (p.y - c.y) * dir.x;
        ss += r * r;
    }
    out.line = LineModel{c, dir, static_cast<int>(source_pts.size()),
                         std::sqrt(ss / static_cast<double>(source_pts.size()))};
    return out;
}

double angle_between(const LineModel& a, const LineModel& b, AngleMode mode) {
    const double dot = a.dir.x * b.dir.x + a.dir.y * b.dir.y;
    if (mode == AngleMode::Undirected) {
        return std::acos(std::clamp(std::abs(dot), 0.0, 1.0)) * kRadToDeg;
    }
    const double cross = a.dir.x * b.dir.y - a.dir.y * b.dir.x;
    double deg = std::atan2(cross, dot) * kRadToDeg;
    deg = std::fmod(deg, 180.0);
    if (deg < 0.0) deg += 180.0;
    if (deg >= 180.0) deg -= 180.0;
    return deg;
}

Measurement measure_angle(std::string name, const LineModel& a, const LineModel& b, AngleMode mode) {
    return {std::move(name), MeasurementKind::AngleDeg, angle_between(a, b, mode)};
}

double point_line_distance(Point2 p, const LineModel& line) noexcept {
    return std::abs(-(p.x - line.point.x) * line.dir.y + (p.y - line.point.y) * line.dir.x);
}

Measurement measure_distance(std::string name, Point2 a, Point2 b) {
    return {std::move(name), MeasurementKind::DistancePx, distance(a, b)};
}

Measurement measure_distance(std::string name, const LineModel& a, Point2 b) {
    return {std::move(name), MeasurementKind::DistancePx, point_line_distance(b, a)};
}

IntensityStats measure_intensity(const ToolContext& ctx, const Roi& roi) {
    check_roi_inside(ctx, roi);
    const Transform m = compose(ctx.transform, roi_to_parent(roi));
    const int nx = grid_count(roi.width), ny = grid_count(roi.height);
    IntensityStats s;
    s.min = 1.0;
    s.max = 0.0;
    double sum = 0.0;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const double v = sample_clamped(ctx.target, apply(m, {double(i), double(j)}));
            sum += v;
            s.min = std::min(s.min, v);
            s.max = std::max(s.max, v);
        }
    }
    s.samples = nx * ny;
    s.mean = sum / s.samples;
    return s;
}

std::vector<int> label_components(const std::vector<std::uint8_t>& mask, int width, int height, int& count) {
    std::vector<int> labels(mask.size(), 0);
    UnionFind uf;
    uf.parent.push_back(0);
    auto at = [&](int x, int y) -> int& { return labels[static_cast<std::size_t>(y) * width + x]; };
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if (!mask[static_cast<std::size_t>(y) * width + x]) continue;
            // Already-visited 8-neighbors: W, NW, N, NE.
            int best = 0;
            const int nbr[4][2] = {{-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
            for (const auto& d : nbr) {
                const int nx = x + d[0], ny = y + d[1];
                if (nx < 0 || ny < 0 || nx >= width) continue;
                const int l = at(nx, ny);
                if (l == 0) continue;
                if (best == 0) {
                    best = l;
                } else {
                    uf.unite(best, l);
                }
            }
            if (best == 0) {
                best = static_cast<int>(uf.parent.size());
                uf.parent.push_back(best);
            }
            at(x, y) = best;
        }
    }
    // Compact labels in raster order of first occurrence.
    std::vector<int> remap(uf.parent.size(), 0);
    count = 0;
    for (auto& l : labels) {
        if (l == 0) continue;
        const int root = uf.find(l);
        if (remap[root] == 0) remap[root] = ++count;
        l = remap[root];
    }
    return labels;
}

namespace {

// Area of the part of the unit cell where the field, linearly interpolated
// along the cell edges, is inside. Corners in order (0,0), (1,0), (1,1), (0,1).
double cell_area(const std::array<double, 4>& g, const std::array<bool, 4>& in) {
    static constexpr std::array<Point2, 4> corner{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
    std::array<Point2, 8> poly;
    int n = 0;
    for (int a = 0; a < 4; ++a) {
        const int b = (a + 1) % 4;
        if (in[a]) poly[n++] = corner[a];
        if (in[a] != in[b]) {
            const double t = g[a] / (g[a] - g[b]);
            poly[n++] = {corner[a].x + t * (corner[b].x - corner[a].x), corner[a].y + t * (corner[b].y - corner[a].y)};
        }
    }
    double twice = 0.0;
    for (int k = 0; k < n; ++k) {
        const Point2& p = poly[k];
        const Point2& q = poly[(k + 1) % n];
        twice += p.x * q.y - q.x * p.y;
    }
    return 0.5 * std::abs(twice);
}

}  // namespace

std::vector<Blob> extract_blobs(const ToolContext& ctx, const Roi& roi, const BlobParams& params) {
    validate(params);
    check_roi_inside(ctx, roi);
    const Transform m = compose(ctx.transform, roi_to_parent(roi));
    const Transform to_parent = roi_to_parent(roi);
    const int nx = grid_count(roi.width), ny = grid_count(roi.height);
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(nx) * ny, 0);
    std::vector<Point2> mapped(mask.size());
    std::vector<double> level(mask.size());   // signed distance to the threshold, inside >= 0
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const std::size_t k = static_cast<std::size_t>(j) * nx + i;
            mapped[k] = apply(m, {double(i), double(j)});
            const double v = sample_clamped(ctx.target, mapped[k]);
            const bool bright = params.polarity == BlobPolarity::Bright;
            mask[k] = bright ? v >= params.threshold : v < params.threshold;
            level[k] = bright ? v - params.threshold : params.threshold - v;
        }
    }
    int count = 0;
    const auto labels = label_components(mask, nx, ny, count);

    struct Accum {
        long n = 0;
        double sx = 0.0, sy = 0.0;
        double area = 0.0;
        double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
        bool border = false;
    };
    std::vector<Accum> acc(count + 1);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const std::size_t k = static_cast<std::size_t>(j) * nx + i;
            if (labels[k] == 0) continue;
            Accum& a = acc[labels[k]];
            ++a.n;
            a.sx += i;
            a.sy += j;
            a.x0 = std::min(a.x0, mapped[k].x);
            a.y0 = std::min(a.y0, mapped[k].y);
            a.x1 = std::max(a.x1, mapped[k].x);
            a.y1 = std::max(a.y1, mapped[k].y);
            a.border = a.border || i == 0 || j == 0 || i == nx - 1 || j == ny - 1;
        }
    }
    // Subpixel area: grid cells between samples, each credited to the first labeled corner.
    for (int j = 0; j + 1 < ny; ++j) {
        for (int i = 0; i + 1 < nx; ++i) {
            const std::array<std::size_t, 4> k{static_cast<std::size_t>(j) * nx + i, static_cast<std::size_t>(j) * nx + i + 1,
                                               static_cast<std::size_t>(j + 1) * nx + i + 1,
                                               static_cast<std::size_t>(j + 1) * nx + i};
            int label = 0;
            for (std::size_t c : k) {
                if (labels[c] != 0) {
                    label = labels[c];
                    break;
                }
            }
            if (label == 0) continue;
            acc[label].area += cell_area({level[k[0]], level[k[1]], level[k[2]], level[k[3]]},
                                         {mask[k[0]] != 0, mask[k[1]] != 0, mask[k[2]] != 0, mask[k[3]] != 0});
        }
    }
    std::vector<Blob> blobs;
    for (int l = 1; l <= count; ++l) {
        const Accum& a = acc[l];
        if (params.exclude_border && a.border) continue;
        Blob b;
        b.area = a.area;
        b.local_centroid = {a.sx / a.n, a.sy / a.n};
        b.centroid = apply(to_parent, b.local_centroid);
        b.bbox = Roi{{a.x0, a.y0}, a.x1 - a.x0 + ctx.scale_hint, a.y1 - a.y0 + ctx.scale_hint, 0.0};
        b.touches_border = a.border;
        blobs.push_back(b);
    }
    std::stable_sort(blobs.begin(), blobs.end(), [](const Blob& a, const Blob& b) {
        if (a.area != b.area) return a.area > b.area;
        if (a.centroid.y != b.centroid.y) return a.centroid.y < b.centroid.y;
        return a.centroid.x < b.centroid.x;
    });
    return blobs;
}

}  // namespace registra
