/**
 * @file registration.cpp
 * @brief Pyramid NCC grid search for a source -> target similarity
 *
 * Coordinate bookkeeping: pyramid level L has factor f = 2^L; level pixel i
 * covers full-resolution pixels [f*i, f*i + f - 1], so its center sits at
 * full-resolution f*i + (f-1)/2. A template patch is a cols x rows grid of
 * level-pixel offsets q centered on the template center; at rotation theta
 * and scale s the source sample for offset q is c_s + R(-theta) (f q) / s.
 */
#include <registra/registration.hpp>
#include <registra/error.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

namespace registra {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr int kMinTemplateSide = 8;
constexpr int kMinCoarsePatchSide = 6;
constexpr int kCoarseCandidates = 3;
constexpr int kSuppressionRadius = 3;

using Patch = RegistrationModel::Patch;

double level_to_full(double level_coord, int f) { return f * level_coord + (f - 1) * 0.5; }
double full_to_level(double full_coord, int f) { return (full_coord - (f - 1) * 0.5) / f; }

int patch_extent(int template_side, double shrink, int f) {
    return static_cast<int>(std::floor(shrink * (template_side - 1) / f + 1e-9)) + 1;
}

// Patch extent whose samples fall on the level's pixel lattice when the
// template center allows it (center on a pixel -> odd, between pixels -> even).
int aligned_extent(int origin, int side, double shrink, int f) {
    int n = patch_extent(side, shrink, f);
    const double c = full_to_level(origin + (side - 1) * 0.5, f);
    const bool want_even = std::abs(c - std::floor(c) - 0.5) < 0.25;
    if (n > 1 && (n % 2 == 0) != want_even) --n;
    return n;
}

Point2 template_center(const PixelRect& r) {
    return {r.x + (r.width - 1) * 0.5, r.y + (r.height - 1) * 0.5};
}

// Samples the template of `source_level` (factor f) rotated by theta and scaled by s.
// Returns nullopt if the sampled patch has no variance.
std::optional<Patch> make_patch(const Image& source_level, int f, Point2 center, int cols, int rows,
                                double theta_deg, double scale, Point2 offset = {}) {
    Patch p;
    p.theta_deg = theta_deg;
    p.scale = scale;
    p.cols = cols;
    p.rows = rows;
    p.weights.resize(static_cast<std::size_t>(cols) * rows);
    const double c = std::cos(theta_deg * kDegToRad) / scale;
    const double s = std::sin(theta_deg * kDegToRad) / scale;
    const double max_x = source_level.width() - 1;
    const double max_y = source_level.height() - 1;
    std::vector<double> values(p.weights.size());
    double sum = 0.0;
    for (int j = 0; j < rows; ++j) {
        const double qy = f * (j - (rows - 1) * 0.5) - offset.y;
        for (int i = 0; i < cols; ++i) {
            const double qx = f * (i - (cols - 1) * 0.5) - offset.x;
            // R(-theta) q / s
            const double px = center.x + c * qx + s * qy;
            const double py = center.y - s * qx + c * qy;
            const Point2 lp{std::clamp(full_to_level(px, f), 0.0, max_x),
                            std::clamp(full_to_level(py, f), 0.0, max_y)};
            const double v = sample_bilinear_unchecked(source_level, lp);
            values[static_cast<std::size_t>(j) * cols + i] = v;
            sum += v;
        }
    }
    const double mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double& v : values) {
        v -= mean;
        ss += v * v;
    }
    if (ss <= 1e-12) return std::nullopt;
    const double inv = 1.0 / std::sqrt(ss);
    for (std::size_t k = 0; k < values.size(); ++k) p.weights[k] = static_cast<float>(values[k] * inv);
    return p;
}

std::vector<double> grid_values(double center, double half_range, double step, double lo, double hi) {
    std::vector<double> out;
    const int k = static_cast<int>(std::floor(half_range / step + 1e-9));
    for (int i = -k; i <= k; ++i) {
        const double v = center + i * step;
        if (v >= lo - 1e-12 && v <= hi + 1e-12) out.push_back(std::clamp(v, lo, hi));
    }
    if (out.empty()) out.push_back(std::clamp(center, lo, hi));
    return out;
}

// Direct NCC of a patch at integer position (u, v) of a target level image.
double score_at(const Patch& p, const Image& target, int u, int v) {
    double dot = 0.0, s1 = 0.0, s2 = 0.0;
    for (int j = 0; j < p.rows; ++j) {
        const float* trow = target.row(v + j) + u;
        const float* wrow = p.weights.data() + static_cast<std::size_t>(j) * p.cols;
        double rd = 0.0, r1 = 0.0, r2 = 0.0;
        for (int i = 0; i < p.cols; ++i) {
            const double t = trow[i];
            rd += wrow[i] * t;
            r1 += t;
            r2 += t * t;
        }
        dot += rd;
        s1 += r1;
        s2 += r2;
    }
    const double n = static_cast<double>(p.rows) * p.cols;
    const double var = s2 - s1 * s1 / n;
    if (var <= 1e-12) return 0.0;
    return std::clamp(dot / std::sqrt(var), -1.0, 1.0);
}

struct Candidate {
    int level = 0;
    int u = 0;
    int v = 0;
    double theta_deg = 0.0;
    double scale = 1.0;
    double score = -2.0;
    int cols = 0;
    int rows = 0;

    // Full-resolution target position of the patch center.
    [[nodiscard]] Point2 center_full() const {
        const int f = 1 << level;
        return {level_to_full(u + (cols - 1) * 0.5, f), level_to_full(v + (rows - 1) * 0.5, f)};
    }
};

double parabola_offset(double left, double mid, double right) {
    const double denom = left - 2.0 * mid + right;
    if (!(denom < 0.0)) return 0.0;
    return std::clamp(0.5 * (left - right) / denom, -0.5, 0.5);
}

}  // namespace

void validate(const SearchParams& p) {
    auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidSearchParams, why); };
    if (!(p.theta_range_deg >= 0.0) || p.theta_range_deg >= 180.0) fail("theta_range_deg must be in [0, 180)");
    if (!(p.theta_step_deg > 0.0) || !(p.theta_fine_step_deg > 0.0)) fail("theta steps must be > 0");
    if (p.theta_fine_step_deg > p.theta_step_deg) fail("theta_fine_step_deg must not exceed theta_step_deg");
    if (!(p.scale_min > 0.0) || !(p.scale_max >= p.scale_min)) fail("scale range must satisfy 0 < min <= max");
    if (!(p.scale_step > 0.0) || !(p.scale_fine_step > 0.0)) fail("scale steps must be > 0");
    if (p.scale_fine_step > p.scale_step) fail("scale_fine_step must not exceed scale_step");
    if (p.pyramid_levels < 1 || p.pyramid_levels > 8) fail("pyramid_levels must be in [1, 8]");
    if (!(p.min_score > 0.0 && p.min_score <= 1.0)) fail("min_score must be in (0, 1]");
}

double ncc(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw Error(ErrorCode::InvalidParams, "ncc needs equal-length inputs of at least 2 samples");
    }
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) throw Error(ErrorCode::ZeroVariance, "ncc input is constant");
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

struct RegistrationModel::Internals {
    static std::vector<double> theta_grid(const SearchParams& s) {
        return grid_values(0.0, s.theta_range_deg, s.theta_step_deg, -s.theta_range_deg, s.theta_range_deg);
    }

    static std::vector<double> scale_grid(const SearchParams& s) {
        std::vector<double> out;
        const int n = static_cast<int>(std::floor((s.scale_max - s.scale_min) / s.scale_step + 1e-9));
        for (int i = 0; i <= n; ++i) out.push_back(s.scale_min + i * s.scale_step);
        // Always include 1 so an undisturbed part sits on the grid.
        if (s.scale_min <= 1.0 && s.scale_max >= 1.0 &&
            std::none_of(out.begin(), out.end(), [](double v) { return std::abs(v - 1.0) < 1e-12; })) {
            out.push_back(1.0);
            std::sort(out.begin(), out.end());
        }
        return out;
    }

    static std::vector<Patch> grid_patches(const RegistrationModel& m, int level) {
        const int f = 1 << level;
        const int cols = aligned_extent(m.rect_.x, m.rect_.width, m.shrink_, f);
        const int rows = aligned_extent(m.rect_.y, m.rect_.height, m.shrink_, f);
        std::vector<Patch> out;
        for (double theta : theta_grid(m.search_)) {
            for (double scale : scale_grid(m.search_)) {
                if (auto p = make_patch(m.pyramid_[level], f, template_center(m.rect_), cols, rows, theta, scale)) {
                    out.push_back(std::move(*p));
                }
            }
        }
        return out;
    }

    static Candidate refine(const RegistrationModel& m, const Image& target_level, int level,
                            const Candidate& from, double theta_step, double theta_half,
                            double scale_step, double scale_half, int radius) {
        const SearchParams& sp = m.search_;
        const int f = 1 << level;
        const int cols = aligned_extent(m.rect_.x, m.rect_.width, m.shrink_, f);
        const int rows = aligned_extent(m.rect_.y, m.rect_.height, m.shrink_, f);
        const Point2 c = from.center_full();
        const int u0 = static_cast<int>(std::lround(full_to_level(c.x, f) - (cols - 1) * 0.5));
        const int v0 = static_cast<int>(std::lround(full_to_level(c.y, f) - (rows - 1) * 0.5));
        Candidate best;
        best.level = level;
        best.cols = cols;
        best.rows = rows;
        for (double theta : grid_values(from.theta_deg, theta_half, theta_step, -sp.theta_range_deg, sp.theta_range_deg)) {
            for (double scale : grid_values(from.scale, scale_half, scale_step, sp.scale_min, sp.scale_max)) {
                const auto patch = make_patch(m.pyramid_[level], f, template_center(m.rect_), cols, rows, theta, scale);
                if (!patch) continue;
                for (int v = v0 - radius; v <= v0 + radius; ++v) {
                    if (v < 0 || v + rows > target_level.height()) continue;
                    for (int u = u0 - radius; u <= u0 + radius; ++u) {
                        if (u < 0 || u + cols > target_level.width()) continue;
                        const double sc = score_at(*patch, target_level, u, v);
                        if (sc > best.score) {
                            best.u = u;
                            best.v = v;
                            best.theta_deg = theta;
                            best.scale = scale;
                            best.score = sc;
                        }
                    }
                }
            }
        }
        return best;
    }

    static std::vector<Candidate> coarse_search(const RegistrationModel& m, const Image& target_level, int level) {
        const std::vector<Patch> computed = level == m.levels_ - 1 ? std::vector<Patch>{} : grid_patches(m, level);
        const std::vector<Patch>& patches = computed.empty() ? m.coarse_patches_ : computed;
        if (patches.empty()) return {};
        const int cols = patches.front().cols;
        const int rows = patches.front().rows;
        const int tw = target_level.width();
        const int th = target_level.height();
        const int nu = tw - cols + 1;
        const int nv = th - rows + 1;

        // Window sums from integral images.
        std::vector<double> i1(static_cast<std::size_t>(tw + 1) * (th + 1), 0.0);
        std::vector<double> i2(i1.size(), 0.0);
        for (int y = 0; y < th; ++y) {
            const float* r = target_level.row(y);
            double a1 = 0.0, a2 = 0.0;
            for (int x = 0; x < tw; ++x) {
                a1 += r[x];
                a2 += static_cast<double>(r[x]) * r[x];
                const std::size_t k = static_cast<std::size_t>(y + 1) * (tw + 1) + x + 1;
                i1[k] = i1[k - (tw + 1)] + a1;
                i2[k] = i2[k - (tw + 1)] + a2;
            }
        }
        auto window = [&](const std::vector<double>& ii, int u, int v) {
            const auto at = [&](int x, int y) { return ii[static_cast<std::size_t>(y) * (tw + 1) + x]; };
            return at(u + cols, v + rows) - at(u, v + rows) - at(u + cols, v) + at(u, v);
        };
        const double n = static_cast<double>(cols) * rows;
        std::vector<double> inv_norm(static_cast<std::size_t>(nu) * nv, 0.0);
        for (int v = 0; v < nv; ++v) {
            for (int u = 0; u < nu; ++u) {
                const double s1 = window(i1, u, v);
                const double var = window(i2, u, v) - s1 * s1 / n;
                inv_norm[static_cast<std::size_t>(v) * nu + u] = var > 1e-12 ? 1.0 / std::sqrt(var) : 0.0;
            }
        }

        std::vector<double> best(inv_norm.size(), -2.0);
        std::vector<int> best_patch(inv_norm.size(), -1);
        std::vector<float> acc(static_cast<std::size_t>(nu));
        for (std::size_t pi = 0; pi < patches.size(); ++pi) {
            const Patch& p = patches[pi];
            for (int v = 0; v < nv; ++v) {
                std::fill(acc.begin(), acc.end(), 0.0f);
                for (int j = 0; j < rows; ++j) {
                    const float* trow = target_level.row(v + j);
                    const float* wrow = p.weights.data() + static_cast<std::size_t>(j) * cols;
                    for (int i = 0; i < cols; ++i) {
                        const float w = wrow[i];
                        const float* src = trow + i;
                        for (int u = 0; u < nu; ++u) acc[u] += w * src[u];
                    }
                }
                for (int u = 0; u < nu; ++u) {
                    const std::size_t k = static_cast<std::size_t>(v) * nu + u;
                    const double sc = acc[u] * inv_norm[k];
                    if (sc > best[k]) {
                        best[k] = sc;
                        best_patch[k] = static_cast<int>(pi);
                    }
                }
            }
        }

        // Top candidates with non-maximum suppression; ties go to the lower index.
        std::vector<std::size_t> order(best.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return best[a] > best[b]; });
        std::vector<Candidate> out;
        for (std::size_t k : order) {
            if (static_cast<int>(out.size()) == kCoarseCandidates || best_patch[k] < 0) break;
            const int u = static_cast<int>(k % nu);
            const int v = static_cast<int>(k / nu);
            const bool suppressed = std::any_of(out.begin(), out.end(), [&](const Candidate& c) {
                return std::abs(c.u - u) <= kSuppressionRadius && std::abs(c.v - v) <= kSuppressionRadius;
            });
            if (suppressed) continue;
            const Patch& p = patches[best_patch[k]];
            out.push_back(Candidate{level, u, v, p.theta_deg, p.scale, best[k], cols, rows});
        }
        return out;
    }
};

RegistrationModel RegistrationModel::build(const Image& source, const Roi& template_roi, const SearchParams& search) {
    validate(search);
    if (source.empty()) throw Error(ErrorCode::InvalidParams, "empty source image");
    if (template_roi.theta_deg != 0.0) {
        throw Error(ErrorCode::InvalidParams, "registration template must be axis-aligned (theta 0)");
    }
    const PixelRect rect{static_cast<int>(std::lround(template_roi.origin.x)),
                         static_cast<int>(std::lround(template_roi.origin.y)),
                         static_cast<int>(std::floor(template_roi.width + 1e-9)),
                         static_cast<int>(std::floor(template_roi.height + 1e-9))};
    if (rect.x < 0 || rect.y < 0 || rect.x + rect.width > source.width() ||
        rect.y + rect.height > source.height()) {
        throw Error(ErrorCode::TemplateOutOfBounds, "template region extends past the source image");
    }
    if (rect.width < kMinTemplateSide || rect.height < kMinTemplateSide) {
        throw Error(ErrorCode::TemplateTooSmall,
                    "template side must be at least " + std::to_string(kMinTemplateSide) + " px");
    }
    {
        const ImageView tv = view(source, rect);
        double s1 = 0.0, s2 = 0.0;
        for (int y = 0; y < tv.height(); ++y) {
            for (int x = 0; x < tv.width(); ++x) {
                const double v = tv.at(x, y);
                s1 += v;
                s2 += v * v;
            }
        }
        const double n = static_cast<double>(rect.width) * rect.height;
        if (s2 - s1 * s1 / n <= 1e-9) throw Error(ErrorCode::FlatTemplate, "template region has zero variance");
    }

    RegistrationModel m;
    m.template_roi_ = template_roi;
    m.rect_ = rect;
    m.search_ = search;

    // Largest patch whose rotated/scaled samples stay inside the template for every grid value.
    const double t = std::min(search.theta_range_deg, 90.0) * kDegToRad;
    const double c = std::cos(t), s = std::sin(t);
    const double hw = (rect.width - 1) * 0.5, hh = (rect.height - 1) * 0.5;
    m.shrink_ = search.scale_min * std::min(hw / (hw * c + hh * s), hh / (hw * s + hh * c));

    m.levels_ = 1;
    while (m.levels_ < search.pyramid_levels) {
        const int f = 1 << m.levels_;
        if (patch_extent(rect.width, m.shrink_, f) < kMinCoarsePatchSide ||
            patch_extent(rect.height, m.shrink_, f) < kMinCoarsePatchSide ||
            (source.width() >> m.levels_) < 2 || (source.height() >> m.levels_) < 2) {
            break;
        }
        ++m.levels_;
    }
    m.pyramid_.push_back(source);
    for (int l = 1; l < m.levels_; ++l) m.pyramid_.push_back(decimate2(m.pyramid_.back()));
    m.coarse_patches_ = Internals::grid_patches(m, m.levels_ - 1);
    if (m.coarse_patches_.empty()) {
        throw Error(ErrorCode::FlatTemplate, "template has no variance at the coarsest pyramid level");
    }
    return m;
}

RegistrationResult register_target(const RegistrationModel& model, const Image& target) {
    using I = RegistrationModel::Internals;
    const SearchParams& sp = model.search();
    const PixelRect rect = model.template_rect();
    if (target.empty()) throw Error(ErrorCode::DimensionMismatch, "empty target image");

    // Coarsest level at which the target still holds the template patch.
    int coarsest = model.levels_ - 1;
    auto fits = [&](int level) {
        const int f = 1 << level;
        return (target.width() >> level) >= patch_extent(rect.width, model.shrink_, f) &&
               (target.height() >> level) >= patch_extent(rect.height, model.shrink_, f);
    };
    while (coarsest > 0 && !fits(coarsest)) --coarsest;
    if (!fits(0) || target.width() < patch_extent(rect.width, model.shrink_, 1)) {
        throw Error(ErrorCode::DimensionMismatch, "target smaller than the registration template");
    }

    // Level 0 is the target itself; coarser levels are small decimated copies.
    std::vector<Image> levels{target};
    for (int l = 1; l <= coarsest; ++l) levels.push_back(decimate2(levels.back()));

    const std::vector<Candidate> seeds = I::coarse_search(model, levels[coarsest], coarsest);

    // Pass 1 re-scans the full theta/scale grid one level finer than the seeds;
    // later passes shrink the steps geometrically down to the fine steps.
    const int passes = std::max(coarsest, 1) + 1;
    const double theta_ratio = sp.theta_fine_step_deg / sp.theta_step_deg;
    const double scale_ratio = sp.scale_fine_step / sp.scale_step;

    Candidate best;
    for (const Candidate& seed : seeds) {
        Candidate c = seed;
        double theta_half = 2.0 * sp.theta_range_deg;
        double scale_half = sp.scale_max - sp.scale_min + sp.scale_step;
        for (int p = 1; p <= passes; ++p) {
            const int level = std::max(coarsest - p, 0);
            const double e = static_cast<double>(p - 1) / (passes - 1);
            const double ts = sp.theta_step_deg * std::pow(theta_ratio, e);
            const double ss = sp.scale_step * std::pow(scale_ratio, e);
            const int radius = level == c.level ? 1 : 2;
            c = I::refine(model, levels[level], level, c, ts, theta_half, ss, scale_half, radius);
            theta_half = 2.0 * ts;
            scale_half = 2.0 * ss;
        }
        if (c.score > best.score) best = c;
    }
    if (best.score < sp.min_score) {
        throw Error(ErrorCode::RegistrationFailed,
                    "best NCC score " + std::to_string(best.score) + " below min_score " +
                        std::to_string(sp.min_score));
    }

    // Subpixel translation from parabola fits through the peak and its neighbors.
    const int f0 = 1;
    const auto patch = make_patch(model.pyramid_.front(), f0, template_center(rect), best.cols, best.rows,
                                  best.theta_deg, best.scale);
    auto score_or_nan = [&](int u, int v) {
        if (u < 0 || v < 0 || u + best.cols > target.width() || v + best.rows > target.height()) {
            return std::numeric_limits<double>::quiet_NaN();
        }
        return score_at(*patch, target, u, v);
    };
    double dx = 0.0, dy = 0.0;
    {
        const double l = score_or_nan(best.u - 1, best.v), r = score_or_nan(best.u + 1, best.v);
        if (std::isfinite(l) && std::isfinite(r)) dx = parabola_offset(l, best.score, r);
        const double t = score_or_nan(best.u, best.v - 1), b = score_or_nan(best.u, best.v + 1);
        if (std::isfinite(t) && std::isfinite(b)) dy = parabola_offset(t, best.score, b);
    }

    // Sub-step rotation and scale from parabola fits over the finest grid neighbors,
    // with every variant sampled at the subpixel peak.
    const double ts = sp.theta_fine_step_deg, ss = sp.scale_fine_step;
    const Point2 offset{dx, dy};
    // Neighbors may sit just past the search range; they only shape the parabola.
    auto score_variant = [&](double theta, double scale) {
        const auto p = make_patch(model.pyramid_.front(), f0, template_center(rect), best.cols, best.rows, theta, scale, offset);
        return p ? score_at(*p, target, best.u, best.v) : std::numeric_limits<double>::quiet_NaN();
    };
    double theta = best.theta_deg, scale = best.scale;
    {
        const double c = score_variant(best.theta_deg, best.scale);
        const double l = score_variant(best.theta_deg - ts, best.scale);
        const double r = score_variant(best.theta_deg + ts, best.scale);
        if (std::isfinite(l) && std::isfinite(r) && std::isfinite(c)) theta += ts * parabola_offset(l, c, r);
        const double d = score_variant(best.theta_deg, best.scale - ss);
        const double u = score_variant(best.theta_deg, best.scale + ss);
        if (std::isfinite(d) && std::isfinite(u) && std::isfinite(c)) scale += ss * parabola_offset(d, c, u);
    }

    const Point2 cs = template_center(rect);
    const Point2 ct = best.center_full();
    const Transform rs = from_similarity(0.0, 0.0, best.theta_deg, best.scale);
    const Point2 rcs = apply(rs, cs);
    RegistrationResult out;
    out.grid_translation = {ct.x - rcs.x, ct.y - rcs.y};
    const Transform refined = from_similarity(0.0, 0.0, theta, scale);
    const Point2 rcs_refined = apply(refined, cs);
    out.transform = from_similarity(ct.x + dx - rcs_refined.x, ct.y + dy - rcs_refined.y, theta, scale);
    out.score = best.score;
    return out;
}

TranslationPeak register_translation_bruteforce(const RegistrationModel& model, const Image& target) {
    const PixelRect r = model.template_rect();
    if (target.width() < r.width || target.height() < r.height) {
        throw Error(ErrorCode::DimensionMismatch, "target smaller than the registration template");
    }
    std::vector<double> templ;
    templ.reserve(static_cast<std::size_t>(r.width) * r.height);
    for (int y = 0; y < r.height; ++y) {
        for (int x = 0; x < r.width; ++x) templ.push_back(model.source().at(r.x + x, r.y + y));
    }
    std::vector<double> window(templ.size());
    TranslationPeak best{0, 0, -2.0};
    for (int v = 0; v + r.height <= target.height(); ++v) {
        for (int u = 0; u + r.width <= target.width(); ++u) {
            std::size_t k = 0;
            for (int y = 0; y < r.height; ++y) {
                for (int x = 0; x < r.width; ++x) window[k++] = target.at(u + x, v + y);
            }
            double score = 0.0;
            try {
                score = ncc(templ, window);
            } catch (const Error&) {
                score = 0.0;
            }
            if (score > best.score) best = {u - r.x, v - r.y, score};
        }
    }
    if (best.score < model.search().min_score) {
        throw Error(ErrorCode::RegistrationFailed, "best NCC score below min_score");
    }
    return best;
}

}  // namespace registra
