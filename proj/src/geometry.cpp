#include <registra/geometry.hpp>
#include <registra/error.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace registra {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

constexpr Transform::Matrix kIdentity = {1, 0, 0, 0,  //
                                         0, 1, 0, 0,  //
                                         0, 0, 1, 0,  //
                                         0, 0, 0, 1};

// cos/sin that are exact on multiples of 90 degrees, so quarter turns map
// pixel grids onto pixel grids.
void cos_sin_deg(double deg, double& c, double& s) {
    const double q = deg / 90.0;
    if (q == std::floor(q) && std::abs(q) < 1e15) {
        const auto k = static_cast<long long>(q);
        switch (((k % 4) + 4) % 4) {
            case 0: c = 1; s = 0; return;
            case 1: c = 0; s = 1; return;
            case 2: c = -1; s = 0; return;
            default: c = 0; s = -1; return;
        }
    }
    c = std::cos(deg * kDegToRad);
    s = std::sin(deg * kDegToRad);
}

}  // namespace

Transform::Transform() noexcept : m_(kIdentity) {}

bool is_similarity(std::span<const double, 16> m, double tol) noexcept {
    for (double v : m) {
        if (!std::isfinite(v)) return false;
    }
    // Third row/column and bottom row as in the identity.
    for (int i = 0; i < 4; ++i) {
        const double row2 = (i == 2) ? 1.0 : 0.0;
        if (m[2 * 4 + i] != row2) return false;
        if (i != 2 && m[i * 4 + 2] != 0.0) return false;
    }
    if (m[12] != 0.0 || m[13] != 0.0 || m[14] != 0.0 || m[15] != 1.0) return false;
    const double a = m[0], b = m[1], c = m[4], d = m[5];
    const double mag = std::max({1.0, std::abs(a), std::abs(b)});
    if (std::abs(a - d) > tol * mag || std::abs(b + c) > tol * mag) return false;
    return a * a + c * c > 0.0;
}

Transform Transform::from_matrix(std::span<const double, 16> m) {
    if (!is_similarity(m)) {
        throw Error(ErrorCode::InvalidTransform, "matrix is not a planar similarity");
    }
    Matrix copy{};
    std::copy(m.begin(), m.end(), copy.begin());
    return Transform(copy);
}

Transform identity() noexcept { return Transform(); }

Transform from_similarity(double tx, double ty, double theta_deg, double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw Error(ErrorCode::NonPositiveScale, "scale must be > 0, got " + std::to_string(scale));
    }
    if (!std::isfinite(tx) || !std::isfinite(ty) || !std::isfinite(theta_deg)) {
        throw Error(ErrorCode::InvalidTransform, "non-finite similarity parameter");
    }
    double c = 1.0, s = 0.0;
    cos_sin_deg(theta_deg, c, s);
    Transform::Matrix m = kIdentity;
    m[0] = scale * c;
    m[1] = -scale * s;
    m[3] = tx;
    m[4] = scale * s;
    m[5] = scale * c;
    m[7] = ty;
    return Transform(m);
}

Transform compose(const Transform& a, const Transform& b) {
    Transform::Matrix r{};
    const auto& x = a.m_;
    const auto& y = b.m_;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            double acc = 0.0;
            for (int k = 0; k < 4; ++k) acc += x[i * 4 + k] * y[k * 4 + j];
            r[i * 4 + j] = acc;
        }
    }
    return Transform(r);
}

Transform invert(const Transform& t) {
    const auto& m = t.m_;
    // [sR | t]^-1 = [R^T/s | -R^T t / s]; R^T/s = [[a, c],[-c, a]] / (a^2 + c^2)
    const double a = m[0], c = m[4];
    const double s2 = a * a + c * c;
    const double ia = a / s2, ic = c / s2;
    Transform::Matrix r = kIdentity;
    r[0] = ia;
    r[1] = ic;
    r[4] = -ic;
    r[5] = ia;
    r[3] = -(ia * m[3] + ic * m[7]);
    r[7] = -(-ic * m[3] + ia * m[7]);
    return Transform(r);
}

Point2 apply(const Transform& t, Point2 p) noexcept {
    const auto& m = t.matrix();
    return {m[0] * p.x + m[1] * p.y + m[3], m[4] * p.x + m[5] * p.y + m[7]};
}

double normalize_degrees(double deg) noexcept {
    double r = std::fmod(deg + 180.0, 360.0);
    if (r < 0.0) r += 360.0;
    r -= 180.0;
    // fmod can land exactly on 180 after rounding.
    if (r >= 180.0) r -= 360.0;
    return r;
}

Similarity decompose(const Transform& t) noexcept {
    const auto& m = t.matrix();
    Similarity s;
    s.tx = m[3];
    s.ty = m[7];
    s.scale = std::hypot(m[0], m[4]);
    s.theta_deg = normalize_degrees(std::atan2(m[4], m[0]) * kRadToDeg);
    return s;
}

Roi make_roi(Point2 origin, double width, double height, double theta_deg) {
    if (!std::isfinite(origin.x) || !std::isfinite(origin.y) || !std::isfinite(theta_deg)) {
        throw Error(ErrorCode::InvalidParams, "roi fields must be finite");
    }
    if (!(width > 0.0) || !(height > 0.0) || !std::isfinite(width) || !std::isfinite(height)) {
        throw Error(ErrorCode::InvalidParams, "roi width and height must be > 0");
    }
    return Roi{origin, width, height, normalize_degrees(theta_deg)};
}

Transform roi_to_parent(const Roi& roi) {
    return from_similarity(roi.origin.x, roi.origin.y, roi.theta_deg, 1.0);
}

std::array<Point2, 4> roi_local_corners(const Roi& roi) noexcept {
    return {Point2{0.0, 0.0}, Point2{roi.width, 0.0}, Point2{roi.width, roi.height},
            Point2{0.0, roi.height}};
}

double distance(Point2 a, Point2 b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace registra
