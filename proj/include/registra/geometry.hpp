/**
 * @file geometry.hpp
 * @brief Planar similarity transforms stored as 4x4 homogeneous matrices,
 *        points, and rotated rectangular ROIs with local coordinate frames
 *
 * Conventions:
 * - Image coordinates: origin top-left, x right, y down, units of pixels.
 * - Angles in degrees; positive theta rotates the x-axis toward the y-axis.
 * - compose(A, B) applies B first, then A.
 */
#pragma once

#include <array>
#include <span>

namespace registra {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

/// Similarity parameters: p' = scale * R(theta) * p + (tx, ty).
struct Similarity {
    double tx = 0.0;
    double ty = 0.0;
    double theta_deg = 0.0;
    double scale = 1.0;
};

/**
 * @brief 4x4 row-major homogeneous matrix restricted to planar similarities
 *
 * The third row and column equal the identity's, the bottom row is (0,0,0,1)
 * and the upper-left 2x2 block is s*R(theta) with s > 0. Every instance
 * satisfies these invariants; the only way to build one from raw numbers is
 * from_matrix(), which checks them.
 */
class Transform {
public:
    using Matrix = std::array<double, 16>;

    /// Identity.
    Transform() noexcept;

    /// Throws Error(InvalidTransform) if the matrix is not a planar similarity.
    static Transform from_matrix(std::span<const double, 16> m);

    [[nodiscard]] double operator()(int row, int col) const noexcept { return m_[row * 4 + col]; }
    [[nodiscard]] const Matrix& matrix() const noexcept { return m_; }

    friend bool operator==(const Transform&, const Transform&) = default;

private:
    explicit Transform(const Matrix& m) noexcept : m_(m) {}

    friend Transform from_similarity(double, double, double, double);
    friend Transform compose(const Transform&, const Transform&);
    friend Transform invert(const Transform&);

    Matrix m_;
};

/// True if m is a planar similarity within tol (used by from_matrix and tests).
[[nodiscard]] bool is_similarity(std::span<const double, 16> m, double tol = 1e-9) noexcept;

[[nodiscard]] Transform identity() noexcept;

/// Throws Error(NonPositiveScale) if scale <= 0 or not finite.
[[nodiscard]] Transform from_similarity(double tx, double ty, double theta_deg, double scale = 1.0);
[[nodiscard]] inline Transform from_similarity(const Similarity& s) {
    return from_similarity(s.tx, s.ty, s.theta_deg, s.scale);
}

/// A*B: apply b first, then a.
[[nodiscard]] Transform compose(const Transform& a, const Transform& b);

/// Analytic similarity inverse (s -> 1/s, theta -> -theta, t -> -R(-theta) t / s).
[[nodiscard]] Transform invert(const Transform& t);

[[nodiscard]] Point2 apply(const Transform& t, Point2 p) noexcept;

/// theta_deg in [-180, 180), scale > 0.
[[nodiscard]] Similarity decompose(const Transform& t) noexcept;

/// Maps [-inf, inf) onto [-180, 180).
[[nodiscard]] double normalize_degrees(double deg) noexcept;

/**
 * @brief Rotated rectangle with its own coordinate frame
 *
 * Local (0,0) sits at origin in the parent frame, local x runs along width
 * rotated by theta_deg. Use make_roi() to get a validated, normalized value.
 */
struct Roi {
    Point2 origin;
    double width = 1.0;
    double height = 1.0;
    double theta_deg = 0.0;

    friend bool operator==(const Roi&, const Roi&) = default;
};

/// Throws Error(InvalidParams) unless width, height > 0 and all fields finite.
[[nodiscard]] Roi make_roi(Point2 origin, double width, double height, double theta_deg = 0.0);

/// Local -> parent: from_similarity(origin.x, origin.y, theta, 1).
[[nodiscard]] Transform roi_to_parent(const Roi& roi);

/// Corners in local coordinates, in order (0,0), (w,0), (w,h), (0,h).
[[nodiscard]] std::array<Point2, 4> roi_local_corners(const Roi& roi) noexcept;

[[nodiscard]] double distance(Point2 a, Point2 b) noexcept;

}  // namespace registra
