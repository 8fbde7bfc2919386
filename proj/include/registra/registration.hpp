/**
 * @file registration.hpp
 * @brief Source -> target similarity recovery by normalized cross-correlation
 *
 * The model stores the whole source image and a user-chosen axis-aligned
 * template region. register_target() runs an exhaustive NCC search over
 * translation x rotation x scale on the coarsest pyramid level, then refines
 * on each finer level in a small neighborhood. Rotated/scaled template
 * variants are sampled from the source; the target is only read at integer
 * pixel positions.
 */
#pragma once

#include <registra/geometry.hpp>
#include <registra/raster.hpp>

#include <span>
#include <vector>

namespace registra {

struct SearchParams {
    double theta_range_deg = 10.0;       ///< search theta in [-range, +range]
    double theta_step_deg = 1.0;         ///< coarse grid step
    double theta_fine_step_deg = 0.1;    ///< finest refinement step
    double scale_min = 0.9;
    double scale_max = 1.1;
    double scale_step = 0.02;
    double scale_fine_step = 0.005;
    int pyramid_levels = 3;              ///< 1 = full resolution only
    double min_score = 0.6;

    friend bool operator==(const SearchParams&, const SearchParams&) = default;
};

/// Throws Error(InvalidSearchParams) if any field violates its range.
void validate(const SearchParams& params);

struct RegistrationResult {
    Transform transform;          ///< source -> target
    double score = 0.0;           ///< NCC at the final grid peak
    Point2 grid_translation;      ///< translation of the grid peak before subpixel refinement
};

/// Normalized cross-correlation of two equally long sequences; Error(ZeroVariance) on constant input.
[[nodiscard]] double ncc(std::span<const double> a, std::span<const double> b);

class RegistrationModel;
[[nodiscard]] RegistrationResult register_target(const RegistrationModel& model, const Image& target);

class RegistrationModel {
public:
    /**
     * @brief Validate inputs and precompute the source pyramid and the coarse
     *        template variants
     *
     * Errors: TemplateOutOfBounds, TemplateTooSmall (side < 8 px), FlatTemplate,
     * InvalidParams (rotated template ROI), InvalidSearchParams.
     */
    static RegistrationModel build(const Image& source, const Roi& template_roi, const SearchParams& search);

    [[nodiscard]] const Image& source() const noexcept { return pyramid_.front(); }
    [[nodiscard]] const Roi& template_roi() const noexcept { return template_roi_; }
    [[nodiscard]] const SearchParams& search() const noexcept { return search_; }
    [[nodiscard]] PixelRect template_rect() const noexcept { return rect_; }

    struct Patch {
        double theta_deg = 0.0;
        double scale = 1.0;
        int cols = 0;
        int rows = 0;
        std::vector<float> weights;   ///< zero mean, unit norm
    };

    struct Internals;
    friend struct Internals;
    friend RegistrationResult register_target(const RegistrationModel&, const Image&);

private:
    RegistrationModel() = default;

    std::vector<Image> pyramid_;      ///< level 0 is the source itself
    Roi template_roi_;
    PixelRect rect_;
    SearchParams search_;
    int levels_ = 1;                  ///< effective pyramid depth
    double shrink_ = 1.0;             ///< patch half-size factor keeping samples inside the template
    std::vector<Patch> coarse_patches_;
};


/**
 * @brief Recover T such that template content at source p appears at T(p) in target
 *
 * Errors: DimensionMismatch (target smaller than the template patch),
 * RegistrationFailed (best score below min_score).
 */
[[nodiscard]] RegistrationResult register_target(const RegistrationModel& model, const Image& target);

struct TranslationPeak {
    int tx = 0;
    int ty = 0;
    double score = 0.0;
};

/**
 * @brief Reference search: full-resolution exhaustive integer-translation NCC
 *
 * Ties resolve to the smallest (ty, tx). Slow; used to check the pyramid search.
 */
[[nodiscard]] TranslationPeak register_translation_bruteforce(const RegistrationModel& model, const Image& target);

}  // namespace registra
