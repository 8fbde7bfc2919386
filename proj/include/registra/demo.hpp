/**
 * @file demo.hpp
 * @brief Synthetic demo part, its recipe and derived targets
 *
 * The part: a plate with a vertical and a slanted edge (60 degrees apart), a
 * 40 px wide bar, a flat grey patch and a dark pad holding three bright blobs,
 * plus a textured logo region used as the registration template.
 */
#pragma once

#include <registra/inspection.hpp>
#include <registra/synth.hpp>

#include <filesystem>

namespace registra::demo {

[[nodiscard]] synth::Scene scene(bool defect = false);
[[nodiscard]] Image source_image();
/// Bar widened by 6 px: only the "width" measurement leaves its band.
[[nodiscard]] Image defect_image();
/// Pure texture with no part on it; registration rejects it.
[[nodiscard]] Image noise_image(std::uint64_t seed = 99);

[[nodiscard]] RecipeDocument recipe_document(const std::string& source_image = "source.png");
[[nodiscard]] Recipe recipe();

/// Random similarity about the image center within the recipe's search ranges.
[[nodiscard]] Transform random_warp(std::uint64_t seed);

/// Writes source.png, recipe.json, defect.png, noise.png and `warps` warped targets.
void write(const std::filesystem::path& dir, int warps = 0);

}  // namespace registra::demo
