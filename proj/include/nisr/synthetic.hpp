#pragma once

#include <cstdint>
#include <string_view>

#include "nisr/evaluation.hpp"
#include "nisr/image.hpp"
#include "nisr/matching.hpp"

namespace nisr {

/// Procedural test scene: overlapping rectangles, ellipses and polygons with
/// random gray levels over a faint sinusoidal texture, lightly blurred.
GrayImage textured_scene(int rows, int cols, std::uint64_t seed);

/// A sensed image with a known mapping back to the reference frame.
struct PlantedPair {
  GrayImage sensed;
  MaskGrid valid;               // sensed pixels that come from inside the reference
  SimilarityTransform truth;    // p_ref = truth(p_sen)
  CheckpointSet checkpoints;
};

/// Sensed = reference scaled down by `scale` and rotated by `rotation_deg`
/// about the image centers; sensed dims are round(ref / scale). Shrinking is
/// preceded by an anti-aliasing blur. Uncovered pixels are zero.
PlantedPair plant_similarity(const GrayImage& ref, double scale, double rotation_deg);

/// Grid of reference points mapped through truth^-1; points landing outside
/// the sensed valid area (with `margin` pixels to spare) are dropped.
CheckpointSet grid_checkpoints(const SimilarityTransform& truth, int ref_rows, int ref_cols, const MaskGrid& sen_valid,
                               int grid = 5, int margin = 4);

/// Intensity remaps standing in for nonlinear radiometric differences.
enum class IntensityRemap { Gamma04, Gamma25, Invert, LocalContrast };

std::string_view to_string(IntensityRemap remap);
GrayImage apply_remap(const GrayImage& img, IntensityRemap remap);
GrayImage apply_gamma(const GrayImage& img, double gamma);

/// Remaps the sensed side of a pair; pixels outside the valid area stay zero.
PlantedPair remap_sensed(const PlantedPair& pair, IntensityRemap remap);

}  // namespace nisr
