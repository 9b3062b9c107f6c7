#pragma once

// Pinhole projection, height-referenced alignment error, pivot orientation.

#include "poche/model.hpp"

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace poche {

/// Pixel coordinates of `p`. Throws `BehindCamera` for depth <= 0.
Vector2 project_point(const CameraPose& camera, const Vector3& p);
/// World point at camera depth `depth` that projects to `pixel`.
Vector3 unproject(const CameraPose& camera, const Vector2& pixel, double depth);

struct AlignmentSample {
  Vector2 model;
  Vector2 physical;
};

/// A reference segment of known real length (typically a building height)
/// fixes the image scale; samples pair a model edge pixel with the physical
/// edge pixel it should coincide with.
struct AlignmentAnnotation {
  std::string image;
  Vector2 reference_p0 = Vector2::Zero();
  Vector2 reference_p1 = Vector2::Zero();
  double reference_length_m = 0.0;
  std::vector<AlignmentSample> samples;
};

struct AlignmentReport {
  std::vector<double> errors_mm;
  double mean_mm = 0.0;
  double max_mm = 0.0;
  double scale_mm_per_px = 0.0;
};

/// Throws `DegenerateReference` for a zero-length reference segment and
/// `InvalidArgument` for a non-positive true length or no samples.
AlignmentReport measure_alignment(const AlignmentAnnotation& annotation);

struct AlignmentSummary {
  std::vector<AlignmentReport> per_image;
  /// Mean of the per-image means.
  double mean_of_images_mm = 0.0;
  /// Mean over every sample of every image.
  double pooled_mean_mm = 0.0;
  double max_mm = 0.0;
};

AlignmentSummary summarize_alignment(const std::vector<AlignmentAnnotation>& annotations);

/// Accepts one annotation object or an array of them:
/// `{"reference": {"p0": [x, y], "p1": [x, y], "length_m": h},
///   "samples": [{"model": [x, y], "physical": [x, y]}, ...]}`.
/// Throws `ParseError`.
std::vector<AlignmentAnnotation> parse_annotations(std::string_view json_text);

/// World axes expressed in camera coordinates: R e_x, R e_y, R e_z.
/// Throws `InvalidPose` for a rotation that is not orthonormal.
std::array<Vector3, 3> pivot_orientation(const CameraPose& camera);

} // namespace poche
