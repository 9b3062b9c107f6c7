#include "poche/spatial.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>

namespace poche {

Vector2 project_point(const CameraPose& camera, const Vector3& p) {
  const Vector3 c = camera.to_camera(p);
  if (!(c.z() > 0.0)) {
    throw Error(ErrorCode::BehindCamera, "point is at or behind the camera plane");
  }
  return camera.principal_px + camera.focal_px * c.head<2>() / c.z();
}

Vector3 unproject(const CameraPose& camera, const Vector2& pixel, double depth) {
  const Vector2 xy = (pixel - camera.principal_px) * depth / camera.focal_px;
  return camera.rotation.transpose() * Vector3(xy.x(), xy.y(), depth) + camera.position;
}

AlignmentReport measure_alignment(const AlignmentAnnotation& annotation) {
  const double pixels = (annotation.reference_p1 - annotation.reference_p0).norm();
  if (!(pixels > 0.0)) {
    throw Error(ErrorCode::DegenerateReference, "reference segment has zero pixel length");
  }
  if (!(annotation.reference_length_m > 0.0) || !std::isfinite(annotation.reference_length_m)) {
    throw Error(ErrorCode::InvalidArgument, "reference length must be positive");
  }
  if (annotation.samples.empty()) {
    throw Error(ErrorCode::InvalidArgument, "annotation needs at least one sample");
  }
  AlignmentReport report;
  report.scale_mm_per_px = annotation.reference_length_m * 1000.0 / pixels;
  double sum = 0.0;
  for (const auto& s : annotation.samples) {
    const double e = (s.physical - s.model).norm() * report.scale_mm_per_px;
    report.errors_mm.push_back(e);
    sum += e;
    report.max_mm = std::max(report.max_mm, e);
  }
  report.mean_mm = sum / static_cast<double>(report.errors_mm.size());
  return report;
}

AlignmentSummary summarize_alignment(const std::vector<AlignmentAnnotation>& annotations) {
  if (annotations.empty()) {
    throw Error(ErrorCode::InvalidArgument, "no annotations");
  }
  AlignmentSummary summary;
  double pooled = 0.0;
  std::size_t count = 0;
  for (const auto& a : annotations) {
    summary.per_image.push_back(measure_alignment(a));
    const auto& r = summary.per_image.back();
    summary.mean_of_images_mm += r.mean_mm;
    summary.max_mm = std::max(summary.max_mm, r.max_mm);
    for (double e : r.errors_mm) {
      pooled += e;
      ++count;
    }
  }
  summary.mean_of_images_mm /= static_cast<double>(annotations.size());
  summary.pooled_mean_mm = pooled / static_cast<double>(count);
  return summary;
}

namespace {

Vector2 pixel(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw Error(ErrorCode::ParseError, std::string(what) + " must be a [x, y] pixel pair");
  }
  return Vector2(j[0].get<double>(), j[1].get<double>());
}

AlignmentAnnotation annotation_from(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("reference") || !j["reference"].is_object() || !j.contains("samples") ||
      !j["samples"].is_array()) {
    throw Error(ErrorCode::ParseError, "annotation needs 'reference' and 'samples'");
  }
  const auto& ref = j["reference"];
  AlignmentAnnotation a;
  if (j.contains("image") && j["image"].is_string()) {
    a.image = j["image"].get<std::string>();
  }
  a.reference_p0 = pixel(ref.value("p0", nlohmann::json()), "reference.p0");
  a.reference_p1 = pixel(ref.value("p1", nlohmann::json()), "reference.p1");
  if (!ref.contains("length_m") || !ref["length_m"].is_number()) {
    throw Error(ErrorCode::ParseError, "reference.length_m must be a number");
  }
  a.reference_length_m = ref["length_m"].get<double>();
  for (const auto& s : j["samples"]) {
    if (!s.is_object()) {
      throw Error(ErrorCode::ParseError, "sample must be an object");
    }
    a.samples.push_back({pixel(s.value("model", nlohmann::json()), "sample.model"),
                         pixel(s.value("physical", nlohmann::json()), "sample.physical")});
  }
  return a;
}

} // namespace

std::vector<AlignmentAnnotation> parse_annotations(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  std::vector<AlignmentAnnotation> out;
  if (doc.is_array()) {
    for (const auto& j : doc) {
      out.push_back(annotation_from(j));
    }
  } else {
    out.push_back(annotation_from(doc));
  }
  return out;
}

std::array<Vector3, 3> pivot_orientation(const CameraPose& camera) {
  const Matrix3& r = camera.rotation;
  if (!r.allFinite() || (r.transpose() * r - Matrix3::Identity()).cwiseAbs().maxCoeff() > 1e-9 ||
      r.determinant() <= 0.0) {
    throw Error(ErrorCode::InvalidPose, "camera rotation is not a proper orthonormal matrix");
  }
  return {r.col(0), r.col(1), r.col(2)};
}

} // namespace poche
