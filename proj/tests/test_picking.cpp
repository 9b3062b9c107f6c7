#include "support.hpp"

#include "poche/ingest.hpp"
#include "poche/picking.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace poche;
using namespace poche::testing;

namespace {

BuildingModel two_cubes() { return load_geometry(data_dir() / "two_cubes.obj"); }

BuildingModel random_scene(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::uniform_real_distribution<double> s(0.3, 0.9);
  std::vector<Element> es;
  const int n = 1 + static_cast<int>(rng() % 4);
  for (int i = 0; i < n; ++i) {
    es.push_back(element("body-" + std::to_string(i),
                         polytope_mesh(polytope(random_convex(rng, Vector3(u(rng), u(rng), u(rng)), s(rng))))));
  }
  return BuildingModel(std::move(es));
}

Ray random_ray(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> target(-1.5, 1.5);
  const Vector3 origin = 5.0 * random_unit(rng);
  const Vector3 at(target(rng), target(rng), target(rng));
  return Ray{origin, (at - origin).normalized()};
}

struct OracleHit {
  double t;
  std::string id;
};

// Every triangle, scanned with the support Moller-Trumbore; one hit per
// element and distance.
std::vector<OracleHit> brute_hits(const std::vector<std::pair<std::string, std::vector<std::array<Vector3, 3>>>>& tris,
                                  const Ray& ray) {
  std::vector<OracleHit> out;
  for (const auto& [id, list] : tris) {
    std::vector<double> ts;
    for (const auto& t : list) {
      if (auto hit = brute_intersect(ray.origin, ray.direction, t[0], t[1], t[2])) {
        ts.push_back(*hit);
      }
    }
    std::sort(ts.begin(), ts.end());
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (i == 0 || ts[i] - ts[i - 1] >= kHitTieEpsilon) {
        out.push_back({ts[i], id});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const OracleHit& a, const OracleHit& b) { return a.t < b.t; });
  return out;
}

std::vector<std::pair<std::string, std::vector<std::array<Vector3, 3>>>> model_triangles(const BuildingModel& m) {
  std::vector<std::pair<std::string, std::vector<std::array<Vector3, 3>>>> out;
  for (const auto& e : m.elements()) {
    std::vector<std::array<Vector3, 3>> list;
    for (const auto& em : e.meshes) {
      for (const auto& t : em.mesh.triangles) {
        list.push_back({em.mesh.vertices[t[0]], em.mesh.vertices[t[1]], em.mesh.vertices[t[2]]});
      }
    }
    out.emplace_back(e.element_id, std::move(list));
  }
  return out;
}

void expect_same_sequence(const std::vector<RayHit>& got, const std::vector<OracleHit>& want, int trial) {
  ASSERT_EQ(got.size(), want.size()) << "ray " << trial;
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_NEAR(got[i].distance, want[i].t, 1e-9) << "ray " << trial;
    const bool tie = (i > 0 && want[i].t - want[i - 1].t < 1e-6) ||
                     (i + 1 < want.size() && want[i + 1].t - want[i].t < 1e-6);
    if (!tie) {
      EXPECT_EQ(got[i].element_id, want[i].id) << "ray " << trial;
    }
    if (i > 0) {
      EXPECT_GE(got[i].distance, got[i - 1].distance);
    }
    EXPECT_NEAR(got[i].normal.norm(), 1.0, 1e-12);
  }
}

double angle_deg(const Vector3& a, const Vector3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b)) * 180.0 / std::numbers::pi;
}

RayHit make_hit(std::string id, double d, HitSource src, const Vector3& point, const Vector3& normal, int layer = 0) {
  RayHit h;
  h.element_id = std::move(id);
  h.distance = d;
  h.source = src;
  h.point = point;
  h.normal = normal;
  h.layer_index = layer;
  return h;
}

} // namespace

TEST(CastRay, TwoCubesGiveFourHits) {
  const auto hits = cast_ray(two_cubes(), Ray{Vector3(-1, 0.5, 0.5), Vector3::UnitX()});
  ASSERT_EQ(hits.size(), 4u);
  const double expect[] = {1, 2, 4, 5};
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(hits[i].distance, expect[i], 1e-12);
    EXPECT_EQ(hits[i].source, HitSource::Surface);
  }
  EXPECT_EQ(hits[0].element_id, "cube-a");
  EXPECT_EQ(hits[2].element_id, "cube-b");
  EXPECT_NEAR((hits[0].normal + Vector3::UnitX()).norm(), 0.0, 1e-12);
  EXPECT_NEAR((hits[1].point - Vector3(1, 0.5, 0.5)).norm(), 0.0, 1e-12);
}

TEST(CastRay, MissIsEmpty) {
  EXPECT_TRUE(cast_ray(two_cubes(), Ray{Vector3(-1, 5, 0.5), Vector3::UnitX()}).empty());
  EXPECT_TRUE(cast_ray(two_cubes(), Ray{Vector3(-1, 0.5, 0.5), -Vector3::UnitX()}).empty());
}

TEST(CastRay, NonUnitDirectionRejected) {
  try {
    cast_ray(two_cubes(), Ray{Vector3::Zero(), Vector3(2, 0, 0)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

TEST(CastRay, SharedEdgeReportedOnce) {
  // Through the diagonal of the -X face, which splits it into two triangles.
  const Vector3 o(-1, 0.25, 0.25);
  const auto hits = cast_ray(unit_cube_model(), Ray{o, Vector3::UnitX()});
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_NEAR(hits[0].distance, 1.0, 1e-12);
  EXPECT_NEAR(hits[1].distance, 2.0, 1e-12);
}

TEST(CastRay, RandomRaysMatchBruteForce) {
  std::mt19937_64 rng(101);
  int hits_seen = 0;
  for (int scene = 0; scene < 10; ++scene) {
    const BuildingModel m = random_scene(rng);
    const auto tris = model_triangles(m);
    for (int i = 0; i < 100; ++i) {
      const Ray ray = random_ray(rng);
      const auto got = cast_ray(m, ray);
      expect_same_sequence(got, brute_hits(tris, ray), scene * 100 + i);
      hits_seen += static_cast<int>(got.size());
    }
  }
  EXPECT_GT(hits_seen, 500);
}

TEST(CastRay, SectionHitsKeptAndCapsOnly) {
  std::mt19937_64 rng(103);
  for (int scene = 0; scene < 10; ++scene) {
    const BuildingModel m = random_scene(rng);
    const Box3 b = aabb(m);
    const SectionBox box = set_plane(SectionBox::around(b), Axis::X, Sign::Pos, b.center().x(), true);
    const SectionResult r = clip_model(m, box);
    std::map<std::string, std::vector<std::array<Vector3, 3>>> by_id;
    for (const auto& p : r.parts) {
      auto& list = by_id[p.element_id];
      for (const auto& t : p.kept) {
        list.push_back({p.vertices[t[0]], p.vertices[t[1]], p.vertices[t[2]]});
      }
      for (const auto& c : p.caps) {
        for (const auto& t : c.triangles) {
          list.push_back({p.vertices[t[0]], p.vertices[t[1]], p.vertices[t[2]]});
        }
      }
    }
    const std::vector<std::pair<std::string, std::vector<std::array<Vector3, 3>>>> tris(by_id.begin(), by_id.end());
    for (int i = 0; i < 100; ++i) {
      const Ray ray = random_ray(rng);
      const auto got = cast_ray(r, ray);
      expect_same_sequence(got, brute_hits(tris, ray), scene * 100 + i);
      for (const auto& h : got) {
        EXPECT_TRUE(kept_side(box, h.point - 1e-9 * box.plane(Axis::X, Sign::Pos).normal()));
        if (h.source == HitSource::Cap) {
          ASSERT_TRUE(h.plane);
          EXPECT_NEAR(h.point.x(), b.center().x(), 1e-9);
        }
      }
    }
  }
}

TEST(CastRay, HalfCubeCapHitFromDiscardedSide) {
  const BuildingModel m = unit_cube_model();
  const SectionBox box = set_plane(SectionBox::around(aabb(m)), Axis::X, Sign::Pos, 0.5, true);
  const auto hits = cast_ray(clip_model(m, box), Ray{Vector3(-1, 0.3, 0.6), Vector3::UnitX()});
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0].source, HitSource::Cap);
  EXPECT_NEAR(hits[0].distance, 1.5, 1e-12);
  EXPECT_NEAR((hits[0].normal + Vector3::UnitX()).norm(), 0.0, 1e-12);
  EXPECT_TRUE(is_poche_hit(hits[0], box.plane(Axis::X, Sign::Pos)));
}

TEST(ResolvePick, PocheBeatsNearerSurface) {
  const SectionPlane plane = set_plane(SectionBox{}, Axis::X, Sign::Pos, 2.5, true).plane(Axis::X, Sign::Pos);
  const std::vector<RayHit> hits = {
      make_hit("glass", 1.0, HitSource::Surface, Vector3(2.0, 0, 0), Vector3::UnitX()),
      make_hit("wall-7", 1.5, HitSource::Cap, Vector3(2.5, 0, 0), plane.normal(), 1),
  };
  const PickResult with = resolve_pick(hits, plane);
  EXPECT_TRUE(with.is_poche);
  EXPECT_EQ(with.element_id, "wall-7");
  EXPECT_EQ(with.layer_index, 1);
  const PickResult without = resolve_pick(hits, std::nullopt);
  EXPECT_FALSE(without.is_poche);
  EXPECT_EQ(without.element_id, "glass");
  EXPECT_NEAR(without.hit->distance, 1.0, 0);
}

TEST(ResolvePick, EmptyHitsGiveNoPick) {
  const PickResult p = resolve_pick({}, std::nullopt);
  EXPECT_FALSE(p.hit);
  EXPECT_FALSE(p.is_poche);
}

TEST(ResolvePick, ToleranceEdges) {
  const SectionPlane plane = set_plane(SectionBox{}, Axis::Z, Sign::Neg, 1.0, true).plane(Axis::Z, Sign::Neg);
  const Vector3 n = plane.normal();
  EXPECT_TRUE(is_poche_hit(make_hit("a", 1, HitSource::Cap, Vector3(0, 0, 1.00009), n), plane));
  EXPECT_FALSE(is_poche_hit(make_hit("a", 1, HitSource::Cap, Vector3(0, 0, 1.00011), n), plane));
  EXPECT_FALSE(is_poche_hit(make_hit("a", 1, HitSource::Surface, Vector3(0, 0, 1), n), plane));
  EXPECT_FALSE(is_poche_hit(make_hit("a", 1, HitSource::Cap, Vector3(0, 0, 1), -n), plane));
  const double tilt = 0.99 * std::numbers::pi / 180.0;
  EXPECT_TRUE(is_poche_hit(make_hit("a", 1, HitSource::Cap, Vector3(0, 0, 1), Vector3(std::sin(tilt), 0, std::cos(tilt))), plane));
  const double over = 1.01 * std::numbers::pi / 180.0;
  EXPECT_FALSE(is_poche_hit(make_hit("a", 1, HitSource::Cap, Vector3(0, 0, 1), Vector3(std::sin(over), 0, std::cos(over))), plane));
}

TEST(ResolvePick, RandomHitListsMatchFilterOracle) {
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> u(0, 1);
  int poche = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Axis axis = static_cast<Axis>(rng() % 3);
    const Sign sign = static_cast<Sign>(rng() % 2);
    const double off = 4 * u(rng) - 2;
    const SectionPlane plane = set_plane(SectionBox{}, axis, sign, off, true).plane(axis, sign);
    std::vector<RayHit> hits;
    double d = 0;
    const int n = static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      d += 0.05 + u(rng);
      Vector3 p = 4 * Vector3(u(rng), u(rng), u(rng)) - 2 * Vector3::Ones();
      Vector3 normal = random_unit(rng);
      const HitSource src = (rng() % 2) ? HitSource::Cap : HitSource::Surface;
      if (rng() % 2) {
        // Near the plane, with normal tilted by up to 2 degrees.
        p[index_of(axis)] = off + (u(rng) - 0.5) * 4e-4;
        const double tilt = u(rng) * 2.0 * std::numbers::pi / 180.0;
        const Vector3 side = plane.normal().unitOrthogonal();
        normal = std::cos(tilt) * plane.normal() + std::sin(tilt) * side;
      }
      hits.push_back(make_hit("e" + std::to_string(rng() % 3), d, src, p, normal, static_cast<int>(rng() % 2)));
    }
    const bool toggle = rng() % 4 != 0;
    const PickResult got = resolve_pick(hits, toggle ? std::optional<SectionPlane>(plane) : std::nullopt);

    const RayHit* expect = hits.empty() ? nullptr : &hits.front();
    bool expect_poche = false;
    if (toggle) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& h : hits) {
        const bool ok = h.source == HitSource::Cap && std::abs(h.point[index_of(axis)] - off) <= 1e-4 &&
                        angle_deg(h.normal, plane.normal()) <= 1.0;
        if (ok && h.distance < best) {
          best = h.distance;
          expect = &h;
          expect_poche = true;
        }
      }
    }
    if (expect == nullptr) {
      EXPECT_FALSE(got.hit);
      continue;
    }
    ASSERT_TRUE(got.hit) << trial;
    EXPECT_EQ(got.hit->distance, expect->distance) << trial;
    EXPECT_EQ(got.element_id, expect->element_id);
    EXPECT_EQ(got.layer_index, expect->layer_index);
    EXPECT_EQ(got.is_poche, expect_poche);
    if (got.is_poche) {
      ++poche;
      EXPECT_EQ(got.hit->source, HitSource::Cap);
    }
  }
  EXPECT_GT(poche, 10);
}

TEST(HighlightFor, InspectCoversAllDoorTriangles) {
  const BuildingModel m = load_geometry(data_dir() / "wall.obj");
  const SectionBox box = SectionBox::around(aabb(m));
  const auto hits = cast_ray(m, Ray{Vector3(1.5, -5, 1), Vector3::UnitY()});
  const PickResult pick = resolve_pick(hits, std::nullopt);
  ASSERT_EQ(pick.element_id, "door-1");
  const HighlightSpec h = highlight_for(pick, m, box, ViewMode::Inspect);
  EXPECT_EQ(h.style, HighlightStyle::RedWire);
  EXPECT_EQ(h.element_id, "door-1");
  EXPECT_EQ(h.triangles.size(), m.find("door-1")->meshes[0].mesh.size());
  EXPECT_EQ(h.triangles.size(), 12u);
}

TEST(HighlightFor, SectionLayerPickMatchesKeptSideFilter) {
  const BuildingModel m = load_geometry(data_dir() / "wall.obj");
  const SectionBox box = set_plane(SectionBox::around(aabb(m)), Axis::X, Sign::Pos, 1.3, true);
  const SectionResult r = clip_model(m, box);
  // Into the concrete core's cap from the discarded side.
  const auto hits = cast_ray(r, Ray{Vector3(-1, 0.12, 1.7), Vector3::UnitX()});
  const PickResult pick = resolve_pick(hits, box.plane(Axis::X, Sign::Pos));
  ASSERT_TRUE(pick.is_poche);
  ASSERT_EQ(pick.element_id, "wall-7");
  ASSERT_EQ(pick.layer_index, 1);
  const HighlightSpec h = highlight_for(pick, m, box, ViewMode::Section);
  EXPECT_EQ(h.style, HighlightStyle::RedSolid);
  EXPECT_EQ(h.layer_index, 1);

  // Every highlighted corner is on the kept side and inside layer 1's slab,
  // and the highlighted area equals layer 1's area beyond the plane.
  const auto& layer = m.find("wall-7")->meshes[1];
  ASSERT_EQ(layer.layer.layer_index, 1);
  double area = 0;
  for (const auto& t : h.triangles) {
    for (const auto& v : t) {
      EXPECT_TRUE(kept_side(box, v)) << v.transpose();
      EXPECT_GE(v.y(), 0.02 - 1e-12);
      EXPECT_LE(v.y(), 0.22 + 1e-12);
    }
    area += triangle_area<double>(t[0], t[1], t[2]);
  }
  // Straddling faces are the long +-Y and +-Z faces; their kept share is the
  // fraction (4 - 1.3) / 4 of their area.
  double straddle = 0;
  for (const auto& t : layer.mesh.triangles) {
    const Vector3 a = layer.mesh.vertices[t[0]];
    const Vector3 b = layer.mesh.vertices[t[1]];
    const Vector3 c = layer.mesh.vertices[t[2]];
    if (std::min({a.x(), b.x(), c.x()}) < 1.3 && std::max({a.x(), b.x(), c.x()}) > 1.3) {
      straddle += triangle_area<double>(a, b, c);
    }
  }
  double kept_only = 0;
  for (const auto& t : layer.mesh.triangles) {
    const Vector3 a = layer.mesh.vertices[t[0]];
    const Vector3 b = layer.mesh.vertices[t[1]];
    const Vector3 c = layer.mesh.vertices[t[2]];
    if (std::min({a.x(), b.x(), c.x()}) >= 1.3) {
      kept_only += triangle_area<double>(a, b, c);
    }
  }
  EXPECT_NEAR(area, kept_only + straddle * (4.0 - 1.3) / 4.0, 1e-9);
}

TEST(HighlightFor, AbsentPickIsEmpty) {
  const BuildingModel m = unit_cube_model();
  const HighlightSpec h = highlight_for(PickResult{}, m, SectionBox::around(aabb(m)), ViewMode::Section);
  EXPECT_EQ(h.style, HighlightStyle::None);
  EXPECT_TRUE(h.triangles.empty());
}

TEST(HighlightFor, UnknownElementThrows) {
  const BuildingModel m = unit_cube_model();
  PickResult p;
  p.hit = RayHit{};
  p.element_id = "ghost";
  try {
    highlight_for(p, m, SectionBox::around(aabb(m)), ViewMode::Inspect);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownElement);
  }
}
