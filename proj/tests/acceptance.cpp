// Acceptance suite: one PASS/FAIL line per criterion, exit 1 on any FAIL.

#include "support.hpp"

#include "poche/ingest.hpp"
#include "poche/metastore.hpp"
#include "poche/picking.hpp"
#include "poche/section.hpp"
#include "poche/service.hpp"
#include "poche/spatial.hpp"
#include "poche/study.hpp"
#include "poche/wire.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <regex>
#include <set>
#include <sstream>

using namespace poche;
using namespace poche::testing;
using nlohmann::json;

namespace {

// Collects failures for one criterion; the first few are kept for the report.
class Check {
public:
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      ++failures_;
      if (notes_.size() < 3) {
        notes_.push_back(what);
      }
    }
  }
  void note(const std::string& s) { info_.push_back(s); }
  bool ok() const { return failures_ == 0; }
  std::string detail() const {
    std::string out;
    for (const auto& s : ok() ? info_ : notes_) {
      out += (out.empty() ? "" : "; ") + s;
    }
    if (failures_ > static_cast<int>(notes_.size())) {
      out += "; " + std::to_string(failures_) + " failures total";
    }
    return out;
  }

private:
  int failures_ = 0;
  std::vector<std::string> notes_;
  std::vector<std::string> info_;
};

std::string num(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// --- statistics oracles ------------------------------------------------------

double choose(int n, int k) {
  long long c = 1;
  for (int i = 1; i <= k; ++i) {
    c = c * (n - k + i) / i;
  }
  return static_cast<double>(c);
}

double enumerated_wilcoxon_p(const std::vector<double>& pre, const std::vector<double>& post) {
  std::vector<double> mag;
  std::vector<bool> positive;
  for (std::size_t i = 0; i < pre.size(); ++i) {
    const double d = post[i] - pre[i];
    if (d != 0) {
      mag.push_back(std::abs(d));
      positive.push_back(d > 0);
    }
  }
  const std::size_t n = mag.size();
  std::vector<double> rank(n);
  double total = 0;
  double w_plus = 0;
  for (std::size_t i = 0; i < n; ++i) {
    int less = 0;
    int equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      less += mag[j] < mag[i];
      equal += mag[j] == mag[i];
    }
    rank[i] = less + (equal + 1) / 2.0;
    total += rank[i];
    w_plus += positive[i] ? rank[i] : 0;
  }
  const double w = std::min(w_plus, total - w_plus);
  double count = 0;
  for (unsigned long mask = 0; mask < (1ul << n); ++mask) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1ul << i)) {
        s += rank[i];
      }
    }
    count += s <= w + 1e-9;
  }
  return std::min(1.0, 2.0 * count / static_cast<double>(1ul << n));
}

// --- geometry fixtures -------------------------------------------------------

BuildingModel random_scene(std::mt19937_64& rng, int max_bodies) {
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::uniform_real_distribution<double> s(0.3, 0.9);
  std::vector<Element> es;
  const int n = 1 + static_cast<int>(rng() % max_bodies);
  for (int i = 0; i < n; ++i) {
    es.push_back(element("body-" + std::to_string(i),
                         polytope_mesh(polytope(random_convex(rng, Vector3(u(rng), u(rng), u(rng)), s(rng))))));
  }
  return BuildingModel(std::move(es));
}

SectionBox random_box(std::mt19937_64& rng, const Box3& bounds) {
  SectionBox box = SectionBox::around(bounds);
  std::uniform_real_distribution<double> t(0.0, 1.0);
  const int mask = 1 + static_cast<int>(rng() % 63);
  for (int slot = 0; slot < 6; ++slot) {
    if (mask & (1 << slot)) {
      const Axis a = static_cast<Axis>(slot / 2);
      const int k = index_of(a);
      box = set_plane(box, a, static_cast<Sign>(slot % 2), bounds.min()[k] + t(rng) * bounds.sizes()[k], true);
    }
  }
  return box;
}

Ray random_ray(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> target(-1.5, 1.5);
  const Vector3 origin = 5.0 * random_unit(rng);
  return Ray{origin, (Vector3(target(rng), target(rng), target(rng)) - origin).normalized()};
}

struct OracleHit {
  double t;
  std::string id;
};

// Every triangle through the support intersector; one hit per element and distance.
std::vector<OracleHit> brute_hits(const BuildingModel& m, const Ray& ray) {
  std::vector<OracleHit> out;
  for (const auto& e : m.elements()) {
    std::vector<double> ts;
    for (const auto& em : e.meshes) {
      for (const auto& t : em.mesh.triangles) {
        const auto& v = em.mesh.vertices;
        if (auto hit = brute_intersect(ray.origin, ray.direction, v[t[0]], v[t[1]], v[t[2]])) {
          ts.push_back(*hit);
        }
      }
    }
    std::sort(ts.begin(), ts.end());
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (i == 0 || ts[i] - ts[i - 1] >= kHitTieEpsilon) {
        out.push_back({ts[i], e.element_id});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const OracleHit& a, const OracleHit& b) { return a.t < b.t; });
  return out;
}

double angle_deg(const Vector3& a, const Vector3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b)) * 180.0 / std::numbers::pi;
}

std::vector<std::string> cap_paths(const std::string& svg) {
  std::vector<std::string> out;
  const std::regex re(R"re(<path class="cap"[^>]* d="([^"]*)")re");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator(); ++it) {
    out.push_back((*it)[1]);
  }
  return out;
}

// Shoelace over every M/L subpath of an SVG path.
double path_area(const std::string& d) {
  std::istringstream in(d);
  std::string tok;
  std::vector<std::vector<Vector2>> loops;
  while (in >> tok) {
    if (tok == "M") {
      loops.emplace_back();
    }
    if (tok == "M" || tok == "L") {
      double x, y;
      in >> x >> y;
      loops.back().emplace_back(x, y);
    }
  }
  double area = 0;
  for (const auto& loop : loops) {
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const Vector2& a = loop[i];
      const Vector2& b = loop[(i + 1) % loop.size()];
      area += (a.x() * b.y() - b.x() * a.y()) / 2;
    }
  }
  return area;
}

using Corners = std::array<std::array<double, 3>, 3>;

std::multiset<std::pair<std::string, Corners>> triangle_multiset(const BuildingModel& m) {
  std::multiset<std::pair<std::string, Corners>> out;
  for (const auto& e : m.elements()) {
    for (const auto& em : e.meshes) {
      for (std::size_t t = 0; t < em.mesh.size(); ++t) {
        Corners c;
        for (int k = 0; k < 3; ++k) {
          const Vector3 p = em.mesh.corner(t, k);
          c[k] = {p.x(), p.y(), p.z()};
        }
        out.insert({e.element_id + "#" + std::to_string(em.layer.layer_index), c});
      }
    }
  }
  return out;
}

std::filesystem::path temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "poche_acceptance";
  std::filesystem::create_directories(dir);
  return dir / name;
}

// --- criteria ----------------------------------------------------------------

Check tlx_arithmetic() {
  Check c;
  const auto responses = parse_tlx_csv(read_file(data_dir() / "tlx_all_max.csv"));
  const TlxScore s = tlx_score(responses.at(0));
  c.expect(s.overall == 100.0, "all-max overall " + num(s.overall, 17));
  const double top = tlx_adjusted(100, 5);
  c.expect(near(top, 100.0 / 3.0, 1e-12), "rate 100 x weight 5 gave " + num(top, 12));
  // The published 35.79% divides by the printed "33.3"; the unrounded
  // maximum gives 35.76%, outside 0.01%. Both are reported.
  const double printed = 100 * 11.92 / 33.3;
  const double exact = 100 * 11.92 / top;
  c.expect(near(printed, 35.79, 0.01), "11.92/33.3 = " + num(printed, 4) + "%");
  c.note("overall " + num(s.overall, 2) + ", max adjusted " + num(top, 4) + ", 11.92/33.3 = " + num(printed, 3) +
         "% (11.92/33.333 = " + num(exact, 3) + "%)");
  return c;
}

Check improvement_relations() {
  Check c;
  struct Row {
    double pre, post, expect;
    bool time;
  };
  const Row rows[] = {{82.92, 86.67, 4.52, false}, {84.82, 90.18, 6.32, false}, {12.95, 8.32, 35.74, true},
                      {20.87, 12.91, 38.11, true}, {8.38, 12.48, 48.93, false}, {4.60, 7.01, 52.26, false},
                      {3.50, 5.93, 69.43, false}};
  double worst = 0;
  for (const auto& r : rows) {
    // Time improvements are reductions, shown negated.
    const double got = (r.time ? -1 : 1) * improvement_percent(r.pre, r.post);
    worst = std::max(worst, std::abs(got - r.expect));
    c.expect(near(got, r.expect, 0.15), num(r.pre, 2) + "->" + num(r.post, 2) + " gave " + num(got, 3));
  }
  c.note("7 relations, worst deviation " + num(worst, 3) + " points");
  return c;
}

Check forced_p_values() {
  Check c;
  const std::vector<double> all = {1, 2, 3, 4, 5, 6};
  const std::vector<double> one_neg = {1, 2, 3, 4, 5, -6};
  const std::vector<double> four_of_five = {1, 2, 3, 4, -5};
  c.expect(sign_test(all).two_sided_p == 0.03125, "sign all-positive " + num(sign_test(all).two_sided_p, 6));
  c.expect(sign_test(one_neg).two_sided_p == 0.21875, "sign one negative " + num(sign_test(one_neg).two_sided_p, 6));
  c.expect(sign_test(four_of_five).two_sided_p == 0.375, "sign n=5 " + num(sign_test(four_of_five).two_sided_p, 6));
  const std::vector<double> pre(6, 10.0);
  const std::vector<double> post_all = {11, 12, 13, 14, 15, 16};
  const std::vector<double> post_small_neg = {9, 12, 13, 14, 15, 16};
  const TestReport w_all = wilcoxon_signed_rank(pre, post_all);
  const TestReport w_neg = wilcoxon_signed_rank(pre, post_small_neg);
  c.expect(w_all.two_sided_p == 0.03125 && w_all.method == TestMethod::Exact,
           "wilcoxon all-positive " + num(w_all.two_sided_p, 6));
  c.expect(w_neg.two_sided_p == 0.0625, "wilcoxon smallest negative " + num(w_neg.two_sided_p, 6));
  c.note("sign 0.03125/0.21875/0.375, wilcoxon 0.03125/0.0625");
  return c;
}

Check statistical_oracles() {
  Check c;
  int sign_cases = 0;
  for (int n = 1; n <= 12; ++n) {
    for (int k = 0; k <= n; ++k) {
      std::vector<double> diffs;
      for (int i = 0; i < n; ++i) {
        diffs.push_back(i < k ? 1.0 : -1.0);
      }
      double lo = 0;
      double hi = 0;
      for (int i = 0; i <= n; ++i) {
        lo += i <= k ? choose(n, i) : 0;
        hi += i >= k ? choose(n, i) : 0;
      }
      const double expect = std::min(1.0, 2.0 * std::min(lo, hi) / std::ldexp(1.0, n));
      c.expect(sign_test(diffs).two_sided_p == expect, "sign n=" + std::to_string(n) + " k=" + std::to_string(k));
      ++sign_cases;
    }
  }
  std::mt19937_64 rng(20261014);
  std::uniform_int_distribution<int> v(-6, 6);
  int datasets = 0;
  int mismatches = 0;
  while (datasets < 200) {
    const std::size_t n = 2 + rng() % 9;
    std::vector<double> pre(n);
    std::vector<double> post(n);
    bool nonzero = false;
    for (std::size_t i = 0; i < n; ++i) {
      pre[i] = 50 + v(rng);
      post[i] = pre[i] + v(rng);
      nonzero |= post[i] != pre[i];
    }
    if (!nonzero) {
      continue;
    }
    ++datasets;
    const double got = wilcoxon_signed_rank(pre, post).two_sided_p;
    const double want = enumerated_wilcoxon_p(pre, post);
    if (std::abs(got - want) > 1e-12) {
      ++mismatches;
      c.expect(false, "wilcoxon dataset " + std::to_string(datasets) + ": " + num(got, 8) + " vs " + num(want, 8));
    }
  }
  c.note(std::to_string(sign_cases) + " sign cases exact, " + std::to_string(datasets) + " wilcoxon datasets, " +
         std::to_string(mismatches) + " mismatches");
  return c;
}

Check geometry_conservation() {
  Check c;
  std::mt19937_64 rng(4242);
  double worst = 0;
  int closed = 0;
  for (int scene = 0; scene < 100; ++scene) {
    const BuildingModel m = random_scene(rng, 3);
    const SectionBox box = random_box(rng, aabb(m));
    const SectionResult r = clip_model(m, box);
    for (const auto& e : m.elements()) {
      const double input = mesh_volume(e.meshes[0].mesh.vertices, e.meshes[0].mesh.triangles);
      const ClippedPart* p = r.part(e.element_id, 0);
      if (p == nullptr) {
        c.expect(false, "scene " + std::to_string(scene) + " lost " + e.element_id);
        continue;
      }
      // Recomputed from the triangles rather than the part's own accessors.
      std::vector<Tri> kept = p->kept;
      std::vector<Tri> discarded = p->discarded;
      for (const auto& cap : p->caps) {
        for (const auto& t : cap.triangles) {
          kept.push_back(t);
          discarded.emplace_back(t[0], t[2], t[1]);
        }
      }
      const double vk = mesh_volume(p->vertices, kept);
      const double vd = mesh_volume(p->vertices, discarded);
      const double rel = std::abs(vk + vd - input) / input;
      worst = std::max(worst, rel);
      c.expect(rel <= 1e-9, "scene " + std::to_string(scene) + " relative error " + num(rel, 12));
      if (!p->kept.empty()) {
        const bool ok = closed_surface(p->vertices, kept);
        closed += ok;
        c.expect(ok, "scene " + std::to_string(scene) + " " + e.element_id + " kept+caps not watertight");
      }
    }
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", worst);
  c.note("100 scenes, worst relative volume error " + std::string(buf) + ", " + std::to_string(closed) +
         " kept shells watertight");
  return c;
}

Check half_cube_canon() {
  Check c;
  const BuildingModel m = load_geometry(data_dir() / "unit_cube.obj");
  const SectionBox box = set_plane(SectionBox::around(aabb(m)), Axis::X, Sign::Pos, 0.5, true);
  const SectionResult r = generate_poche(clip_model(m, box), layer_table(m));
  c.expect(near(r.kept_volume(), 0.5, 1e-12), "kept volume " + num(r.kept_volume(), 15));
  const auto caps = r.caps();
  c.expect(caps.size() == 1, std::to_string(caps.size()) + " caps");
  if (caps.size() == 1) {
    c.expect(near(caps[0]->area(), 1.0, 1e-12), "cap area " + num(caps[0]->area(), 15));
  }
  const std::string svg = export_svg(r, Axis::X, Sign::Pos);
  const auto paths = cap_paths(svg);
  const std::regex filled(R"re(<path[^>]* fill="(?!none)[^"]*")re");
  const auto n_filled = std::distance(std::sregex_iterator(svg.begin(), svg.end(), filled), std::sregex_iterator());
  c.expect(paths.size() == 1 && n_filled == 1, std::to_string(n_filled) + " filled paths");
  const double area = paths.empty() ? 0 : std::abs(path_area(paths[0])) / 1e6;
  c.expect(near(area, 1.0, 1e-6), "reparsed SVG area " + num(area, 9));
  c.note("kept " + num(r.kept_volume(), 12) + " m3, cap " + num(caps.empty() ? 0 : caps[0]->area(), 12) +
         " m2, SVG area " + num(area, 9) + " m2");
  return c;
}

Check pick_oracle() {
  Check c;
  std::mt19937_64 rng(777);
  int rays = 0;
  int hits = 0;
  for (int scene = 0; scene < 10; ++scene) {
    const BuildingModel m = random_scene(rng, 4);
    for (int i = 0; i < 100; ++i, ++rays) {
      const Ray ray = random_ray(rng);
      const auto got = cast_ray(m, ray);
      const auto want = brute_hits(m, ray);
      hits += static_cast<int>(got.size());
      bool same = got.size() == want.size();
      for (std::size_t k = 0; same && k < got.size(); ++k) {
        const bool tie = (k > 0 && want[k].t - want[k - 1].t < 1e-6) ||
                         (k + 1 < want.size() && want[k + 1].t - want[k].t < 1e-6);
        same = near(got[k].distance, want[k].t, 1e-9) && (tie || got[k].element_id == want[k].id);
      }
      c.expect(same, "ray " + std::to_string(rays) + " sequence differs");
    }
  }

  std::uniform_real_distribution<double> u(0, 1);
  int poche = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Axis axis = static_cast<Axis>(rng() % 3);
    const Sign sign = static_cast<Sign>(rng() % 2);
    const double off = 4 * u(rng) - 2;
    const SectionPlane plane = set_plane(SectionBox{}, axis, sign, off, true).plane(axis, sign);
    std::vector<RayHit> list;
    double d = 0;
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      RayHit h;
      d += 0.05 + u(rng);
      h.distance = d;
      h.element_id = "e" + std::to_string(rng() % 3);
      h.layer_index = static_cast<int>(rng() % 2);
      h.source = rng() % 2 ? HitSource::Cap : HitSource::Surface;
      h.point = 4 * Vector3(u(rng), u(rng), u(rng)) - 2 * Vector3::Ones();
      h.normal = random_unit(rng);
      if (rng() % 2) {
        h.point[index_of(axis)] = off + (u(rng) - 0.5) * 4e-4;
        const double tilt = u(rng) * 2.0 * std::numbers::pi / 180.0;
        h.normal = std::cos(tilt) * plane.normal() + std::sin(tilt) * plane.normal().unitOrthogonal();
      }
      list.push_back(h);
    }
    const PickResult got = resolve_pick(list, plane);
    const RayHit* expect = &list.front();
    bool expect_poche = false;
    for (const auto& h : list) {
      if (h.source == HitSource::Cap && std::abs(h.point[index_of(axis)] - off) <= 1e-4 &&
          angle_deg(h.normal, plane.normal()) <= 1.0) {
        expect = &h;
        expect_poche = true;
        break;
      }
    }
    poche += expect_poche;
    c.expect(got.hit && got.hit->distance == expect->distance && got.element_id == expect->element_id &&
                 got.layer_index == expect->layer_index && got.is_poche == expect_poche,
             "poche scenario " + std::to_string(trial));
  }
  c.note(std::to_string(rays) + " rays (" + std::to_string(hits) + " hits) match brute force, 200 poche scenarios (" +
         std::to_string(poche) + " poche) match the filter oracle");
  return c;
}

Check alignment_arithmetic() {
  Check c;
  AlignmentAnnotation a;
  a.reference_p0 = Vector2(100, 700);
  a.reference_p1 = Vector2(100, 100);
  a.reference_length_m = 3.0;
  a.samples = {{Vector2(200, 300), Vector2(203, 300)}, {Vector2(400, 250), Vector2(400, 247)}};
  const AlignmentReport r = measure_alignment(a);
  c.expect(r.mean_mm == 15.0, "three-pixel mean " + num(r.mean_mm, 15));

  // A 3 m facade 8 m away, model shifted 10 mm parallel to the image plane.
  const CameraPose cam = CameraPose::look_at(Vector3(2, -8, 1.5), Vector3(2, 0, 1.5));
  AlignmentAnnotation s;
  s.reference_p0 = project_point(cam, Vector3(0, 0, 0));
  s.reference_p1 = project_point(cam, Vector3(0, 0, 3));
  s.reference_length_m = 3.0;
  for (const Vector3& p : {Vector3(0, 0, 0), Vector3(0, 0, 3), Vector3(4, 0, 0), Vector3(4, 0, 3),
                           Vector3(1, 0, 2.1), Vector3(2, 0, 2.1)}) {
    s.samples.push_back({project_point(cam, p + Vector3(0.010, 0, 0)), project_point(cam, p)});
  }
  const AlignmentReport t = measure_alignment(s);
  c.expect(near(t.mean_mm, 10.0, 0.1), "synthetic translation mean " + num(t.mean_mm, 4));
  c.note("600 px = 3 m with 3 px offsets: " + num(r.mean_mm, 2) + " mm; 10 mm shift recovered as " +
         num(t.mean_mm, 4) + " mm");
  return c;
}

Check pipeline_round_trips() {
  Check c;
  // CSV -> JSON -> CSV, on the fixture and on random rows.
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    std::map<std::pair<std::string, std::string>, MetadataRecordRow> unique;
    const int n = 1 + static_cast<int>(rng() % 20);
    for (int i = 0; i < n; ++i) {
      const std::string id = "el-" + std::to_string(rng() % 6);
      const std::string cat = "cat \"" + id + "\", x";
      MetadataRecordRow row{id, cat, "fam," + id, "p" + std::to_string(rng() % 5), "v\n" + std::to_string(rng())};
      unique.try_emplace({row.element_id, row.parameter}, row);
    }
    std::vector<MetadataRecordRow> rows;
    for (auto& [k, row] : unique) {
      rows.push_back(row);
    }
    const auto back = parse_metadata_csv_text(write_metadata_csv(json_to_rows(csv_to_json(rows))));
    c.expect(back == rows, "random CSV rows trial " + std::to_string(trial));
  }
  auto fixture = parse_metadata_csv(data_dir() / "wall_meta.csv");
  std::sort(fixture.begin(), fixture.end(), [](const auto& a, const auto& b) {
    return std::tie(a.element_id, a.parameter) < std::tie(b.element_id, b.parameter);
  });
  c.expect(json_to_rows(csv_to_json(fixture)) == fixture, "fixture CSV -> JSON -> CSV");

  // Geometry load -> export -> load.
  const LayerTable layers = load_layer_sidecar(data_dir() / "wall_layers.json");
  for (const char* name : {"wall.obj", "two_cubes.obj", "unit_cube.obj"}) {
    const LayerTable* lt = std::string(name) == "wall.obj" ? &layers : nullptr;
    const BuildingModel m = load_geometry(data_dir() / name, lt);
    const BuildingModel again = parse_geometry(write_obj(m), lt);
    c.expect(triangle_multiset(m) == triangle_multiset(again), std::string(name) + " triangle multiset");
  }
  for (int trial = 0; trial < 20; ++trial) {
    const BuildingModel m = random_scene(rng, 4);
    c.expect(triangle_multiset(m) == triangle_multiset(parse_geometry(write_obj(m))),
             "random scene " + std::to_string(trial) + " triangle multiset");
  }

  // Metastore persist/load identity.
  const MetadataStore store = store_from_rows(parse_metadata_csv(data_dir() / "wall_meta.csv"));
  const auto path = temp_path("store.json");
  persist(store, path);
  c.expect(load_store(path) == store, "metastore persist/load");

  // Byte determinism: every export twice from fresh inputs.
  auto exports = [&] {
    const LayerTable lt = load_layer_sidecar(data_dir() / "wall_layers.json");
    const BuildingModel m = load_geometry(data_dir() / "wall.obj", &lt);
    const SectionBox box = set_plane(SectionBox::around(aabb(m)), Axis::X, Sign::Pos, 1.3, true);
    const SectionResult r = generate_poche(clip_model(m, box), layer_table(m));
    const auto rows = parse_metadata_csv(data_dir() / "wall_meta.csv");
    persist(store_from_rows(rows), path);
    return std::vector<std::string>{
        export_svg(r, Axis::X, Sign::Pos),
        export_mesh(r, MeshSide::Kept),
        export_mesh(r, MeshSide::Discarded),
        export_mesh(r, MeshSide::Caps),
        write_obj(m),
        dump_metadata_json(csv_to_json(rows)),
        read_file(path),
        format_cohort_text(cohort_summary(parse_study_csv(read_file(data_dir() / "study_all_improved.csv")))),
        format_tlx_text(tlx_summary(parse_tlx_csv(read_file(data_dir() / "tlx_responses.csv")))),
        wire::model_summary(m, lt).dump(),
    };
  };
  const auto first = exports();
  const auto second = exports();
  for (std::size_t i = 0; i < first.size(); ++i) {
    c.expect(first[i] == second[i], "export " + std::to_string(i) + " not byte-deterministic");
  }
  std::filesystem::remove(path);
  c.note("51 CSV round trips, 23 geometry round trips, store identity, " + std::to_string(first.size()) +
         " exports byte-identical");
  return c;
}

Check service_parity() {
  Check c;
  const LayerTable sidecar = load_layer_sidecar(data_dir() / "wall_layers.json");
  const BuildingModel model = load_geometry(data_dir() / "wall.obj", &sidecar);
  const MetadataStore store = store_from_rows(parse_metadata_csv(data_dir() / "wall_meta.csv"));
  Service svc(model, store, sidecar);
  HttpServer server(svc);
  const int port = server.start("127.0.0.1", 0);
  httplib::Client client("127.0.0.1", port);

  // The library-side mirror of the session.
  const Box3 bounds = aabb(model);
  SectionBox box = SectionBox::around(bounds);
  ViewMode mode = ViewMode::Section;
  std::optional<HighlightSpec> highlight;

  std::mt19937_64 rng(9001);
  std::uniform_real_distribution<double> u(0, 1);
  int sections = 0;
  int picks = 0;
  int pick_hits = 0;
  for (int i = 0; i < 100; ++i) {
    std::string route;
    json body;
    std::function<json()> expected;
    if (rng() % 2) {
      const Axis axis = static_cast<Axis>(rng() % 3);
      const Sign sign = static_cast<Sign>(rng() % 2);
      const int k = index_of(axis);
      // Pos planes in the lower half and Neg in the upper, so picks keep finding geometry.
      const double t = sign == Sign::Pos ? 0.5 * u(rng) : 0.5 + 0.5 * u(rng);
      const double off = bounds.min()[k] + t * bounds.sizes()[k];
      const bool active = rng() % 4 != 0;
      const ViewMode next_mode = rng() % 3 ? ViewMode::Section : ViewMode::Inspect;
      route = "/api/v1/section";
      body = {{"planes", json::array({{{"plane", plane_name(axis, sign)}, {"offset", off}, {"active", active}}})},
              {"mode", to_string(next_mode)}};
      box = set_plane(box, axis, sign, off, active);
      mode = next_mode;
      if (highlight) {
        highlight->style = mode == ViewMode::Inspect ? HighlightStyle::RedWire : HighlightStyle::RedSolid;
      }
      expected = [&] { return wire::section_response(box, mode, classify_layers(clip_model(model, box), mode, highlight)); };
      ++sections;
    } else {
      const Vector3 origin = bounds.center() + 8.0 * random_unit(rng);
      // Aim at a vertex of the model, clamped into the kept slab.
      const auto& elems = model.elements();
      const auto& mesh = elems[rng() % elems.size()].meshes.front().mesh;
      Vector3 at = mesh.vertices[rng() % mesh.vertices.size()];
      for (const auto& p : box.planes()) {
        const int k = index_of(p.axis);
        if (p.active) {
          at[k] = p.sign == Sign::Pos ? std::max(at[k], p.offset + 1e-3) : std::min(at[k], p.offset - 1e-3);
        }
      }
      const Vector3 dir = (at - origin).normalized();
      std::optional<std::pair<Axis, Sign>> toggle;
      if (rng() % 2) {
        toggle = std::pair{static_cast<Axis>(rng() % 3), static_cast<Sign>(rng() % 2)};
      }
      route = "/api/v1/pick";
      body = {{"origin", {origin.x(), origin.y(), origin.z()}},
              {"direction", {dir.x(), dir.y(), dir.z()}},
              {"active_plane", toggle ? json(plane_name(toggle->first, toggle->second)) : json(nullptr)}};
      const PickResult pick =
          resolve_pick(cast_ray(clip_model(model, box), Ray{origin, dir}),
                       toggle ? std::optional(box.plane(toggle->first, toggle->second)) : std::nullopt);
      highlight.reset();
      if (pick.hit) {
        highlight = highlight_for(pick, model, box, mode);
        ++pick_hits;
      }
      const auto hl = highlight;
      expected = [&, pick, hl] { return wire::pick_response(pick, hl, store, svc.layers()); };
      ++picks;
    }
    const auto first = client.Post(route, body.dump(), "application/json");
    const auto again = client.Post(route, body.dump(), "application/json");
    if (!first || !again) {
      c.expect(false, "request " + std::to_string(i) + " got no response");
      continue;
    }
    c.expect(first->status == 200, "request " + std::to_string(i) + " status " + std::to_string(first->status));
    c.expect(first->body == again->body, "request " + std::to_string(i) + " not byte-identical on repeat");
    c.expect(first->body == expected().dump(), "request " + std::to_string(i) + " differs from library");
  }
  const auto m1 = client.Get("/api/v1/model");
  const auto m2 = client.Get("/api/v1/model");
  c.expect(m1 && m2 && m1->body == m2->body, "GET model not byte-identical");
  if (m1) {
    json expect = wire::model_summary(model, svc.layers());
    expect["snapshot_id"] = json::parse(m1->body)["snapshot_id"];
    c.expect(json::parse(m1->body) == expect, "GET model differs from library");
  }
  server.stop();
  c.note(std::to_string(sections) + " sections, " + std::to_string(picks) + " picks (" + std::to_string(pick_hits) +
         " hits) equal library payloads; repeats byte-identical");
  return c;
}

} // namespace

int main() {
  const std::vector<std::pair<const char*, Check (*)()>> criteria = {
      {"tlx-arithmetic", tlx_arithmetic},
      {"improvement-relations", improvement_relations},
      {"forced-p-values", forced_p_values},
      {"statistical-oracles", statistical_oracles},
      {"geometry-conservation", geometry_conservation},
      {"half-cube-canon", half_cube_canon},
      {"pick-oracle", pick_oracle},
      {"alignment-arithmetic", alignment_arithmetic},
      {"pipeline-round-trips", pipeline_round_trips},
      {"service-parity", service_parity},
  };
  int failed = 0;
  const auto start = std::chrono::steady_clock::now();
  for (const auto& [name, run] : criteria) {
    Check c;
    try {
      c = run();
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    failed += !c.ok();
    std::cout << (c.ok() ? "PASS " : "FAIL ") << name << ": " << c.detail() << "\n";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria passed in " << num(secs, 2) << " s\n";
  return failed == 0 ? 0 : 1;
}
