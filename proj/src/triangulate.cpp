#include "poche/triangulate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

// Ear clipping over a circular linked list with hole bridging, following the
// structure of the earcut algorithm (filter, retry, split). Differences: no
// z-order hashing, and collinear points are only removed when they form a
// zero-width spike, never when they lie on a straight boundary run.

namespace poche {
namespace {

struct Node {
  int id;
  double x;
  double y;
  Node* prev = nullptr;
  Node* next = nullptr;
};

class Earcut {
public:
  std::vector<std::array<int, 3>> triangles;

  Node* make(int id, const Vector2& p) {
    nodes_.push_back(Node{id, p.x(), p.y()});
    return &nodes_.back();
  }

  Node* ring(const LabelledLoop& loop, bool ccw) {
    const double area = signed_area(loop.points);
    const bool forward = (area > 0) == ccw;
    Node* last = nullptr;
    const std::size_t n = loop.ids.size();
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = forward ? k : n - 1 - k;
      last = insert(loop.ids[i], loop.points[i], last);
    }
    if (last != nullptr && equals(last, last->next)) {
      remove(last);
      last = last->next;
    }
    return last;
  }

  Node* eliminate_holes(std::vector<Node*> holes, Node* outer) {
    std::vector<Node*> queue;
    for (Node* h : holes) {
      if (h != nullptr) {
        queue.push_back(leftmost(h));
      }
    }
    std::sort(queue.begin(), queue.end(), [](const Node* a, const Node* b) {
      if (a->x != b->x) {
        return a->x < b->x;
      }
      return a->y < b->y;
    });
    for (Node* h : queue) {
      outer = eliminate_hole(h, outer);
    }
    return outer;
  }

  void run(Node* ear, int pass) {
    if (ear == nullptr) {
      return;
    }
    Node* stop = ear;
    while (ear->prev != ear->next) {
      Node* prev = ear->prev;
      Node* next = ear->next;
      if (is_ear(ear)) {
        emit(prev, ear, next);
        remove(ear);
        ear = next->next;
        stop = next->next;
        continue;
      }
      ear = next;
      if (ear == stop) {
        if (pass == 0) {
          run(filter(ear, nullptr), 1);
        } else if (pass == 1) {
          split(filter(ear, nullptr));
        }
        return;
      }
    }
  }

private:
  std::deque<Node> nodes_;

  static double area(const Node* p, const Node* q, const Node* r) {
    // Negative for counter-clockwise (p, q, r).
    return (q->y - p->y) * (r->x - q->x) - (q->x - p->x) * (r->y - q->y);
  }

  static bool equals(const Node* a, const Node* b) { return a->x == b->x && a->y == b->y; }

  static bool point_in_triangle(double ax, double ay, double bx, double by, double cx, double cy, double px, double py) {
    return (cx - px) * (ay - py) >= (ax - px) * (cy - py) && (ax - px) * (by - py) >= (bx - px) * (ay - py) &&
           (bx - px) * (cy - py) >= (cx - px) * (by - py);
  }

  Node* insert(int id, const Vector2& p, Node* last) {
    Node* n = make(id, p);
    if (last == nullptr) {
      n->prev = n;
      n->next = n;
    } else {
      n->next = last->next;
      n->prev = last;
      last->next->prev = n;
      last->next = n;
    }
    return n;
  }

  static void remove(Node* p) {
    p->next->prev = p->prev;
    p->prev->next = p->next;
  }

  void emit(const Node* a, const Node* b, const Node* c) { triangles.push_back({a->id, b->id, c->id}); }

  // Drops zero-length edges and zero-width spikes. Straight runs survive.
  static Node* filter(Node* start, Node* end) {
    if (start == nullptr) {
      return start;
    }
    if (end == nullptr) {
      end = start;
    }
    Node* p = start;
    bool again = false;
    do {
      again = false;
      const bool spike = area(p->prev, p, p->next) == 0.0 && equals(p->prev, p->next);
      if (equals(p, p->next) || spike) {
        remove(p);
        p = end = p->prev;
        if (p == p->next) {
          break;
        }
        again = true;
      } else {
        p = p->next;
      }
    } while (again || p != end);
    return end;
  }

  // Cut points on one straight boundary run carry rounding noise; a vertex
  // within kFlatHeight of the line through its neighbours counts as straight.
  static constexpr double kFlatHeight = 1e-9;

  static bool convex(const Node* p, const Node* q, const Node* r) {
    return area(p, q, r) < -kFlatHeight * std::hypot(r->x - p->x, r->y - p->y);
  }

  static bool is_ear(const Node* ear) {
    const Node* a = ear->prev;
    const Node* b = ear;
    const Node* c = ear->next;
    if (!convex(a, b, c)) {
      return false;
    }
    for (const Node* p = c->next; p != a; p = p->next) {
      if (equals(p, a) || equals(p, b) || equals(p, c)) {
        continue;
      }
      if (point_in_triangle(a->x, a->y, b->x, b->y, c->x, c->y, p->x, p->y) && !convex(p->prev, p, p->next)) {
        return false;
      }
    }
    return true;
  }

  static Node* leftmost(Node* start) {
    Node* p = start;
    Node* best = start;
    do {
      if (p->x < best->x || (p->x == best->x && p->y < best->y)) {
        best = p;
      }
      p = p->next;
    } while (p != start);
    return best;
  }

  static bool locally_inside(const Node* a, const Node* b) {
    return area(a->prev, a, a->next) < 0 ? area(a, b, a->next) >= 0 && area(a, a->prev, b) >= 0
                                         : area(a, b, a->prev) < 0 || area(a, a->next, b) < 0;
  }

  static bool sector_contains_sector(const Node* m, const Node* p) {
    return area(m->prev, m, p->prev) < 0 && area(p->next, m, m->next) < 0;
  }

  static Node* find_hole_bridge(Node* hole, Node* outer) {
    Node* p = outer;
    const double hx = hole->x;
    const double hy = hole->y;
    double qx = -std::numeric_limits<double>::infinity();
    Node* m = nullptr;
    if (equals(hole, p)) {
      return p;
    }
    do {
      if (equals(hole, p->next)) {
        return p->next;
      }
      if (hy <= p->y && hy >= p->next->y && p->next->y != p->y) {
        const double x = p->x + (hy - p->y) * (p->next->x - p->x) / (p->next->y - p->y);
        if (x <= hx && x > qx) {
          qx = x;
          m = p->x < p->next->x ? p : p->next;
          if (x == hx) {
            return m;
          }
        }
      }
      p = p->next;
    } while (p != outer);
    if (m == nullptr) {
      return nullptr;
    }
    Node* stop = m;
    const double mx = m->x;
    const double my = m->y;
    double tan_min = std::numeric_limits<double>::infinity();
    p = m;
    do {
      if (hx >= p->x && p->x >= mx && hx != p->x &&
          point_in_triangle(hy < my ? hx : qx, hy, mx, my, hy < my ? qx : hx, hy, p->x, p->y)) {
        const double tan = std::abs(hy - p->y) / (hx - p->x);
        if (locally_inside(p, hole) &&
            (tan < tan_min ||
             (tan == tan_min && (p->x > m->x || (p->x == m->x && sector_contains_sector(m, p)))))) {
          m = p;
          tan_min = tan;
        }
      }
      p = p->next;
    } while (p != stop);
    return m;
  }

  Node* split_polygon(Node* a, Node* b) {
    Node* a2 = make(a->id, Vector2(a->x, a->y));
    Node* b2 = make(b->id, Vector2(b->x, b->y));
    Node* an = a->next;
    Node* bp = b->prev;
    a->next = b;
    b->prev = a;
    a2->next = an;
    an->prev = a2;
    b2->next = a2;
    a2->prev = b2;
    bp->next = b2;
    b2->prev = bp;
    return b2;
  }

  Node* eliminate_hole(Node* hole, Node* outer) {
    Node* bridge = find_hole_bridge(hole, outer);
    if (bridge == nullptr) {
      return outer;
    }
    Node* reverse = split_polygon(bridge, hole);
    filter(reverse, reverse->next);
    return filter(bridge, bridge->next);
  }

  static int sign(double v) { return (v > 0) - (v < 0); }

  static bool on_segment(const Node* p, const Node* q, const Node* r) {
    return q->x <= std::max(p->x, r->x) && q->x >= std::min(p->x, r->x) && q->y <= std::max(p->y, r->y) &&
           q->y >= std::min(p->y, r->y);
  }

  static bool intersects(const Node* p1, const Node* q1, const Node* p2, const Node* q2) {
    const int o1 = sign(area(p1, q1, p2));
    const int o2 = sign(area(p1, q1, q2));
    const int o3 = sign(area(p2, q2, p1));
    const int o4 = sign(area(p2, q2, q1));
    if (o1 != o2 && o3 != o4) {
      return true;
    }
    if (o1 == 0 && on_segment(p1, p2, q1)) return true;
    if (o2 == 0 && on_segment(p1, q2, q1)) return true;
    if (o3 == 0 && on_segment(p2, p1, q2)) return true;
    if (o4 == 0 && on_segment(p2, q1, q2)) return true;
    return false;
  }

  static bool intersects_polygon(const Node* a, const Node* b) {
    const Node* p = a;
    do {
      if (p->id != a->id && p->next->id != a->id && p->id != b->id && p->next->id != b->id &&
          intersects(p, p->next, a, b)) {
        return true;
      }
      p = p->next;
    } while (p != a);
    return false;
  }

  static bool middle_inside(const Node* a, const Node* b) {
    const Node* p = a;
    bool inside = false;
    const double px = (a->x + b->x) / 2;
    const double py = (a->y + b->y) / 2;
    do {
      if (((p->y > py) != (p->next->y > py)) && p->next->y != p->y &&
          (px < (p->next->x - p->x) * (py - p->y) / (p->next->y - p->y) + p->x)) {
        inside = !inside;
      }
      p = p->next;
    } while (p != a);
    return inside;
  }

  static bool valid_diagonal(const Node* a, const Node* b) {
    return a->next->id != b->id && a->prev->id != b->id && !intersects_polygon(a, b) &&
           ((locally_inside(a, b) && locally_inside(b, a) && middle_inside(a, b) &&
             (area(a->prev, a, b->prev) != 0.0 || area(a, b->prev, b) != 0.0)) ||
            (equals(a, b) && area(a->prev, a, a->next) > 0 && area(b->prev, b, b->next) > 0));
  }

  void split(Node* start) {
    if (start == nullptr) {
      return;
    }
    Node* a = start;
    do {
      for (Node* b = a->next->next; b != a->prev; b = b->next) {
        if (a->id != b->id && valid_diagonal(a, b)) {
          Node* c = split_polygon(a, b);
          a = filter(a, a->next);
          c = filter(c, c->next);
          run(a, 0);
          run(c, 0);
          return;
        }
      }
      a = a->next;
    } while (a != start);
    // No ear and no diagonal: the ring is degenerate (all remaining points
    // collinear or coincident). Fan it so every boundary edge is still used.
    for (Node* p = start->next; p->next != start; p = p->next) {
      emit(start, p, p->next);
    }
  }
};

bool point_in_loop(const LabelledLoop& loop, const Vector2& p) {
  return inside_loops<double>({loop.points}, p);
}

} // namespace

std::vector<std::array<int, 3>> triangulate_loops(const std::vector<LabelledLoop>& loops) {
  std::vector<std::size_t> outers;
  std::vector<std::size_t> holes;
  std::vector<double> areas(loops.size());
  for (std::size_t i = 0; i < loops.size(); ++i) {
    if (loops[i].ids.size() < 3) {
      continue;
    }
    areas[i] = signed_area(loops[i].points);
    if (areas[i] > 0) {
      outers.push_back(i);
    } else if (areas[i] < 0) {
      holes.push_back(i);
    }
  }

  // A hole belongs to the smallest outer loop that contains the majority of
  // its vertices (vertices shared with the outer boundary are ambiguous).
  std::vector<std::vector<std::size_t>> holes_of(loops.size());
  for (std::size_t h : holes) {
    std::size_t best = loops.size();
    std::size_t best_votes = 0;
    for (std::size_t o : outers) {
      std::size_t votes = 0;
      for (const auto& p : loops[h].points) {
        votes += point_in_loop(loops[o], p) ? 1 : 0;
      }
      if (votes == 0) {
        continue;
      }
      if (best == loops.size() || votes > best_votes || (votes == best_votes && areas[o] < areas[best])) {
        best = o;
        best_votes = votes;
      }
    }
    if (best != loops.size()) {
      holes_of[best].push_back(h);
    }
  }

  Earcut ec;
  for (std::size_t o : outers) {
    Node* outer = ec.ring(loops[o], true);
    if (outer == nullptr || outer->next == outer->prev) {
      continue;
    }
    std::vector<Node*> hole_rings;
    for (std::size_t h : holes_of[o]) {
      hole_rings.push_back(ec.ring(loops[h], false));
    }
    if (!hole_rings.empty()) {
      outer = ec.eliminate_holes(hole_rings, outer);
    }
    ec.run(outer, 0);
  }
  return std::move(ec.triangles);
}

} // namespace poche
