#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <unordered_map>

#include "perfhom/core/error.hpp"
#include "perfhom/core/mesh.hpp"

namespace perfhom {

namespace {

constexpr int kUnknownRegion = -2;

long double orient(Point a, Point b, Point c) {
  const long double abx = static_cast<long double>(b.x) - a.x;
  const long double aby = static_cast<long double>(b.y) - a.y;
  const long double acx = static_cast<long double>(c.x) - a.x;
  const long double acy = static_cast<long double>(c.y) - a.y;
  return abx * acy - aby * acx;
}

// Positive when d lies inside the circumcircle of the counter-clockwise triangle abc.
long double incircle(Point a, Point b, Point c, Point d) {
  const long double adx = static_cast<long double>(a.x) - d.x;
  const long double ady = static_cast<long double>(a.y) - d.y;
  const long double bdx = static_cast<long double>(b.x) - d.x;
  const long double bdy = static_cast<long double>(b.y) - d.y;
  const long double cdx = static_cast<long double>(c.x) - d.x;
  const long double cdy = static_cast<long double>(c.y) - d.y;
  const long double ad = adx * adx + ady * ady;
  const long double bd = bdx * bdx + bdy * bdy;
  const long double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

Point circumcenter(Point a, Point b, Point c) {
  const double bx = b.x - a.x;
  const double by = b.y - a.y;
  const double cx = c.x - a.x;
  const double cy = c.y - a.y;
  const double d = 2.0 * (bx * cy - by * cx);
  const double b2 = bx * bx + by * by;
  const double c2 = cx * cx + cy * cy;
  return {a.x + (cy * b2 - by * c2) / d, a.y + (bx * c2 - cx * b2) / d};
}

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

struct Tri {
  std::array<int, 3> v{};
  std::array<int, 3> n{-1, -1, -1};  // n[i] is across the edge opposite v[i]
  int region = kUnknownRegion;
  bool alive = true;
  unsigned stamp = 0;
};

struct Segment {
  int a = 0;
  int b = 0;
  double ta = 0.0;
  double tb = 0.0;
  int loop = 0;
};

// Multi-level hash of segment diametral disks.
class SegmentIndex {
 public:
  explicit SegmentIndex(double base) : base_(base) {}

  void insert(int id, Point a, Point b) {
    const Point mid = 0.5 * (a + b);
    const double r = 0.5 * distance(a, b);
    int level = 0;
    if (r > 0.0) level = std::clamp(static_cast<int>(std::floor(std::log2(base_ / (2.0 * r)))), 0, kMaxLevel);
    used_ |= (1ULL << level);
    const double cell = base_ / std::ldexp(1.0, level);
    const long i0 = static_cast<long>(std::floor((mid.x - r) / cell));
    const long i1 = static_cast<long>(std::floor((mid.x + r) / cell));
    const long j0 = static_cast<long>(std::floor((mid.y - r) / cell));
    const long j1 = static_cast<long>(std::floor((mid.y + r) / cell));
    for (long j = j0; j <= j1; ++j) {
      for (long i = i0; i <= i1; ++i) cells_[key(level, i, j)].push_back(id);
    }
  }

  template <class F>
  void query(Point p, F&& visit) const {
    for (int level = 0; level <= kMaxLevel; ++level) {
      if (!(used_ & (1ULL << level))) continue;
      const double cell = base_ / std::ldexp(1.0, level);
      const auto it = cells_.find(key(level, static_cast<long>(std::floor(p.x / cell)), static_cast<long>(std::floor(p.y / cell))));
      if (it == cells_.end()) continue;
      for (int id : it->second) visit(id);
    }
  }

 private:
  static constexpr int kMaxLevel = 48;
  static std::uint64_t key(int level, long i, long j) {
    std::uint64_t z = static_cast<std::uint64_t>(level) * 0x9E3779B97F4A7C15ULL;
    z ^= static_cast<std::uint64_t>(i) + 0x632BE59BD9B4E019ULL + (z << 6) + (z >> 2);
    z ^= static_cast<std::uint64_t>(j) + 0x85EBCA77C2B2AE63ULL + (z << 6) + (z >> 2);
    return z;
  }

  double base_;
  std::uint64_t used_ = 0;
  // Hash collisions only add candidates; every candidate is tested geometrically.
  std::unordered_map<std::uint64_t, std::vector<int>> cells_;
};

class Mesher {
 public:
  Mesher(const std::vector<CurveLoop>& loops, const SizeField& size, const MesherOptions& options)
      : loops_(loops), size_(size), options_(options), index_(1.0) {
    const double s = std::sin(options.min_angle_deg * std::numbers::pi / 180.0);
    ratio_bound_ = 1.0 / (2.0 * s);
  }

  Mesh run() {
    init();
    for (int round = 0;; ++round) {
      recover();
      classify();
      if (!refine()) break;
      if (round > 10000) throw mesh_error("mesh refinement did not converge");
    }
    return output();
  }

 private:
  // -- setup ---------------------------------------------------------------

  void init() {
    if (loops_.empty()) throw mesh_error("no boundary loops to mesh");
    Point lo{1e300, 1e300};
    Point hi{-1e300, -1e300};
    for (const CurveLoop& l : loops_) {
      for (int i = 0; i < 256; ++i) {
        const Point p = l.point(l.period * i / 256.0);
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
      }
    }
    const Point c = 0.5 * (lo + hi);
    const double extent = std::max(hi.x - lo.x, hi.y - lo.y);
    index_ = SegmentIndex(extent);
    const double big = 20.0 * extent;
    pts_ = {{c.x - 2.0 * big, c.y - big}, {c.x + 2.0 * big, c.y - big}, {c.x, c.y + 2.0 * big}};
    vtri_.assign(3, 0);
    Tri t;
    t.v = {0, 1, 2};
    t.region = kVoidRegion;
    tris_.push_back(t);

    // Outer loops first so the interior is never covered by super-triangle fans.
    std::vector<std::size_t> order(loops_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return (loops_[a].outside_region == kVoidRegion) > (loops_[b].outside_region == kVoidRegion);
    });
    for (std::size_t li : order) seed_loop(static_cast<int>(li));
  }

  void seed_loop(int li) {
    const CurveLoop& l = loops_[static_cast<std::size_t>(li)];
    std::vector<double> breaks = l.breaks;
    if (breaks.empty()) breaks.push_back(0.0);
    std::sort(breaks.begin(), breaks.end());
    std::vector<double> params;
    const std::size_t pieces = breaks.size();
    const std::size_t per_piece = std::max<std::size_t>(1, (l.min_segments + pieces - 1) / pieces);
    for (std::size_t k = 0; k < pieces; ++k) {
      const double t0 = breaks[k];
      const double t1 = k + 1 < pieces ? breaks[k + 1] : breaks[0] + l.period;
      double len = 0.0;
      double smin = 1e300;
      Point prev = l.point(t0);
      constexpr int kSamples = 64;
      for (int i = 1; i <= kSamples; ++i) {
        const Point q = l.point(std::fmod(t0 + (t1 - t0) * i / kSamples, l.period));
        len += distance(prev, q);
        smin = std::min(smin, size_(q));
        prev = q;
      }
      const std::size_t n = std::max(per_piece, static_cast<std::size_t>(std::ceil(len / smin)));
      for (std::size_t i = 0; i < n; ++i) params.push_back(t0 + (t1 - t0) * static_cast<double>(i) / n);
    }
    std::vector<int> ids;
    ids.reserve(params.size());
    for (double t : params) {
      const int v = insert_point(l.point(std::fmod(t, l.period)), last_, false, nullptr);
      if (v < 0) throw mesh_error("duplicate boundary vertex while seeding a loop");
      ids.push_back(v);
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
      Segment s;
      s.a = ids[i];
      s.b = ids[(i + 1) % ids.size()];
      s.ta = params[i];
      s.tb = i + 1 < ids.size() ? params[i + 1] : params[0] + l.period;
      s.loop = li;
      add_segment(s);
    }
  }

  void add_segment(const Segment& s) {
    const int id = static_cast<int>(segs_.size());
    segs_.push_back(s);
    seg_edge_[edge_key(s.a, s.b)] = id;
    index_.insert(id, pts_[static_cast<std::size_t>(s.a)], pts_[static_cast<std::size_t>(s.b)]);
    work_.push_back(id);
  }

  // -- triangulation primitives ---------------------------------------------

  Point P(int v) const { return pts_[static_cast<std::size_t>(v)]; }

  int any_alive() const {
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      if (tris_[t].alive) return static_cast<int>(t);
    }
    throw mesh_error("empty triangulation");
  }

  int locate(Point p, int start) {
    int t = (start >= 0 && start < static_cast<int>(tris_.size()) && tris_[static_cast<std::size_t>(start)].alive) ? start : any_alive();
    unsigned rot = 0;
    const std::size_t limit = 4 * tris_.size() + 100;
    for (std::size_t step = 0; step < limit; ++step) {
      const Tri& T = tris_[static_cast<std::size_t>(t)];
      int next = -2;
      for (int k = 0; k < 3; ++k) {
        const int i = static_cast<int>((k + rot) % 3);
        if (orient(P(T.v[(i + 1) % 3]), P(T.v[(i + 2) % 3]), p) < 0) {
          next = T.n[i];
          break;
        }
      }
      if (next == -2) return t;
      if (next == -1) throw mesh_error("point outside the triangulation");
      t = next;
      rot = rot * 1103515245u + 12345u;
      rot = (rot >> 8) % 3;
    }
    // Walks can cycle on degenerate inputs; fall back to a scan.
    for (std::size_t i = 0; i < tris_.size(); ++i) {
      const Tri& T = tris_[i];
      if (!T.alive) continue;
      if (orient(P(T.v[0]), P(T.v[1]), p) >= 0 && orient(P(T.v[1]), P(T.v[2]), p) >= 0 &&
          orient(P(T.v[2]), P(T.v[0]), p) >= 0) {
        return static_cast<int>(i);
      }
    }
    throw mesh_error("point location failed");
  }

  bool in_circle(int t, Point p) const {
    const Tri& T = tris_[static_cast<std::size_t>(t)];
    return incircle(P(T.v[0]), P(T.v[1]), P(T.v[2]), p) > 0;
  }

  // Bowyer-Watson insertion. When uniform is set, the insertion is rejected (returns -1) unless all
  // removed triangles share one known region; new triangles then inherit it.
  int insert_point(Point p, int hint, bool uniform, std::vector<int>* created) {
    const int t0 = locate(p, hint);
    for (int v : tris_[static_cast<std::size_t>(t0)].v) {
      if (distance_squared(P(v), p) == 0.0) return -1;
    }
    mark_.resize(tris_.size(), 0);
    cavity_.clear();
    cavity_.push_back(t0);
    mark_[static_cast<std::size_t>(t0)] = 1;
    for (std::size_t k = 0; k < cavity_.size(); ++k) {
      const Tri& T = tris_[static_cast<std::size_t>(cavity_[k])];
      for (int nb : T.n) {
        if (nb >= 0 && !mark_[static_cast<std::size_t>(nb)] && in_circle(nb, p)) {
          mark_[static_cast<std::size_t>(nb)] = 1;
          cavity_.push_back(nb);
        }
      }
    }
    // Make the cavity star-shaped with respect to p.
    for (int pass = 0;; ++pass) {
      if (pass > 64) {
        unmark();
        throw mesh_error("cavity repair failed during insertion");
      }
      bool changed = false;
      for (std::size_t k = 0; k < cavity_.size() && !changed; ++k) {
        const int t = cavity_[k];
        const Tri& T = tris_[static_cast<std::size_t>(t)];
        for (int i = 0; i < 3; ++i) {
          const int nb = T.n[i];
          if (nb >= 0 && mark_[static_cast<std::size_t>(nb)]) continue;
          if (orient(P(T.v[(i + 1) % 3]), P(T.v[(i + 2) % 3]), p) > 0) continue;
          if (t == t0) {
            if (nb < 0) {
              unmark();
              throw mesh_error("inserted point on the hull");
            }
            mark_[static_cast<std::size_t>(nb)] = 1;
            cavity_.push_back(nb);
          } else {
            mark_[static_cast<std::size_t>(t)] = 0;
            cavity_.erase(cavity_.begin() + static_cast<long>(k));
            prune_unreachable(t0);
          }
          changed = true;
          break;
        }
      }
      if (!changed) break;
    }

    int region = kUnknownRegion;
    if (uniform) {
      region = tris_[static_cast<std::size_t>(t0)].region;
      bool ok = region >= 0;
      for (int t : cavity_) ok = ok && tris_[static_cast<std::size_t>(t)].region == region;
      if (!ok) {
        unmark();
        return -1;
      }
    }

    // Boundary edges of the cavity, counter-clockwise as seen from inside.
    bnd_.clear();
    for (int t : cavity_) {
      const Tri& T = tris_[static_cast<std::size_t>(t)];
      for (int i = 0; i < 3; ++i) {
        const int nb = T.n[i];
        if (nb >= 0 && mark_[static_cast<std::size_t>(nb)]) continue;
        bnd_.push_back({T.v[(i + 1) % 3], T.v[(i + 2) % 3], nb});
      }
    }
    unmark();
    for (int t : cavity_) {
      tris_[static_cast<std::size_t>(t)].alive = false;
      free_.push_back(t);
    }

    const int pv = static_cast<int>(pts_.size());
    pts_.push_back(p);
    vtri_.push_back(-1);
    fresh_.clear();
    for (const auto& e : bnd_) {
      int id;
      if (!free_.empty()) {
        id = free_.back();
        free_.pop_back();
      } else {
        id = static_cast<int>(tris_.size());
        tris_.emplace_back();
      }
      Tri& T = tris_[static_cast<std::size_t>(id)];
      T.v = {e.a, e.b, pv};
      T.n = {-1, -1, e.outside};
      T.region = region;
      T.alive = true;
      ++T.stamp;
      if (e.outside >= 0) {
        Tri& O = tris_[static_cast<std::size_t>(e.outside)];
        for (int i = 0; i < 3; ++i) {
          const int oa = O.v[(i + 1) % 3];
          const int ob = O.v[(i + 2) % 3];
          if (oa == e.b && ob == e.a) O.n[i] = id;
        }
      }
      vtri_[static_cast<std::size_t>(e.a)] = id;
      vtri_[static_cast<std::size_t>(e.b)] = id;
      fresh_.push_back(id);
    }
    vtri_[static_cast<std::size_t>(pv)] = fresh_.front();
    // Link the fan: T=(a,b,p) meets (b,c,p) across (b,p) and (z,a,p) across (p,a).
    for (int id : fresh_) {
      Tri& T = tris_[static_cast<std::size_t>(id)];
      for (int jd : fresh_) {
        if (jd == id) continue;
        const Tri& U = tris_[static_cast<std::size_t>(jd)];
        if (U.v[0] == T.v[1]) T.n[0] = jd;
        if (U.v[1] == T.v[0]) T.n[1] = jd;
      }
    }
    last_ = fresh_.front();
    if (created) *created = fresh_;
    return pv;
  }

  void unmark() {
    for (int t : cavity_) mark_[static_cast<std::size_t>(t)] = 0;
  }

  void prune_unreachable(int t0) {
    std::vector<int> keep{t0};
    std::vector<char> seen(tris_.size(), 0);
    seen[static_cast<std::size_t>(t0)] = 1;
    for (std::size_t k = 0; k < keep.size(); ++k) {
      for (int nb : tris_[static_cast<std::size_t>(keep[k])].n) {
        if (nb >= 0 && mark_[static_cast<std::size_t>(nb)] && !seen[static_cast<std::size_t>(nb)]) {
          seen[static_cast<std::size_t>(nb)] = 1;
          keep.push_back(nb);
        }
      }
    }
    for (int t : cavity_) {
      if (!seen[static_cast<std::size_t>(t)]) mark_[static_cast<std::size_t>(t)] = 0;
    }
    cavity_ = keep;
  }

  // Triangle holding directed or reversed edge (a,b); index i has the edge opposite v[i].
  std::pair<int, int> find_edge(int a, int b) {
    int start = vtri_[static_cast<std::size_t>(a)];
    const Tri& S = tris_[static_cast<std::size_t>(start)];
    if (!S.alive || std::find(S.v.begin(), S.v.end(), a) == S.v.end()) {
      start = locate(P(a), last_);
      vtri_[static_cast<std::size_t>(a)] = start;
    }
    std::vector<int> stack{start};
    std::vector<int> seen;
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      if (t < 0 || std::find(seen.begin(), seen.end(), t) != seen.end()) continue;
      seen.push_back(t);
      const Tri& T = tris_[static_cast<std::size_t>(t)];
      int ia = -1;
      for (int i = 0; i < 3; ++i) {
        if (T.v[i] == a) ia = i;
      }
      if (ia < 0) continue;
      for (int i = 0; i < 3; ++i) {
        if (T.v[i] == b) return {t, 3 - ia - i};
      }
      stack.push_back(T.n[(ia + 1) % 3]);
      stack.push_back(T.n[(ia + 2) % 3]);
    }
    return {-1, -1};
  }

  // -- segments --------------------------------------------------------------

  bool encroaches(Point c, const Segment& s) const {
    return dot(P(s.a) - c, P(s.b) - c) < 0.0;
  }

  double local_size(Point p) const { return size_(p); }

  bool needs_split(int sid) {
    const Segment& s = segs_[static_cast<std::size_t>(sid)];
    const auto [t, i] = find_edge(s.a, s.b);
    if (t < 0) return true;
    const Point a = P(s.a);
    const Point b = P(s.b);
    if (distance(a, b) > local_size(0.5 * (a + b))) return true;
    const Tri& T = tris_[static_cast<std::size_t>(t)];
    if (encroaches(P(T.v[i]), s)) return true;
    const int nb = T.n[i];
    if (nb >= 0) {
      const Tri& U = tris_[static_cast<std::size_t>(nb)];
      for (int v : U.v) {
        if (v != s.a && v != s.b && encroaches(P(v), s)) return true;
      }
    }
    return false;
  }

  void split_segment(int sid) {
    Segment s = segs_[static_cast<std::size_t>(sid)];
    const CurveLoop& l = loops_[static_cast<std::size_t>(s.loop)];
    const double tm = 0.5 * (s.ta + s.tb);
    const Point m = l.point(std::fmod(tm, l.period));
    const int v = insert_point(m, vtri_[static_cast<std::size_t>(s.a)], false, nullptr);
    if (v < 0) throw mesh_error("segment split produced a duplicate vertex");
    check_budget();
    seg_edge_.erase(edge_key(s.a, s.b));
    Segment left = s;
    left.b = v;
    left.tb = tm;
    segs_[static_cast<std::size_t>(sid)] = left;
    seg_edge_[edge_key(left.a, left.b)] = sid;
    index_.insert(sid, P(left.a), P(left.b));
    work_.push_back(sid);
    Segment right = s;
    right.a = v;
    right.ta = tm;
    add_segment(right);
    labels_stale_ = true;
    // The new vertex may encroach nearby segments of other loops.
    index_.query(m, [&](int other) {
      const Segment& o = segs_[static_cast<std::size_t>(other)];
      if (o.a != v && o.b != v && encroaches(m, o)) work_.push_back(other);
    });
  }

  void recover() {
    while (!work_.empty()) {
      const int sid = work_.front();
      work_.pop_front();
      if (needs_split(sid)) split_segment(sid);
    }
  }

  void check_budget() const {
    if (pts_.size() > options_.max_vertices) {
      throw mesh_error("mesh vertex budget of " + std::to_string(options_.max_vertices) + " exceeded");
    }
  }

  // -- regions ---------------------------------------------------------------

  void classify() {
    for (Tri& T : tris_) T.region = kUnknownRegion;
    const int seed = vtri_[0];
    tris_[static_cast<std::size_t>(seed)].region = kVoidRegion;
    std::vector<int> stack{seed};
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      const Tri& T = tris_[static_cast<std::size_t>(t)];
      for (int i = 0; i < 3; ++i) {
        const int nb = T.n[i];
        if (nb < 0 || tris_[static_cast<std::size_t>(nb)].region != kUnknownRegion) continue;
        const int a = T.v[(i + 1) % 3];
        const int b = T.v[(i + 2) % 3];
        int region = T.region;
        const auto it = seg_edge_.find(edge_key(a, b));
        if (it != seg_edge_.end()) {
          const Segment& s = segs_[static_cast<std::size_t>(it->second)];
          const CurveLoop& l = loops_[static_cast<std::size_t>(s.loop)];
          // T is left of a->b; the loop interior is left of s.a->s.b.
          region = (s.a == a) ? l.outside_region : l.inside_region;
        }
        tris_[static_cast<std::size_t>(nb)].region = region;
        stack.push_back(nb);
      }
    }
    labels_stale_ = false;
  }

  // -- refinement ------------------------------------------------------------

  bool is_bad(const Tri& T) const {
    const Point a = P(T.v[0]);
    const Point b = P(T.v[1]);
    const Point c = P(T.v[2]);
    const double la = distance(b, c);
    const double lb = distance(c, a);
    const double lc = distance(a, b);
    const double area2 = std::abs(cross(b - a, c - a));
    if (area2 <= 0.0) return false;
    const double radius = la * lb * lc / (2.0 * area2);
    const double lmin = std::min({la, lb, lc});
    const double target = local_size((1.0 / 3.0) * (a + b + c));
    if (radius > 0.6 * target) return true;
    // Angle refinement stops at a tiny fraction of the local size so round-off cannot loop.
    return radius > ratio_bound_ * lmin * (1.0 + 1e-9) && lmin > 1e-6 * target;
  }

  // Returns true when something changed.
  bool refine() {
    std::deque<std::pair<int, unsigned>> queue;
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      const Tri& T = tris_[t];
      if (T.alive && T.region >= 0 && is_bad(T)) queue.emplace_back(static_cast<int>(t), T.stamp);
    }
    if (queue.empty()) return false;
    std::size_t progress = 0;
    std::vector<int> created;
    std::vector<int> hits;
    while (!queue.empty()) {
      const auto [t, stamp] = queue.front();
      queue.pop_front();
      const Tri& T = tris_[static_cast<std::size_t>(t)];
      if (!T.alive || T.stamp != stamp || T.region < 0 || !is_bad(T)) continue;
      const Point a = P(T.v[0]);
      const Point b = P(T.v[1]);
      const Point c = P(T.v[2]);
      Point target = circumcenter(a, b, c);
      if (!std::isfinite(target.x) || !std::isfinite(target.y)) continue;
      if (split_encroached(target, hits)) {
        ++progress;
        continue;
      }
      int v = insert_point(target, t, true, &created);
      if (v < 0 && !labels_stale_) {
        // Circumcenter fell outside the region through round-off; use the centroid instead.
        target = (1.0 / 3.0) * (a + b + c);
        if (split_encroached(target, hits)) {
          ++progress;
          continue;
        }
        v = insert_point(target, t, true, &created);
      }
      if (v < 0) continue;
      ++progress;
      check_budget();
      for (int id : created) {
        const Tri& U = tris_[static_cast<std::size_t>(id)];
        if (is_bad(U)) queue.emplace_back(id, U.stamp);
      }
    }
    if (progress == 0) throw mesh_error("mesh refinement stalled");
    return true;
  }

  bool split_encroached(Point c, std::vector<int>& hits) {
    hits.clear();
    index_.query(c, [&](int sid) {
      if (encroaches(c, segs_[static_cast<std::size_t>(sid)]) &&
          std::find(hits.begin(), hits.end(), sid) == hits.end()) {
        hits.push_back(sid);
      }
    });
    for (int sid : hits) {
      // A hit may have been shortened by an earlier split in this loop.
      if (encroaches(c, segs_[static_cast<std::size_t>(sid)])) split_segment(sid);
    }
    if (!hits.empty()) recover();
    return !hits.empty();
  }

  // -- output ------------------------------------------------------------------

  Mesh output() const {
    Mesh m;
    std::vector<int> map(pts_.size(), -1);
    for (const Tri& T : tris_) {
      if (!T.alive || T.region < 0) continue;
      std::array<int, 3> tri{};
      for (int i = 0; i < 3; ++i) {
        int& id = map[static_cast<std::size_t>(T.v[i])];
        if (id < 0) {
          id = static_cast<int>(m.vertices.size());
          m.vertices.push_back(P(T.v[i]));
        }
        tri[i] = id;
      }
      m.triangles.push_back(tri);
      m.triangle_region.push_back(T.region);
    }
    for (const Segment& s : segs_) {
      const CurveLoop& l = loops_[static_cast<std::size_t>(s.loop)];
      const int a = map[static_cast<std::size_t>(s.a)];
      const int b = map[static_cast<std::size_t>(s.b)];
      if (a < 0 || b < 0) continue;
      if (l.inside_region == kVoidRegion) {
        m.boundary_edges.push_back({b, a, l.tag});
      } else if (l.outside_region == kVoidRegion) {
        m.boundary_edges.push_back({a, b, l.tag});
      } else {
        m.interface_edges.push_back({a, b, l.tag});
      }
    }
    for (const auto& t : m.triangles) {
      for (int i = 0; i < 3; ++i) {
        m.h_max = std::max(m.h_max, distance(m.vertices[static_cast<std::size_t>(t[i])],
                                             m.vertices[static_cast<std::size_t>(t[(i + 1) % 3])]));
      }
    }
    return m;
  }

  const std::vector<CurveLoop>& loops_;
  const SizeField& size_;
  MesherOptions options_;
  double ratio_bound_ = 1.0;

  std::vector<Point> pts_;
  std::vector<Tri> tris_;
  std::vector<int> free_;
  std::vector<int> vtri_;
  std::vector<Segment> segs_;
  std::unordered_map<std::uint64_t, int> seg_edge_;
  SegmentIndex index_;
  std::deque<int> work_;
  bool labels_stale_ = true;
  int last_ = 0;

  std::vector<char> mark_;
  std::vector<int> cavity_;
  struct BEdgeRec {
    int a, b, outside;
  };
  std::vector<BEdgeRec> bnd_;
  std::vector<int> fresh_;
};

}  // namespace

Mesh triangulate(const std::vector<CurveLoop>& loops, const SizeField& size, const MesherOptions& options) {
  Mesher mesher(loops, size, options);
  return mesher.run();
}

}  // namespace perfhom
