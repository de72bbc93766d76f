#include "strawkit/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "strawkit/error.hpp"

namespace strawkit {
namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

using Real = long double;

Real orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (Real(b.x()) - a.x()) * (Real(c.y()) - a.y()) - (Real(b.y()) - a.y()) * (Real(c.x()) - a.x());
}

// > 0 when d lies inside the circumcircle of counter-clockwise (a, b, c).
Real incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const Real adx = Real(a.x()) - d.x(), ady = Real(a.y()) - d.y();
  const Real bdx = Real(b.x()) - d.x(), bdy = Real(b.y()) - d.y();
  const Real cdx = Real(c.x()) - d.x(), cdy = Real(c.y()) - d.y();
  const Real ad = adx * adx + ady * ady;
  const Real bd = bdx * bdx + bdy * bdy;
  const Real cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

double circumradius2(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double dx = b.x() - a.x(), dy = b.y() - a.y();
  const double ex = c.x() - a.x(), ey = c.y() - a.y();
  const double bl = dx * dx + dy * dy, cl = ex * ex + ey * ey;
  const double d = 0.5 / (dx * ey - dy * ex);
  const double x = (ey * bl - dy * cl) * d, y = (dx * cl - ex * bl) * d;
  const double r = x * x + y * y;
  return std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
}

Vec2 circumcenter(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double dx = b.x() - a.x(), dy = b.y() - a.y();
  const double ex = c.x() - a.x(), ey = c.y() - a.y();
  const double bl = dx * dx + dy * dy, cl = ex * ex + ey * ey;
  const double d = 0.5 / (dx * ey - dy * ex);
  return {a.x() + (ey * bl - dy * cl) * d, a.y() + (dx * cl - ex * bl) * d};
}

std::size_t next_he(std::size_t e) { return e % 3 == 2 ? e - 2 : e + 1; }
std::size_t prev_he(std::size_t e) { return e % 3 == 0 ? e + 2 : e - 1; }

// Half-edge triangulation: half-edge e runs from tri[e] to tri[next_he(e)].
struct Mesh {
  std::vector<std::size_t> tri;
  std::vector<std::size_t> twin;

  std::size_t add(std::size_t a, std::size_t b, std::size_t c) {
    const std::size_t t = tri.size();
    tri.insert(tri.end(), {a, b, c});
    twin.insert(twin.end(), {kNone, kNone, kNone});
    return t;
  }
  void link(std::size_t a, std::size_t b) {
    twin[a] = b;
    if (b != kNone) twin[b] = a;
  }
};

}  // namespace

std::vector<std::array<std::size_t, 3>> delaunay_2d(const std::vector<Vec2>& input) {
  const std::size_t n = input.size();
  if (n < 3) throw Error(ErrorCode::DegenerateGeometry, "triangulation needs at least 3 points");

  // Normalise to a unit box so the flip tolerance is scale-free.
  Vec2 lo = input.front(), hi = lo;
  for (const auto& p : input) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double scale = std::max(hi.x() - lo.x(), hi.y() - lo.y());
  if (!(scale > 0.0)) throw Error(ErrorCode::DegenerateGeometry, "all points coincide");
  std::vector<Vec2> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = (input[i] - lo) / scale;
  const Vec2 mid(0.5 * (hi.x() - lo.x()) / scale, 0.5 * (hi.y() - lo.y()) / scale);

  auto closest_to = [&](const Vec2& q, std::size_t skip) {
    std::size_t best = kNone;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (i == skip) continue;
      const double d = (pts[i] - q).squaredNorm();
      if (d < best_d && !(skip != kNone && d == 0.0 && (pts[i] - pts[skip]).squaredNorm() == 0.0)) {
        best_d = d;
        best = i;
      }
    }
    return best;
  };
  const std::size_t i0 = closest_to(mid, kNone);
  std::size_t i1 = kNone;
  {
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double d = (pts[i] - pts[i0]).squaredNorm();
      if (i != i0 && d > 0.0 && d < best_d) {
        best_d = d;
        i1 = i;
      }
    }
  }
  if (i1 == kNone) throw Error(ErrorCode::DegenerateGeometry, "all points coincide");
  std::size_t i2 = kNone;
  {
    double best_r = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (i == i0 || i == i1) continue;
      if (std::abs(static_cast<double>(orient(pts[i0], pts[i1], pts[i]))) < 1e-15) continue;
      const double r = circumradius2(pts[i0], pts[i1], pts[i]);
      if (r < best_r) {
        best_r = r;
        i2 = i;
      }
    }
  }
  if (i2 == kNone) throw Error(ErrorCode::DegenerateGeometry, "all points are collinear");
  if (orient(pts[i0], pts[i1], pts[i2]) < 0) std::swap(i1, i2);
  const Vec2 center = circumcenter(pts[i0], pts[i1], pts[i2]);

  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    if (i != i0 && i != i1 && i != i2) order.push_back(i);
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) dist[i] = (pts[i] - center).squaredNorm();
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
  });

  Mesh mesh;
  mesh.tri.reserve(6 * n);
  mesh.twin.reserve(6 * n);
  // Hull as a counter-clockwise linked list; hull_he[v] is the half-edge v -> next[v].
  std::vector<std::size_t> next(n, kNone), prev(n, kNone), hull_he(n, kNone);
  const std::size_t t0 = mesh.add(i0, i1, i2);
  next[i0] = i1; prev[i1] = i0; hull_he[i0] = t0;
  next[i1] = i2; prev[i2] = i1; hull_he[i1] = t0 + 1;
  next[i2] = i0; prev[i0] = i2; hull_he[i2] = t0 + 2;
  std::size_t hull_start = i0;

  std::vector<char> inserted(n, 0);
  inserted[i0] = inserted[i1] = inserted[i2] = 1;

  for (const std::size_t p : order) {
    // Skip exact duplicates of inserted points.
    bool dup = false;
    for (std::size_t v = hull_start;;) {
      if (pts[v] == pts[p]) {
        dup = true;
        break;
      }
      v = next[v];
      if (v == hull_start) break;
    }
    if (dup) continue;

    std::size_t e = kNone;
    for (std::size_t v = hull_start;;) {
      if (orient(pts[v], pts[next[v]], pts[p]) < 0) {
        e = v;
        break;
      }
      v = next[v];
      if (v == hull_start) break;
    }
    if (e == kNone) continue;  // numerically on the hull; leave unreferenced

    // Walk back to the first visible edge so the visible chain is contiguous from e.
    for (std::size_t guard = 0; guard < n; ++guard) {
      const std::size_t pv = prev[e];
      if (pv == e || !(orient(pts[pv], pts[e], pts[p]) < 0)) break;
      e = pv;
    }

    std::size_t q = next[e];
    std::size_t t = mesh.add(e, p, q);
    mesh.link(t + 2, hull_he[e]);
    std::size_t first_tri = t;
    std::size_t last_tri = t;

    std::size_t nq = next[q];
    while (orient(pts[q], pts[nq], pts[p]) < 0) {
      const std::size_t t2 = mesh.add(q, p, nq);
      mesh.link(t2 + 2, hull_he[q]);
      mesh.link(t2, last_tri + 1);  // q->p pairs with p->q
      hull_he[q] = kNone;
      next[q] = kNone;
      prev[q] = kNone;
      last_tri = t2;
      q = nq;
      nq = next[q];
    }

    next[e] = p;
    prev[p] = e;
    next[p] = q;
    prev[q] = p;
    hull_he[e] = first_tri;      // e->p
    hull_he[p] = last_tri + 1;   // p->q
    hull_start = e;
    inserted[p] = 1;
  }

  // Lawson flips until every interior edge is locally Delaunay.
  std::vector<std::size_t> stack;
  for (std::size_t h = 0; h < mesh.tri.size(); ++h)
    if (mesh.twin[h] != kNone && h < mesh.twin[h]) stack.push_back(h);
  const std::size_t max_flips = 64 * n * n + 1024;
  std::size_t flips = 0;
  constexpr Real kEps = 1e-13L;
  while (!stack.empty() && flips < max_flips) {
    const std::size_t a = stack.back();
    stack.pop_back();
    const std::size_t b = mesh.twin[a];
    if (b == kNone) continue;
    const std::size_t a1 = next_he(a), a2 = prev_he(a);
    const std::size_t b1 = next_he(b), b2 = prev_he(b);
    const std::size_t p0 = mesh.tri[a], p1 = mesh.tri[a1], pa = mesh.tri[a2], pb = mesh.tri[b2];
    if (!(incircle(pts[p0], pts[p1], pts[pa], pts[pb]) > kEps)) continue;
    if (!(orient(pts[p0], pts[pb], pts[pa]) > 0) || !(orient(pts[p1], pts[pa], pts[pb]) > 0)) continue;

    const std::size_t ta1 = mesh.twin[a1], ta2 = mesh.twin[a2];
    const std::size_t tb1 = mesh.twin[b1], tb2 = mesh.twin[b2];
    mesh.tri[a] = p0; mesh.tri[a1] = pb; mesh.tri[a2] = pa;
    mesh.tri[b] = p1; mesh.tri[b1] = pa; mesh.tri[b2] = pb;
    mesh.link(a, tb1);
    mesh.link(a1, b1);
    mesh.link(a2, ta2);
    mesh.link(b, ta1);
    mesh.link(b2, tb2);
    ++flips;
    for (std::size_t h : {a, a2, b, b2})
      if (mesh.twin[h] != kNone) stack.push_back(h);
  }

  std::vector<std::array<std::size_t, 3>> out;
  out.reserve(mesh.tri.size() / 3);
  for (std::size_t t = 0; t < mesh.tri.size(); t += 3) out.push_back({mesh.tri[t], mesh.tri[t + 1], mesh.tri[t + 2]});
  return out;
}

}  // namespace strawkit
