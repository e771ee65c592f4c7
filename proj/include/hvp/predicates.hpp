#pragma once

#include <algorithm>
#include <cmath>

#include <boost/multiprecision/cpp_int.hpp>

#include "vec2.hpp"

namespace hvp::predicates {

using Exact = boost::multiprecision::cpp_rational;

namespace detail {

inline constexpr double kEps = 0x1.0p-53;
inline constexpr double kOrientBound = (3.0 + 16.0 * kEps) * kEps;
inline constexpr double kIncircleBound = (10.0 + 96.0 * kEps) * kEps;

inline int sign_of(const Exact& v) { return v.sign(); }

inline int orient_exact(Vec2 a, Vec2 b, Vec2 c) {
    const Exact ax(a.x), ay(a.y), bx(b.x), by(b.y), cx(c.x), cy(c.y);
    return sign_of((bx - ax) * (cy - ay) - (by - ay) * (cx - ax));
}

inline int incircle_exact(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const Exact adx = Exact(a.x) - Exact(d.x), ady = Exact(a.y) - Exact(d.y);
    const Exact bdx = Exact(b.x) - Exact(d.x), bdy = Exact(b.y) - Exact(d.y);
    const Exact cdx = Exact(c.x) - Exact(d.x), cdy = Exact(c.y) - Exact(d.y);
    const Exact alift = adx * adx + ady * ady;
    const Exact blift = bdx * bdx + bdy * bdy;
    const Exact clift = cdx * cdx + cdy * cdy;
    return sign_of(alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) + clift * (adx * bdy - bdx * ady));
}

}  // namespace detail

/// Sign of the orientation of (a, b, c): +1 counter-clockwise, -1 clockwise, 0 collinear. Exact.
inline int orient2d(Vec2 a, Vec2 b, Vec2 c) {
    const double l = (b.x - a.x) * (c.y - a.y);
    const double r = (b.y - a.y) * (c.x - a.x);
    const double det = l - r;
    const double bound = detail::kOrientBound * (std::fabs(l) + std::fabs(r));
    if (det > bound) return 1;
    if (-det > bound) return -1;
    return detail::orient_exact(a, b, c);
}

/// +1 if d lies strictly inside the circle through the counter-clockwise triangle (a, b, c),
/// -1 if strictly outside, 0 if cocircular. Exact.
inline int incircle(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const double bc = bdx * cdy - cdx * bdy, ca = cdx * ady - adx * cdy, ab = adx * bdy - bdx * ady;
    const double alift = adx * adx + ady * ady, blift = bdx * bdx + bdy * bdy, clift = cdx * cdx + cdy * cdy;
    const double det = alift * bc + blift * ca + clift * ab;
    const double permanent = (std::fabs(bdx * cdy) + std::fabs(cdx * bdy)) * alift +
                             (std::fabs(cdx * ady) + std::fabs(adx * cdy)) * blift +
                             (std::fabs(adx * bdy) + std::fabs(bdx * ady)) * clift;
    const double bound = detail::kIncircleBound * permanent;
    if (det > bound) return 1;
    if (-det > bound) return -1;
    return detail::incircle_exact(a, b, c, d);
}

/// In-circle test with symbolic perturbation. Each site's paraboloid lift is lowered by
/// an infinitesimal that dominates for lower indices, so a cocircular tie is decided by
/// the lowest-index site m of the four: if m is d, d is inside; otherwise lowering m
/// tilts the lifted plane, and d is inside iff it lies across the opposite side from m.
inline bool incircle_perturbed(Vec2 a, Vec2 b, Vec2 c, Vec2 d, int ia, int ib, int ic, int id) {
    const int s = incircle(a, b, c, d);
    if (s != 0) return s > 0;
    const int m = std::min({ia, ib, ic, id});
    if (m == id) return true;
    if (m == ia) return orient2d(b, c, d) < 0;
    if (m == ib) return orient2d(c, a, d) < 0;
    return orient2d(a, b, d) < 0;
}

}  // namespace hvp::predicates
