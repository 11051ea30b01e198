#ifndef TSVSHIELD_GEOMETRY_HPP
#define TSVSHIELD_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <limits>

namespace tsvshield {

/// Axis-aligned rectangle, lower-left anchored, in um.
struct Rect {
	double x = 0.0;
	double y = 0.0;
	double w = 0.0;
	double h = 0.0;

	double x2() const { return x + w; }
	double y2() const { return y + h; }
	double area() const { return w * h; }
	double cx() const { return x + 0.5 * w; }
	double cy() const { return y + 0.5 * h; }

	bool contains(double px, double py) const {
		return px >= x && px <= x2() && py >= y && py <= y2();
	}
};

/// Strict interior overlap; touching edges do not count.
inline bool overlaps(Rect const& a, Rect const& b) {
	return a.x < b.x2() && b.x < a.x2() && a.y < b.y2() && b.y < a.y2();
}

/// Area of the intersection, 0 if disjoint.
inline double clip_area(Rect const& a, Rect const& b) {
	double const w = std::min(a.x2(), b.x2()) - std::max(a.x, b.x);
	double const h = std::min(a.y2(), b.y2()) - std::max(a.y, b.y);
	if (w <= 0.0 || h <= 0.0) {
		return 0.0;
	}
	return w * h;
}

/// Shortest gap between the rects along one axis given they overlap in the
/// other; used for abutment tests. Returns +inf when projections are disjoint
/// in both axes (diagonal neighbors are not adjacent).
inline double abutment_gap(Rect const& a, Rect const& b) {
	double const gx = std::max(a.x, b.x) - std::min(a.x2(), b.x2());
	double const gy = std::max(a.y, b.y) - std::min(a.y2(), b.y2());
	bool const x_overlap = gx < 0.0;
	bool const y_overlap = gy < 0.0;
	if (x_overlap && y_overlap) {
		return 0.0; // overlapping rects
	}
	if (x_overlap) {
		return gy;
	}
	if (y_overlap) {
		return gx;
	}
	return std::numeric_limits<double>::infinity();
}

inline bool inside(Rect const& inner, Rect const& outer, double eps = 1e-9) {
	return inner.x >= outer.x - eps && inner.y >= outer.y - eps &&
	       inner.x2() <= outer.x2() + eps && inner.y2() <= outer.y2() + eps;
}

} // namespace tsvshield

#endif
