#ifndef TSVSHIELD_GRID_HPP
#define TSVSHIELD_GRID_HPP

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsvshield {

/// Equidistant scalar field over one die. Index (0,0) is the lower-left bin.
/// Units depend on use: W/um^2 for power, K for temperature, [0,1] for TSV
/// density, [-1,1] for correlation stability.
struct Grid2D {
	int nx = 0;
	int ny = 0;
	double pitch_x = 0.0; // um per bin
	double pitch_y = 0.0;
	std::vector<double> v;

	Grid2D() = default;
	Grid2D(int nx_, int ny_, double pitch_x_, double pitch_y_, double init = 0.0)
	    : nx(nx_), ny(ny_), pitch_x(pitch_x_), pitch_y(pitch_y_),
	      v(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_), init) {
		if (nx_ < 1 || ny_ < 1) {
			throw std::invalid_argument("Grid2D: dims must be positive");
		}
	}

	std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * nx + x; }
	double& at(int x, int y) { return v[idx(x, y)]; }
	double at(int x, int y) const { return v[idx(x, y)]; }
	std::size_t size() const { return v.size(); }
	double bin_area() const { return pitch_x * pitch_y; }

	bool same_dims(Grid2D const& o) const { return nx == o.nx && ny == o.ny; }

	double max_value() const { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }
	double min_value() const { return v.empty() ? 0.0 : *std::min_element(v.begin(), v.end()); }

	double sum() const {
		double s = 0.0;
		for (double x : v) {
			s += x;
		}
		return s;
	}

	void fill(double value) { std::fill(v.begin(), v.end(), value); }
};

inline void require_same_dims(Grid2D const& a, Grid2D const& b, char const* what) {
	if (!a.same_dims(b)) {
		throw std::invalid_argument(std::string(what) + ": grid dimensions differ");
	}
}

} // namespace tsvshield

#endif
