#ifndef TSVSHIELD_THERMAL_HPP
#define TSVSHIELD_THERMAL_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsvshield/grid.hpp"

namespace tsvshield {

// ---------------------------------------------------------------------------
// Die-stack material model
// ---------------------------------------------------------------------------

/// Layer geometry and conductivities of the two-die face-to-back stack.
/// Heat leaves through the heatsink above die 2 (primary path) and through
/// the package below die 1 (secondary path). Conductivities are W/(m*K),
/// thicknesses um, areal conductances W/(K*um^2).
///
/// Defaults are sized so that 10 W spread uniformly over a 16 mm^2 stack
/// settles about 15 K above ambient, with the package path carrying 1/10 of
/// the heatsink path.
struct StackModel {
	double k_si_1 = 150.0;
	double t_si_1 = 100.0;
	double k_si_2 = 150.0;
	double t_si_2 = 100.0;
	double k_bond = 2.0;   // bond/BEOL layer between the dies
	double t_bond = 10.0;
	double k_tsv = 385.0;  // copper fill
	double sink_coeff = 3.79e-8;
	double pkg_coeff = 3.79e-9;
	double ambient = 293.0;
};

struct ThermalResult {
	Grid2D t1; // K
	Grid2D t2;
	double peak = 0.0;
	double residual = 0.0; // W, sum of node power imbalances
	int iterations = 0;
};

struct SolveOptions {
	double tolerance = 1e-6; // relative to total injected power
	int max_iterations = 50000;
};

class SolverError : public std::runtime_error {
public:
	SolverError(std::string const& what, double residual)
	    : std::runtime_error(what), residual_(residual) {}
	double residual() const { return residual_; }

private:
	double residual_;
};

namespace detail {

// k [W/(m*K)], area [um^2], length [um] -> W/K
inline double conductance(double k, double area_um2, double length_um) {
	return k * area_um2 / length_um * 1e-6;
}

/// Per-bin conductances of the discretized stack network.
struct ThermalNetwork {
	int nx = 0, ny = 0;
	double g_lat_x1 = 0.0, g_lat_y1 = 0.0; // die-1 lateral
	double g_lat_x2 = 0.0, g_lat_y2 = 0.0; // die-2 lateral
	double g_sink = 0.0;                   // die-2 bin -> ambient
	double g_pkg = 0.0;                    // die-1 bin -> ambient
	std::vector<double> g_vert;            // die-1 bin <-> die-2 bin

	std::size_t n() const { return static_cast<std::size_t>(nx) * ny; }

	ThermalNetwork(Grid2D const& tsv_density, StackModel const& stack) {
		nx = tsv_density.nx;
		ny = tsv_density.ny;
		double const px = tsv_density.pitch_x;
		double const py = tsv_density.pitch_y;
		double const bin_area = px * py;
		g_lat_x1 = conductance(stack.k_si_1, stack.t_si_1 * py, px);
		g_lat_y1 = conductance(stack.k_si_1, stack.t_si_1 * px, py);
		g_lat_x2 = conductance(stack.k_si_2, stack.t_si_2 * py, px);
		g_lat_y2 = conductance(stack.k_si_2, stack.t_si_2 * px, py);
		g_sink = stack.sink_coeff * bin_area;
		g_pkg = stack.pkg_coeff * bin_area;
		g_vert.resize(n());
		for (std::size_t i = 0; i < n(); ++i) {
			double const d = tsv_density.v[i];
			double const k_eff = (1.0 - d) * stack.k_bond + d * stack.k_tsv;
			g_vert[i] = conductance(k_eff, bin_area, stack.t_bond);
		}
	}

	/// y = A x for the 2n-node conduction matrix (temperatures relative to
	/// ambient). Layer 1 occupies [0,n), layer 2 [n,2n).
	void apply(std::vector<double> const& x, std::vector<double>& y) const {
		std::size_t const nn = n();
		for (int layer = 0; layer < 2; ++layer) {
			std::size_t const off = layer * nn;
			double const glx = layer == 0 ? g_lat_x1 : g_lat_x2;
			double const gly = layer == 0 ? g_lat_y1 : g_lat_y2;
			double const gamb = layer == 0 ? g_pkg : g_sink;
			for (int by = 0; by < ny; ++by) {
				for (int bx = 0; bx < nx; ++bx) {
					std::size_t const i = static_cast<std::size_t>(by) * nx + bx;
					double const xi = x[off + i];
					double acc = (gamb + g_vert[i]) * xi - g_vert[i] * x[(1 - layer) * nn + i];
					if (bx > 0) {
						acc += glx * (xi - x[off + i - 1]);
					}
					if (bx + 1 < nx) {
						acc += glx * (xi - x[off + i + 1]);
					}
					if (by > 0) {
						acc += gly * (xi - x[off + i - nx]);
					}
					if (by + 1 < ny) {
						acc += gly * (xi - x[off + i + nx]);
					}
					y[off + i] = acc;
				}
			}
		}
	}

	void diagonal(std::vector<double>& d) const {
		std::size_t const nn = n();
		d.assign(2 * nn, 0.0);
		for (int layer = 0; layer < 2; ++layer) {
			std::size_t const off = layer * nn;
			double const glx = layer == 0 ? g_lat_x1 : g_lat_x2;
			double const gly = layer == 0 ? g_lat_y1 : g_lat_y2;
			double const gamb = layer == 0 ? g_pkg : g_sink;
			for (int by = 0; by < ny; ++by) {
				for (int bx = 0; bx < nx; ++bx) {
					std::size_t const i = static_cast<std::size_t>(by) * nx + bx;
					double acc = gamb + g_vert[i];
					acc += glx * ((bx > 0 ? 1 : 0) + (bx + 1 < nx ? 1 : 0));
					acc += gly * ((by > 0 ? 1 : 0) + (by + 1 < ny ? 1 : 0));
					d[off + i] = acc;
				}
			}
		}
	}
};

inline double l1_norm(std::vector<double> const& v) {
	double s = 0.0;
	for (double x : v) {
		s += std::fabs(x);
	}
	return s;
}

inline double dot(std::vector<double> const& a, std::vector<double> const& b) {
	double s = 0.0;
	for (std::size_t i = 0; i < a.size(); ++i) {
		s += a[i] * b[i];
	}
	return s;
}

} // namespace detail

/// Steady-state solve of the two-die conduction network. Each bin is a node
/// per die; lateral conductances come from the silicon layers, the vertical
/// inter-die conductance from the bond layer with effective conductivity
/// k_eff = (1-d)*k_bond + d*k_tsv per bin. Converged when the summed node
/// power imbalance falls below tolerance x total power (preconditioned CG;
/// the contract admits any method meeting that residual).
inline ThermalResult solve_steady(Grid2D const& power1, Grid2D const& power2,
                                  Grid2D const& tsv_density, StackModel const& stack,
                                  SolveOptions const& opts = {},
                                  ThermalResult const* warm_start = nullptr) {
	require_same_dims(power1, power2, "solve_steady");
	require_same_dims(power1, tsv_density, "solve_steady");

	std::size_t const n = power1.size();
	ThermalResult res;
	res.t1 = Grid2D(power1.nx, power1.ny, power1.pitch_x, power1.pitch_y, stack.ambient);
	res.t2 = res.t1;

	double const bin_area = power1.bin_area();
	double total_power = 0.0;
	std::vector<double> b(2 * n);
	for (std::size_t i = 0; i < n; ++i) {
		b[i] = power1.v[i] * bin_area;
		b[n + i] = power2.v[i] * bin_area;
		total_power += b[i] + b[n + i];
	}
	if (total_power <= 0.0) {
		res.peak = stack.ambient;
		return res; // exactly ambient everywhere
	}

	detail::ThermalNetwork const net(tsv_density, stack);
	std::vector<double> diag;
	net.diagonal(diag);

	std::vector<double> u(2 * n, 0.0);
	if (warm_start != nullptr && warm_start->t1.same_dims(power1)) {
		for (std::size_t i = 0; i < n; ++i) {
			u[i] = warm_start->t1.v[i] - stack.ambient;
			u[n + i] = warm_start->t2.v[i] - stack.ambient;
		}
	}

	double const target = opts.tolerance * total_power;
	std::vector<double> r(2 * n), z(2 * n), p(2 * n), ap(2 * n);
	net.apply(u, ap);
	for (std::size_t i = 0; i < 2 * n; ++i) {
		r[i] = b[i] - ap[i];
	}
	double res_l1 = detail::l1_norm(r);
	int iter = 0;
	if (res_l1 > target) {
		for (std::size_t i = 0; i < 2 * n; ++i) {
			z[i] = r[i] / diag[i];
		}
		p = z;
		double rz = detail::dot(r, z);
		for (; iter < opts.max_iterations; ++iter) {
			net.apply(p, ap);
			double const pap = detail::dot(p, ap);
			if (pap <= 0.0) {
				break; // numerically exhausted
			}
			double const alpha = rz / pap;
			for (std::size_t i = 0; i < 2 * n; ++i) {
				u[i] += alpha * p[i];
				r[i] -= alpha * ap[i];
			}
			bool const refresh = (iter & 63) == 63;
			if (refresh) {
				// recompute the true residual against recursion drift
				net.apply(u, ap);
				for (std::size_t i = 0; i < 2 * n; ++i) {
					r[i] = b[i] - ap[i];
				}
			}
			res_l1 = detail::l1_norm(r);
			if (res_l1 <= target) {
				++iter;
				break;
			}
			for (std::size_t i = 0; i < 2 * n; ++i) {
				z[i] = r[i] / diag[i];
			}
			double const rz_next = detail::dot(r, z);
			double const beta = refresh ? 0.0 : rz_next / rz; // restart after refresh
			for (std::size_t i = 0; i < 2 * n; ++i) {
				p[i] = z[i] + beta * p[i];
			}
			rz = rz_next;
		}
	}
	// true residual for the report
	net.apply(u, ap);
	for (std::size_t i = 0; i < 2 * n; ++i) {
		r[i] = b[i] - ap[i];
	}
	res_l1 = detail::l1_norm(r);
	if (res_l1 > target) {
		throw SolverError("solve_steady: no convergence after " +
		                      std::to_string(opts.max_iterations) + " iterations, residual " +
		                      std::to_string(res_l1) + " W",
		                  res_l1);
	}

	res.iterations = iter;
	res.residual = res_l1;
	double peak = stack.ambient;
	for (std::size_t i = 0; i < n; ++i) {
		res.t1.v[i] = stack.ambient + u[i];
		res.t2.v[i] = stack.ambient + u[n + i];
		peak = std::max({peak, res.t1.v[i], res.t2.v[i]});
	}
	res.peak = peak;
	return res;
}

/// Heat leaving through heatsink + package, W. Balances total injected power
/// at convergence.
inline double heat_to_ambient(ThermalResult const& res, StackModel const& stack) {
	double const bin_area = res.t1.bin_area();
	double out = 0.0;
	for (std::size_t i = 0; i < res.t1.size(); ++i) {
		out += stack.pkg_coeff * bin_area * (res.t1.v[i] - stack.ambient);
		out += stack.sink_coeff * bin_area * (res.t2.v[i] - stack.ambient);
	}
	return out;
}

} // namespace tsvshield

#endif
