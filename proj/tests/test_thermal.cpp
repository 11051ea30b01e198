#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "tsvshield/thermal.hpp"

using namespace tsvshield;

namespace {

// Dense direct solve of the identical network: the matrix is assembled
// column-by-column through the network's own matvec, then eliminated with
// partial pivoting. Independent of the CG path.
std::vector<double> dense_solve(Grid2D const& p1, Grid2D const& p2, Grid2D const& d,
                                StackModel const& stack) {
	detail::ThermalNetwork const net(d, stack);
	std::size_t const n = net.n();
	std::size_t const nn = 2 * n;
	std::vector<std::vector<double>> a(nn, std::vector<double>(nn, 0.0));
	std::vector<double> unit(nn, 0.0), col(nn, 0.0);
	for (std::size_t j = 0; j < nn; ++j) {
		unit[j] = 1.0;
		net.apply(unit, col);
		unit[j] = 0.0;
		for (std::size_t i = 0; i < nn; ++i) {
			a[i][j] = col[i];
		}
	}
	std::vector<double> b(nn);
	double const bin_area = p1.bin_area();
	for (std::size_t i = 0; i < n; ++i) {
		b[i] = p1.v[i] * bin_area;
		b[n + i] = p2.v[i] * bin_area;
	}
	// LU with partial pivoting
	for (std::size_t k = 0; k < nn; ++k) {
		std::size_t piv = k;
		for (std::size_t i = k + 1; i < nn; ++i) {
			if (std::fabs(a[i][k]) > std::fabs(a[piv][k])) {
				piv = i;
			}
		}
		std::swap(a[k], a[piv]);
		std::swap(b[k], b[piv]);
		for (std::size_t i = k + 1; i < nn; ++i) {
			double const f = a[i][k] / a[k][k];
			if (f == 0.0) {
				continue;
			}
			for (std::size_t j = k; j < nn; ++j) {
				a[i][j] -= f * a[k][j];
			}
			b[i] -= f * b[k];
		}
	}
	std::vector<double> x(nn);
	for (std::size_t k = nn; k-- > 0;) {
		double s = b[k];
		for (std::size_t j = k + 1; j < nn; ++j) {
			s -= a[k][j] * x[j];
		}
		x[k] = s / a[k][k];
	}
	for (double& t : x) {
		t += stack.ambient;
	}
	return x;
}

Grid2D uniform_grid(int nx, int ny, double pitch, double value) {
	return Grid2D(nx, ny, pitch, pitch, value);
}

} // namespace

TEST_CASE("solve_steady: zero power gives exactly ambient") {
	StackModel const stack;
	Grid2D const zero = uniform_grid(8, 8, 100.0, 0.0);
	ThermalResult const res = solve_steady(zero, zero, zero, stack);
	for (double t : res.t1.v) {
		CHECK(t == stack.ambient);
	}
	for (double t : res.t2.v) {
		CHECK(t == stack.ambient);
	}
	CHECK(res.peak == stack.ambient);
	CHECK(res.iterations == 0);
}

TEST_CASE("solve_steady: single hot bin peaks there and decays monotonically") {
	StackModel const stack;
	int const n = 9;
	Grid2D p1 = uniform_grid(n, n, 100.0, 1e-5);
	Grid2D p2 = p1;
	Grid2D const d = uniform_grid(n, n, 100.0, 0.0);
	int const hx = 4, hy = 4;
	p2.at(hx, hy) = 5e-3;
	ThermalResult const res = solve_steady(p1, p2, d, stack, {1e-9, 50000});

	CHECK(res.peak == Catch::Approx(res.t2.at(hx, hy)));
	for (int x = hx; x + 1 < n; ++x) {
		CHECK(res.t2.at(x + 1, hy) < res.t2.at(x, hy));
	}
	for (int x = hx; x > 0; --x) {
		CHECK(res.t2.at(x - 1, hy) < res.t2.at(x, hy));
	}
	for (int y = hy; y + 1 < n; ++y) {
		CHECK(res.t2.at(hx, y + 1) < res.t2.at(hx, y));
	}
	for (int y = hy; y > 0; --y) {
		CHECK(res.t2.at(hx, y - 1) < res.t2.at(hx, y));
	}
	for (double t : res.t1.v) {
		CHECK(t >= stack.ambient - 1e-6);
	}
}

TEST_CASE("solve_steady matches dense direct solve") {
	StackModel const stack;

	SECTION("4x4 uniform power on both dies") {
		Grid2D const p = uniform_grid(4, 4, 250.0, 0.01);
		Grid2D const d = uniform_grid(4, 4, 250.0, 0.0);
		ThermalResult const res = solve_steady(p, p, d, stack, {1e-12, 50000});
		std::vector<double> const want = dense_solve(p, p, d, stack);
		for (std::size_t i = 0; i < p.size(); ++i) {
			CHECK(res.t1.v[i] == Catch::Approx(want[i]).epsilon(1e-8));
			CHECK(res.t2.v[i] == Catch::Approx(want[p.size() + i]).epsilon(1e-8));
		}
	}

	SECTION("8x8 random power and TSV density") {
		std::mt19937_64 rng(99);
		std::uniform_real_distribution<double> up(0.0, 2e-3);
		std::uniform_real_distribution<double> ud(0.0, 1.0);
		Grid2D p1 = uniform_grid(8, 8, 120.0, 0.0);
		Grid2D p2 = p1, d = p1;
		for (std::size_t i = 0; i < p1.size(); ++i) {
			p1.v[i] = up(rng);
			p2.v[i] = up(rng);
			d.v[i] = ud(rng) < 0.3 ? ud(rng) : 0.0;
		}
		ThermalResult const res = solve_steady(p1, p2, d, stack, {1e-12, 50000});
		std::vector<double> const want = dense_solve(p1, p2, d, stack);
		for (std::size_t i = 0; i < p1.size(); ++i) {
			CHECK(res.t1.v[i] == Catch::Approx(want[i]).epsilon(1e-8));
			CHECK(res.t2.v[i] == Catch::Approx(want[p1.size() + i]).epsilon(1e-8));
		}
	}
}

TEST_CASE("solve_steady: hand-assembled 2x2 network sanity") {
	// Independent assembly from first principles for a 2x2 grid with no
	// TSVs: checks conductance construction, not just the solver.
	StackModel stack;
	stack.ambient = 300.0;
	double const pitch = 50.0;
	Grid2D p1 = uniform_grid(2, 2, pitch, 0.0);
	Grid2D p2 = p1, d = p1;
	p1.at(0, 0) = 4e-4; // 1 mW in one bin

	double const bin_area = pitch * pitch;
	double const g_lat = stack.k_si_1 * stack.t_si_1 * pitch / pitch * 1e-6;
	double const g_v = stack.k_bond * bin_area / stack.t_bond * 1e-6;
	double const g_sink = stack.sink_coeff * bin_area;
	double const g_pkg = stack.pkg_coeff * bin_area;

	std::vector<std::vector<double>> a(8, std::vector<double>(8, 0.0));
	auto add_edge = [&](int i, int j, double g) {
		a[i][i] += g;
		a[j][j] += g;
		a[i][j] -= g;
		a[j][i] -= g;
	};
	// die 1 nodes 0..3 (row major), die 2 nodes 4..7
	for (int off : {0, 4}) {
		add_edge(off + 0, off + 1, g_lat);
		add_edge(off + 2, off + 3, g_lat);
		add_edge(off + 0, off + 2, g_lat);
		add_edge(off + 1, off + 3, g_lat);
	}
	for (int i = 0; i < 4; ++i) {
		add_edge(i, 4 + i, g_v);
		a[i][i] += g_pkg;
		a[4 + i][4 + i] += g_sink;
	}
	std::vector<double> b(8, 0.0);
	b[0] = p1.at(0, 0) * bin_area;
	// direct solve by Gaussian elimination
	for (int k = 0; k < 8; ++k) {
		int piv = k;
		for (int i = k + 1; i < 8; ++i) {
			if (std::fabs(a[i][k]) > std::fabs(a[piv][k])) {
				piv = i;
			}
		}
		std::swap(a[k], a[piv]);
		std::swap(b[k], b[piv]);
		for (int i = k + 1; i < 8; ++i) {
			double const f = a[i][k] / a[k][k];
			for (int j = k; j < 8; ++j) {
				a[i][j] -= f * a[k][j];
			}
			b[i] -= f * b[k];
		}
	}
	std::vector<double> x(8);
	for (int k = 7; k >= 0; --k) {
		double s = b[k];
		for (int j = k + 1; j < 8; ++j) {
			s -= a[k][j] * x[j];
		}
		x[k] = s / a[k][k];
	}

	ThermalResult const res = solve_steady(p1, p2, d, stack, {1e-12, 50000});
	for (int i = 0; i < 4; ++i) {
		CHECK(res.t1.v[i] == Catch::Approx(stack.ambient + x[i]).epsilon(1e-9));
		CHECK(res.t2.v[i] == Catch::Approx(stack.ambient + x[4 + i]).epsilon(1e-9));
	}
}

TEST_CASE("energy balance: ambient outflow equals injected power") {
	StackModel const stack;
	std::mt19937_64 rng(314);
	std::uniform_real_distribution<double> up(0.0, 1e-3);
	Grid2D p1 = uniform_grid(16, 16, 100.0, 0.0);
	Grid2D p2 = p1, d = p1;
	for (std::size_t i = 0; i < p1.size(); ++i) {
		p1.v[i] = up(rng);
		p2.v[i] = up(rng);
		d.v[i] = up(rng) > 5e-4 ? 1.0 : 0.0;
	}
	ThermalResult const res = solve_steady(p1, p2, d, stack, {1e-8, 50000});
	double const total = (p1.sum() + p2.sum()) * p1.bin_area();
	CHECK(heat_to_ambient(res, stack) == Catch::Approx(total).epsilon(1e-6));
}

TEST_CASE("monotonicity: extra power never cools any bin") {
	StackModel const stack;
	std::mt19937_64 rng(271);
	std::uniform_real_distribution<double> up(0.0, 1e-3);
	Grid2D p1 = uniform_grid(8, 8, 100.0, 0.0);
	Grid2D p2 = p1, d = p1;
	for (std::size_t i = 0; i < p1.size(); ++i) {
		p1.v[i] = up(rng);
		p2.v[i] = up(rng);
	}
	ThermalResult const before = solve_steady(p1, p2, d, stack, {1e-10, 50000});
	p1.at(3, 5) += 2e-3;
	ThermalResult const after = solve_steady(p1, p2, d, stack, {1e-10, 50000});
	for (std::size_t i = 0; i < p1.size(); ++i) {
		CHECK(after.t1.v[i] >= before.t1.v[i] - 1e-7);
		CHECK(after.t2.v[i] >= before.t2.v[i] - 1e-7);
	}
}

TEST_CASE("mirror-symmetric inputs give mirror-symmetric fields") {
	StackModel const stack;
	int const n = 8;
	Grid2D p1 = uniform_grid(n, n, 100.0, 0.0);
	Grid2D p2 = p1, d = p1;
	std::mt19937_64 rng(11);
	std::uniform_real_distribution<double> up(0.0, 1e-3);
	for (int y = 0; y < n; ++y) {
		for (int x = 0; x < n / 2; ++x) {
			double const vp = up(rng), vq = up(rng), vd = up(rng) > 5e-4 ? 0.8 : 0.0;
			p1.at(x, y) = p1.at(n - 1 - x, y) = vp;
			p2.at(x, y) = p2.at(n - 1 - x, y) = vq;
			d.at(x, y) = d.at(n - 1 - x, y) = vd;
		}
	}
	ThermalResult const res = solve_steady(p1, p2, d, stack, {1e-10, 50000});
	for (int y = 0; y < n; ++y) {
		for (int x = 0; x < n / 2; ++x) {
			CHECK(res.t1.at(x, y) == Catch::Approx(res.t1.at(n - 1 - x, y)).margin(1e-6));
			CHECK(res.t2.at(x, y) == Catch::Approx(res.t2.at(n - 1 - x, y)).margin(1e-6));
		}
	}
}

TEST_CASE("raising TSV density shrinks the inter-die temperature gap") {
	StackModel const stack;
	int const n = 8;
	Grid2D p1 = uniform_grid(n, n, 100.0, 0.0);
	Grid2D p2 = p1;
	Grid2D d0 = p1, d1 = p1;
	p1.at(2, 2) = 3e-3; // hot spot on die 1 only
	d1.at(2, 2) = 1.0;
	ThermalResult const r0 = solve_steady(p1, p2, d0, stack, {1e-10, 50000});
	ThermalResult const r1 = solve_steady(p1, p2, d1, stack, {1e-10, 50000});
	double const gap0 = std::fabs(r0.t1.at(2, 2) - r0.t2.at(2, 2));
	double const gap1 = std::fabs(r1.t1.at(2, 2) - r1.t2.at(2, 2));
	CHECK(gap1 <= gap0 + 1e-9);
}

TEST_CASE("non-convergence raises a solver error carrying the residual") {
	StackModel const stack;
	Grid2D p = uniform_grid(8, 8, 100.0, 1e-3);
	Grid2D const d = uniform_grid(8, 8, 100.0, 0.0);
	CHECK_THROWS_AS(solve_steady(p, p, d, stack, {1e-12, 1}), SolverError);
	try {
		solve_steady(p, p, d, stack, {1e-12, 1});
	} catch (SolverError const& e) {
		CHECK(e.residual() > 0.0);
	}
}

TEST_CASE("warm start reduces iteration count on a nearby problem") {
	StackModel const stack;
	std::mt19937_64 rng(5);
	std::uniform_real_distribution<double> up(0.0, 1e-3);
	Grid2D p1 = uniform_grid(16, 16, 100.0, 0.0);
	Grid2D p2 = p1, d = p1;
	for (std::size_t i = 0; i < p1.size(); ++i) {
		p1.v[i] = up(rng);
		p2.v[i] = up(rng);
	}
	ThermalResult const base = solve_steady(p1, p2, d, stack, {1e-8, 50000});
	p1.at(4, 4) *= 1.01;
	ThermalResult const warm = solve_steady(p1, p2, d, stack, {1e-8, 50000}, &base);
	ThermalResult const cold = solve_steady(p1, p2, d, stack, {1e-8, 50000});
	CHECK(warm.iterations <= cold.iterations);
	for (std::size_t i = 0; i < p1.size(); ++i) {
		CHECK(warm.t1.v[i] == Catch::Approx(cold.t1.v[i]).margin(1e-5));
	}
}
