#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <vector>

#include "tsvshield/blur.hpp"
#include "tsvshield/thermal.hpp"

using namespace tsvshield;

namespace {

double spearman(std::vector<double> const& a, std::vector<double> const& b) {
	auto ranks = [](std::vector<double> const& v) {
		std::vector<int> order(v.size());
		std::iota(order.begin(), order.end(), 0);
		std::sort(order.begin(), order.end(), [&v](int i, int j) { return v[i] < v[j]; });
		std::vector<double> r(v.size());
		for (std::size_t i = 0; i < order.size(); ++i) {
			r[order[i]] = static_cast<double>(i);
		}
		return r;
	};
	std::vector<double> const ra = ranks(a), rb = ranks(b);
	double const n = static_cast<double>(a.size());
	double ma = 0.0, mb = 0.0;
	for (std::size_t i = 0; i < a.size(); ++i) {
		ma += ra[i];
		mb += rb[i];
	}
	ma /= n;
	mb /= n;
	double num = 0.0, da = 0.0, db = 0.0;
	for (std::size_t i = 0; i < a.size(); ++i) {
		num += (ra[i] - ma) * (rb[i] - mb);
		da += (ra[i] - ma) * (ra[i] - ma);
		db += (rb[i] - mb) * (rb[i] - mb);
	}
	return num / std::sqrt(da * db);
}

} // namespace

TEST_CASE("power blurring: zero power estimates ambient everywhere") {
	StackModel const stack;
	PowerBlurEstimator const est(stack, 8, 8, 100.0, 100.0);
	Grid2D const zero(8, 8, 100.0, 100.0);
	ThermalResult const res = est.estimate(zero, zero, zero);
	for (double t : res.t1.v) {
		CHECK(t == stack.ambient);
	}
	CHECK(res.peak == stack.ambient);
}

TEST_CASE("power blurring: estimate before calibration is a state error") {
	PowerBlurEstimator const est;
	Grid2D const zero(8, 8, 100.0, 100.0);
	CHECK_THROWS_AS(est.estimate(zero, zero, zero), std::logic_error);
}

TEST_CASE("power blurring: calibration impulse reproduces the detailed solve") {
	StackModel const stack;
	int const n = 16;
	double const pitch = 100.0;
	PowerBlurEstimator const est(stack, n, n, pitch, pitch);

	Grid2D impulse(n, n, pitch, pitch);
	Grid2D const zero(n, n, pitch, pitch);
	impulse.at(n / 2, n / 2) = 1.0 / impulse.bin_area();

	ThermalResult const detailed = solve_steady(impulse, zero, zero, stack, {1e-9, 200000});
	ThermalResult const fast = est.estimate(impulse, zero, zero);
	CHECK(fast.t1.at(n / 2, n / 2) ==
	      Catch::Approx(detailed.t1.at(n / 2, n / 2)).margin(1e-6));
	CHECK(fast.t2.at(n / 2, n / 2) ==
	      Catch::Approx(detailed.t2.at(n / 2, n / 2)).margin(1e-6));
}

TEST_CASE("power blurring: peak temperature ranks track the detailed solve") {
	StackModel const stack;
	int const n = 16;
	double const pitch = 150.0;
	PowerBlurEstimator const est(stack, n, n, pitch, pitch);
	std::mt19937_64 rng(424242);
	std::uniform_real_distribution<double> up(0.0, 1e-3);
	std::uniform_real_distribution<double> u01(0.0, 1.0);

	std::vector<double> fast_peaks, slow_peaks;
	for (int trial = 0; trial < 20; ++trial) {
		Grid2D p1(n, n, pitch, pitch), p2(n, n, pitch, pitch), d(n, n, pitch, pitch);
		for (std::size_t i = 0; i < p1.size(); ++i) {
			p1.v[i] = up(rng);
			p2.v[i] = up(rng);
			d.v[i] = u01(rng) < 0.15 ? u01(rng) : 0.0;
		}
		// a few hot spots to spread the peak range
		for (int k = 0; k < 3; ++k) {
			p1.v[static_cast<std::size_t>(u01(rng) * (p1.size() - 1))] += up(rng) * 20.0;
		}
		fast_peaks.push_back(est.estimate(p1, p2, d).peak);
		slow_peaks.push_back(solve_steady(p1, p2, d, stack, {1e-8, 100000}).peak);
	}
	CHECK(spearman(fast_peaks, slow_peaks) >= 0.9);
}
