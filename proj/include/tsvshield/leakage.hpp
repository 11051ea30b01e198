#ifndef TSVSHIELD_LEAKAGE_HPP
#define TSVSHIELD_LEAKAGE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "tsvshield/grid.hpp"

namespace tsvshield {

// ---------------------------------------------------------------------------
// Pearson correlation of power and temperature maps
// ---------------------------------------------------------------------------

/// Correlation value with an explicit undefined flag. A correlation is
/// undefined when either input has zero variance; flagged values are never
/// coerced to 0 and must be excluded from averages.
struct Correlation {
	double r = 0.0;
	bool defined = false;
	int n = 0;
};

namespace detail {

/// Exactly-constant detection: identical values have max == min bitwise.
inline bool constant_range(double const* p, std::size_t n) {
	for (std::size_t i = 1; i < n; ++i) {
		if (p[i] != p[0]) {
			return false;
		}
	}
	return true;
}

} // namespace detail

/// Pearson over two aligned value arrays. Single-pass co-moment update
/// (Welford); the unit tests pin it against a two-pass textbook oracle.
inline Correlation pearson_values(double const* p, double const* t, std::size_t n) {
	Correlation c;
	c.n = static_cast<int>(n);
	if (n < 2 || detail::constant_range(p, n) || detail::constant_range(t, n)) {
		return c;
	}
	double mean_p = 0.0, mean_t = 0.0;
	double m2_p = 0.0, m2_t = 0.0, co = 0.0;
	for (std::size_t i = 0; i < n; ++i) {
		double const k = 1.0 / static_cast<double>(i + 1);
		double const dp = p[i] - mean_p;
		double const dt = t[i] - mean_t;
		mean_p += dp * k;
		mean_t += dt * k;
		m2_p += dp * (p[i] - mean_p);
		m2_t += dt * (t[i] - mean_t);
		co += dp * (t[i] - mean_t);
	}
	double const denom = std::sqrt(m2_p) * std::sqrt(m2_t);
	if (denom <= 0.0 || !std::isfinite(denom)) {
		return c;
	}
	c.r = std::clamp(co / denom, -1.0, 1.0);
	c.defined = true;
	return c;
}

inline Correlation pearson(Grid2D const& power, Grid2D const& temp) {
	require_same_dims(power, temp, "pearson");
	return pearson_values(power.v.data(), temp.v.data(), power.v.size());
}

// ---------------------------------------------------------------------------
// Runtime stability of correlation (per-bin Pearson across m samples)
// ---------------------------------------------------------------------------

struct StabilityMap {
	Grid2D r;                       // per-bin correlation where defined
	std::vector<std::uint8_t> defined;
	int m = 0;

	int defined_count() const {
		return static_cast<int>(std::count(defined.begin(), defined.end(), std::uint8_t{1}));
	}
};

/// Per-bin correlation of power and temperature across m aligned samples.
/// Bins whose power or temperature never varies are flagged undefined.
inline StabilityMap stability(std::vector<Grid2D> const& power_samples,
                              std::vector<Grid2D> const& temp_samples) {
	if (power_samples.size() != temp_samples.size()) {
		throw std::invalid_argument("stability: sample counts differ");
	}
	std::size_t const m = power_samples.size();
	if (m < 2) {
		throw std::invalid_argument("stability: need m >= 2 samples");
	}
	Grid2D const& ref = power_samples.front();
	for (std::size_t i = 0; i < m; ++i) {
		require_same_dims(power_samples[i], ref, "stability");
		require_same_dims(temp_samples[i], ref, "stability");
	}
	StabilityMap out;
	out.m = static_cast<int>(m);
	out.r = Grid2D(ref.nx, ref.ny, ref.pitch_x, ref.pitch_y);
	out.defined.assign(out.r.size(), 0);
	std::vector<double> p(m), t(m);
	for (std::size_t bin = 0; bin < ref.size(); ++bin) {
		for (std::size_t i = 0; i < m; ++i) {
			p[i] = power_samples[i].v[bin];
			t[i] = temp_samples[i].v[bin];
		}
		Correlation const c = pearson_values(p.data(), t.data(), m);
		if (c.defined) {
			out.r.v[bin] = c.r;
			out.defined[bin] = 1;
		}
	}
	return out;
}

// ---------------------------------------------------------------------------
// Nested-means classification
// ---------------------------------------------------------------------------

/// Contiguous-in-sorted-order value classes. class_of[i] is the class of
/// input value i; ids ascend with the value ranges they cover.
struct Classification {
	std::vector<int> class_of;
	int num_classes = 0;
};

/// Sort, then recursively bi-partition each class at its mean (< mean vs
/// >= mean) until the class std dev drops to eps_abs or a split would leave
/// one side empty. eps_abs defaults to 1e-9 x the overall value range.
inline Classification nested_means_classify(std::vector<double> const& values,
                                            double eps_abs = -1.0) {
	if (values.empty()) {
		throw std::invalid_argument("nested_means_classify: empty input");
	}
	std::size_t const n = values.size();
	std::vector<int> order(n);
	std::iota(order.begin(), order.end(), 0);
	std::stable_sort(order.begin(), order.end(),
	                 [&values](int a, int b) { return values[a] < values[b]; });
	std::vector<double> sorted(n);
	for (std::size_t i = 0; i < n; ++i) {
		sorted[i] = values[order[i]];
	}
	if (eps_abs < 0.0) {
		eps_abs = 1e-9 * (sorted.back() - sorted.front());
	}
	// prefix sums for O(1) mean/std per range
	std::vector<double> pre(n + 1, 0.0), pre2(n + 1, 0.0);
	for (std::size_t i = 0; i < n; ++i) {
		pre[i + 1] = pre[i] + sorted[i];
		pre2[i + 1] = pre2[i] + sorted[i] * sorted[i];
	}
	auto range_mean = [&](std::size_t lo, std::size_t hi) {
		return (pre[hi] - pre[lo]) / static_cast<double>(hi - lo);
	};
	auto range_std = [&](std::size_t lo, std::size_t hi) {
		double const cnt = static_cast<double>(hi - lo);
		double const mean = range_mean(lo, hi);
		double const var = std::max(0.0, (pre2[hi] - pre2[lo]) / cnt - mean * mean);
		return std::sqrt(var);
	};

	// iterative splitting; final classes collected as [lo,hi) ranges
	std::vector<std::pair<std::size_t, std::size_t>> stack{{0, n}};
	std::vector<std::pair<std::size_t, std::size_t>> classes;
	while (!stack.empty()) {
		auto const [lo, hi] = stack.back();
		stack.pop_back();
		if (hi - lo <= 1 || range_std(lo, hi) <= eps_abs) {
			classes.emplace_back(lo, hi);
			continue;
		}
		double const mean = range_mean(lo, hi);
		// first index with value >= mean
		std::size_t const cut = std::lower_bound(sorted.begin() + lo, sorted.begin() + hi, mean) -
		                        sorted.begin();
		if (cut == lo || cut == hi) {
			classes.emplace_back(lo, hi); // degenerate split
			continue;
		}
		stack.emplace_back(cut, hi);
		stack.emplace_back(lo, cut);
	}
	std::sort(classes.begin(), classes.end());

	Classification out;
	out.class_of.assign(n, 0);
	out.num_classes = static_cast<int>(classes.size());
	for (std::size_t c = 0; c < classes.size(); ++c) {
		for (std::size_t i = classes[c].first; i < classes[c].second; ++i) {
			out.class_of[order[i]] = static_cast<int>(c);
		}
	}
	return out;
}

// ---------------------------------------------------------------------------
// Spatial entropy of power maps
// ---------------------------------------------------------------------------

struct EntropyClass {
	int count = 0;
	double mean_power = 0.0;
	double d_intra = 0.0; // mean Manhattan member-pair distance, bin units
	double d_inter = 0.0; // mean Manhattan member-to-non-member distance
};

struct EntropyResult {
	double bits = 0.0;
	std::vector<EntropyClass> classes;
};

namespace detail {

/// Sum of |xi - xj| over unordered pairs of a coordinate histogram.
inline double pair_distance_sum(std::vector<double> const& hist) {
	double total = 0.0;
	double cnt = 0.0, weighted = 0.0;
	for (std::size_t x = 0; x < hist.size(); ++x) {
		double const c = hist[x];
		if (c > 0.0) {
			total += c * (cnt * static_cast<double>(x) - weighted);
			cnt += c;
			weighted += c * static_cast<double>(x);
		}
	}
	return total;
}

} // namespace detail

/// Spatial entropy of a power map: Shannon entropy of nested-means power
/// classes, each term weighted by the ratio of mean inter- to intra-class
/// Manhattan distance. Compact distinct power regions score high, finely
/// interleaved similar values score low.
inline EntropyResult spatial_entropy(Grid2D const& power,
                                     double singleton_distance = 0.5,
                                     double eps_abs = -1.0) {
	std::size_t const n = power.size();
	if (n < 2) {
		throw std::invalid_argument("spatial_entropy: need >= 2 bins");
	}
	Classification const cls = nested_means_classify(power.v, eps_abs);
	int const k = cls.num_classes;

	EntropyResult out;
	out.classes.assign(k, EntropyClass{});

	// per-class and global coordinate histograms; Manhattan separates per axis
	std::vector<std::vector<double>> hx(k, std::vector<double>(power.nx, 0.0));
	std::vector<std::vector<double>> hy(k, std::vector<double>(power.ny, 0.0));
	std::vector<double> gx(power.nx, 0.0), gy(power.ny, 0.0);
	for (int y = 0; y < power.ny; ++y) {
		for (int x = 0; x < power.nx; ++x) {
			int const c = cls.class_of[power.idx(x, y)];
			hx[c][x] += 1.0;
			hy[c][y] += 1.0;
			gx[x] += 1.0;
			gy[y] += 1.0;
			out.classes[c].count += 1;
			out.classes[c].mean_power += power.at(x, y);
		}
	}
	double const f_all = detail::pair_distance_sum(gx) + detail::pair_distance_sum(gy);

	double const total = static_cast<double>(n);
	double bits = 0.0;
	for (int c = 0; c < k; ++c) {
		EntropyClass& ec = out.classes[c];
		double const cnt = static_cast<double>(ec.count);
		ec.mean_power /= cnt;

		double const f_class = detail::pair_distance_sum(hx[c]) + detail::pair_distance_sum(hy[c]);
		if (ec.count > 1) {
			ec.d_intra = f_class / (cnt * (cnt - 1.0) / 2.0);
		} else {
			ec.d_intra = singleton_distance;
		}
		if (ec.count < static_cast<int>(n)) {
			// rest-of-map histogram = global minus class
			std::vector<double> rx(gx), ry(gy);
			for (int x = 0; x < power.nx; ++x) {
				rx[x] -= hx[c][x];
			}
			for (int y = 0; y < power.ny; ++y) {
				ry[y] -= hy[c][y];
			}
			double const f_rest = detail::pair_distance_sum(rx) + detail::pair_distance_sum(ry);
			double const cross = f_all - f_class - f_rest;
			ec.d_inter = cross / (cnt * (total - cnt));
		} else {
			ec.d_inter = singleton_distance; // single-class rule
		}

		double const p = cnt / total;
		if (p < 1.0) {
			bits += (ec.d_inter / ec.d_intra) * (-p * std::log2(p));
		}
	}
	out.bits = bits;
	return out;
}

} // namespace tsvshield

#endif
