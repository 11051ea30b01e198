#ifndef TSVSHIELD_BLUR_HPP
#define TSVSHIELD_BLUR_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "tsvshield/grid.hpp"
#include "tsvshield/thermal.hpp"

namespace tsvshield {

/// Power-blurring estimator for in-loop use: temperature = ambient plus the
/// convolution of each die's power map with an impulse-response mask per
/// (source die, observed die) pair. Masks are calibrated once per StackModel
/// and grid geometry against solve_steady on a center-bin impulse, truncated
/// where the response falls under 1% of its peak. Per-bin TSV density is
/// folded in afterwards by shrinking the inter-die temperature split by the
/// local bond-vs-TSV conductivity ratio.
class PowerBlurEstimator {
public:
	PowerBlurEstimator() = default;

	PowerBlurEstimator(StackModel const& stack, int nx, int ny, double pitch_x, double pitch_y) {
		calibrate(stack, nx, ny, pitch_x, pitch_y);
	}

	void calibrate(StackModel const& stack, int nx, int ny, double pitch_x, double pitch_y) {
		stack_ = stack;
		nx_ = nx;
		ny_ = ny;
		pitch_x_ = pitch_x;
		pitch_y_ = pitch_y;
		int const cx = nx / 2;
		int const cy = ny / 2;
		Grid2D const zero(nx, ny, pitch_x, pitch_y);
		for (int src = 0; src < 2; ++src) {
			Grid2D impulse = zero;
			impulse.at(cx, cy) = 1.0 / impulse.bin_area(); // 1 W in the center bin
			ThermalResult const res = solve_steady(src == 0 ? impulse : zero,
			                                       src == 0 ? zero : impulse, zero, stack_,
			                                       {1e-9, 200000});
			masks_[src][0] = extract_mask(res.t1, cx, cy);
			masks_[src][1] = extract_mask(res.t2, cx, cy);
		}
		calibrated_ = true;
	}

	bool calibrated() const { return calibrated_; }

	ThermalResult estimate(Grid2D const& power1, Grid2D const& power2,
	                       Grid2D const& tsv_density) const {
		if (!calibrated_) {
			throw std::logic_error("PowerBlurEstimator: calibrate() before estimate()");
		}
		require_same_dims(power1, power2, "estimate_fast");
		require_same_dims(power1, tsv_density, "estimate_fast");
		if (power1.nx != nx_ || power1.ny != ny_) {
			throw std::logic_error("PowerBlurEstimator: calibrated for different grid dims");
		}
		ThermalResult res;
		res.t1 = Grid2D(nx_, ny_, pitch_x_, pitch_y_, stack_.ambient);
		res.t2 = res.t1;
		double const bin_area = power1.bin_area();
		double const total = (power1.sum() + power2.sum()) * bin_area;
		if (total <= 0.0) {
			res.peak = stack_.ambient;
			return res;
		}

		std::vector<double> dt1(power1.size(), 0.0), dt2(power1.size(), 0.0);
		convolve(power1, masks_[0][0], dt1);
		convolve(power2, masks_[1][0], dt1);
		convolve(power1, masks_[0][1], dt2);
		convolve(power2, masks_[1][1], dt2);

		double peak = stack_.ambient;
		for (std::size_t i = 0; i < dt1.size(); ++i) {
			double const d = tsv_density.v[i];
			if (d > 0.0) {
				// stronger local coupling pulls the dies together
				double const f =
				    stack_.k_bond / ((1.0 - d) * stack_.k_bond + d * stack_.k_tsv);
				double const mid = 0.5 * (dt1[i] + dt2[i]);
				dt1[i] = mid + (dt1[i] - mid) * f;
				dt2[i] = mid + (dt2[i] - mid) * f;
			}
			res.t1.v[i] = stack_.ambient + dt1[i];
			res.t2.v[i] = stack_.ambient + dt2[i];
			peak = std::max({peak, res.t1.v[i], res.t2.v[i]});
		}
		res.peak = peak;
		return res;
	}

private:
	struct Mask {
		int half = 0;            // window half-width
		std::vector<double> w;   // (2*half+1)^2 weights, K per W
		double at(int dx, int dy) const {
			return w[static_cast<std::size_t>(dy + half) * (2 * half + 1) + (dx + half)];
		}
	};

	Mask extract_mask(Grid2D const& response, int cx, int cy) const {
		double const peak = std::fabs(response.at(cx, cy) - stack_.ambient);
		int half = 0;
		for (int y = 0; y < response.ny; ++y) {
			for (int x = 0; x < response.nx; ++x) {
				if (std::fabs(response.at(x, y) - stack_.ambient) >= 0.01 * peak) {
					half = std::max({half, std::abs(x - cx), std::abs(y - cy)});
				}
			}
		}
		// mirrored convolution must not fold the window onto its own center
		half = std::min({half, nx_ - 2, ny_ - 2});
		Mask m;
		m.half = half;
		int const side = 2 * half + 1;
		m.w.assign(static_cast<std::size_t>(side) * side, 0.0);
		for (int dy = -half; dy <= half; ++dy) {
			for (int dx = -half; dx <= half; ++dx) {
				int const x = cx + dx;
				int const y = cy + dy;
				if (x >= 0 && x < response.nx && y >= 0 && y < response.ny) {
					m.w[static_cast<std::size_t>(dy + half) * side + (dx + half)] =
					    response.at(x, y) - stack_.ambient;
				}
			}
		}
		return m;
	}

	// Mirror the source map at the die edges: the lateral boundaries are
	// insulated, so reflected images stand in for the blocked heat flow.
	static int reflect(int c, int n) {
		if (c < 0) {
			return -1 - c;
		}
		if (c >= n) {
			return 2 * n - 1 - c;
		}
		return c;
	}

	void convolve(Grid2D const& power, Mask const& m, std::vector<double>& out) const {
		double const bin_area = power.bin_area();
		for (int y = 0; y < ny_; ++y) {
			for (int x = 0; x < nx_; ++x) {
				double acc = 0.0;
				for (int dy = -m.half; dy <= m.half; ++dy) {
					int const sy = reflect(y - dy, ny_);
					for (int dx = -m.half; dx <= m.half; ++dx) {
						int const sx = reflect(x - dx, nx_);
						double const p = power.at(sx, sy);
						if (p != 0.0) {
							acc += p * m.at(dx, dy);
						}
					}
				}
				out[power.idx(x, y)] += acc * bin_area;
			}
		}
	}

	StackModel stack_;
	int nx_ = 0, ny_ = 0;
	double pitch_x_ = 0.0, pitch_y_ = 0.0;
	std::array<std::array<Mask, 2>, 2> masks_; // [source die][observed die]
	bool calibrated_ = false;
};

} // namespace tsvshield

#endif
