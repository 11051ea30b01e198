#ifndef TSVSHIELD_ANNEAL_HPP
#define TSVSHIELD_ANNEAL_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "tsvshield/blur.hpp"
#include "tsvshield/config.hpp"
#include "tsvshield/gsrc.hpp"
#include "tsvshield/leakage.hpp"
#include "tsvshield/model.hpp"
#include "tsvshield/report.hpp"
#include "tsvshield/seqpair.hpp"
#include "tsvshield/thermal.hpp"
#include "tsvshield/timing.hpp"
#include "tsvshield/volumes.hpp"

namespace tsvshield {

enum class FloorplanMode { PowerAware, TscAware };

/// Raw (unnormalized) multi-objective cost terms of one solution.
struct CostBreakdown {
	double outline_violation = 0.0; // relative overhang, 0 when legal
	double packing = 0.0;           // worst-die bounding box / outline area
	double wirelength_m = 0.0;      // HPWL sum
	double delay_ns = 0.0;          // critical delay at assigned voltages
	double peak_above_ambient = 0.0;
	double power_w = 0.0;
	double corr_mean = 0.0;    // mean |r_d| over defined dies (estimate)
	double entropy_mean = 0.0; // mean S_d
	double total = 0.0;        // weighted normalized sum
};

/// One evaluated solution: the decoded floorplan plus its cost terms and
/// leakage numbers from the fast estimator.
struct Evaluation {
	Floorplan fp;
	CostBreakdown cost;
	Correlation r1_est, r2_est;
	double s1 = 0.0, s2 = 0.0;
	bool legal = false;
};

namespace detail {

inline double hpwl_meters(Floorplan const& fp) {
	double total_um = 0.0;
	for (auto const& net : fp.nets) {
		double lo_x = 0.0, hi_x = 0.0, lo_y = 0.0, hi_y = 0.0;
		bool first = true;
		for (int pin : net.pins) {
			double px = 0.0, py = 0.0;
			int die = 0;
			fp.pin_pos(pin, px, py, die);
			if (first) {
				lo_x = hi_x = px;
				lo_y = hi_y = py;
				first = false;
			} else {
				lo_x = std::min(lo_x, px);
				hi_x = std::max(hi_x, px);
				lo_y = std::min(lo_y, py);
				hi_y = std::max(hi_y, py);
			}
		}
		total_um += (hi_x - lo_x) + (hi_y - lo_y);
	}
	return total_um * 1e-6;
}

struct RunningNorms {
	double outline = 1.0, packing = 1.0, wirelength = 1.0, delay = 1.0, temp = 1.0,
	       power = 1.0, corr = 1.0, entropy = 1.0;

	static double safe(double v) { return std::max(v, 1e-12); }

	void reset(CostBreakdown const& c) {
		outline = safe(std::max(c.outline_violation, 0.1));
		packing = safe(c.packing);
		wirelength = safe(c.wirelength_m);
		delay = safe(c.delay_ns);
		temp = safe(c.peak_above_ambient);
		power = safe(c.power_w);
		corr = safe(std::max(c.corr_mean, 0.05));
		entropy = safe(std::max(c.entropy_mean, 0.1));
	}

	/// exponential running average over accepted solutions
	void update(CostBreakdown const& c, double alpha = 0.02) {
		auto mix = [alpha](double& norm, double v) {
			if (v > 0.0) {
				norm = (1.0 - alpha) * norm + alpha * v;
			}
		};
		mix(packing, c.packing);
		mix(wirelength, c.wirelength_m);
		mix(delay, c.delay_ns);
		mix(temp, c.peak_above_ambient);
		mix(power, c.power_w);
		mix(corr, c.corr_mean);
		mix(entropy, c.entropy_mean);
	}

	double weighted_total(CostBreakdown const& c, EngineConfig const& cfg,
	                      FloorplanMode mode) const {
		double t = cfg.w_outline * (c.outline_violation / outline) +
		           cfg.w_density * (c.packing / packing) +
		           cfg.w_wirelength * (c.wirelength_m / wirelength) +
		           cfg.w_delay * (c.delay_ns / delay) +
		           cfg.w_temp * (c.peak_above_ambient / temp) +
		           cfg.w_power * (c.power_w / power);
		if (mode == FloorplanMode::TscAware) {
			t += cfg.w_corr * (c.corr_mean / corr) +
			     cfg.w_entropy * (c.entropy_mean / entropy);
		}
		return t;
	}
};

} // namespace detail

/// Shared per-run context: parsed blocks, calibrated estimator, config.
class Evaluator {
public:
	Evaluator(BenchmarkBundle const& bundle, EngineConfig const& cfg)
	    : cfg_(cfg), blocks_(bundle.blocks), terminals_(bundle.terminals), nets_(bundle.nets),
	      estimator_(cfg.stack, cfg.grid_nx, cfg.grid_ny, cfg.outline_w / cfg.grid_nx,
	                 cfg.outline_h / cfg.grid_ny) {}

	EngineConfig const& config() const { return cfg_; }
	std::vector<BlockModule> const& blocks() const { return blocks_; }
	PowerBlurEstimator const& estimator() const { return estimator_; }

	/// decode + voltage assignment + all cost terms via the fast thermal path
	Evaluation evaluate(LayoutEncoding const& enc, FloorplanMode mode) const {
		Evaluation ev;
		ev.fp = decode(enc, blocks_, terminals_, nets_, cfg_);
		VolumeObjective const obj = mode == FloorplanMode::TscAware
		                                ? VolumeObjective::TscAware
		                                : VolumeObjective::PowerAware;
		assign_volumes(ev.fp, cfg_.tech, cfg_, obj, enc.volume_seed);

		CostBreakdown& c = ev.cost;
		Rect const outline = ev.fp.outline();
		double bb_worst = 0.0;
		for (int die = 1; die <= 2; ++die) {
			double ext_x = 0.0, ext_y = 0.0;
			for (auto const& b : ev.fp.blocks) {
				if (b.die != die) {
					continue;
				}
				ext_x = std::max(ext_x, b.x + b.w);
				ext_y = std::max(ext_y, b.y + b.h);
			}
			c.outline_violation += std::max(0.0, ext_x - outline.w) / outline.w +
			                       std::max(0.0, ext_y - outline.h) / outline.h;
			bb_worst = std::max(bb_worst, ext_x * ext_y);
		}
		c.packing = bb_worst / (outline.w * outline.h);
		ev.legal = c.outline_violation == 0.0;

		c.wirelength_m = detail::hpwl_meters(ev.fp);
		c.delay_ns = compute_slacks(ev.fp, cfg_.tech, true).critical_ns;
		for (auto const& b : ev.fp.blocks) {
			c.power_w += b.effective_power();
		}

		Grid2D const p1 = rasterize_power(ev.fp, 1, cfg_.grid_nx, cfg_.grid_ny);
		Grid2D const p2 = rasterize_power(ev.fp, 2, cfg_.grid_nx, cfg_.grid_ny);
		Grid2D const d = rasterize_tsv_density(ev.fp, cfg_.grid_nx, cfg_.grid_ny);
		ThermalResult const t = estimator_.estimate(p1, p2, d);
		c.peak_above_ambient = t.peak - cfg_.stack.ambient;

		ev.r1_est = pearson(p1, t.t1);
		ev.r2_est = pearson(p2, t.t2);
		double corr_sum = 0.0;
		int corr_n = 0;
		if (ev.r1_est.defined) {
			corr_sum += std::fabs(ev.r1_est.r);
			++corr_n;
		}
		if (ev.r2_est.defined) {
			corr_sum += std::fabs(ev.r2_est.r);
			++corr_n;
		}
		c.corr_mean = corr_n > 0 ? corr_sum / corr_n : 0.0;
		ev.s1 = spatial_entropy(p1, cfg_.entropy_singleton_distance).bits;
		ev.s2 = spatial_entropy(p2, cfg_.entropy_singleton_distance).bits;
		c.entropy_mean = 0.5 * (ev.s1 + ev.s2);
		return ev;
	}

private:
	EngineConfig cfg_;
	std::vector<BlockModule> blocks_;
	std::vector<Terminal> terminals_;
	std::vector<Net> nets_;
	PowerBlurEstimator estimator_;
};

struct AnnealResult {
	Floorplan fp;
	LayoutEncoding encoding;
	CostBreakdown cost;
	LeakageReport report;
	long moves = 0;
	long accepted = 0;
};

namespace detail {

inline LayoutEncoding initial_encoding(std::vector<BlockModule> const& blocks,
                                       std::mt19937_64& rng) {
	LayoutEncoding enc;
	std::size_t const n = blocks.size();
	enc.die_of.assign(n, 1);
	enc.aspect.assign(n, 1.0);
	// alternate dies by descending area to balance utilization
	std::vector<int> order(n);
	std::iota(order.begin(), order.end(), 0);
	std::sort(order.begin(), order.end(),
	          [&blocks](int a, int b) { return blocks[a].area > blocks[b].area; });
	for (std::size_t i = 0; i < n; ++i) {
		enc.die_of[order[i]] = 1 + static_cast<int>(i % 2);
	}
	for (std::size_t i = 0; i < n; ++i) {
		enc.aspect[i] = std::clamp(1.0, blocks[i].ar_min, blocks[i].ar_max);
		enc.seq1[enc.die_of[i] - 1].push_back(static_cast<int>(i));
	}
	enc.seq2 = enc.seq1;
	for (int d = 0; d < 2; ++d) {
		std::shuffle(enc.seq1[d].begin(), enc.seq1[d].end(), rng);
		std::shuffle(enc.seq2[d].begin(), enc.seq2[d].end(), rng);
	}
	return enc;
}

inline void remove_from(std::vector<int>& v, int value) {
	v.erase(std::find(v.begin(), v.end(), value));
}

/// One random neighborhood move. The thermal design rule shows up as a bias
/// of cross-die moves: high-power blocks prefer the heatsink-adjacent top
/// die.
inline void propose_move(LayoutEncoding& enc, std::vector<BlockModule> const& blocks,
                         EngineConfig const& cfg, std::mt19937_64& rng) {
	std::size_t const n = blocks.size();
	std::uniform_real_distribution<double> u01(0.0, 1.0);
	std::uniform_int_distribution<std::size_t> pick(0, n - 1);
	double const roll = u01(rng);
	if (roll < 0.25) {
		// swap two blocks within seq1 of one die
		int const d = enc.seq1[0].size() >= 2 && (enc.seq1[1].size() < 2 || u01(rng) < 0.5)
		                  ? 0
		                  : 1;
		auto& s = enc.seq1[d];
		if (s.size() < 2) {
			return;
		}
		std::uniform_int_distribution<std::size_t> ps(0, s.size() - 1);
		std::swap(s[ps(rng)], s[ps(rng)]);
	} else if (roll < 0.45) {
		// swap two blocks in both sequences (position exchange)
		int const d = enc.seq1[0].size() >= 2 && (enc.seq1[1].size() < 2 || u01(rng) < 0.5)
		                  ? 0
		                  : 1;
		auto& s1 = enc.seq1[d];
		auto& s2 = enc.seq2[d];
		if (s1.size() < 2) {
			return;
		}
		std::uniform_int_distribution<std::size_t> ps(0, s1.size() - 1);
		std::size_t const i = ps(rng), j = ps(rng);
		std::swap(s1[i], s1[j]);
		std::swap(s2[i], s2[j]);
	} else if (roll < 0.6) {
		// rotate the pair relation of one block: reposition it in seq2 only
		std::size_t const b = pick(rng);
		int const d = enc.die_of[b] - 1;
		auto& s2 = enc.seq2[d];
		if (s2.size() < 2) {
			return;
		}
		remove_from(s2, static_cast<int>(b));
		std::uniform_int_distribution<std::size_t> slot(0, s2.size());
		s2.insert(s2.begin() + slot(rng), static_cast<int>(b));
	} else if (roll < 0.75) {
		// move a block across dies; bias high-power blocks toward die 2
		std::size_t b = pick(rng);
		if (u01(rng) < cfg.sa_top_die_bias) {
			// among a small sample, take the highest power on die 1
			for (int tries = 0; tries < 4; ++tries) {
				std::size_t const cand = pick(rng);
				if (enc.die_of[cand] == 1 &&
				    (enc.die_of[b] != 1 || blocks[cand].power > blocks[b].power)) {
					b = cand;
				}
			}
		}
		int const from = enc.die_of[b] - 1;
		int const to = 1 - from;
		remove_from(enc.seq1[from], static_cast<int>(b));
		remove_from(enc.seq2[from], static_cast<int>(b));
		std::uniform_int_distribution<std::size_t> slot1(0, enc.seq1[to].size());
		enc.seq1[to].insert(enc.seq1[to].begin() + slot1(rng), static_cast<int>(b));
		std::uniform_int_distribution<std::size_t> slot2(0, enc.seq2[to].size());
		enc.seq2[to].insert(enc.seq2[to].begin() + slot2(rng), static_cast<int>(b));
		enc.die_of[b] = to + 1;
	} else if (roll < 0.95) {
		// reshape a soft block
		for (int tries = 0; tries < 8; ++tries) {
			std::size_t const b = pick(rng);
			if (blocks[b].kind == BlockKind::Soft && blocks[b].ar_min < blocks[b].ar_max) {
				std::uniform_real_distribution<double> ar(blocks[b].ar_min,
				                                          blocks[b].ar_max);
				enc.aspect[b] = ar(rng);
				break;
			}
		}
	} else {
		// reseed the voltage-volume exploration
		enc.volume_seed = rng();
	}
}

} // namespace detail

/// Multi-objective simulated annealing over sequence-pair encodings.
/// Memorizes both the classical-cost best and the leakage best (lexicographic
/// mean correlation, then mean entropy, legal solutions only); the final pick
/// is the leakage best when its cost stays within (1+delta) of the classical
/// best, verified afterwards with the detailed solver.
inline AnnealResult anneal(BenchmarkBundle const& bundle, EngineConfig const& cfg,
                           FloorplanMode mode, std::uint64_t seed) {
	auto const t_start = std::chrono::steady_clock::now();
	Evaluator const evaluator(bundle, cfg);
	std::mt19937_64 rng(seed);
	std::uniform_real_distribution<double> u01(0.0, 1.0);

	LayoutEncoding current = detail::initial_encoding(bundle.blocks, rng);
	Evaluation ev = evaluator.evaluate(current, mode);
	detail::RunningNorms norms;
	norms.reset(ev.cost);
	ev.cost.total = norms.weighted_total(ev.cost, cfg, mode);

	struct Archive {
		LayoutEncoding enc;
		Evaluation ev;
		bool set = false;
	};
	Archive best_any{current, ev, true};
	Archive best_legal, best_leak;
	auto leak_key = [](Evaluation const& e) {
		return std::make_pair(e.cost.corr_mean, e.cost.entropy_mean);
	};
	if (ev.legal) {
		best_legal = {current, ev, true};
		best_leak = {current, ev, true};
	}

	long moves = 0, accepted = 0;

	// derive T0 from the uphill spread of a few probe moves
	double t0 = cfg.sa_t0;
	if (t0 <= 0.0 && cfg.sa_max_moves > 0) {
		double up_sum = 0.0;
		int up_n = 0;
		for (int probe = 0; probe < 24; ++probe) {
			LayoutEncoding trial = current;
			detail::propose_move(trial, bundle.blocks, cfg, rng);
			Evaluation tev = evaluator.evaluate(trial, mode);
			tev.cost.total = norms.weighted_total(tev.cost, cfg, mode);
			double const d = tev.cost.total - ev.cost.total;
			if (d > 0.0) {
				up_sum += d;
				++up_n;
			}
		}
		t0 = up_n > 0 ? (up_sum / up_n) / std::log(2.0) : 1.0;
	}

	double temp = std::max(t0, 1e-9);
	long const moves_per_temp =
	    std::max<long>(8, static_cast<long>(cfg.sa_moves_per_temp *
	                                        static_cast<double>(bundle.blocks.size())));
	while (moves < cfg.sa_max_moves) {
		long temp_moves = 0, temp_accepted = 0;
		for (; temp_moves < moves_per_temp && moves < cfg.sa_max_moves; ++temp_moves) {
			LayoutEncoding trial = current;
			detail::propose_move(trial, bundle.blocks, cfg, rng);
			Evaluation tev = evaluator.evaluate(trial, mode);
			tev.cost.total = norms.weighted_total(tev.cost, cfg, mode);
			++moves;
			double const delta = tev.cost.total - ev.cost.total;
			if (delta <= 0.0 || u01(rng) < std::exp(-delta / temp)) {
				current = std::move(trial);
				ev = std::move(tev);
				++temp_accepted;
				++accepted;
				norms.update(ev.cost);
				if (ev.cost.total < best_any.ev.cost.total) {
					best_any = {current, ev, true};
				}
				if (ev.legal) {
					if (!best_legal.set || ev.cost.total < best_legal.ev.cost.total) {
						best_legal = {current, ev, true};
					}
					if (!best_leak.set || leak_key(ev) < leak_key(best_leak.ev)) {
						best_leak = {current, ev, true};
					}
				}
			}
		}
		temp *= cfg.sa_cooling;
		if (temp_moves > 0 &&
		    static_cast<double>(temp_accepted) / temp_moves < cfg.sa_stop_acceptance) {
			break;
		}
	}

	// final pick: leakage best within (1+delta) of the classical best,
	// re-evaluated under the frozen final normalization for comparability
	AnnealResult res;
	Archive* final = &best_any;
	if (best_legal.set) {
		final = &best_legal;
		if (best_leak.set) {
			Evaluation a = evaluator.evaluate(best_legal.enc, mode);
			Evaluation b = evaluator.evaluate(best_leak.enc, mode);
			a.cost.total = norms.weighted_total(a.cost, cfg, mode);
			b.cost.total = norms.weighted_total(b.cost, cfg, mode);
			if (b.cost.total <= (1.0 + cfg.sa_delta) * a.cost.total) {
				final = &best_leak;
			}
		}
	}
	Evaluation fev = evaluator.evaluate(final->enc, mode);
	fev.cost.total = norms.weighted_total(fev.cost, cfg, mode);

	res.fp = fev.fp;
	res.encoding = final->enc;
	res.cost = fev.cost;
	res.moves = moves;
	res.accepted = accepted;

	// detailed verification of the final correlation
	Grid2D const p1 = rasterize_power(res.fp, 1, cfg.grid_nx, cfg.grid_ny);
	Grid2D const p2 = rasterize_power(res.fp, 2, cfg.grid_nx, cfg.grid_ny);
	Grid2D const d = rasterize_tsv_density(res.fp, cfg.grid_nx, cfg.grid_ny);
	ThermalResult const verified =
	    solve_steady(p1, p2, d, cfg.stack, {cfg.solver_tolerance, cfg.solver_max_iterations});

	LeakageReport& rep = res.report;
	rep.r1 = pearson(p1, verified.t1);
	rep.r2 = pearson(p2, verified.t2);
	rep.r1_estimate = fev.r1_est;
	rep.r2_estimate = fev.r2_est;
	auto alert = [](Correlation const& v, Correlation const& e) {
		if (!v.defined || !e.defined) {
			return v.defined != e.defined;
		}
		return std::fabs(v.r - e.r) > 0.15 || (v.r > 0) != (e.r > 0);
	};
	rep.estimate_alert = alert(rep.r1, rep.r1_estimate) || alert(rep.r2, rep.r2_estimate);
	rep.s1 = fev.s1;
	rep.s2 = fev.s2;
	rep.power_w = fev.cost.power_w;
	rep.critical_delay_ns = fev.cost.delay_ns;
	rep.wirelength_m = fev.cost.wirelength_m;
	rep.peak_temp_k = verified.peak;
	for (auto const& isl : res.fp.tsvs) {
		(isl.kind == TsvKind::Signal ? rep.signal_tsvs : rep.dummy_tsvs) += isl.count;
	}
	rep.volume_count = static_cast<int>(res.fp.volumes.size());
	rep.cost_total = fev.cost.total;
	rep.legal = fev.legal;
	rep.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
	                    .count();
	return res;
}

} // namespace tsvshield

#endif
