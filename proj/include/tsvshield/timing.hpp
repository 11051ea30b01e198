#ifndef TSVSHIELD_TIMING_HPP
#define TSVSHIELD_TIMING_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "tsvshield/config.hpp"
#include "tsvshield/model.hpp"

namespace tsvshield {

// Ohm * fF = 1e-6 ns
inline constexpr double kOhmFemtoToNs = 1e-6;

/// Surrogate intrinsic module delay: k_d * sqrt(area), scaled by the level's
/// delay factor.
inline double module_delay_ns(BlockModule const& b, TechParams const& tech, int voltage) {
	return tech.k_d * std::sqrt(b.area) * kVoltageLevels[voltage].delay_scale;
}

namespace detail {

inline double manhattan(double ax, double ay, double bx, double by) {
	return std::fabs(ax - bx) + std::fabs(ay - by);
}

struct SinkDelay {
	int pin = -1;
	double delay_ns = 0.0;
};

/// Star-topology Elmore from the driver to each sink; cross-die sinks see
/// one TSV in series.
inline std::vector<SinkDelay> elmore_sink_delays(Net const& net, Floorplan const& fp,
                                                 TechParams const& tech) {
	if (net.pins.size() < 2) {
		return {};
	}
	double dx = 0.0, dy = 0.0;
	int ddie = 0;
	fp.pin_pos(net.pins[0], dx, dy, ddie);
	struct SinkGeom {
		int pin;
		double length;
		bool cross;
	};
	std::vector<SinkGeom> sinks;
	double c_total = 0.0;
	for (std::size_t i = 1; i < net.pins.size(); ++i) {
		double sx = 0.0, sy = 0.0;
		int sdie = 0;
		fp.pin_pos(net.pins[i], sx, sy, sdie);
		double const len = manhattan(dx, dy, sx, sy);
		bool const cross = ddie != 0 && sdie != 0 && ddie != sdie;
		sinks.push_back({net.pins[i], len, cross});
		c_total += tech.c_w * len + tech.c_sink + (cross ? tech.c_tsv : 0.0);
	}
	std::vector<SinkDelay> out;
	out.reserve(sinks.size());
	for (auto const& s : sinks) {
		double d = tech.r_drv * c_total +
		           tech.r_w * s.length * (tech.c_w * s.length / 2.0 + tech.c_sink);
		if (s.cross) {
			d += tech.r_tsv * (tech.c_tsv / 2.0 + tech.c_sink);
		}
		out.push_back({s.pin, d * kOhmFemtoToNs});
	}
	return out;
}

} // namespace detail

/// Net delay: max over the star's sinks.
inline double elmore_net_delay(Net const& net, Floorplan const& fp, TechParams const& tech) {
	for (int pin : net.pins) {
		if (!fp.pin_is_terminal(pin)) {
			BlockModule const& b = fp.blocks[pin];
			if (b.w <= 0.0 || b.h <= 0.0) {
				throw std::logic_error("elmore_net_delay: unplaced pin " + b.id);
			}
		}
	}
	double worst = 0.0;
	for (auto const& s : detail::elmore_sink_delays(net, fp, tech)) {
		worst = std::max(worst, s.delay_ns);
	}
	return worst;
}

/// Longest-path timing over the driver->sink graph after deterministic
/// cycle breaking (back edges under a DFS that visits nodes and neighbors in
/// ascending index order are dropped). Slack is against tech.clock_ns.
struct TimingResult {
	std::vector<double> arrival_out; // per node, ns
	std::vector<double> slack;       // per node, ns
	double critical_ns = 0.0;
	int dropped_edges = 0;
};

inline TimingResult compute_slacks(Floorplan const& fp, TechParams const& tech,
                                   bool at_assigned_voltages = false) {
	if (tech.clock_ns <= 0.0) {
		throw std::invalid_argument("compute_slacks: clock target must be positive");
	}
	std::size_t const nb = fp.blocks.size();
	std::size_t const n = nb + fp.terminals.size();

	std::vector<double> delay(n, 0.0);
	for (std::size_t i = 0; i < nb; ++i) {
		delay[i] = module_delay_ns(fp.blocks[i], tech,
		                           at_assigned_voltages ? fp.blocks[i].voltage : kNominalVoltage);
	}

	struct Edge {
		int to;
		double delay;
	};
	std::vector<std::vector<Edge>> out(n);
	for (auto const& net : fp.nets) {
		for (auto const& s : detail::elmore_sink_delays(net, fp, tech)) {
			if (s.pin != net.pins[0]) {
				out[net.pins[0]].push_back({s.pin, s.delay_ns});
			}
		}
	}
	for (auto& edges : out) {
		std::sort(edges.begin(), edges.end(),
		          [](Edge const& a, Edge const& b) { return a.to < b.to; });
	}

	// iterative DFS, dropping back edges
	enum : std::uint8_t { White, Gray, Black };
	std::vector<std::uint8_t> color(n, White);
	std::vector<std::vector<Edge>> dag(n);
	TimingResult res;
	struct Frame {
		int node;
		std::size_t next;
	};
	std::vector<Frame> stack;
	for (std::size_t root = 0; root < n; ++root) {
		if (color[root] != White) {
			continue;
		}
		stack.push_back({static_cast<int>(root), 0});
		color[root] = Gray;
		while (!stack.empty()) {
			Frame& f = stack.back();
			if (f.next < out[f.node].size()) {
				Edge const& e = out[f.node][f.next++];
				if (color[e.to] == Gray) {
					++res.dropped_edges; // back edge
					continue;
				}
				dag[f.node].push_back(e);
				if (color[e.to] == White) {
					color[e.to] = Gray;
					stack.push_back({e.to, 0});
				}
			} else {
				color[f.node] = Black;
				stack.pop_back();
			}
		}
	}

	// topological order via in-degrees on the kept DAG
	std::vector<int> indeg(n, 0);
	for (auto const& edges : dag) {
		for (auto const& e : edges) {
			++indeg[e.to];
		}
	}
	std::vector<int> topo;
	topo.reserve(n);
	for (std::size_t i = 0; i < n; ++i) {
		if (indeg[i] == 0) {
			topo.push_back(static_cast<int>(i));
		}
	}
	for (std::size_t head = 0; head < topo.size(); ++head) {
		for (auto const& e : dag[topo[head]]) {
			if (--indeg[e.to] == 0) {
				topo.push_back(e.to);
			}
		}
	}

	std::vector<double> arrival_in(n, 0.0), tail(n, 0.0);
	res.arrival_out.assign(n, 0.0);
	for (int v : topo) {
		res.arrival_out[v] = arrival_in[v] + delay[v];
		for (auto const& e : dag[v]) {
			arrival_in[e.to] = std::max(arrival_in[e.to], res.arrival_out[v] + e.delay);
		}
	}
	for (std::size_t i = topo.size(); i-- > 0;) {
		int const v = topo[i];
		for (auto const& e : dag[v]) {
			tail[v] = std::max(tail[v], e.delay + delay[e.to] + tail[e.to]);
		}
	}

	res.critical_ns = 0.0;
	res.slack.assign(n, tech.clock_ns);
	for (std::size_t i = 0; i < n; ++i) {
		res.critical_ns = std::max(res.critical_ns, res.arrival_out[i]);
		double const through = arrival_in[i] + delay[i] + tail[i];
		res.slack[i] = tech.clock_ns - through;
	}
	return res;
}

/// Feasible supply levels for a module: level v stays feasible while the
/// extra intrinsic delay (delay_scale(v)-1) x module delay fits in the
/// module's slack computed at the 1.0 V baseline.
inline std::uint8_t feasible_voltages(double slack_ns, double module_delay_1v_ns) {
	std::uint8_t mask = 0;
	for (std::size_t v = 0; v < kVoltageLevels.size(); ++v) {
		double const extra = (kVoltageLevels[v].delay_scale - 1.0) * module_delay_1v_ns;
		if (extra <= slack_ns + 1e-12) {
			mask |= static_cast<std::uint8_t>(1u << v);
		}
	}
	return mask;
}

} // namespace tsvshield

#endif
