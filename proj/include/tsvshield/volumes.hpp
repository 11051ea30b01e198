#ifndef TSVSHIELD_VOLUMES_HPP
#define TSVSHIELD_VOLUMES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "tsvshield/config.hpp"
#include "tsvshield/geometry.hpp"
#include "tsvshield/model.hpp"
#include "tsvshield/timing.hpp"

namespace tsvshield {

enum class VolumeObjective { PowerAware, TscAware };

/// Module adjacency for volume merging: same-die blocks abutting within the
/// configured gap, or cross-die blocks whose projected overlap covers the
/// required fraction of the smaller footprint.
inline std::vector<std::vector<int>> build_adjacency(Floorplan const& fp, double gap,
                                                     double cross_overlap_min) {
	std::size_t const n = fp.blocks.size();
	std::vector<std::vector<int>> adj(n);
	for (std::size_t i = 0; i < n; ++i) {
		for (std::size_t j = i + 1; j < n; ++j) {
			BlockModule const& a = fp.blocks[i];
			BlockModule const& b = fp.blocks[j];
			bool linked = false;
			if (a.die == b.die) {
				linked = abutment_gap(a.rect(), b.rect()) <= gap;
			} else {
				double const ov = clip_area(a.rect(), b.rect());
				linked = ov >= cross_overlap_min * std::min(a.area, b.area);
			}
			if (linked) {
				adj[i].push_back(static_cast<int>(j));
				adj[j].push_back(static_cast<int>(i));
			}
		}
	}
	return adj;
}

/// One candidate voltage volume: a connected module set and the supply
/// levels all members can take.
struct VolumeNode {
	std::vector<int> members; // ascending block indices
	std::uint8_t feasible = 0;
	int parent = -1;
};

struct VolumeTree {
	int root = -1;
	std::vector<VolumeNode> nodes;
};

/// Breadth-first volume construction from one root: every expansion adds one
/// adjacent module and intersects the feasible voltage sets; branches stop
/// on empty intersections, the node count is capped. An optional rng jitters
/// the expansion order so capped trees explore different candidates.
inline VolumeTree build_volume_tree(int root, std::vector<std::vector<int>> const& adjacency,
                                    std::vector<std::uint8_t> const& feasible, int cap,
                                    std::mt19937_64* rng = nullptr) {
	VolumeTree tree;
	tree.root = root;
	if (feasible[root] == 0) {
		return tree; // handled by the forced-singleton rule in selection
	}
	std::map<std::vector<int>, bool> seen;
	tree.nodes.push_back({{root}, feasible[root], -1});
	seen[{root}] = true;
	std::size_t head = 0;
	while (head < tree.nodes.size() && static_cast<int>(tree.nodes.size()) < cap) {
		// copy: growing tree.nodes invalidates references
		VolumeNode const node = tree.nodes[head];
		std::vector<int> frontier;
		for (int m : node.members) {
			for (int nb : adjacency[m]) {
				if (!std::binary_search(node.members.begin(), node.members.end(), nb)) {
					frontier.push_back(nb);
				}
			}
		}
		std::sort(frontier.begin(), frontier.end());
		frontier.erase(std::unique(frontier.begin(), frontier.end()), frontier.end());
		if (rng != nullptr) {
			std::shuffle(frontier.begin(), frontier.end(), *rng);
		}
		for (int nb : frontier) {
			if (static_cast<int>(tree.nodes.size()) >= cap) {
				break;
			}
			std::uint8_t const merged = node.feasible & feasible[nb];
			if (merged == 0) {
				continue;
			}
			std::vector<int> members = node.members;
			members.insert(std::lower_bound(members.begin(), members.end(), nb), nb);
			if (seen.count(members) != 0) {
				continue;
			}
			seen[members] = true;
			tree.nodes.push_back({std::move(members), merged, static_cast<int>(head)});
		}
		++head;
	}
	return tree;
}

namespace detail {

struct Candidate {
	std::vector<int> members;
	std::uint8_t feasible = 0;
	bool forced = false;
};

inline double volume_power(std::vector<int> const& members, Floorplan const& fp, int voltage) {
	double p = 0.0;
	for (int m : members) {
		p += fp.blocks[m].power * kVoltageLevels[voltage].power_scale;
	}
	return p;
}

inline double volume_power_std(std::vector<int> const& members, Floorplan const& fp,
                               int voltage) {
	double const scale = kVoltageLevels[voltage].power_scale;
	double mean = 0.0;
	for (int m : members) {
		mean += fp.blocks[m].power * scale;
	}
	mean /= static_cast<double>(members.size());
	double var = 0.0;
	for (int m : members) {
		double const d = fp.blocks[m].power * scale - mean;
		var += d * d;
	}
	return std::sqrt(var / static_cast<double>(members.size()));
}

/// Lexicographic member-id order, the documented deterministic tie-break.
inline bool id_lexicographic_less(std::vector<int> const& a, std::vector<int> const& b,
                                  Floorplan const& fp) {
	std::size_t const n = std::min(a.size(), b.size());
	for (std::size_t i = 0; i < n; ++i) {
		if (fp.blocks[a[i]].id != fp.blocks[b[i]].id) {
			return fp.blocks[a[i]].id < fp.blocks[b[i]].id;
		}
	}
	return a.size() < b.size();
}

} // namespace detail

/// Greedy partition cover over the pooled candidate volumes. Power-aware:
/// cheapest total power at each volume's best feasible level plus a volume
/// count penalty. TSC-aware: smallest within-volume power std dev plus the
/// spread of volume mean powers plus the count penalty. Every module ends in
/// exactly one volume; modules with an empty feasible set become flagged
/// 1.2 V singletons.
inline std::vector<VoltageVolume> select_volumes(std::vector<VolumeTree> const& trees,
                                                 Floorplan const& fp,
                                                 std::vector<std::uint8_t> const& feasible,
                                                 VolumeObjective objective,
                                                 EngineConfig const& cfg) {
	std::size_t const n = fp.blocks.size();
	std::map<std::vector<int>, detail::Candidate> pool;
	for (auto const& tree : trees) {
		for (auto const& node : tree.nodes) {
			auto& c = pool[node.members];
			c.members = node.members;
			c.feasible |= node.feasible;
		}
	}
	for (std::size_t m = 0; m < n; ++m) {
		std::vector<int> const single{static_cast<int>(m)};
		if (pool.count(single) == 0) {
			detail::Candidate c;
			c.members = single;
			c.feasible = feasible[m];
			if (c.feasible == 0) {
				c.feasible = 1u << 2; // forced to the 1.2 V speedup level
				c.forced = true;
			}
			pool[single] = c;
		}
	}

	std::vector<detail::Candidate> candidates;
	candidates.reserve(pool.size());
	for (auto& [key, c] : pool) {
		candidates.push_back(std::move(c));
	}

	std::vector<bool> covered(n, false);
	std::size_t remaining = n;
	std::vector<VoltageVolume> out;
	double selected_mean_sum = 0.0; // running grand mean of volume mean powers

	while (remaining > 0) {
		int best = -1;
		int best_voltage = kNominalVoltage;
		double best_score = 0.0;
		for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
			auto const& c = candidates[ci];
			if (c.members.empty()) {
				continue;
			}
			bool clash = false;
			for (int m : c.members) {
				if (covered[m]) {
					clash = true;
					break;
				}
			}
			if (clash) {
				continue;
			}
			// evaluate each feasible level, keep the cheapest
			double cand_score = 0.0;
			int cand_voltage = -1;
			for (std::size_t v = 0; v < kVoltageLevels.size(); ++v) {
				if ((c.feasible & (1u << v)) == 0) {
					continue;
				}
				double cost = 0.0;
				if (objective == VolumeObjective::PowerAware) {
					cost = cfg.sel_power_weight *
					           detail::volume_power(c.members, fp, static_cast<int>(v)) +
					       cfg.sel_count_weight;
				} else {
					double const mean =
					    detail::volume_power(c.members, fp, static_cast<int>(v)) /
					    static_cast<double>(c.members.size());
					double spread = 0.0;
					if (!out.empty()) {
						double const grand =
						    selected_mean_sum / static_cast<double>(out.size());
						spread = std::fabs(mean - grand);
					}
					cost = cfg.sel_std_weight *
					           detail::volume_power_std(c.members, fp, static_cast<int>(v)) +
					       cfg.sel_spread_weight * spread + cfg.sel_count_weight;
				}
				if (cand_voltage < 0 || cost < cand_score) {
					cand_score = cost;
					cand_voltage = static_cast<int>(v);
				}
			}
			// weighted set cover: cost per newly covered module
			double const score = cand_score / static_cast<double>(c.members.size());
			if (best < 0 || score < best_score - 1e-12 ||
			    (std::fabs(score - best_score) <= 1e-12 &&
			     detail::id_lexicographic_less(c.members, candidates[best].members, fp))) {
				best = static_cast<int>(ci);
				best_score = score;
				best_voltage = cand_voltage;
			}
		}
		auto const& chosen = candidates[best];
		VoltageVolume vol;
		vol.members = chosen.members;
		vol.feasible = chosen.feasible;
		vol.voltage = best_voltage;
		vol.power = detail::volume_power(chosen.members, fp, best_voltage);
		vol.forced = chosen.forced;
		selected_mean_sum += vol.power / static_cast<double>(vol.members.size());
		for (int m : vol.members) {
			covered[m] = true;
		}
		remaining -= vol.members.size();
		out.push_back(std::move(vol));
	}
	std::sort(out.begin(), out.end(), [](VoltageVolume const& a, VoltageVolume const& b) {
		return a.members.front() < b.members.front();
	});
	return out;
}

/// Full assignment pipeline for one decoded floorplan: baseline slacks,
/// per-module feasible sets, per-root trees, greedy selection, and the
/// voltage write-back onto the blocks.
inline std::vector<VoltageVolume> assign_volumes(Floorplan& fp, TechParams const& tech,
                                                 EngineConfig const& cfg,
                                                 VolumeObjective objective,
                                                 std::uint64_t volume_seed = 0) {
	for (auto& b : fp.blocks) {
		b.voltage = kNominalVoltage;
	}
	TimingResult const timing = compute_slacks(fp, tech, false);
	std::vector<std::uint8_t> feas(fp.blocks.size(), 0);
	for (std::size_t i = 0; i < fp.blocks.size(); ++i) {
		feas[i] = feasible_voltages(timing.slack[i], module_delay_ns(fp.blocks[i], tech,
		                                                             kNominalVoltage));
	}
	auto const adjacency = build_adjacency(fp, cfg.adjacency_gap, cfg.cross_die_overlap);
	std::mt19937_64 rng(volume_seed);
	std::mt19937_64* jitter = volume_seed != 0 ? &rng : nullptr;
	std::vector<VolumeTree> trees;
	trees.reserve(fp.blocks.size());
	for (std::size_t root = 0; root < fp.blocks.size(); ++root) {
		trees.push_back(build_volume_tree(static_cast<int>(root), adjacency, feas,
		                                  cfg.volume_bfs_cap, jitter));
	}
	auto volumes = select_volumes(trees, fp, feas, objective, cfg);
	for (auto const& vol : volumes) {
		for (int m : vol.members) {
			fp.blocks[m].voltage = vol.voltage;
		}
	}
	fp.volumes = volumes;
	return volumes;
}

} // namespace tsvshield

#endif
