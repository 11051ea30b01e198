#ifndef TSVSHIELD_SEQPAIR_HPP
#define TSVSHIELD_SEQPAIR_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "tsvshield/config.hpp"
#include "tsvshield/model.hpp"

namespace tsvshield {

/// Solution encoding: one sequence pair per die, a die assignment, and the
/// chosen aspect ratio per soft block.
struct LayoutEncoding {
	std::array<std::vector<int>, 2> seq1; // [die-1], [die-2] block indices
	std::array<std::vector<int>, 2> seq2;
	std::vector<int> die_of;      // per block: 1 or 2
	std::vector<double> aspect;   // per block: target w/h
	std::uint64_t volume_seed = 0;
};

namespace detail {

/// Longest-path sequence-pair packing for one die. a left-of b iff a
/// precedes b in both sequences; a below b iff a follows b in seq1 but
/// precedes it in seq2.
inline void pack_die(std::vector<int> const& s1, std::vector<int> const& s2,
                     std::vector<BlockModule>& blocks) {
	std::size_t const n = s1.size();
	if (n == 0) {
		return;
	}
	std::vector<int> rank1(blocks.size(), 0);
	for (std::size_t i = 0; i < n; ++i) {
		rank1[s1[i]] = static_cast<int>(i);
	}
	// process in seq2 order: all potential predecessors are already placed
	for (std::size_t i = 0; i < n; ++i) {
		int const b = s2[i];
		double x = 0.0, y = 0.0;
		for (std::size_t j = 0; j < i; ++j) {
			int const a = s2[j];
			if (rank1[a] < rank1[b]) {
				x = std::max(x, blocks[a].x + blocks[a].w);
			} else {
				y = std::max(y, blocks[a].y + blocks[a].h);
			}
		}
		blocks[b].x = x;
		blocks[b].y = y;
	}
}

/// Coarse whitespace index over both dies for TSV island placement.
struct WhitespaceIndex {
	int nx = 0, ny = 0;
	double cell_w = 0.0, cell_h = 0.0;
	std::vector<std::uint8_t> free_cell;

	WhitespaceIndex(Floorplan const& fp, double island_w, double island_h) {
		nx = std::max(1, static_cast<int>(fp.outline_w / island_w));
		ny = std::max(1, static_cast<int>(fp.outline_h / island_h));
		cell_w = fp.outline_w / nx;
		cell_h = fp.outline_h / ny;
		free_cell.assign(static_cast<std::size_t>(nx) * ny, 1);
		for (auto const& b : fp.blocks) {
			mark(b.rect());
		}
		for (auto const& t : fp.tsvs) {
			mark(t.rect());
		}
	}

	void mark(Rect const& r) {
		int const x0 = std::max(0, static_cast<int>(r.x / cell_w));
		int const y0 = std::max(0, static_cast<int>(r.y / cell_h));
		int const x1 = std::min(nx - 1, static_cast<int>((r.x2() - 1e-9) / cell_w));
		int const y1 = std::min(ny - 1, static_cast<int>((r.y2() - 1e-9) / cell_h));
		for (int y = y0; y <= y1; ++y) {
			for (int x = x0; x <= x1; ++x) {
				free_cell[static_cast<std::size_t>(y) * nx + x] = 0;
			}
		}
	}

	/// Nearest free cell center to the target, spiral search by Chebyshev
	/// rings; returns false when the die has no whitespace left.
	bool nearest_free(double tx, double ty, double& ox, double& oy) {
		int const cx = std::clamp(static_cast<int>(tx / cell_w), 0, nx - 1);
		int const cy = std::clamp(static_cast<int>(ty / cell_h), 0, ny - 1);
		for (int r = 0; r < std::max(nx, ny); ++r) {
			int best = -1;
			double best_d2 = 0.0;
			for (int y = cy - r; y <= cy + r; ++y) {
				for (int x = cx - r; x <= cx + r; ++x) {
					if (x < 0 || x >= nx || y < 0 || y >= ny) {
						continue;
					}
					if (std::max(std::abs(x - cx), std::abs(y - cy)) != r) {
						continue;
					}
					std::size_t const idx = static_cast<std::size_t>(y) * nx + x;
					if (free_cell[idx] == 0) {
						continue;
					}
					double const mx = (x + 0.5) * cell_w;
					double const my = (y + 0.5) * cell_h;
					double const d2 = (mx - tx) * (mx - tx) + (my - ty) * (my - ty);
					if (best < 0 || d2 < best_d2) {
						best = static_cast<int>(idx);
						best_d2 = d2;
					}
				}
			}
			if (best >= 0) {
				free_cell[best] = 0;
				ox = (best % nx + 0.5) * cell_w;
				oy = (best / nx + 0.5) * cell_h;
				return true;
			}
		}
		return false;
	}
};

} // namespace detail

/// Decode an encoding into a placed floorplan: per-die sequence-pair packing
/// plus one signal TSV island per cross-die net, dropped on the whitespace
/// nearest the net's bounding-box center. Outline violations are a cost, not
/// an error.
inline Floorplan decode(LayoutEncoding const& enc, std::vector<BlockModule> const& blocks,
                        std::vector<Terminal> const& terminals, std::vector<Net> const& nets,
                        EngineConfig const& cfg) {
	Floorplan fp;
	fp.outline_w = cfg.outline_w;
	fp.outline_h = cfg.outline_h;
	fp.blocks = blocks;
	fp.terminals = terminals;
	fp.nets = nets;
	for (std::size_t i = 0; i < fp.blocks.size(); ++i) {
		fp.blocks[i].die = enc.die_of[i];
		if (fp.blocks[i].kind == BlockKind::Soft) {
			reshape_soft(fp.blocks[i], enc.aspect[i]);
		}
	}
	for (int d = 0; d < 2; ++d) {
		detail::pack_die(enc.seq1[d], enc.seq2[d], fp.blocks);
	}

	// signal TSV islands for cross-die nets
	TsvIsland const proto = make_island(0, 0, cfg.island_tsv_count, TsvKind::Signal,
	                                    cfg.tsv_pitch);
	detail::WhitespaceIndex ws(fp, proto.w, proto.h);
	for (auto const& net : fp.nets) {
		bool has1 = false, has2 = false;
		double lo_x = 0.0, hi_x = 0.0, lo_y = 0.0, hi_y = 0.0;
		bool first = true;
		for (int pin : net.pins) {
			double px = 0.0, py = 0.0;
			int die = 0;
			fp.pin_pos(pin, px, py, die);
			has1 |= die == 1;
			has2 |= die == 2;
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
		if (!(has1 && has2)) {
			continue;
		}
		double tx = 0.5 * (lo_x + hi_x);
		double ty = 0.5 * (lo_y + hi_y);
		double ox = tx, oy = ty;
		if (!ws.nearest_free(tx, ty, ox, oy)) {
			// no whitespace anywhere: clamp to the outline and accept overlap
			ox = std::clamp(tx, proto.w / 2.0, fp.outline_w - proto.w / 2.0);
			oy = std::clamp(ty, proto.h / 2.0, fp.outline_h - proto.h / 2.0);
		}
		fp.tsvs.push_back(make_island(ox, oy, cfg.island_tsv_count, TsvKind::Signal,
		                              cfg.tsv_pitch));
	}
	return fp;
}

} // namespace tsvshield

#endif
