#ifndef TSVSHIELD_MODEL_HPP
#define TSVSHIELD_MODEL_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsvshield/geometry.hpp"
#include "tsvshield/grid.hpp"

namespace tsvshield {

// ---------------------------------------------------------------------------
// Supply voltage levels (90nm-node scalings, fixed set)
// ---------------------------------------------------------------------------

struct VoltageLevel {
	double volts;
	double power_scale;
	double delay_scale;
};

/// The three selectable supply levels. Index 1 (1.0 V) is the nominal level
/// all powers and delays are specified at.
inline constexpr std::array<VoltageLevel, 3> kVoltageLevels = {{
    {0.8, 0.817, 1.56},
    {1.0, 1.0, 1.0},
    {1.2, 1.496, 0.83},
}};

inline constexpr int kNominalVoltage = 1;

// ---------------------------------------------------------------------------
// Blocks, nets, TSV islands
// ---------------------------------------------------------------------------

enum class BlockKind : std::uint8_t { Soft, Hard };

struct BlockModule {
	std::string id;
	BlockKind kind = BlockKind::Soft;
	double area = 0.0;     // um^2
	double ar_min = 1.0;   // aspect ratio limits (w/h) for soft blocks
	double ar_max = 1.0;
	double x = 0.0;        // lower-left, um
	double y = 0.0;
	double w = 0.0;
	double h = 0.0;
	int die = 1;           // 1 = bottom, 2 = top
	double power = 0.0;    // nominal power at 1.0 V, W
	int voltage = kNominalVoltage; // index into kVoltageLevels

	Rect rect() const { return Rect{x, y, w, h}; }
	double effective_power() const { return power * kVoltageLevels[voltage].power_scale; }
	double aspect() const { return h > 0.0 ? w / h : 0.0; }
};

/// Reshape a soft block to the given aspect ratio (w/h). The width is
/// quantized to 0.1 um, the height derived exactly so the area holds to
/// well under 0.1% for any block size.
inline void reshape_soft(BlockModule& b, double aspect) {
	aspect = std::clamp(aspect, b.ar_min, b.ar_max);
	double w = std::sqrt(b.area * aspect);
	w = std::max(0.1, std::round(w * 10.0) / 10.0);
	b.w = w;
	b.h = b.area / w;
}

/// Net pins index into Floorplan::blocks for values < num_blocks, otherwise
/// into Floorplan::terminals (offset by num_blocks). The driver is pins[0].
struct Net {
	std::string id;
	std::vector<int> pins;
};

struct Terminal {
	std::string id;
	double x = 0.0;
	double y = 0.0;
};

enum class TsvKind : std::uint8_t { Signal, DummyThermal };

/// Group of densely packed TSVs with shared keep-out zone. The footprint is
/// an area-exact rectangle: count * per-TSV footprint (pitch^2 incl keep-out).
struct TsvIsland {
	double cx = 0.0;
	double cy = 0.0;
	int count = 1;
	TsvKind kind = TsvKind::Signal;
	double footprint = 0.0; // um^2 incl keep-out
	double w = 0.0;
	double h = 0.0;

	Rect rect() const { return Rect{cx - 0.5 * w, cy - 0.5 * h, w, h}; }
};

inline TsvIsland make_island(double cx, double cy, int count, TsvKind kind, double per_tsv_pitch) {
	if (count < 1) {
		throw std::invalid_argument("make_island: count must be >= 1");
	}
	TsvIsland isl;
	isl.cx = cx;
	isl.cy = cy;
	isl.count = count;
	isl.kind = kind;
	isl.footprint = count * per_tsv_pitch * per_tsv_pitch;
	int const cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
	isl.w = cols * per_tsv_pitch;
	isl.h = isl.footprint / isl.w;
	return isl;
}

// ---------------------------------------------------------------------------
// Floorplan
// ---------------------------------------------------------------------------

/// Connected group of modules (possibly spanning dies) driven at one supply.
struct VoltageVolume {
	std::vector<int> members;   // block indices, ascending
	std::uint8_t feasible = 0;  // bitmask over kVoltageLevels
	int voltage = kNominalVoltage;
	double power = 0.0;         // aggregate at the chosen level, W
	bool forced = false;        // had an empty feasible set, pinned to 1.2 V
};

/// Full two-die solution. Both dies share one fixed outline.
struct Floorplan {
	double outline_w = 0.0; // um
	double outline_h = 0.0;
	std::vector<BlockModule> blocks;
	std::vector<Terminal> terminals;
	std::vector<Net> nets;
	std::vector<TsvIsland> tsvs;
	std::vector<VoltageVolume> volumes;

	Rect outline() const { return Rect{0.0, 0.0, outline_w, outline_h}; }

	bool pin_is_terminal(int pin) const { return pin >= static_cast<int>(blocks.size()); }

	/// Pin position: block center or terminal location.
	void pin_pos(int pin, double& px, double& py, int& die) const {
		if (pin_is_terminal(pin)) {
			Terminal const& t = terminals[pin - blocks.size()];
			px = t.x;
			py = t.y;
			die = 0; // terminals sit on the package, no die
		} else {
			BlockModule const& b = blocks[pin];
			px = b.x + 0.5 * b.w;
			py = b.y + 0.5 * b.h;
			die = b.die;
		}
	}
};

inline bool blocks_overlap(BlockModule const& a, BlockModule const& b) {
	if (a.die != b.die) {
		return false;
	}
	return overlaps(a.rect(), b.rect());
}

/// Legality: all blocks inside the outline, no same-die pair overlaps.
inline bool is_legal(Floorplan const& fp, double eps = 1e-6) {
	Rect const out = fp.outline();
	for (auto const& b : fp.blocks) {
		if (!inside(b.rect(), out, eps)) {
			return false;
		}
	}
	for (std::size_t i = 0; i < fp.blocks.size(); ++i) {
		for (std::size_t j = i + 1; j < fp.blocks.size(); ++j) {
			if (blocks_overlap(fp.blocks[i], fp.blocks[j])) {
				return false;
			}
		}
	}
	return true;
}

// ---------------------------------------------------------------------------
// Rasterization
// ---------------------------------------------------------------------------

namespace detail {

/// Distribute rect r's quantity q over grid bins by exact clipped area.
template <typename Acc>
void splat_rect(Grid2D& g, Rect const& r, double q, Acc&& acc) {
	if (r.w <= 0.0 || r.h <= 0.0) {
		return;
	}
	int const x0 = std::max(0, static_cast<int>(std::floor(r.x / g.pitch_x)));
	int const y0 = std::max(0, static_cast<int>(std::floor(r.y / g.pitch_y)));
	int const x1 = std::min(g.nx - 1, static_cast<int>(std::floor((r.x2() - 1e-12) / g.pitch_x)));
	int const y1 = std::min(g.ny - 1, static_cast<int>(std::floor((r.y2() - 1e-12) / g.pitch_y)));
	double const inv_area = 1.0 / r.area();
	for (int by = y0; by <= y1; ++by) {
		for (int bx = x0; bx <= x1; ++bx) {
			Rect const bin{bx * g.pitch_x, by * g.pitch_y, g.pitch_x, g.pitch_y};
			double const a = clip_area(r, bin);
			if (a > 0.0) {
				acc(g.at(bx, by), q * a * inv_area, a);
			}
		}
	}
}

} // namespace detail

/// Power-density map of one die: bin value [W/um^2] collects each block's
/// effective power weighted by the exact block/bin overlap fraction.
inline Grid2D rasterize_power(Floorplan const& fp, int die, int nx, int ny) {
	if (die != 1 && die != 2) {
		throw std::invalid_argument("rasterize_power: die must be 1 or 2");
	}
	if (nx < 2 || ny < 2) {
		throw std::invalid_argument("rasterize_power: dims must be >= 2x2");
	}
	Grid2D g(nx, ny, fp.outline_w / nx, fp.outline_h / ny);
	double const inv_bin = 1.0 / g.bin_area();
	for (auto const& b : fp.blocks) {
		if (b.die != die) {
			continue;
		}
		detail::splat_rect(g, b.rect(), b.effective_power(),
		                   [inv_bin](double& bin, double p, double) { bin += p * inv_bin; });
	}
	return g;
}

/// Covered fraction of each bin by TSV footprints (incl keep-out), clamped
/// to 1.0. Overlapping islands accumulate before the clamp.
inline Grid2D rasterize_tsv_density(Floorplan const& fp, int nx, int ny) {
	if (nx < 2 || ny < 2) {
		throw std::invalid_argument("rasterize_tsv_density: dims must be >= 2x2");
	}
	Grid2D g(nx, ny, fp.outline_w / nx, fp.outline_h / ny);
	double const inv_bin = 1.0 / g.bin_area();
	for (auto const& t : fp.tsvs) {
		detail::splat_rect(g, t.rect(), 0.0,
		                   [inv_bin](double& bin, double, double a) { bin += a * inv_bin; });
	}
	for (double& d : g.v) {
		d = std::min(d, 1.0);
	}
	return g;
}

} // namespace tsvshield

#endif
