#ifndef TSVSHIELD_IO_HPP
#define TSVSHIELD_IO_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "tsvshield/grid.hpp"
#include "tsvshield/gsrc.hpp"
#include "tsvshield/model.hpp"
#include "tsvshield/report.hpp"

namespace tsvshield {

inline std::string read_text_file(std::string const& path) {
	std::ifstream in(path, std::ios::binary);
	if (!in) {
		throw std::runtime_error("cannot open " + path);
	}
	std::ostringstream ss;
	ss << in.rdbuf();
	return ss.str();
}

inline void write_text_file(std::string const& path, std::string const& content) {
	std::ofstream out(path, std::ios::binary);
	if (!out) {
		throw std::runtime_error("cannot open " + path + " for writing");
	}
	out << content;
	if (!out) {
		throw std::runtime_error("write failed for " + path);
	}
}

// ---------------------------------------------------------------------------
// Grid CSV: nx columns x ny rows, row-major from the lower-left bin, %.6e
// ---------------------------------------------------------------------------

inline std::string grid_to_csv(Grid2D const& g) {
	std::ostringstream out;
	char buf[64];
	for (int y = 0; y < g.ny; ++y) {
		for (int x = 0; x < g.nx; ++x) {
			std::snprintf(buf, sizeof(buf), "%.6e", g.at(x, y));
			if (x > 0) {
				out << ',';
			}
			out << buf;
		}
		out << '\n';
	}
	return out.str();
}

inline void write_grid_csv(Grid2D const& g, std::string const& path) {
	write_text_file(path, grid_to_csv(g));
}

inline Grid2D grid_from_csv(std::string const& text, double pitch_x = 1.0, double pitch_y = 1.0) {
	std::istringstream in(text);
	std::string line;
	std::vector<std::vector<double>> rows;
	int lineno = 0;
	while (std::getline(in, line)) {
		++lineno;
		if (line.empty()) {
			continue;
		}
		std::vector<double> row;
		std::istringstream ls(line);
		std::string cell;
		while (std::getline(ls, cell, ',')) {
			row.push_back(detail::parse_number(cell, lineno, "grid value"));
		}
		if (!rows.empty() && row.size() != rows.front().size()) {
			throw ParseError("ragged grid row", lineno);
		}
		rows.push_back(std::move(row));
	}
	if (rows.empty()) {
		throw ParseError("empty grid csv", 0);
	}
	Grid2D g(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()), pitch_x,
	         pitch_y);
	for (int y = 0; y < g.ny; ++y) {
		for (int x = 0; x < g.nx; ++x) {
			g.at(x, y) = rows[y][x];
		}
	}
	return g;
}

inline Grid2D read_grid_csv(std::string const& path, double pitch_x = 1.0, double pitch_y = 1.0) {
	return grid_from_csv(read_text_file(path), pitch_x, pitch_y);
}

// ---------------------------------------------------------------------------
// Report JSON
// ---------------------------------------------------------------------------

inline nlohmann::json correlation_to_json(Correlation const& c) {
	nlohmann::json j;
	j["defined"] = c.defined;
	j["n"] = c.n;
	if (c.defined) {
		j["value"] = c.r;
	} else {
		j["value"] = nullptr;
	}
	return j;
}

inline nlohmann::json report_to_json(LeakageReport const& r) {
	nlohmann::json j;
	j["correlation_r1"] = correlation_to_json(r.r1);
	j["correlation_r2"] = correlation_to_json(r.r2);
	j["correlation_r1_estimate"] = correlation_to_json(r.r1_estimate);
	j["correlation_r2_estimate"] = correlation_to_json(r.r2_estimate);
	j["estimate_alert"] = r.estimate_alert;
	j["spatial_entropy_s1"] = r.s1;
	j["spatial_entropy_s2"] = r.s2;
	j["power_w"] = r.power_w;
	j["critical_delay_ns"] = r.critical_delay_ns;
	j["wirelength_m"] = r.wirelength_m;
	j["peak_temp_k"] = r.peak_temp_k;
	j["signal_tsvs"] = r.signal_tsvs;
	j["dummy_tsvs"] = r.dummy_tsvs;
	j["voltage_volumes"] = r.volume_count;
	j["cost_total"] = r.cost_total;
	j["legal"] = r.legal;
	j["runtime_s"] = r.runtime_s;
	return j;
}

inline void write_report_json(LeakageReport const& r, std::string const& path) {
	write_text_file(path, report_to_json(r).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Floorplan dump: one line per block, "name die x y w h voltage"
// ---------------------------------------------------------------------------

inline std::string floorplan_to_dump(Floorplan const& fp) {
	std::ostringstream out;
	char buf[256];
	for (auto const& b : fp.blocks) {
		std::snprintf(buf, sizeof(buf), "%s %d %.10g %.10g %.10g %.10g %.1f", b.id.c_str(),
		              b.die, b.x, b.y, b.w, b.h, kVoltageLevels[b.voltage].volts);
		out << buf << '\n';
	}
	return out.str();
}

inline void write_floorplan_dump(Floorplan const& fp, std::string const& path) {
	write_text_file(path, floorplan_to_dump(fp));
}

/// Apply a floorplan dump onto blocks parsed from the benchmark: placement,
/// die, dims and voltage per block, matched by name.
inline void apply_floorplan_dump(std::string const& text, Floorplan& fp) {
	std::istringstream in(text);
	std::string line;
	int lineno = 0;
	std::map<std::string, int> index;
	for (std::size_t i = 0; i < fp.blocks.size(); ++i) {
		index[fp.blocks[i].id] = static_cast<int>(i);
	}
	int applied = 0;
	while (std::getline(in, line)) {
		++lineno;
		auto const toks = detail::tokenize(line);
		if (detail::blank_or_comment(toks)) {
			continue;
		}
		if (toks.size() != 7) {
			throw ParseError("expected 'name die x y w h voltage'", lineno);
		}
		auto const it = index.find(toks[0]);
		if (it == index.end()) {
			throw ReferenceError("dump names unknown block '" + toks[0] + "'", lineno);
		}
		BlockModule& b = fp.blocks[it->second];
		b.die = detail::parse_count(toks[1], lineno, "die");
		if (b.die != 1 && b.die != 2) {
			throw ParseError("die must be 1 or 2", lineno);
		}
		b.x = detail::parse_number(toks[2], lineno, "x");
		b.y = detail::parse_number(toks[3], lineno, "y");
		b.w = detail::parse_number(toks[4], lineno, "w");
		b.h = detail::parse_number(toks[5], lineno, "h");
		b.area = b.w * b.h;
		double const volts = detail::parse_number(toks[6], lineno, "voltage");
		int level = -1;
		for (std::size_t v = 0; v < kVoltageLevels.size(); ++v) {
			if (std::fabs(kVoltageLevels[v].volts - volts) < 1e-9) {
				level = static_cast<int>(v);
			}
		}
		if (level < 0) {
			throw ParseError("voltage must be one of 0.8/1.0/1.2", lineno);
		}
		b.voltage = level;
		++applied;
	}
	if (applied != static_cast<int>(fp.blocks.size())) {
		throw ReferenceError("dump covers " + std::to_string(applied) + " of " +
		                         std::to_string(fp.blocks.size()) + " blocks",
		                     lineno);
	}
}

} // namespace tsvshield

#endif
