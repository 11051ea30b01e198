#ifndef TSVSHIELD_GSRC_HPP
#define TSVSHIELD_GSRC_HPP

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsvshield/model.hpp"

namespace tsvshield {

class ParseError : public std::runtime_error {
public:
	ParseError(std::string const& msg, int line)
	    : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
	int line() const { return line_; }

private:
	int line_;
};

class ReferenceError : public std::runtime_error {
public:
	ReferenceError(std::string const& msg, int line)
	    : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
	int line() const { return line_; }

private:
	int line_;
};

/// Parsed benchmark: blocks (no placement yet), terminals, nets, powers.
struct BenchmarkBundle {
	std::vector<BlockModule> blocks;
	std::vector<Terminal> terminals;
	std::vector<Net> nets;
	double scale_factor = 1.0;

	int pin_index(std::string const& name) const {
		for (std::size_t i = 0; i < blocks.size(); ++i) {
			if (blocks[i].id == name) {
				return static_cast<int>(i);
			}
		}
		for (std::size_t i = 0; i < terminals.size(); ++i) {
			if (terminals[i].id == name) {
				return static_cast<int>(blocks.size() + i);
			}
		}
		return -1;
	}
};

namespace detail {

inline std::vector<std::string> tokenize(std::string const& line) {
	std::vector<std::string> out;
	std::istringstream ss(line);
	std::string tok;
	while (ss >> tok) {
		out.push_back(tok);
	}
	return out;
}

inline bool blank_or_comment(std::vector<std::string> const& toks) {
	return toks.empty() || toks[0][0] == '#';
}

inline double parse_number(std::string const& tok, int line, char const* what) {
	std::size_t pos = 0;
	double value = 0.0;
	try {
		value = std::stod(tok, &pos);
	} catch (std::exception const&) {
		throw ParseError(std::string("expected ") + what + ", got '" + tok + "'", line);
	}
	if (pos != tok.size()) {
		throw ParseError(std::string("trailing junk in ") + what + " '" + tok + "'", line);
	}
	return value;
}

inline int parse_count(std::string const& tok, int line, char const* what) {
	double const v = parse_number(tok, line, what);
	if (v < 0.0 || v != std::floor(v)) {
		throw ParseError(std::string(what) + " must be a non-negative integer", line);
	}
	return static_cast<int>(v);
}

/// "(x,y)" with optional internal spacing already split off by tokenize.
inline std::pair<double, double> parse_vertex(std::string const& tok, int line) {
	if (tok.size() < 5 || tok.front() != '(' || tok.back() != ')') {
		throw ParseError("expected vertex '(x,y)', got '" + tok + "'", line);
	}
	std::string const inner = tok.substr(1, tok.size() - 2);
	std::size_t const comma = inner.find(',');
	if (comma == std::string::npos) {
		throw ParseError("expected vertex '(x,y)', got '" + tok + "'", line);
	}
	return {parse_number(inner.substr(0, comma), line, "vertex x"),
	        parse_number(inner.substr(comma + 1), line, "vertex y")};
}

} // namespace detail

/// Parse the .blocks grammar subset: declared counts, soft blocks, 4-vertex
/// hard blocks (bounding box taken), terminals. Any unrecognized line is a
/// located parse error, never a silent default.
inline void parse_gsrc_blocks(std::string const& text, BenchmarkBundle& bundle) {
	std::istringstream in(text);
	std::string line;
	int lineno = 0;
	int want_soft = -1, want_hard = -1, want_term = -1;
	int soft = 0, hard = 0, term = 0;
	while (std::getline(in, line)) {
		++lineno;
		auto const toks = detail::tokenize(line);
		if (detail::blank_or_comment(toks)) {
			continue;
		}
		if (toks.size() == 3 && toks[1] == ":") {
			if (toks[0] == "NumSoftRectangularBlocks") {
				want_soft = detail::parse_count(toks[2], lineno, "block count");
			} else if (toks[0] == "NumHardRectilinearBlocks") {
				want_hard = detail::parse_count(toks[2], lineno, "block count");
			} else if (toks[0] == "NumTerminals") {
				want_term = detail::parse_count(toks[2], lineno, "terminal count");
			} else {
				throw ParseError("unknown header '" + toks[0] + "'", lineno);
			}
			continue;
		}
		if (toks.size() == 5 && toks[1] == "softrectangular") {
			BlockModule b;
			b.id = toks[0];
			b.kind = BlockKind::Soft;
			b.area = detail::parse_number(toks[2], lineno, "area");
			b.ar_min = detail::parse_number(toks[3], lineno, "min aspect");
			b.ar_max = detail::parse_number(toks[4], lineno, "max aspect");
			if (b.area <= 0.0 || b.ar_min <= 0.0 || b.ar_max < b.ar_min) {
				throw ParseError("bad soft block parameters", lineno);
			}
			reshape_soft(b, std::sqrt(b.ar_min * b.ar_max));
			bundle.blocks.push_back(std::move(b));
			++soft;
			continue;
		}
		if (toks.size() == 7 && toks[1] == "hardrectilinear") {
			if (toks[2] != "4") {
				throw ParseError("only 4-vertex hard blocks are supported", lineno);
			}
			double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
			for (int i = 0; i < 4; ++i) {
				auto const [vx, vy] = detail::parse_vertex(toks[3 + i], lineno);
				if (i == 0) {
					xmin = xmax = vx;
					ymin = ymax = vy;
				} else {
					xmin = std::min(xmin, vx);
					xmax = std::max(xmax, vx);
					ymin = std::min(ymin, vy);
					ymax = std::max(ymax, vy);
				}
			}
			BlockModule b;
			b.id = toks[0];
			b.kind = BlockKind::Hard;
			b.w = xmax - xmin;
			b.h = ymax - ymin;
			if (b.w <= 0.0 || b.h <= 0.0) {
				throw ParseError("hard block with empty bounding box", lineno);
			}
			b.area = b.w * b.h;
			b.ar_min = b.ar_max = b.w / b.h;
			bundle.blocks.push_back(std::move(b));
			++hard;
			continue;
		}
		if (toks.size() == 2 && toks[1] == "terminal") {
			bundle.terminals.push_back(Terminal{toks[0], 0.0, 0.0});
			++term;
			continue;
		}
		throw ParseError("unrecognized blocks line '" + line + "'", lineno);
	}
	if (want_soft >= 0 && want_soft != soft) {
		throw ParseError("declared " + std::to_string(want_soft) + " soft blocks, found " +
		                     std::to_string(soft),
		                 lineno);
	}
	if (want_hard >= 0 && want_hard != hard) {
		throw ParseError("declared " + std::to_string(want_hard) + " hard blocks, found " +
		                     std::to_string(hard),
		                 lineno);
	}
	if (want_term >= 0 && want_term != term) {
		throw ParseError("declared " + std::to_string(want_term) + " terminals, found " +
		                     std::to_string(term),
		                 lineno);
	}
}

/// Parse the .nets grammar subset: NumNets/NumPins headers, NetDegree
/// stanzas, pin lines of "<name>" with one optional trailing token.
inline void parse_gsrc_nets(std::string const& text, BenchmarkBundle& bundle) {
	std::istringstream in(text);
	std::string line;
	int lineno = 0;
	int want_nets = -1, want_pins = -1;
	int pins_total = 0;
	int pending = 0; // pin lines still expected for the open net
	std::map<std::string, int> index;
	for (std::size_t i = 0; i < bundle.blocks.size(); ++i) {
		index[bundle.blocks[i].id] = static_cast<int>(i);
	}
	for (std::size_t i = 0; i < bundle.terminals.size(); ++i) {
		index[bundle.terminals[i].id] = static_cast<int>(bundle.blocks.size() + i);
	}
	while (std::getline(in, line)) {
		++lineno;
		auto const toks = detail::tokenize(line);
		if (detail::blank_or_comment(toks)) {
			continue;
		}
		if (pending > 0) {
			if (toks.size() > 2) {
				throw ParseError("malformed pin line '" + line + "'", lineno);
			}
			auto const it = index.find(toks[0]);
			if (it == index.end()) {
				throw ReferenceError("pin '" + toks[0] + "' is not a declared block or terminal",
				                     lineno);
			}
			bundle.nets.back().pins.push_back(it->second);
			++pins_total;
			--pending;
			continue;
		}
		if (toks.size() == 3 && toks[1] == ":") {
			if (toks[0] == "NumNets") {
				want_nets = detail::parse_count(toks[2], lineno, "net count");
			} else if (toks[0] == "NumPins") {
				want_pins = detail::parse_count(toks[2], lineno, "pin count");
			} else if (toks[0] == "NetDegree") {
				int const degree = detail::parse_count(toks[2], lineno, "net degree");
				if (degree < 2) {
					throw ParseError("nets need at least 2 pins", lineno);
				}
				Net net;
				net.id = "n" + std::to_string(bundle.nets.size());
				bundle.nets.push_back(std::move(net));
				pending = degree;
			} else {
				throw ParseError("unknown header '" + toks[0] + "'", lineno);
			}
			continue;
		}
		throw ParseError("unrecognized nets line '" + line + "'", lineno);
	}
	if (pending > 0) {
		throw ParseError("net stanza ended early, " + std::to_string(pending) + " pins missing",
		                 lineno);
	}
	if (want_nets >= 0 && want_nets != static_cast<int>(bundle.nets.size())) {
		throw ParseError("declared " + std::to_string(want_nets) + " nets, found " +
		                     std::to_string(bundle.nets.size()),
		                 lineno);
	}
	if (want_pins >= 0 && want_pins != pins_total) {
		throw ParseError("declared " + std::to_string(want_pins) + " pins, found " +
		                     std::to_string(pins_total),
		                 lineno);
	}
}

/// Optional placement text: "<name> <x> <y>" per line; positions terminals
/// and pre-places blocks.
inline void parse_gsrc_placement(std::string const& text, BenchmarkBundle& bundle) {
	std::istringstream in(text);
	std::string line;
	int lineno = 0;
	while (std::getline(in, line)) {
		++lineno;
		auto const toks = detail::tokenize(line);
		if (detail::blank_or_comment(toks)) {
			continue;
		}
		if (toks.size() != 3) {
			throw ParseError("expected '<name> <x> <y>'", lineno);
		}
		double const x = detail::parse_number(toks[1], lineno, "x");
		double const y = detail::parse_number(toks[2], lineno, "y");
		int const idx = bundle.pin_index(toks[0]);
		if (idx < 0) {
			throw ReferenceError("placement for undeclared '" + toks[0] + "'", lineno);
		}
		if (idx < static_cast<int>(bundle.blocks.size())) {
			bundle.blocks[idx].x = x;
			bundle.blocks[idx].y = y;
		} else {
			bundle.terminals[idx - bundle.blocks.size()].x = x;
			bundle.terminals[idx - bundle.blocks.size()].y = y;
		}
	}
}

/// Power text: "<name> <watts>" per line, full coverage required.
inline void parse_power_text(std::string const& text, BenchmarkBundle& bundle) {
	std::istringstream in(text);
	std::string line;
	int lineno = 0;
	std::map<std::string, double> powers;
	while (std::getline(in, line)) {
		++lineno;
		auto const toks = detail::tokenize(line);
		if (detail::blank_or_comment(toks)) {
			continue;
		}
		if (toks.size() != 2) {
			throw ParseError("expected '<name> <watts>'", lineno);
		}
		double const w = detail::parse_number(toks[1], lineno, "power");
		if (w < 0.0) {
			throw ParseError("negative power", lineno);
		}
		int const idx = bundle.pin_index(toks[0]);
		if (idx < 0 || idx >= static_cast<int>(bundle.blocks.size())) {
			throw ReferenceError("power for undeclared block '" + toks[0] + "'", lineno);
		}
		powers[toks[0]] = w;
	}
	for (auto& b : bundle.blocks) {
		auto const it = powers.find(b.id);
		if (it == powers.end()) {
			throw ReferenceError("no power entry for block '" + b.id + "'", 0);
		}
		b.power = it->second;
	}
}

/// Seeded per-module powers, log-uniform over [0.2, 5] x the mean implied by
/// the configured total, rescaled so the exact total is met.
inline void synthesize_powers(BenchmarkBundle& bundle, double total_power, std::uint64_t seed) {
	if (bundle.blocks.empty()) {
		return;
	}
	std::mt19937_64 rng(seed);
	std::uniform_real_distribution<double> lg(std::log(0.2), std::log(5.0));
	double const mean = total_power / static_cast<double>(bundle.blocks.size());
	double sum = 0.0;
	for (auto& b : bundle.blocks) {
		b.power = mean * std::exp(lg(rng));
		sum += b.power;
	}
	double const fix = total_power / sum;
	for (auto& b : bundle.blocks) {
		b.power *= fix;
	}
}

inline BenchmarkBundle parse_gsrc(std::string const& blocks_text, std::string const& nets_text,
                                  std::optional<std::string> const& power_text = std::nullopt) {
	if (blocks_text.empty() || nets_text.empty()) {
		throw ParseError("empty benchmark text", 0);
	}
	BenchmarkBundle bundle;
	parse_gsrc_blocks(blocks_text, bundle);
	parse_gsrc_nets(nets_text, bundle);
	if (power_text) {
		parse_power_text(*power_text, bundle);
	}
	return bundle;
}

/// Scale module footprints up; powers stay, so power density drops.
inline BenchmarkBundle apply_scale(BenchmarkBundle bundle, double scale_factor) {
	if (scale_factor < 1.0) {
		throw std::invalid_argument("apply_scale: factor must be >= 1");
	}
	double const lin = std::sqrt(scale_factor);
	for (auto& b : bundle.blocks) {
		b.area *= scale_factor;
		b.w *= lin;
		b.h *= lin;
	}
	for (auto& t : bundle.terminals) {
		t.x *= lin;
		t.y *= lin;
	}
	bundle.scale_factor *= scale_factor;
	return bundle;
}

// ---------------------------------------------------------------------------
// Serialization (round-trip support and bundled benchmark output)
// ---------------------------------------------------------------------------

inline std::string serialize_blocks(BenchmarkBundle const& bundle) {
	std::ostringstream out;
	int soft = 0, hard = 0;
	for (auto const& b : bundle.blocks) {
		(b.kind == BlockKind::Soft ? soft : hard)++;
	}
	out << "NumSoftRectangularBlocks : " << soft << "\n";
	out << "NumHardRectilinearBlocks : " << hard << "\n";
	out << "NumTerminals : " << bundle.terminals.size() << "\n\n";
	char buf[256];
	for (auto const& b : bundle.blocks) {
		if (b.kind == BlockKind::Soft) {
			std::snprintf(buf, sizeof(buf), "%s softrectangular %.10g %.10g %.10g", b.id.c_str(),
			              b.area, b.ar_min, b.ar_max);
			out << buf << "\n";
		} else {
			std::snprintf(buf, sizeof(buf),
			              "%s hardrectilinear 4 (0,0) (0,%.10g) (%.10g,%.10g) (%.10g,0)",
			              b.id.c_str(), b.h, b.w, b.h, b.w);
			out << buf << "\n";
		}
	}
	for (auto const& t : bundle.terminals) {
		out << t.id << " terminal\n";
	}
	return out.str();
}

inline std::string serialize_nets(BenchmarkBundle const& bundle) {
	std::ostringstream out;
	std::size_t pins = 0;
	for (auto const& n : bundle.nets) {
		pins += n.pins.size();
	}
	out << "NumNets : " << bundle.nets.size() << "\n";
	out << "NumPins : " << pins << "\n\n";
	for (auto const& n : bundle.nets) {
		out << "NetDegree : " << n.pins.size() << "\n";
		for (int pin : n.pins) {
			if (pin < static_cast<int>(bundle.blocks.size())) {
				out << bundle.blocks[pin].id << " B\n";
			} else {
				out << bundle.terminals[pin - bundle.blocks.size()].id << " B\n";
			}
		}
	}
	return out.str();
}

} // namespace tsvshield

#endif
