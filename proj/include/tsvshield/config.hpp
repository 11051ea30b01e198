#ifndef TSVSHIELD_CONFIG_HPP
#define TSVSHIELD_CONFIG_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "tsvshield/gsrc.hpp"
#include "tsvshield/thermal.hpp"

namespace tsvshield {

/// Elmore/technology constants. Resistances in Ohm, capacitances in fF,
/// lengths in um; delays come out in ns via the 1e-6 Ohm*fF -> ns factor.
struct TechParams {
	double r_w = 0.1;      // Ohm/um wire resistance
	double c_w = 0.2;      // fF/um wire capacitance
	double r_drv = 100.0;  // driver output resistance
	double c_sink = 2.0;   // sink pin load
	double r_tsv = 0.5;    // per-TSV series resistance
	double c_tsv = 15.0;   // per-TSV capacitance
	double clock_ns = 2.0; // target clock period
	double k_d = 0.001;    // module delay surrogate, ns per sqrt(um^2)
};

/// Full engine configuration, parsed from flat "key = value" text with '#'
/// comments. Defaults are the documented baseline; every key is optional.
struct EngineConfig {
	// die outline (shared by both dies) and analysis grid
	double outline_w = 4000.0;
	double outline_h = 4000.0;
	int grid_nx = 64;
	int grid_ny = 64;

	StackModel stack;
	TechParams tech;

	// benchmark handling
	double scale_factor = 1.0;
	double total_power = 8.0; // W, for synthesized per-module powers

	// TSV geometry
	double tsv_pitch = 20.0; // um per TSV incl keep-out (10 via + 5 annulus)
	int island_tsv_count = 9;

	// SA schedule
	double sa_t0 = 0.0; // <= 0: derived from initial uphill sampling
	double sa_cooling = 0.97;
	double sa_moves_per_temp = 100.0; // x number of blocks
	double sa_stop_acceptance = 0.01;
	long sa_max_moves = 400000;
	double sa_delta = 0.05;            // leakage-best pick margin over best cost
	double sa_top_die_bias = 0.6;      // thermal design rule move bias
	// cost weights ("all criteria weighted equally" by default)
	double w_outline = 4.0;
	double w_density = 1.0;
	double w_wirelength = 1.0;
	double w_delay = 1.0;
	double w_temp = 1.0;
	double w_power = 1.0;
	double w_corr = 1.0;
	double w_entropy = 1.0;

	// voltage volumes
	double adjacency_gap = 10.0;      // um, same-die abutment slack
	double cross_die_overlap = 0.25;  // fraction of the smaller footprint
	int volume_bfs_cap = 64;          // candidate volumes per root
	double sel_power_weight = 1.0;    // pa objective
	double sel_std_weight = 1.0;      // tsc objective: within-volume power std
	double sel_spread_weight = 1.0;   // tsc objective: cross-volume mean spread
	double sel_count_weight = 1.0;    // both: volume count pressure

	// activity sampling and hardening
	int sampling_count = 100;
	double sampling_std_fraction = 0.10;
	int harden_target_die = 1; // 0 = whole stack
	int harden_max_insertions = 1000;

	// solver
	double solver_tolerance = 1e-6;
	int solver_max_iterations = 50000;

	// leakage metric constants
	double entropy_singleton_distance = 0.5;

	std::uint64_t seed = 1;

	static EngineConfig defaults() { return EngineConfig{}; }

	/// Parse overrides from config text. Unknown keys and malformed lines
	/// are located parse errors.
	void load(std::string const& text);

	std::string serialize() const;
};

namespace detail {

struct ConfigBinding {
	std::function<void(EngineConfig&, double)> set;
	std::function<double(EngineConfig const&)> get;
};

inline std::map<std::string, ConfigBinding> const& config_bindings() {
	static std::map<std::string, ConfigBinding> const table = [] {
		std::map<std::string, ConfigBinding> t;
		auto bind = [&t](std::string const& key, auto member) {
			t[key] = ConfigBinding{
			    [member](EngineConfig& c, double v) { c.*member = static_cast<std::remove_reference_t<decltype(c.*member)>>(v); },
			    [member](EngineConfig const& c) { return static_cast<double>(c.*member); }};
		};
		auto bind_stack = [&t](std::string const& key, auto member) {
			t[key] = ConfigBinding{
			    [member](EngineConfig& c, double v) { c.stack.*member = v; },
			    [member](EngineConfig const& c) { return c.stack.*member; }};
		};
		auto bind_tech = [&t](std::string const& key, auto member) {
			t[key] = ConfigBinding{
			    [member](EngineConfig& c, double v) { c.tech.*member = v; },
			    [member](EngineConfig const& c) { return c.tech.*member; }};
		};
		bind("outline_w", &EngineConfig::outline_w);
		bind("outline_h", &EngineConfig::outline_h);
		bind("grid_nx", &EngineConfig::grid_nx);
		bind("grid_ny", &EngineConfig::grid_ny);
		bind("scale_factor", &EngineConfig::scale_factor);
		bind("total_power", &EngineConfig::total_power);
		bind("tsv_pitch", &EngineConfig::tsv_pitch);
		bind("island_tsv_count", &EngineConfig::island_tsv_count);
		bind("sa_t0", &EngineConfig::sa_t0);
		bind("sa_cooling", &EngineConfig::sa_cooling);
		bind("sa_moves_per_temp", &EngineConfig::sa_moves_per_temp);
		bind("sa_stop_acceptance", &EngineConfig::sa_stop_acceptance);
		bind("sa_max_moves", &EngineConfig::sa_max_moves);
		bind("sa_delta", &EngineConfig::sa_delta);
		bind("sa_top_die_bias", &EngineConfig::sa_top_die_bias);
		bind("w_outline", &EngineConfig::w_outline);
		bind("w_density", &EngineConfig::w_density);
		bind("w_wirelength", &EngineConfig::w_wirelength);
		bind("w_delay", &EngineConfig::w_delay);
		bind("w_temp", &EngineConfig::w_temp);
		bind("w_power", &EngineConfig::w_power);
		bind("w_corr", &EngineConfig::w_corr);
		bind("w_entropy", &EngineConfig::w_entropy);
		bind("adjacency_gap", &EngineConfig::adjacency_gap);
		bind("cross_die_overlap", &EngineConfig::cross_die_overlap);
		bind("volume_bfs_cap", &EngineConfig::volume_bfs_cap);
		bind("sel_power_weight", &EngineConfig::sel_power_weight);
		bind("sel_std_weight", &EngineConfig::sel_std_weight);
		bind("sel_spread_weight", &EngineConfig::sel_spread_weight);
		bind("sel_count_weight", &EngineConfig::sel_count_weight);
		bind("sampling_count", &EngineConfig::sampling_count);
		bind("sampling_std_fraction", &EngineConfig::sampling_std_fraction);
		bind("harden_target_die", &EngineConfig::harden_target_die);
		bind("harden_max_insertions", &EngineConfig::harden_max_insertions);
		bind("solver_tolerance", &EngineConfig::solver_tolerance);
		bind("solver_max_iterations", &EngineConfig::solver_max_iterations);
		bind("entropy_singleton_distance", &EngineConfig::entropy_singleton_distance);
		bind("seed", &EngineConfig::seed);
		bind_stack("stack_k_si_1", &StackModel::k_si_1);
		bind_stack("stack_t_si_1", &StackModel::t_si_1);
		bind_stack("stack_k_si_2", &StackModel::k_si_2);
		bind_stack("stack_t_si_2", &StackModel::t_si_2);
		bind_stack("stack_k_bond", &StackModel::k_bond);
		bind_stack("stack_t_bond", &StackModel::t_bond);
		bind_stack("stack_k_tsv", &StackModel::k_tsv);
		bind_stack("stack_sink_coeff", &StackModel::sink_coeff);
		bind_stack("stack_pkg_coeff", &StackModel::pkg_coeff);
		bind_stack("stack_ambient", &StackModel::ambient);
		bind_tech("tech_r_w", &TechParams::r_w);
		bind_tech("tech_c_w", &TechParams::c_w);
		bind_tech("tech_r_drv", &TechParams::r_drv);
		bind_tech("tech_c_sink", &TechParams::c_sink);
		bind_tech("tech_r_tsv", &TechParams::r_tsv);
		bind_tech("tech_c_tsv", &TechParams::c_tsv);
		bind_tech("tech_clock_ns", &TechParams::clock_ns);
		bind_tech("tech_k_d", &TechParams::k_d);
		return t;
	}();
	return table;
}

} // namespace detail

inline void EngineConfig::load(std::string const& text) {
	EngineConfig staged = *this; // commit only after validation
	std::istringstream in(text);
	std::string line;
	int lineno = 0;
	auto const& table = detail::config_bindings();
	while (std::getline(in, line)) {
		++lineno;
		// strip comments
		std::size_t const hash = line.find('#');
		if (hash != std::string::npos) {
			line.resize(hash);
		}
		auto const toks = detail::tokenize(line);
		if (toks.empty()) {
			continue;
		}
		if (toks.size() != 3 || toks[1] != "=") {
			throw ParseError("expected 'key = value'", lineno);
		}
		auto const it = table.find(toks[0]);
		if (it == table.end()) {
			throw ParseError("unknown config key '" + toks[0] + "'", lineno);
		}
		it->second.set(staged, detail::parse_number(toks[2], lineno, "config value"));
	}
	if (staged.sa_cooling <= 0.0 || staged.sa_cooling >= 1.0) {
		throw ParseError("sa_cooling must be in (0,1)", 0);
	}
	if (staged.sampling_count < 2) {
		throw ParseError("sampling_count must be >= 2", 0);
	}
	for (double w : {staged.w_outline, staged.w_density, staged.w_wirelength, staged.w_delay,
	                 staged.w_temp, staged.w_power, staged.w_corr, staged.w_entropy}) {
		if (w < 0.0) {
			throw ParseError("cost weights must be >= 0", 0);
		}
	}
	*this = staged;
}

inline std::string EngineConfig::serialize() const {
	std::ostringstream out;
	char buf[128];
	for (auto const& [key, binding] : detail::config_bindings()) {
		std::snprintf(buf, sizeof(buf), "%s = %.17g\n", key.c_str(), binding.get(*this));
		out << buf;
	}
	return out.str();
}

} // namespace tsvshield

#endif
