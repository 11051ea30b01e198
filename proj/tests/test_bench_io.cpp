#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <random>

#include "tsvshield/config.hpp"
#include "tsvshield/gsrc.hpp"
#include "tsvshield/io.hpp"

using namespace tsvshield;

namespace {

std::string const kBlocks = R"(# toy benchmark
NumSoftRectangularBlocks : 3
NumHardRectilinearBlocks : 1
NumTerminals : 2

sb0 softrectangular 4000 0.33 3.0
sb1 softrectangular 2500 0.5 2.0
sb2 softrectangular 1000 1.0 1.0
hb0 hardrectilinear 4 (0,0) (0,40) (50,40) (50,0)

p0 terminal
p1 terminal
)";

std::string const kNets = R"(NumNets : 2
NumPins : 5

NetDegree : 3
sb0 B
sb1 B
p0 B
NetDegree : 2
hb0 B
sb2 B
)";

} // namespace

TEST_CASE("parse_gsrc: field mapping per the grammar") {
	BenchmarkBundle const b = parse_gsrc(kBlocks, kNets);
	REQUIRE(b.blocks.size() == 4);
	REQUIRE(b.terminals.size() == 2);
	REQUIRE(b.nets.size() == 2);

	BlockModule const& sb0 = b.blocks[0];
	CHECK(sb0.id == "sb0");
	CHECK(sb0.kind == BlockKind::Soft);
	CHECK(sb0.area == 4000.0);
	CHECK(sb0.ar_min == 0.33);
	CHECK(sb0.ar_max == 3.0);

	BlockModule const& hb0 = b.blocks[3];
	CHECK(hb0.kind == BlockKind::Hard);
	CHECK(hb0.w == 50.0);
	CHECK(hb0.h == 40.0);

	CHECK(b.nets[0].pins.size() == 3);
	CHECK(b.nets[0].pins[2] == 4); // p0 follows the 4 blocks
}

TEST_CASE("parse_gsrc: zero nets declared parses cleanly") {
	BenchmarkBundle const b = parse_gsrc(kBlocks, "NumNets : 0\nNumPins : 0\n");
	CHECK(b.nets.empty());
}

TEST_CASE("parse_gsrc: malformed and undeclared inputs carry line numbers") {
	SECTION("malformed block line") {
		try {
			parse_gsrc("NumSoftRectangularBlocks : 1\nsb0 softsquare 10\n", kNets);
			FAIL("expected ParseError");
		} catch (ParseError const& e) {
			CHECK(e.line() == 2);
		}
	}
	SECTION("undeclared pin") {
		try {
			parse_gsrc(kBlocks, "NetDegree : 2\nsb0 B\nghost B\n");
			FAIL("expected ReferenceError");
		} catch (ReferenceError const& e) {
			CHECK(e.line() == 3);
		}
	}
	SECTION("count mismatch") {
		CHECK_THROWS_AS(parse_gsrc("NumSoftRectangularBlocks : 7\nsb0 softrectangular 10 1 1\n",
		                           kNets),
		                ParseError);
	}
	SECTION("empty text") {
		CHECK_THROWS_AS(parse_gsrc("", kNets), ParseError);
	}
}

TEST_CASE("parser round-trip: serialize(parse(x)) parses equal") {
	BenchmarkBundle const b = parse_gsrc(kBlocks, kNets);
	BenchmarkBundle const b2 = parse_gsrc(serialize_blocks(b), serialize_nets(b));
	REQUIRE(b2.blocks.size() == b.blocks.size());
	REQUIRE(b2.terminals.size() == b.terminals.size());
	REQUIRE(b2.nets.size() == b.nets.size());
	for (std::size_t i = 0; i < b.blocks.size(); ++i) {
		CHECK(b2.blocks[i].id == b.blocks[i].id);
		CHECK(b2.blocks[i].kind == b.blocks[i].kind);
		CHECK(b2.blocks[i].area == Catch::Approx(b.blocks[i].area).epsilon(1e-9));
		CHECK(b2.blocks[i].ar_min == Catch::Approx(b.blocks[i].ar_min).epsilon(1e-9));
		CHECK(b2.blocks[i].ar_max == Catch::Approx(b.blocks[i].ar_max).epsilon(1e-9));
	}
	for (std::size_t i = 0; i < b.nets.size(); ++i) {
		CHECK(b2.nets[i].pins == b.nets[i].pins);
	}
}

TEST_CASE("apply_scale multiplies areas, preserves powers") {
	BenchmarkBundle b = parse_gsrc(kBlocks, kNets);
	synthesize_powers(b, 8.0, 42);
	std::vector<double> const powers_before = [&] {
		std::vector<double> p;
		for (auto const& blk : b.blocks) {
			p.push_back(blk.power);
		}
		return p;
	}();

	BenchmarkBundle const scaled = apply_scale(b, 10.0);
	for (std::size_t i = 0; i < b.blocks.size(); ++i) {
		CHECK(scaled.blocks[i].area == Catch::Approx(10.0 * b.blocks[i].area).epsilon(1e-12));
		CHECK(scaled.blocks[i].power == powers_before[i]);
	}

	BenchmarkBundle const same = apply_scale(b, 1.0);
	for (std::size_t i = 0; i < b.blocks.size(); ++i) {
		CHECK(same.blocks[i].area == b.blocks[i].area);
	}
	CHECK_THROWS_AS(apply_scale(b, 0.5), std::invalid_argument);
}

TEST_CASE("apply_scale: table-scale outline stays feasible") {
	// 300 modules totaling ~0.27 mm^2, scaled 10x, against a 23.04 mm^2
	// two-die outline: utilization stays comfortably under capacity.
	std::ostringstream blocks;
	blocks << "NumSoftRectangularBlocks : 300\nNumHardRectilinearBlocks : 0\nNumTerminals : 0\n";
	for (int i = 0; i < 300; ++i) {
		blocks << "sb" << i << " softrectangular " << (273170.0 / 300.0) << " 0.5 2.0\n";
	}
	BenchmarkBundle const b =
	    apply_scale(parse_gsrc(blocks.str(), "NumNets : 0\nNumPins : 0\n"), 10.0);
	double total = 0.0;
	for (auto const& blk : b.blocks) {
		total += blk.area;
	}
	CHECK(total == Catch::Approx(2.7317e6).epsilon(1e-6));
	CHECK(total <= 2.0 * 23.04e6);
}

TEST_CASE("power synthesis hits the configured total and stays in range") {
	BenchmarkBundle b = parse_gsrc(kBlocks, kNets);
	synthesize_powers(b, 8.0, 7);
	double total = 0.0;
	for (auto const& blk : b.blocks) {
		CHECK(blk.power > 0.0);
		total += blk.power;
	}
	CHECK(total == Catch::Approx(8.0).epsilon(1e-12));

	BenchmarkBundle b2 = parse_gsrc(kBlocks, kNets);
	synthesize_powers(b2, 8.0, 7);
	for (std::size_t i = 0; i < b.blocks.size(); ++i) {
		CHECK(b2.blocks[i].power == b.blocks[i].power); // seeded determinism
	}
}

TEST_CASE("grid csv: format, exact-value round trip") {
	Grid2D g(2, 2, 1.0, 1.0);
	g.at(0, 0) = 0.0;
	g.at(1, 0) = 1.0;
	g.at(0, 1) = 2.0;
	g.at(1, 1) = 3.0;
	std::string const csv = grid_to_csv(g);
	CHECK(csv == "0.000000e+00,1.000000e+00\n2.000000e+00,3.000000e+00\n");

	Grid2D const back = grid_from_csv(csv);
	REQUIRE(back.nx == 2);
	REQUIRE(back.ny == 2);
	for (std::size_t i = 0; i < g.size(); ++i) {
		CHECK(back.v[i] == g.v[i]); // bitwise for %.6e-exact values
	}
}

TEST_CASE("report json carries the full metric schema") {
	LeakageReport r;
	r.r1 = {0.42, true, 1024};
	r.r2 = {0.0, false, 1024};
	r.s1 = 2.7;
	r.power_w = 8.1;
	nlohmann::json const j = report_to_json(r);
	CHECK(j["correlation_r1"]["value"].get<double>() >= -1.0);
	CHECK(j["correlation_r1"]["value"].get<double>() <= 1.0);
	CHECK(j["correlation_r2"]["value"].is_null());
	for (char const* key :
	     {"spatial_entropy_s1", "spatial_entropy_s2", "power_w", "critical_delay_ns",
	      "wirelength_m", "peak_temp_k", "signal_tsvs", "dummy_tsvs", "voltage_volumes",
	      "runtime_s"}) {
		CHECK(j.contains(key));
	}
}

TEST_CASE("floorplan dump round trip") {
	Floorplan fp;
	fp.outline_w = fp.outline_h = 100.0;
	for (int i = 0; i < 3; ++i) {
		BlockModule b;
		b.id = "m" + std::to_string(i);
		b.x = 10.0 * i;
		b.y = 5.0 * i;
		b.w = 8.0 + i;
		b.h = 6.0 + i;
		b.area = b.w * b.h;
		b.die = 1 + (i % 2);
		b.voltage = i;
		fp.blocks.push_back(b);
	}
	std::string const dump = floorplan_to_dump(fp);
	Floorplan fp2 = fp;
	for (auto& b : fp2.blocks) {
		b.x = b.y = 0.0;
		b.die = 1;
		b.voltage = kNominalVoltage;
	}
	apply_floorplan_dump(dump, fp2);
	for (std::size_t i = 0; i < fp.blocks.size(); ++i) {
		CHECK(fp2.blocks[i].x == Catch::Approx(fp.blocks[i].x));
		CHECK(fp2.blocks[i].die == fp.blocks[i].die);
		CHECK(fp2.blocks[i].voltage == fp.blocks[i].voltage);
	}
	CHECK_THROWS_AS(apply_floorplan_dump("m0 1 0 0 1\n", fp2), ParseError);
}

TEST_CASE("config: defaults, overrides, errors") {
	EngineConfig cfg = EngineConfig::defaults();
	cfg.load("grid_nx = 32\nsa_cooling = 0.9 # fast\n\n# comment only\nseed = 99\n");
	CHECK(cfg.grid_nx == 32);
	CHECK(cfg.sa_cooling == 0.9);
	CHECK(cfg.seed == 99);

	CHECK_THROWS_AS(cfg.load("no_such_key = 1\n"), ParseError);
	CHECK_THROWS_AS(cfg.load("grid_nx 32\n"), ParseError);
	CHECK_THROWS_AS(cfg.load("sa_cooling = 1.5\n"), ParseError);
	CHECK_THROWS_AS(cfg.load("sampling_count = 1\n"), ParseError);
	CHECK_THROWS_AS(cfg.load("w_power = -1\n"), ParseError);

	// serialize -> load round trip preserves every key
	EngineConfig cfg2 = EngineConfig::defaults();
	cfg2.load(cfg.serialize());
	CHECK(cfg2.grid_nx == cfg.grid_nx);
	CHECK(cfg2.seed == cfg.seed);
	CHECK(cfg2.stack.k_si_1 == cfg.stack.k_si_1);
}
