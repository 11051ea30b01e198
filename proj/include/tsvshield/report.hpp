#ifndef TSVSHIELD_REPORT_HPP
#define TSVSHIELD_REPORT_HPP

#include <string>
#include <vector>

#include "tsvshield/leakage.hpp"

namespace tsvshield {

/// Per-run result summary: leakage metrics of both dies plus the classical
/// design-cost columns.
struct LeakageReport {
	// verified metrics (detailed steady-state solve)
	Correlation r1;
	Correlation r2;
	// in-loop estimates at the final solution (power blurring)
	Correlation r1_estimate;
	Correlation r2_estimate;
	bool estimate_alert = false; // verify vs estimate disagree in sign or by > 0.15

	double s1 = 0.0; // spatial entropy, bits
	double s2 = 0.0;

	double power_w = 0.0;
	double critical_delay_ns = 0.0;
	double wirelength_m = 0.0;
	double peak_temp_k = 0.0;
	int signal_tsvs = 0;
	int dummy_tsvs = 0;
	int volume_count = 0;
	double cost_total = 0.0;
	bool legal = false;
	double runtime_s = 0.0;
};

} // namespace tsvshield

#endif
