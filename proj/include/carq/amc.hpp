#pragma once

#include <string>
#include <vector>

namespace carq {

// One AMC transmission mode with its exponential PER fit
//   PER(x) = 1                    for x < gamma_p
//          = min(1, a*exp(-g*x))  for x >= gamma_p
// over the AWGN-equivalent post-adaptation SNR x (linear scale).
struct AmcMode {
    int index = 0;          // 1-based, contiguous
    double rate = 0.0;      // bits/symbol
    double fit_a = 0.0;     // dimensionless
    double fit_g = 0.0;     // 1/SNR
    double fit_gamma_p = 0.0;  // linear SNR

    // SNR above which the exponential branch drops below 1; the fit usually
    // anchors this at gamma_p (a*exp(-g*gamma_p) ~= 1) but tables are not
    // required to be exact at the seam.
    double unit_per_snr() const;
};

// PER over an AWGN channel at the given post-adaptation SNR. Total on
// post_snr >= 0, always in [0,1].
double per_awgn(const AmcMode& mode, double post_snr);

// Inverse of the exponential branch: SNR at which PER equals `target`.
double snr_for_per(const AmcMode& mode, double target);

struct AmcModeTable {
    std::vector<AmcMode> modes;
    int packet_bits = 0;  // N_b

    int size() const { return static_cast<int>(modes.size()); }
    const AmcMode& mode(int n) const { return modes.at(static_cast<std::size_t>(n)); }
    double rate(int n) const { return modes[static_cast<std::size_t>(n)].rate; }
    double max_rate() const { return modes.back().rate; }
};

// Loader diagnostics that do not reject the table.
struct TableWarnings {
    // Modes where a*exp(-g*gamma_p) > 1, i.e. the two PER branches disagree
    // at the seam.
    std::vector<int> seam_mismatch_modes;
};

// Parse and validate a mode-table JSON document. Throws ParseError /
// ValidationError naming the offending mode.
AmcModeTable load_mode_table(const std::string& json_text, TableWarnings* warnings = nullptr);
AmcModeTable load_mode_table_file(const std::string& path, TableWarnings* warnings = nullptr);

// Checks that (h_n - h_{n-1})/(R_n - R_{n-1}) is strictly increasing for the
// power gains h_n = ln(a_n/target_per)/g_n. Returns the mode indices n where
// the sequence fails to increase (empty means the property holds at this
// target). Advisory: a failing table is flagged, not rejected.
std::vector<int> practical_range_violations(const AmcModeTable& table, double target_per);

}  // namespace carq
