#pragma once

#include <optional>
#include <string>
#include <vector>

#include "carq/analytic.hpp"
#include "carq/simulator.hpp"

namespace carq {

// Scenario JSON: all SNR/power fields in dB except probabilities and alpha.
// {
//   "mode_table": "hiperlan2_n1080.json",   (path, relative to this file)
//   "relay_mode_table": "...",              (optional; defaults to mode_table)
//   "p_bar_db": 10.0,
//   "p_bar_s_db": 10.0,                     (optional; defaults to p_bar_db)
//   "p_bar_r_db": 10.0,                     (optional; defaults to p_bar_db)
//   "mu_db": 0.0,
//   "p_loss": 0.001,
//   "alpha": 0.5
// }
// Link means follow the Rayleigh setting: gamma1 = p_bar_s, gamma2 = mu * p_bar_r.
Scenario load_scenario_file(const std::string& path);
Scenario load_scenario_json(const std::string& json_text, const std::string& base_dir);

// Applies the dB boundary and derives the link means from an in-memory
// description (used by tests and sweeps).
Scenario make_scenario(AmcModeTable table, double p_bar_db, double mu_db, double p_loss,
                       double alpha = 0.5,
                       std::optional<double> p_bar_s_db = std::nullopt,
                       std::optional<double> p_bar_r_db = std::nullopt);

enum class Scheme { adaptive_power_carq, const_power_carq, direct_transmission };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct SweepSpec {
    Scenario base;
    std::string variable;        // p_bar_db | mu_db | p_t1
    std::vector<double> grid;    // sorted
    std::vector<Scheme> schemes;
    bool simulate = false;
    SimConfig sim;
    OmegaVariant omega_variant = OmegaVariant::prop2;

    void validate() const;
};

SweepSpec load_sweep_file(const std::string& path);

struct SweepRow {
    double variable = 0.0;
    Scheme scheme = Scheme::adaptive_power_carq;
    bool feasible = false;
    std::string error;  // per-point failure, run continues
    double eta = 0.0;
    double p_avg = 0.0;
    double p_t1_star = 0.0;
    double sim_se = 0.0;
    double sim_se_stderr = 0.0;
    double sim_p_avg = 0.0;
    double sim_plr = 0.0;
};

// Executes the sweep; points run concurrently, rows come back in grid order.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

// RFC-4180-style CSV with a mandatory header row.
std::string sweep_csv(const std::vector<SweepRow>& rows, bool with_sim);

}  // namespace carq
