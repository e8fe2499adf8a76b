#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "carq/config_io.hpp"
#include "carq/const_power.hpp"
#include "carq/errors.hpp"
#include "carq/optimizer.hpp"
#include "carq/simulator.hpp"
#include "carq/units.hpp"

namespace {

// Exit codes: 0 ok, 2 parse, 3 validation, 4 infeasible, 5 numerical.
constexpr int kExitParse = 2;
constexpr int kExitValidation = 3;
constexpr int kExitInfeasible = 4;
constexpr int kExitNumerical = 5;

void write_output(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw carq::ParseError("cannot open output file: " + out_path);
    out << content;
}

std::string policy_summary(const carq::Scenario& sc, const carq::PowerPolicy& policy,
                           const carq::PerfReport& report, double p_t1_star) {
    std::ostringstream os;
    os.precision(8);
    os << "p_t1_star=" << p_t1_star << "\n";
    os << "p_t2=" << policy.target_per_relay << "\n";
    os << "eta=" << report.spectral_efficiency << "\n";
    os << "avg_power=" << report.avg_power << " (omega variant " << to_string(report.omega_variant)
       << ")\n";
    os << "avg_power_db=" << carq::linear_to_db(report.avg_power) << "\n";
    os << "omega=" << report.omega << "\n";
    os << "power_adaptive=" << (policy.power_adaptive ? "1" : "0") << "\n";
    for (int n = 0; n < sc.num_modes(); ++n) {
        os << "source_level_db[" << n + 1 << "]=" << carq::linear_to_db(policy.source_thresholds.lower(n))
           << "\n";
    }
    for (int m = 0; m < sc.num_modes(); ++m) {
        os << "relay_level_db[" << m + 1 << "]=" << carq::linear_to_db(policy.relay_thresholds.lower(m))
           << "\n";
    }
    os << "source_outage_prob=" << report.source_mode_probabilities.front() << "\n";
    os << "relay_outage_prob=" << report.relay_mode_probabilities.front() << "\n";
    return os.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Link adaptation optimizer and protocol simulator for a single-relay "
                 "cooperative-ARQ channel"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string sweep_path;
    std::string out_path;
    std::string omega_name = "prop2";
    std::string scheme_name = "adaptive-power-carq";
    std::uint64_t packets = 0;
    std::uint64_t seed = 1;
    int audit_points = 50;
    std::string table_path;
    std::string batch_csv_path;

    auto add_common = [&](CLI::App* cmd, bool needs_scenario) {
        if (needs_scenario)
            cmd->add_option("--scenario", scenario_path, "scenario JSON file")->required();
        cmd->add_option("--out", out_path, "write the report to this file instead of stdout");
        cmd->add_option("--omega-variant", omega_name,
                        "average-power weighting variant: prop2 or appendixB");
    };

    CLI::App* cmd_optimize = app.add_subcommand(
        "optimize", "optimize the adaptation policy for a scenario and report the result");
    add_common(cmd_optimize, true);
    cmd_optimize->add_option("--scheme", scheme_name,
                             "adaptive-power-carq or const-power-carq");
    cmd_optimize->add_option("--packets", packets,
                             "append a Monte Carlo cross-check with this many packets");
    cmd_optimize->add_option("--seed", seed, "simulation seed");

    CLI::App* cmd_sweep = app.add_subcommand("sweep", "run a sweep file and emit CSV");
    cmd_sweep->add_option("--sweep", sweep_path, "sweep JSON file")->required();
    cmd_sweep->add_option("--out", out_path, "CSV output path (default stdout)");

    CLI::App* cmd_simulate = app.add_subcommand(
        "simulate", "optimize a policy, then validate it against the slot-level simulator");
    add_common(cmd_simulate, true);
    cmd_simulate->add_option("--scheme", scheme_name,
                             "adaptive-power-carq or const-power-carq");
    cmd_simulate->add_option("--packets", packets, "packet budget (default 1e6)");
    cmd_simulate->add_option("--seed", seed, "simulation seed");
    cmd_simulate->add_option("--batch-csv", batch_csv_path,
                             "write per-batch estimates to this CSV file");

    CLI::App* cmd_audit = app.add_subcommand(
        "audit-quasiconcavity", "sample eta(p_t1) on a log grid and count strict local maxima");
    add_common(cmd_audit, true);
    cmd_audit->add_option("--points", audit_points, "grid size (default 50)");

    CLI::App* cmd_check = app.add_subcommand("check-table", "validate a mode-table file");
    cmd_check->add_option("table", table_path, "mode table JSON file")->required();
    cmd_check->add_option("--out", out_path, "report output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        const carq::OmegaVariant variant = carq::omega_variant_from_string(omega_name);

        if (*cmd_optimize || *cmd_simulate) {
            const carq::Scenario sc = carq::load_scenario_file(scenario_path);
            const carq::Scheme scheme = carq::scheme_from_string(scheme_name);

            carq::PowerPolicy policy;
            carq::PerfReport report;
            double p_t1_star = 0.0;
            if (scheme == carq::Scheme::adaptive_power_carq) {
                carq::OptimizerConfig cfg;
                cfg.omega_variant = variant;
                carq::OptimizeResult res = carq::optimize(sc, cfg);
                if (res.trace.max_eta_decrease > cfg.se_convergence_tol) {
                    std::cerr << "warning: SE decreased by " << res.trace.max_eta_decrease
                              << " during one fixed-point step (transient overshoot; the run "
                                 "still converged)\n";
                }
                policy = std::move(res.policy);
                report = res.report;
                p_t1_star = res.p_t1_star;
            } else if (scheme == carq::Scheme::const_power_carq) {
                carq::ConstPowerResult res = carq::optimize_const_power(sc, 1e-4, variant);
                policy = std::move(res.policy);
                report = res.report;
                p_t1_star = res.p_t1_star;
            } else {
                throw carq::ValidationError("scheme must be adaptive-power-carq or const-power-carq");
            }

            std::ostringstream os;
            os << policy_summary(sc, policy, report, p_t1_star);

            const bool want_sim = *cmd_simulate || packets > 0;
            if (want_sim) {
                carq::SimConfig sim;
                sim.packet_budget = packets > 0 ? packets : 1'000'000;
                sim.seed = seed;
                const carq::CompareReport cmp = carq::compare(sc, policy, sim);
                os << cmp.to_text();
                if (!batch_csv_path.empty()) {
                    std::ofstream csv(batch_csv_path);
                    if (!csv) throw carq::ParseError("cannot open batch CSV file: " + batch_csv_path);
                    csv << cmp.batch_csv();
                }
            }
            write_output(out_path, os.str());
            return 0;
        }

        if (*cmd_sweep) {
            const carq::SweepSpec spec = carq::load_sweep_file(sweep_path);
            const std::vector<carq::SweepRow> rows = carq::run_sweep(spec);
            write_output(out_path, carq::sweep_csv(rows, spec.simulate));
            return 0;
        }

        if (*cmd_audit) {
            const carq::Scenario sc = carq::load_scenario_file(scenario_path);
            carq::OptimizerConfig cfg;
            cfg.omega_variant = variant;
            const carq::QuasiconcavityAudit audit = carq::audit_quasiconcavity(sc, audit_points, cfg);
            std::ostringstream os;
            os.precision(8);
            os << "p_t1,eta\n";
            for (std::size_t i = 0; i < audit.p_t1_grid.size(); ++i)
                os << audit.p_t1_grid[i] << "," << audit.eta[i] << "\n";
            os << "strict_local_maxima=" << audit.strict_local_maxima << "\n";
            os << "unimodal=" << (audit.unimodal ? "1" : "0") << "\n";
            write_output(out_path, os.str());
            return 0;
        }

        if (*cmd_check) {
            carq::TableWarnings warnings;
            const carq::AmcModeTable table = carq::load_mode_table_file(table_path, &warnings);
            std::ostringstream os;
            os << "modes=" << table.size() << "\n";
            os << "packet_bits=" << table.packet_bits << "\n";
            for (int w : warnings.seam_mismatch_modes)
                os << "warning: PER branches disagree at the gamma_p seam for mode " << w << "\n";
            // Practical-range check across a log grid of target PERs.
            for (double target : {0.001, 0.01, 0.05, 0.1, 0.3}) {
                const std::vector<int> bad = carq::practical_range_violations(table, target);
                os << "practical_range_ok[P_t=" << target << "]=" << (bad.empty() ? "1" : "0");
                if (!bad.empty()) {
                    os << " (non-increasing gain/rate slope at mode";
                    for (int b : bad) os << " " << b;
                    os << ")";
                }
                os << "\n";
            }
            write_output(out_path, os.str());
            return 0;
        }
    } catch (const carq::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const carq::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const carq::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const carq::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
