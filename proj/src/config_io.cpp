#include "carq/config_io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "carq/const_power.hpp"
#include "carq/errors.hpp"
#include "carq/optimizer.hpp"
#include "carq/units.hpp"

namespace carq {

namespace {

nlohmann::json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

std::string resolve(const std::string& base_dir, const std::string& rel) {
    std::filesystem::path p(rel);
    if (p.is_absolute() || base_dir.empty()) return rel;
    return (std::filesystem::path(base_dir) / p).string();
}

}  // namespace

Scenario make_scenario(AmcModeTable table, double p_bar_db, double mu_db, double p_loss,
                       double alpha, std::optional<double> p_bar_s_db,
                       std::optional<double> p_bar_r_db) {
    Scenario sc;
    sc.table = table;
    sc.relay_table = std::move(table);
    sc.p_bar = db_to_linear(p_bar_db);
    sc.p_bar_s = db_to_linear(p_bar_s_db.value_or(p_bar_db));
    sc.p_bar_r = db_to_linear(p_bar_r_db.value_or(p_bar_db));
    sc.mu_db = mu_db;
    sc.p_loss = p_loss;
    sc.alpha = alpha;
    sc.source_link = {sc.p_bar_s, "source-destination"};
    sc.relay_link = {db_to_linear(mu_db) * sc.p_bar_r, "relay-destination"};
    sc.validate();
    return sc;
}

Scenario load_scenario_json(const std::string& json_text, const std::string& base_dir) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("scenario: ") + e.what());
    }

    try {
        const std::string table_path = resolve(base_dir, doc.at("mode_table").get<std::string>());
        AmcModeTable table = load_mode_table_file(table_path);

        std::optional<double> ps;
        std::optional<double> pr;
        if (doc.contains("p_bar_s_db")) ps = doc["p_bar_s_db"].get<double>();
        if (doc.contains("p_bar_r_db")) pr = doc["p_bar_r_db"].get<double>();

        Scenario sc = make_scenario(std::move(table), doc.at("p_bar_db").get<double>(),
                                    doc.value("mu_db", 0.0), doc.at("p_loss").get<double>(),
                                    doc.value("alpha", 0.5), ps, pr);
        if (doc.contains("relay_mode_table")) {
            sc.relay_table =
                load_mode_table_file(resolve(base_dir, doc["relay_mode_table"].get<std::string>()));
            sc.validate();
        }
        return sc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("scenario: ") + e.what());
    }
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return load_scenario_json(buf.str(), std::filesystem::path(path).parent_path().string());
}

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::adaptive_power_carq: return "adaptive-power-carq";
        case Scheme::const_power_carq: return "const-power-carq";
        case Scheme::direct_transmission: return "direct-transmission";
    }
    return "?";
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "adaptive-power-carq") return Scheme::adaptive_power_carq;
    if (s == "const-power-carq") return Scheme::const_power_carq;
    if (s == "direct-transmission") return Scheme::direct_transmission;
    throw ValidationError("unknown scheme: " + s);
}

void SweepSpec::validate() const {
    if (grid.empty()) throw ValidationError("sweep grid is empty");
    if (!std::is_sorted(grid.begin(), grid.end()))
        throw ValidationError("sweep grid must be sorted");
    if (schemes.empty()) throw ValidationError("sweep scheme list is empty");
    if (variable != "p_bar_db" && variable != "mu_db" && variable != "p_t1")
        throw ValidationError("sweep variable must be one of p_bar_db, mu_db, p_t1");
}

SweepSpec load_sweep_file(const std::string& path) {
    const nlohmann::json doc = parse_json_file(path);
    const std::string base_dir = std::filesystem::path(path).parent_path().string();

    SweepSpec spec;
    try {
        const auto& jsc = doc.at("scenario");
        if (jsc.is_string())
            spec.base = load_scenario_file(resolve(base_dir, jsc.get<std::string>()));
        else
            spec.base = load_scenario_json(jsc.dump(), base_dir);

        spec.variable = doc.at("variable").get<std::string>();
        for (const auto& v : doc.at("grid")) spec.grid.push_back(v.get<double>());
        for (const auto& s : doc.at("schemes"))
            spec.schemes.push_back(scheme_from_string(s.get<std::string>()));
        if (doc.contains("omega_variant"))
            spec.omega_variant = omega_variant_from_string(doc["omega_variant"].get<std::string>());
        if (doc.contains("simulate")) {
            spec.simulate = true;
            const auto& js = doc["simulate"];
            spec.sim.packet_budget = js.value("packets", std::uint64_t{1'000'000});
            spec.sim.seed = js.value("seed", std::uint64_t{1});
            spec.sim.frame_symbols = js.value("frame_symbols", 4320);
            spec.sim.alpha = js.value("alpha", 0.0);
            const std::string est = js.value("estimator", "per-packet");
            if (est == "per-packet")
                spec.sim.estimator_mode = SeEstimatorMode::per_packet_expectation;
            else if (est == "ratio-of-totals")
                spec.sim.estimator_mode = SeEstimatorMode::ratio_of_totals;
            else
                throw ValidationError("estimator must be per-packet or ratio-of-totals");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    spec.validate();
    return spec;
}

namespace {

Scenario scenario_at(const SweepSpec& spec, double value) {
    if (spec.variable == "p_t1") return spec.base;
    Scenario sc = spec.base;
    if (spec.variable == "p_bar_db") {
        sc.p_bar = db_to_linear(value);
        sc.p_bar_s = sc.p_bar;
        sc.p_bar_r = sc.p_bar;
    } else {
        sc.mu_db = value;
    }
    sc.source_link.mean_snr = sc.p_bar_s;
    sc.relay_link.mean_snr = db_to_linear(sc.mu_db) * sc.p_bar_r;
    sc.validate();
    return sc;
}

SweepRow eval_point(const SweepSpec& spec, double value, Scheme scheme) {
    SweepRow row;
    row.variable = value;
    row.scheme = scheme;
    try {
        const Scenario sc = scenario_at(spec, value);
        PowerPolicy policy;
        if (scheme == Scheme::adaptive_power_carq) {
            if (spec.variable == "p_t1") {
                OptimizerConfig cfg;
                cfg.omega_variant = spec.omega_variant;
                auto [pol, trace] = iterate(sc, value, cfg);
                row.eta = trace.steps.back().eta;
                row.p_t1_star = value;
                row.p_avg = average_power(sc, pol, spec.omega_variant);
                policy = std::move(pol);
            } else {
                OptimizerConfig cfg;
                cfg.omega_variant = spec.omega_variant;
                OptimizeResult res = optimize(sc, cfg);
                row.eta = res.report.spectral_efficiency;
                row.p_avg = res.report.avg_power;
                row.p_t1_star = res.p_t1_star;
                policy = std::move(res.policy);
            }
        } else if (scheme == Scheme::const_power_carq) {
            if (spec.variable == "p_t1") {
                auto [src, rel] = const_power_thresholds(sc.table, sc.relay_table, value, sc.p_loss);
                policy = make_const_power_policy(value, sc.p_loss, std::move(src), std::move(rel));
                row.eta = spectral_efficiency(sc, policy);
                row.p_t1_star = value;
            } else {
                ConstPowerResult res = optimize_const_power(sc, 1e-4, spec.omega_variant);
                row.eta = res.report.spectral_efficiency;
                row.p_t1_star = res.p_t1_star;
                policy = std::move(res.policy);
            }
            row.p_avg = average_power(sc, policy, spec.omega_variant);
        } else {
            row.eta = direct_transmission_se(sc);
            row.p_avg = direct_transmission_avg_power(sc);
            row.p_t1_star = sc.p_loss;
        }
        row.feasible = true;

        if (spec.simulate && scheme != Scheme::direct_transmission) {
            const SimEstimate est = simulate(sc, policy, spec.sim);
            row.sim_se = est.headline_se;
            row.sim_se_stderr = est.se_per_packet.stderr_;
            row.sim_p_avg = est.avg_power_ratio_totals.value;
            row.sim_plr = est.realized_plr.value;
        }
    } catch (const std::exception& e) {
        row.feasible = false;
        row.error = e.what();
    }
    return row;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
    spec.validate();
    const int n_points = static_cast<int>(spec.grid.size());
    const int n_schemes = static_cast<int>(spec.schemes.size());
    std::vector<SweepRow> rows(static_cast<std::size_t>(n_points * n_schemes));

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) collapse(2)
#endif
    for (int i = 0; i < n_points; ++i) {
        for (int j = 0; j < n_schemes; ++j) {
            rows[static_cast<std::size_t>(i * n_schemes + j)] =
                eval_point(spec, spec.grid[static_cast<std::size_t>(i)],
                           spec.schemes[static_cast<std::size_t>(j)]);
        }
    }
    return rows;
}

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

}  // namespace

std::string sweep_csv(const std::vector<SweepRow>& rows, bool with_sim) {
    std::ostringstream out;
    out.precision(10);
    out << "variable,scheme,feasibility,eta,p_avg,p_t1_star";
    if (with_sim) out << ",sim_se,sim_se_stderr,sim_p_avg,sim_plr";
    out << ",error\n";
    for (const SweepRow& row : rows) {
        out << row.variable << "," << to_string(row.scheme) << ","
            << (row.feasible ? "ok" : "infeasible") << "," << row.eta << "," << row.p_avg << ","
            << row.p_t1_star;
        if (with_sim)
            out << "," << row.sim_se << "," << row.sim_se_stderr << "," << row.sim_p_avg << ","
                << row.sim_plr;
        out << "," << csv_escape(row.error) << "\n";
    }
    return out.str();
}

}  // namespace carq
