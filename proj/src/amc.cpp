#include "carq/amc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "carq/errors.hpp"
#include "carq/units.hpp"

namespace carq {

double AmcMode::unit_per_snr() const { return std::log(fit_a) / fit_g; }

double per_awgn(const AmcMode& mode, double post_snr) {
    if (post_snr < mode.fit_gamma_p) return 1.0;
    return std::min(1.0, mode.fit_a * std::exp(-mode.fit_g * post_snr));
}

double snr_for_per(const AmcMode& mode, double target) {
    return std::log(mode.fit_a / target) / mode.fit_g;
}

namespace {

void validate_table(const AmcModeTable& table, TableWarnings* warnings) {
    if (table.packet_bits <= 0) throw ValidationError("packet_bits must be positive");
    if (table.modes.empty()) throw ValidationError("mode table has no modes");
    for (int n = 0; n < table.size(); ++n) {
        const AmcMode& m = table.modes[static_cast<std::size_t>(n)];
        std::ostringstream who;
        who << "mode " << m.index;
        if (m.index != n + 1)
            throw ValidationError(who.str() + ": indices must be contiguous from 1");
        if (m.rate <= 0.0) throw ValidationError(who.str() + ": rate must be positive");
        if (m.fit_a < 1.0) throw ValidationError(who.str() + ": fit parameter a must be >= 1");
        if (m.fit_g <= 0.0) throw ValidationError(who.str() + ": fit parameter g must be positive");
        if (m.fit_gamma_p < 0.0) throw ValidationError(who.str() + ": gamma_p must be nonnegative");
        if (n > 0 && m.rate <= table.modes[static_cast<std::size_t>(n - 1)].rate)
            throw ValidationError(who.str() + ": rates must be strictly increasing");
        if (warnings && m.fit_a * std::exp(-m.fit_g * m.fit_gamma_p) > 1.0)
            warnings->seam_mismatch_modes.push_back(m.index);
    }
}

}  // namespace

AmcModeTable load_mode_table(const std::string& json_text, TableWarnings* warnings) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("mode table: ") + e.what());
    }

    AmcModeTable table;
    try {
        table.packet_bits = doc.at("packet_bits").get<int>();
        for (const auto& jm : doc.at("modes")) {
            AmcMode m;
            m.index = jm.at("index").get<int>();
            m.rate = jm.at("rate_bits_per_symbol").get<double>();
            m.fit_a = jm.at("a").get<double>();
            m.fit_g = jm.at("g").get<double>();
            m.fit_gamma_p = db_to_linear(jm.at("gamma_p_db").get<double>());
            table.modes.push_back(m);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("mode table: ") + e.what());
    }

    validate_table(table, warnings);
    return table;
}

AmcModeTable load_mode_table_file(const std::string& path, TableWarnings* warnings) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open mode table file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return load_mode_table(buf.str(), warnings);
}

std::vector<int> practical_range_violations(const AmcModeTable& table, double target_per) {
    std::vector<int> bad;
    double prev_slope = 0.0;
    double prev_h = 0.0;
    double prev_r = 0.0;
    for (int n = 0; n < table.size(); ++n) {
        const AmcMode& m = table.modes[static_cast<std::size_t>(n)];
        const double h = snr_for_per(m, target_per);
        const double slope = (h - prev_h) / (m.rate - prev_r);
        if (n > 0 && slope <= prev_slope) bad.push_back(m.index);
        prev_slope = slope;
        prev_h = h;
        prev_r = m.rate;
    }
    return bad;
}

}  // namespace carq
