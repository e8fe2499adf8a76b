#pragma once

#include <cmath>

namespace carq {

// All internal SNR/power quantities are linear; dB appears only at the
// config/CLI boundary.
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

}  // namespace carq
