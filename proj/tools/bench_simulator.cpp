// Throughput benchmark: serial reference vs OpenMP simulator kernel.
// Also asserts that both produce bit-identical estimates.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "carq/config_io.hpp"
#include "carq/optimizer.hpp"
#include "carq/simulator.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    std::uint64_t packets = 5'000'000;
    std::string scenario_path = "data/table1_scenario.json";
    if (argc > 1) packets = std::strtoull(argv[1], nullptr, 10);
    if (argc > 2) scenario_path = argv[2];

    const carq::Scenario sc = carq::load_scenario_file(scenario_path);
    carq::OptimizerConfig cfg;
    cfg.omega_variant = carq::OmegaVariant::appendix_b;
    const carq::OptimizeResult res = carq::optimize(sc, cfg);

    carq::SimConfig sim;
    sim.packet_budget = packets;
    sim.seed = 42;

    const auto t0 = Clock::now();
    const carq::SimEstimate serial = carq::simulate_serial(sc, res.policy, sim);
    const double t_serial = seconds_since(t0);

    const auto t1 = Clock::now();
    const carq::SimEstimate parallel = carq::simulate(sc, res.policy, sim);
    const double t_parallel = seconds_since(t1);

    const bool identical =
        serial.se_per_packet.value == parallel.se_per_packet.value &&
        serial.avg_power_ratio_totals.value == parallel.avg_power_ratio_totals.value &&
        serial.slot_ratio_j_over_i.value == parallel.slot_ratio_j_over_i.value &&
        serial.counts.sent == parallel.counts.sent &&
        serial.counts.lost_relay_error == parallel.counts.lost_relay_error;

    std::cout.precision(6);
    std::cout << "packets: " << packets << "\n";
#ifdef _OPENMP
    std::cout << "threads: " << omp_get_max_threads() << "\n";
#else
    std::cout << "threads: 1 (OpenMP disabled)\n";
#endif
    std::cout << "serial:   " << t_serial << " s  (" << packets / t_serial / 1e6 << " Mpkt/s)\n";
    std::cout << "parallel: " << t_parallel << " s  (" << packets / t_parallel / 1e6
              << " Mpkt/s)\n";
    std::cout << "speedup:  " << t_serial / t_parallel << "x\n";
    std::cout << "identical results: " << (identical ? "yes" : "NO") << "\n";
    return identical ? 0 : 1;
}
