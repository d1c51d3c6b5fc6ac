// Times the serial and OpenMP realization runners on the same workload and
// checks that both produce the same CSV.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "ccr/experiment.hpp"

using namespace ccr;

int main(int argc, char** argv) {
    ExperimentConfig cfg;
    cfg.realizations = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 2000;
    cfg.solvers = {SolverId::alg1, SolverId::alg2, SolverId::czf, SolverId::pzf};

    auto run = [&](ExecPolicy policy, double& secs) {
        ExperimentConfig c = cfg;
        c.policy = policy;
        const auto t0 = std::chrono::steady_clock::now();
        const GridResult r = cmd_sweep_pbs(c);
        secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ostringstream os;
        write_sweep_csv(os, c, r);
        return os.str();
    };
    double ts = 0, tp = 0;
    const std::string serial = run(ExecPolicy::serial, ts);
    const std::string parallel = run(ExecPolicy::parallel, tp);
    std::printf("realizations per point: %zu, grid points: %zu, threads: %d\n", cfg.realizations,
                cfg.pbs_snr_db.size(), omp_get_max_threads());
    std::printf("serial   %8.3f s\n", ts);
    std::printf("parallel %8.3f s  (speedup %.2fx)\n", tp, ts / tp);
    std::printf("outputs identical: %s\n", serial == parallel ? "yes" : "NO");
    return serial == parallel ? 0 : 1;
}
