// Timing harness for the attribute kernels: serial reference vs the OpenMP
// path, on generated graphs of growing size. Also cross-checks that both
// paths agree before trusting the timings.
//
// Usage: bench_kernels [max_tasks] [repeats]

#include <omp.h>

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <vector>

#include "tbsim/attributes.hpp"
#include "tbsim/platform.hpp"
#include "tbsim/taskgraph.hpp"

using namespace tbsim;
using clock_type = std::chrono::steady_clock;

namespace {

template <typename F>
double time_ms(int repeats, F&& f) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        auto t0 = clock_type::now();
        f();
        auto t1 = clock_type::now();
        best = std::min(best,
                        std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    int max_tasks = argc > 1 ? std::atoi(argv[1]) : 20000;
    int repeats = argc > 2 ? std::atoi(argv[2]) : 3;
    CostTable costs = default_cost_table();

    std::cout << "threads: " << omp_get_max_threads() << "\n";
    std::cout << "tasks,edges,ability_serial_ms,ability_omp_ms,ability_speedup,"
                 "efficiency_serial_ms,efficiency_omp_ms,efficiency_speedup\n";

    for (int n = 2500; n <= max_tasks; n *= 2) {
        TaskGraph g = generate_layered_dag(n, 10, 0.05, 7);
        double w = 2.0 * median_gpu_time_ms(g, costs);

        std::vector<std::int64_t> ab_serial, ab_omp, ef_serial, ef_omp;
        double t_ab_s = time_ms(repeats, [&] {
            ab_serial = compute_inspiring_ability_serial(g);
        });
        double t_ab_p = time_ms(repeats, [&] {
            ab_omp = compute_inspiring_ability(g);
        });
        double t_ef_s = time_ms(repeats, [&] {
            ef_serial = compute_inspiring_efficiency_serial(g, costs, w);
        });
        double t_ef_p = time_ms(repeats, [&] {
            ef_omp = compute_inspiring_efficiency(g, costs, w);
        });

        if (ab_serial != ab_omp || ef_serial != ef_omp) {
            std::cerr << "MISMATCH between serial and parallel kernels at n="
                      << n << "\n";
            return 1;
        }
        std::cout << n << ',' << edge_count(g) << ',' << t_ab_s << ',' << t_ab_p
                  << ',' << t_ab_s / t_ab_p << ',' << t_ef_s << ',' << t_ef_p
                  << ',' << t_ef_s / t_ef_p << "\n";
    }
    return 0;
}
