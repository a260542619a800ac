#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tbsim/attributes.hpp"

namespace tbsim {

// Regulator fields to force instead of the per-graph defaults; unset fields
// keep default_regulator_config values.
struct RegulatorOverride {
    std::optional<std::int64_t> task_window, s_inc, s_dec, c, dec_step;
    std::optional<double> k_inc;
    std::optional<int> slope_samples;
};

// One sweep: app x sizes x platforms x policies. Sizes mean nblocks for the
// generator apps and task count for autogen; app "file" replaces sizes with an
// index into dag_files.
struct BenchSpec {
    std::string app;  // cholesky | lu | heat | autogen | file
    std::vector<std::int64_t> sizes;
    std::vector<std::string> platforms;
    std::vector<std::string> policies;
    std::string baseline = "dmda";
    std::uint64_t seed = 0;
    int jobs = 0;  // <=0 means all host CPUs
    int autogen_layers = 10;
    double autogen_edge_prob = 0.05;
    std::vector<std::string> dag_files;
    PriorityKind priority = PriorityKind::UpwardRank;
    RegulatorOverride regulator;
};

struct BenchRow {
    std::string app;
    std::int64_t size = 0;
    std::string platform;
    std::string policy;
    double makespan_ms = 0.0;
    double speedup = 0.0;  // baseline makespan / this makespan
    bool ok = false;
    std::string error;
};

struct BenchReport {
    std::vector<BenchRow> rows;  // sorted by (app, size, platform, policy)
};

// Cells run independently (OpenMP, spec.jobs threads). A failing cell becomes
// an error row; the sweep continues.
BenchReport run_bench(const BenchSpec& spec);

// header: app,size,platform,policy,makespan_ms,speedup_vs_baseline,status
void write_bench_csv(std::ostream& out, const BenchReport& report);

}  // namespace tbsim
