#include "tbsim/bench.hpp"

#include <omp.h>

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include "tbsim/engine.hpp"
#include "tbsim/policies.hpp"
#include "tbsim/text.hpp"

namespace tbsim {

namespace {

// Tile sizes the CLI also defaults to: float tiles of 960/160/640 square.
constexpr std::int64_t kCholeskyBytes = 960 * 960 * 4;
constexpr std::int64_t kLuBytes = 160 * 160 * 4;
constexpr std::int64_t kHeatBytes = 640 * 640 * 4;

TaskGraph build_app_graph(const BenchSpec& spec, std::int64_t size) {
    if (spec.app == "cholesky")
        return build_cholesky_dag(static_cast<int>(size), kCholeskyBytes);
    if (spec.app == "lu") return build_lu_dag(static_cast<int>(size), kLuBytes);
    if (spec.app == "heat")
        return build_stencil_dag(static_cast<int>(size),
                                 static_cast<int>(2 * size), kHeatBytes);
    if (spec.app == "autogen")
        return generate_layered_dag(static_cast<int>(size), spec.autogen_layers,
                                    spec.autogen_edge_prob, spec.seed);
    if (spec.app == "file") {
        if (size < 0 || size >= static_cast<std::int64_t>(spec.dag_files.size()))
            throw std::runtime_error("dag file index " + std::to_string(size) +
                                     " out of range");
        return load_dag_file(spec.dag_files[static_cast<std::size_t>(size)]);
    }
    throw std::runtime_error("unknown app '" + spec.app + "'");
}

std::string sanitize(std::string s) {
    for (char& ch : s)
        if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
    return s;
}

struct Cell {
    std::int64_t size;
    std::string platform;
};

RegulatorConfig apply_override(RegulatorConfig cfg, const RegulatorOverride& ov) {
    if (ov.task_window) cfg.task_window = *ov.task_window;
    if (ov.s_inc) cfg.s_inc = *ov.s_inc;
    if (ov.k_inc) cfg.k_inc = *ov.k_inc;
    if (ov.s_dec) cfg.s_dec = *ov.s_dec;
    if (ov.c) cfg.c = *ov.c;
    if (ov.dec_step) cfg.dec_step = *ov.dec_step;
    if (ov.slope_samples) cfg.slope_samples = *ov.slope_samples;
    return cfg;
}

}  // namespace

BenchReport run_bench(const BenchSpec& spec) {
    std::vector<std::string> policies = spec.policies;
    if (policies.empty()) policies = policy_names();
    if (std::find(policies.begin(), policies.end(), spec.baseline) ==
        policies.end())
        policies.push_back(spec.baseline);

    std::vector<std::int64_t> sizes = spec.sizes;
    if (spec.app == "file" && sizes.empty())
        for (std::size_t i = 0; i < spec.dag_files.size(); ++i)
            sizes.push_back(static_cast<std::int64_t>(i));

    std::vector<Cell> cells;
    for (std::int64_t size : sizes)
        for (const std::string& platform : spec.platforms)
            cells.push_back({size, platform});

    std::vector<std::vector<BenchRow>> results(cells.size());
    int threads = spec.jobs > 0 ? spec.jobs : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        const Cell& cell = cells[ci];
        std::vector<BenchRow>& rows = results[ci];
        auto row_stub = [&](const std::string& policy) {
            BenchRow r;
            r.app = spec.app;
            r.size = cell.size;
            r.platform = cell.platform;
            r.policy = policy;
            return r;
        };
        TaskGraph g;
        Platform platform;
        TaskAttributes attrs;
        try {
            g = build_app_graph(spec, cell.size);
            platform = resolve_platform(cell.platform);
            attrs = compute_attributes(g, platform.costs, spec.priority);
        } catch (const std::exception& e) {
            for (const std::string& policy : policies) {
                BenchRow r = row_stub(policy);
                r.error = e.what();
                rows.push_back(r);
            }
            continue;
        }
        RegulatorConfig reg =
            apply_override(default_regulator_config(platform, g), spec.regulator);
        SimOptions opts;
        opts.record_trace = false;
        for (const std::string& name : policies) {
            BenchRow r = row_stub(name);
            try {
                auto policy = make_policy(name, attrs, reg);
                SimTrace trace = simulate(g, platform, *policy, opts);
                r.makespan_ms = trace.makespan_ms;
                r.ok = true;
            } catch (const std::exception& e) {
                r.error = e.what();
            }
            rows.push_back(r);
        }
        double base = 0.0;
        for (const BenchRow& r : rows)
            if (r.policy == spec.baseline && r.ok) base = r.makespan_ms;
        for (BenchRow& r : rows) {
            if (!r.ok || base <= 0.0) continue;
            r.speedup = r.policy == spec.baseline ? 1.0 : base / r.makespan_ms;
        }
    }

    BenchReport report;
    for (auto& rows : results)
        for (auto& r : rows) report.rows.push_back(std::move(r));
    std::sort(report.rows.begin(), report.rows.end(),
              [](const BenchRow& a, const BenchRow& b) {
                  return std::tie(a.app, a.size, a.platform, a.policy) <
                         std::tie(b.app, b.size, b.platform, b.policy);
              });
    return report;
}

void write_bench_csv(std::ostream& out, const BenchReport& report) {
    out << "app,size,platform,policy,makespan_ms,speedup_vs_baseline,status\n";
    for (const BenchRow& r : report.rows) {
        out << r.app << ',' << r.size << ',' << r.platform << ',' << r.policy
            << ',';
        if (r.ok)
            out << fmt_ms(r.makespan_ms) << ',' << fmt_ratio(r.speedup) << ",ok\n";
        else
            out << ",,error: " << sanitize(r.error) << '\n';
    }
}

}  // namespace tbsim
