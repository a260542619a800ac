// Command-line front end: generate task graphs, compute scheduling
// attributes, run single simulations, and sweep benchmark grids.
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "tbsim/attributes.hpp"
#include "tbsim/bench.hpp"
#include "tbsim/engine.hpp"
#include "tbsim/platform.hpp"
#include "tbsim/policies.hpp"
#include "tbsim/taskgraph.hpp"
#include "tbsim/text.hpp"

namespace fs = std::filesystem;
using namespace tbsim;

namespace {

constexpr std::int64_t kCholeskyBytes = 960 * 960 * 4;
constexpr std::int64_t kLuBytes = 160 * 160 * 4;
constexpr std::int64_t kHeatBytes = 640 * 640 * 4;

struct GlobalOpts {
    std::vector<std::string> platforms{"26cpu_2gpu"};
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    int jobs = 0;
};

// Regulator flags shared by sim and bench; only flags the user actually set
// override the per-graph defaults.
struct RegFlags {
    std::int64_t task_window = 0, s_inc = 0, s_dec = 0, c = 0, dec_step = 0;
    double k_inc = 0.0;
    int slope_samples = 0;
    CLI::Option *o_tw = nullptr, *o_si = nullptr, *o_ki = nullptr,
                *o_sd = nullptr, *o_c = nullptr, *o_ds = nullptr,
                *o_ss = nullptr;

    void attach(CLI::App* cmd) {
        o_tw = cmd->add_option("--task-window", task_window,
                               "nready change that re-evaluates the pop mode");
        o_si = cmd->add_option("--s-inc", s_inc, "rise threshold while filling");
        o_ki = cmd->add_option("--k-inc", k_inc, "slope threshold while filling");
        o_sd = cmd->add_option("--s-dec", s_dec, "drop quantum while draining");
        o_c = cmd->add_option("--c", c, "tolerance band on the drain boundary");
        o_ds = cmd->add_option("--dec-step", dec_step,
                               "hysteresis between filling and draining");
        o_ss = cmd->add_option("--slope-samples", slope_samples,
                               "samples kept for the slope estimate");
    }

    RegulatorOverride as_override() const {
        RegulatorOverride ov;
        if (o_tw->count()) ov.task_window = task_window;
        if (o_si->count()) ov.s_inc = s_inc;
        if (o_ki->count()) ov.k_inc = k_inc;
        if (o_sd->count()) ov.s_dec = s_dec;
        if (o_c->count()) ov.c = c;
        if (o_ds->count()) ov.dec_step = dec_step;
        if (o_ss->count()) ov.slope_samples = slope_samples;
        return ov;
    }

    RegulatorConfig apply(RegulatorConfig cfg) const {
        RegulatorOverride ov = as_override();
        if (ov.task_window) cfg.task_window = *ov.task_window;
        if (ov.s_inc) cfg.s_inc = *ov.s_inc;
        if (ov.k_inc) cfg.k_inc = *ov.k_inc;
        if (ov.s_dec) cfg.s_dec = *ov.s_dec;
        if (ov.c) cfg.c = *ov.c;
        if (ov.dec_step) cfg.dec_step = *ov.dec_step;
        if (ov.slope_samples) cfg.slope_samples = *ov.slope_samples;
        return cfg;
    }
};

const std::map<std::string, PriorityKind> kPriorityNames{
    {"rank", PriorityKind::UpwardRank},
    {"depth", PriorityKind::Depth},
    {"zero", PriorityKind::Zero},
};

std::string single_platform(const GlobalOpts& g) {
    if (g.platforms.size() != 1)
        throw CLI::ValidationError("--platform",
                                   "exactly one platform expected here");
    return g.platforms.front();
}

fs::path resolve_out(const GlobalOpts& g, const std::string& explicit_path,
                     const std::string& default_name) {
    fs::path p = explicit_path.empty() ? fs::path(g.out_dir) / default_name
                                       : fs::path(explicit_path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    return out;
}

void write_graph(const GlobalOpts& g, const TaskGraph& graph,
                 const std::string& explicit_path) {
    fs::path p = resolve_out(g, explicit_path, graph.name + ".dag");
    save_dag_file(graph, p.string());
    std::cout << "wrote " << p.string() << ": " << graph.tasks.size()
              << " tasks, " << edge_count(graph) << " edges\n";
}

void cmd_attrs(const GlobalOpts& g, const std::string& dag_path,
               PriorityKind priority, const std::string& out_path) {
    TaskGraph graph = load_dag_file(dag_path);
    Platform platform = resolve_platform(single_platform(g));
    CalibrationResult cal = calibrate_unit_time(graph, platform.costs);
    TaskAttributes attrs = compute_attributes(graph, platform.costs, priority);
    fs::path p = resolve_out(g, out_path, "attributes.csv");
    auto out = open_out(p);
    write_attributes_csv(out, graph, attrs);
    std::cout << "wrote " << p.string() << ": " << graph.tasks.size()
              << " rows\n";
    std::cerr << "unit_time_ms: " << fmt_ms(cal.unit_time_ms) << " (start "
              << fmt_ms(cal.w0_ms) << ", score " << cal.w0_score << " -> "
              << cal.best_score << ", " << cal.evaluations << " evaluations)\n";
}

void cmd_sim(const GlobalOpts& g, const std::string& dag_path,
             const std::string& policy_name, PriorityKind priority,
             const RegFlags& reg, bool trace, double window_ms) {
    TaskGraph graph = load_dag_file(dag_path);
    Platform platform = resolve_platform(single_platform(g));
    TaskAttributes attrs = compute_attributes(graph, platform.costs, priority);
    RegulatorConfig cfg = reg.apply(default_regulator_config(platform, graph));
    auto policy = make_policy(policy_name, attrs, cfg);

    SimOptions opts;
    opts.record_trace = trace;
    SimTrace result = simulate(graph, platform, *policy, opts);

    std::cout << "dag: " << graph.name << " (" << graph.tasks.size()
              << " tasks)\n";
    std::cout << "platform: " << platform.name << "\n";
    std::cout << "policy: " << policy_name << "\n";
    if (policy_name == "inspirit") {
        std::cout << "regulator: task_window=" << cfg.task_window
                  << " s_inc=" << cfg.s_inc << " k_inc=" << fmt_ms(cfg.k_inc)
                  << " s_dec=" << cfg.s_dec << " c=" << cfg.c
                  << " dec_step=" << cfg.dec_step
                  << " slope_samples=" << cfg.slope_samples << "\n";
        if (const auto* counts = pop_mode_counts(*policy))
            std::cout << "pops_by_mode: ability=" << (*counts)[0]
                      << " efficiency=" << (*counts)[1]
                      << " efficiency_locality=" << (*counts)[2] << "\n";
    }
    std::cout << "makespan_ms: " << fmt_ms(result.makespan_ms) << "\n";

    if (trace) {
        double window = window_ms > 0.0
                            ? window_ms
                            : 10.0 * median_gpu_time_ms(graph, platform.costs);
        fs::create_directories(g.out_dir);
        {
            auto out = open_out(fs::path(g.out_dir) / "nready_time.csv");
            write_nready_csv(out, result);
        }
        {
            auto out = open_out(fs::path(g.out_dir) / "push_pop.csv");
            write_push_pop_csv(out, result, window);
        }
        {
            auto out = open_out(fs::path(g.out_dir) / "gantt.csv");
            write_gantt_csv(out, graph, result);
        }
        std::cout << "trace: " << g.out_dir
                  << " (nready_time.csv push_pop.csv gantt.csv, window "
                  << fmt_ms(window) << " ms)\n";
    }
}

void cmd_bench(const GlobalOpts& g, BenchSpec spec, const RegFlags& reg,
               const std::string& out_path) {
    spec.platforms = g.platforms;
    spec.seed = g.seed;
    spec.jobs = g.jobs;
    spec.regulator = reg.as_override();
    BenchReport report = run_bench(spec);
    std::size_t failed = 0;
    for (const BenchRow& r : report.rows)
        if (!r.ok) failed += 1;
    fs::path p = resolve_out(g, out_path, "bench.csv");
    auto out = open_out(p);
    write_bench_csv(out, report);
    std::cout << "wrote " << p.string() << ": " << report.rows.size()
              << " rows\n";
    if (failed > 0) std::cerr << failed << " cells failed; see status column\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"task-based runtime scheduling simulator"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--platform", g.platforms,
                   "platform preset name or JSON file (repeatable for bench)")
        ->capture_default_str();
    app.add_option("--seed", g.seed, "base RNG seed")->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "directory for generated files")
        ->capture_default_str();
    app.add_option("--jobs", g.jobs,
                   "parallel bench cells (<=0 means all host CPUs)");

    // --- gen -----------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate a task graph file");
    gen->require_subcommand(1);
    gen->fallthrough();
    std::string gen_out;
    gen->add_option("--out", gen_out, "output path (default <name>.dag)");

    int nblocks = 0, timesteps = 0;
    std::int64_t block_bytes = 0;
    auto add_blocked = [&](const std::string& name, const std::string& help) {
        auto* cmd = gen->add_subcommand(name, help);
        cmd->fallthrough();
        cmd->add_option("--nblocks", nblocks, "tile grid dimension")
            ->required()
            ->check(CLI::PositiveNumber);
        cmd->add_option("--block-bytes", block_bytes, "bytes per tile")
            ->check(CLI::PositiveNumber);
        return cmd;
    };
    auto* gen_cholesky =
        add_blocked("cholesky", "tiled Cholesky factorization DAG");
    auto* gen_lu = add_blocked("lu", "tiled LU factorization DAG");
    auto* gen_heat = add_blocked("heat", "5-point stencil sweep DAG");
    gen_heat->add_option("--timesteps", timesteps,
                         "sweep count (default 2*nblocks)")
        ->check(CLI::PositiveNumber);

    auto* gen_auto = gen->add_subcommand("autogen", "seeded layered random DAG");
    gen_auto->fallthrough();
    std::int64_t auto_tasks = 0;
    int auto_layers = 10;
    double auto_edge_prob = 0.05;
    gen_auto->add_option("--tasks", auto_tasks, "number of tasks")
        ->required()
        ->check(CLI::PositiveNumber);
    gen_auto->add_option("--layers", auto_layers, "number of layers")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    gen_auto->add_option("--edge-prob", auto_edge_prob,
                         "edge probability to the previous layer")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));

    gen_cholesky->callback([&] {
        write_graph(g,
                    build_cholesky_dag(nblocks, block_bytes > 0 ? block_bytes
                                                                : kCholeskyBytes),
                    gen_out);
    });
    gen_lu->callback([&] {
        write_graph(
            g, build_lu_dag(nblocks, block_bytes > 0 ? block_bytes : kLuBytes),
            gen_out);
    });
    gen_heat->callback([&] {
        write_graph(g,
                    build_stencil_dag(nblocks,
                                      timesteps > 0 ? timesteps : 2 * nblocks,
                                      block_bytes > 0 ? block_bytes : kHeatBytes),
                    gen_out);
    });
    gen_auto->callback([&] {
        write_graph(g,
                    generate_layered_dag(static_cast<int>(auto_tasks),
                                         auto_layers, auto_edge_prob, g.seed),
                    gen_out);
    });

    // --- attrs ---------------------------------------------------------
    auto* attrs = app.add_subcommand("attrs", "compute per-task attributes");
    attrs->fallthrough();
    std::string attrs_dag, attrs_out;
    PriorityKind attrs_priority = PriorityKind::UpwardRank;
    attrs->add_option("--dag", attrs_dag, "task graph file")->required();
    attrs->add_option("--out", attrs_out, "CSV path (default attributes.csv)");
    attrs->add_option("--priority", attrs_priority, "static priority rule")
        ->transform(CLI::CheckedTransformer(kPriorityNames))
        ->capture_default_str();
    attrs->callback([&] { cmd_attrs(g, attrs_dag, attrs_priority, attrs_out); });

    // --- sim -----------------------------------------------------------
    auto* sim = app.add_subcommand("sim", "simulate one DAG under one policy");
    sim->fallthrough();
    std::string sim_dag, sim_policy = "dmda";
    PriorityKind sim_priority = PriorityKind::UpwardRank;
    bool sim_trace = false;
    double sim_window = 0.0;
    sim->add_option("--dag", sim_dag, "task graph file")->required();
    sim->add_option("--policy", sim_policy, "scheduling policy")
        ->check(CLI::IsMember(policy_names()))
        ->capture_default_str();
    sim->add_option("--priority", sim_priority, "static priority rule")
        ->transform(CLI::CheckedTransformer(kPriorityNames))
        ->capture_default_str();
    sim->add_flag("--trace", sim_trace, "write trace CSVs to --out-dir");
    sim->add_option("--window", sim_window,
                    "push/pop histogram window in ms (default 10x median GPU "
                    "task time)")
        ->check(CLI::PositiveNumber);
    RegFlags sim_reg;
    sim_reg.attach(sim);
    sim->callback([&] {
        cmd_sim(g, sim_dag, sim_policy, sim_priority, sim_reg, sim_trace,
                sim_window);
    });

    // --- bench ---------------------------------------------------------
    auto* bench = app.add_subcommand("bench", "sweep app x size x platform x policy");
    bench->fallthrough();
    BenchSpec spec;
    std::string bench_out;
    bench->add_option("--app", spec.app, "cholesky | lu | heat | autogen | file")
        ->required()
        ->check(CLI::IsMember({"cholesky", "lu", "heat", "autogen", "file"}));
    bench->add_option("--sizes", spec.sizes,
                      "size list (nblocks, task count, or file index)");
    bench->add_option("--policies", spec.policies, "policy list (default: all)")
        ->check(CLI::IsMember(policy_names()));
    bench->add_option("--baseline", spec.baseline, "speedup reference policy")
        ->check(CLI::IsMember(policy_names()))
        ->capture_default_str();
    bench->add_option("--layers", spec.autogen_layers, "autogen layer count")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    bench->add_option("--edge-prob", spec.autogen_edge_prob,
                      "autogen edge probability")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    bench->add_option("--dag", spec.dag_files, "task graph files for --app file");
    bench->add_option("--priority", spec.priority, "static priority rule")
        ->transform(CLI::CheckedTransformer(kPriorityNames))
        ->capture_default_str();
    bench->add_option("--out", bench_out, "CSV path (default bench.csv)");
    RegFlags bench_reg;
    bench_reg.attach(bench);
    bench->callback([&] { cmd_bench(g, spec, bench_reg, bench_out); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
