#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "oracles.hpp"
#include "tbsim/attributes.hpp"

using namespace tbsim;

namespace {

const std::vector<std::string> kMixedTypes = {"LAYERK0", "LAYERK1", "LAYERK2",
                                              "LAYERK3", "UNIT"};

TaskGraph chain3() {
    TaskGraph g;
    g.tasks = {{0, "UNIT", {}, {}, {}},
               {1, "UNIT", {0}, {}, {}},
               {2, "UNIT", {1}, {}, {}}};
    return g;
}

TaskGraph diamond() {
    TaskGraph g;
    g.tasks = {{0, "A", {}, {}, {}},
               {1, "B", {0}, {}, {}},
               {2, "C", {0}, {}, {}},
               {3, "D", {1, 2}, {}, {}}};
    return g;
}

}  // namespace

TEST_CASE("descendant counts on hand graphs") {
    CHECK(compute_inspiring_ability(chain3()) ==
          std::vector<std::int64_t>{2, 1, 0});
    CHECK(compute_inspiring_ability(diamond()) ==
          std::vector<std::int64_t>{3, 1, 1, 0});
    CHECK(compute_inspiring_ability(TaskGraph{}).empty());
}

TEST_CASE("descendant counts match the reachability oracle on random graphs") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        int n = 20 + static_cast<int>(seed) * 9;  // up to 200
        auto g = oracle::random_dag(seed, n, 0.06, kMixedTypes, false);
        auto parallel = compute_inspiring_ability(g);
        CHECK(parallel == oracle::descendant_counts(g));
        CHECK(parallel == compute_inspiring_ability_serial(g));
    }
}

TEST_CASE("efficiency counts descendants within the unit-time horizon") {
    CostTable unit;
    unit.set("UNIT", DeviceKind::Gpu, 1.0);
    auto g = chain3();
    CHECK(compute_inspiring_efficiency(g, unit, 0.5) ==
          std::vector<std::int64_t>{0, 0, 0});
    CHECK(compute_inspiring_efficiency(g, unit, 1.0) ==
          std::vector<std::int64_t>{1, 1, 0});
    CHECK(compute_inspiring_efficiency(g, unit, 2.0) ==
          std::vector<std::int64_t>{2, 1, 0});
    CHECK_THROWS_AS(compute_inspiring_efficiency(g, unit, -1.0),
                    std::invalid_argument);
}

TEST_CASE("efficiency uses the worst path, not the shortest") {
    // diamond 0 -> {1 (2ms), 2 (3ms)} -> 3 (1ms): node 3 completes at
    // max(2,3)+1 = 4ms after node 0 finishes.
    CostTable t;
    t.set("A", DeviceKind::Gpu, 1.0);
    t.set("B", DeviceKind::Gpu, 2.0);
    t.set("C", DeviceKind::Gpu, 3.0);
    t.set("D", DeviceKind::Gpu, 1.0);
    auto g = diamond();
    CHECK(compute_inspiring_efficiency(g, t, 3.0) ==
          std::vector<std::int64_t>{2, 1, 1, 0});
    CHECK(compute_inspiring_efficiency(g, t, 4.0) ==
          std::vector<std::int64_t>{3, 1, 1, 0});
    CHECK(compute_inspiring_efficiency(g, t, 4.0) ==
          oracle::efficiency_counts(g, t, 4.0));
}

TEST_CASE("efficiency matches the path-sum oracle on random graphs") {
    CostTable costs = default_cost_table();
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        int n = 20 + static_cast<int>(seed) * 4;  // up to 60
        auto g = oracle::random_dag(seed * 11, n, 0.1, kMixedTypes, false);
        for (double w : {1.0, 4.0, 16.0}) {
            auto eff = compute_inspiring_efficiency(g, costs, w);
            CHECK(eff == oracle::efficiency_counts(g, costs, w));
            CHECK(eff == compute_inspiring_efficiency_serial(g, costs, w));
        }
    }
}

TEST_CASE("efficiency is bounded by ability and saturates with the window") {
    CostTable costs = default_cost_table();
    for (std::uint64_t seed = 30; seed < 36; ++seed) {
        auto g = oracle::random_dag(seed, 50, 0.08, kMixedTypes, false);
        auto ability = compute_inspiring_ability(g);

        double total = 0.0, min_time = 1e300;
        for (const auto& t : g.tasks) {
            total += costs.gpu_ms(t.type);
            min_time = std::min(min_time, costs.gpu_ms(t.type));
        }

        auto mid = compute_inspiring_efficiency(g, costs, total / 8.0);
        for (std::size_t i = 0; i < g.tasks.size(); ++i)
            CHECK(mid[i] <= ability[i]);
        // A window covering the whole graph's serial time counts everything.
        CHECK(compute_inspiring_efficiency(g, costs, total) == ability);
        // A window shorter than any single task counts nothing.
        auto floor = compute_inspiring_efficiency(g, costs, min_time * 0.5);
        CHECK(floor == std::vector<std::int64_t>(g.tasks.size(), 0));
    }
}

TEST_CASE("unit-time calibration scans eleven doublings around the median") {
    CostTable costs = default_cost_table();
    auto g = build_cholesky_dag(6, 64);
    auto res = calibrate_unit_time(g, costs);
    CHECK(res.evaluations == 11);
    CHECK(res.w0_ms == 2.0 * median_gpu_time_ms(g, costs));
    CHECK(res.best_score >= res.w0_score);
    CHECK(res.best_score >= 1);
    // The winner is one of the scanned candidates: w0 * 2^k, k in [-4, 6].
    double log2_ratio = std::log2(res.unit_time_ms / res.w0_ms);
    CHECK(log2_ratio == doctest::Approx(std::round(log2_ratio)).epsilon(1e-12));
    CHECK(log2_ratio >= -4.0);
    CHECK(log2_ratio <= 6.0);
}

TEST_CASE("calibration ties resolve to the smallest candidate") {
    // A single task scores 1 for every window, so the first candidate wins.
    CostTable costs = default_cost_table();
    TaskGraph g;
    g.tasks = {{0, "UNIT", {}, {}, {}}};
    auto res = calibrate_unit_time(g, costs);
    CHECK(res.w0_ms == 2.0);
    CHECK(res.best_score == 1);
    CHECK(res.w0_score == 1);
    CHECK(res.unit_time_ms == std::ldexp(2.0, -4));
}

TEST_CASE("calibration on the chain_wave fixture lands on one unit") {
    CostTable costs = default_cost_table();
    TaskGraph g = load_dag_file(std::string(TEST_DATA_DIR) + "/chain_wave.dag");
    auto res = calibrate_unit_time(g, costs);
    CHECK(res.w0_ms == 2.0);
    CHECK(res.unit_time_ms == 1.0);
    CHECK(res.best_score == 3);  // layer means 1/5, 1, 0 all distinct
    CHECK(res.w0_score == 3);
}

TEST_CASE("upward rank decreases strictly along every edge") {
    CostTable costs = default_cost_table();
    auto g = chain3();
    CHECK(upward_rank_priority(g, costs) ==
          std::vector<std::int64_t>{3000, 2000, 1000});

    for (std::uint64_t seed = 50; seed < 56; ++seed) {
        auto rg = oracle::random_dag(seed, 80, 0.07, kMixedTypes, false);
        auto prio = upward_rank_priority(rg, costs);
        GraphIndex idx = build_index(rg);
        for (std::size_t v = 0; v < rg.tasks.size(); ++v)
            for (std::size_t p : idx.pred[v]) CHECK(prio[p] > prio[v]);
    }
}

TEST_CASE("depth priority counts edges to the farthest exit") {
    CHECK(depth_priority(chain3()) == std::vector<std::int64_t>{2, 1, 0});
    CHECK(depth_priority(diamond()) == std::vector<std::int64_t>{2, 1, 1, 0});
    auto g = oracle::random_dag(9, 60, 0.1, {"UNIT"}, false);
    auto depth = depth_priority(g);
    GraphIndex idx = build_index(g);
    for (std::size_t v = 0; v < g.tasks.size(); ++v) {
        if (idx.succ[v].empty()) CHECK(depth[v] == 0);
        for (std::size_t p : idx.pred[v]) CHECK(depth[p] > depth[v]);
    }
}

TEST_CASE("compute_attributes assembles the selected priority") {
    CostTable costs = default_cost_table();
    auto g = build_cholesky_dag(4, 64);

    auto a = compute_attributes(g, costs, PriorityKind::UpwardRank);
    CHECK(a.ability == compute_inspiring_ability(g));
    CHECK(a.unit_time_ms == calibrate_unit_time(g, costs).unit_time_ms);
    CHECK(a.efficiency == compute_inspiring_efficiency(g, costs, a.unit_time_ms));
    CHECK(a.static_priority == upward_rank_priority(g, costs));

    CHECK(compute_attributes(g, costs, PriorityKind::Depth).static_priority ==
          depth_priority(g));
    CHECK(compute_attributes(g, costs, PriorityKind::Zero).static_priority ==
          std::vector<std::int64_t>(g.tasks.size(), 0));
}

TEST_CASE("attributes CSV golden output") {
    CostTable costs = default_cost_table();
    auto g = chain3();
    auto a = compute_attributes(g, costs, PriorityKind::UpwardRank);
    std::ostringstream out;
    write_attributes_csv(out, g, a);
    CHECK(out.str() ==
          "task_id,type,layer,ability,efficiency,static_priority\n"
          "0,UNIT,0,2,2,3000\n"
          "1,UNIT,1,1,1,2000\n"
          "2,UNIT,2,0,0,1000\n");
}
