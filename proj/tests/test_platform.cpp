#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_util.hpp"
#include "tbsim/platform.hpp"
#include "tbsim/taskgraph.hpp"

using namespace tbsim;

TEST_CASE("cost table stores per-device entries and rejects bad values") {
    CostTable t;
    t.set("X", DeviceKind::Gpu, 2.0);
    CHECK(t.find("X", DeviceKind::Gpu) == 2.0);
    CHECK(!t.find("X", DeviceKind::Cpu));
    CHECK(t.get("X", DeviceKind::Gpu) == 2.0);
    CHECK(t.gpu_ms("X") == 2.0);
    CHECK(t.covers("X", DeviceKind::Gpu));
    CHECK(!t.covers("X", DeviceKind::Cpu));
    CHECK(t.mean_ms("X") == 2.0);  // only one device present
    t.set("X", DeviceKind::Cpu, 6.0);
    CHECK(t.mean_ms("X") == 4.0);

    CHECK_THROWS_WITH_AS(t.get("Y", DeviceKind::Cpu),
                         doctest::Contains("no cpu cost entry for task type Y"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(t.mean_ms("Y"), doctest::Contains("task type Y"),
                         std::runtime_error);
    CHECK_THROWS_AS(t.set("Z", DeviceKind::Cpu, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(t.set("Z", DeviceKind::Cpu, -1.0), std::invalid_argument);
}

TEST_CASE("default cost table covers every generated task type on both devices") {
    CostTable t = default_cost_table();
    for (const char* type : {"POTRF", "TRSM", "SYRK", "GEMM", "GETRF", "STENCIL",
                             "LAYERK0", "LAYERK1", "LAYERK2", "LAYERK3", "UNIT"}) {
        CHECK(t.covers(type, DeviceKind::Cpu));
        CHECK(t.covers(type, DeviceKind::Gpu));
        CHECK(t.gpu_ms(type) > 0.0);
    }
    // CPU/GPU speedup ratios: 10x for the BLAS-3 updates, 3x for panel
    // factorizations, 5x for the stencil.
    auto ratio = [&t](const char* type) {
        return t.get(type, DeviceKind::Cpu) / t.get(type, DeviceKind::Gpu);
    };
    CHECK(ratio("GEMM") == doctest::Approx(10.0));
    CHECK(ratio("SYRK") == doctest::Approx(10.0));
    CHECK(ratio("TRSM") == doctest::Approx(10.0));
    CHECK(ratio("POTRF") == doctest::Approx(3.0));
    CHECK(ratio("GETRF") == doctest::Approx(3.0));
    CHECK(ratio("STENCIL") == doctest::Approx(5.0));
    CHECK(t.get("UNIT", DeviceKind::Cpu) == 1.0);
    CHECK(t.get("UNIT", DeviceKind::Gpu) == 1.0);
    // The BLAS-3 fan-out work is cheaper per task than the panel kernels.
    CHECK(t.gpu_ms("GEMM") < t.gpu_ms("SYRK"));
    CHECK(t.gpu_ms("SYRK") <= t.gpu_ms("TRSM"));
    CHECK(t.gpu_ms("TRSM") < t.gpu_ms("POTRF"));
}

TEST_CASE("presets have the documented shapes") {
    Platform p = make_preset("26cpu_2gpu");
    REQUIRE(p.workers.size() == 28);
    CHECK(p.num_nodes == 3);
    CHECK(p.latency_ms == 0.01);
    for (int i = 0; i < 26; ++i) {
        CHECK(p.workers[i].kind == DeviceKind::Cpu);
        CHECK(p.workers[i].memory_node == 0);
    }
    CHECK(p.workers[26].kind == DeviceKind::Gpu);
    CHECK(p.workers[26].memory_node == 1);
    CHECK(p.workers[27].memory_node == 2);
    for (std::size_t i = 0; i < p.workers.size(); ++i)
        CHECK(p.workers[i].id == static_cast<int>(i));
    // Host<->GPU at 12e6 bytes/ms, GPU<->GPU at 24e6, symmetric, no self links.
    CHECK(p.bandwidth[0][1] == 12e6);
    CHECK(p.bandwidth[0][2] == 12e6);
    CHECK(p.bandwidth[1][2] == 24e6);
    CHECK(p.bandwidth[2][1] == 24e6);
    CHECK(p.bandwidth[1][1] == 0.0);

    CHECK(make_preset("2gpu").workers.size() == 2);
    CHECK(make_preset("2gpu").num_nodes == 3);
    CHECK(make_preset("26cpu_1gpu").workers.size() == 27);
    CHECK(make_preset("26cpu_1gpu").num_nodes == 2);
    Platform h = make_preset("homog2");
    CHECK(h.workers.size() == 2);
    CHECK(h.num_nodes == 1);
    for (const auto& w : h.workers) CHECK(w.kind == DeviceKind::Cpu);

    CHECK_THROWS_WITH_AS(make_preset("bogus"),
                         doctest::Contains("unknown platform preset \"bogus\""),
                         std::runtime_error);
}

TEST_CASE("transfer time is latency plus bytes over bandwidth") {
    Platform p = make_preset("26cpu_2gpu");
    CHECK(p.transfer_time_ms(123456, 1, 1) == 0.0);  // same node: free
    CHECK(p.transfer_time_ms(1'000'000, 0, 1) ==
          doctest::Approx(0.01 + 1'000'000 / 12e6));
    CHECK(p.transfer_time_ms(1'000'000, 1, 2) ==
          doctest::Approx(0.01 + 1'000'000 / 24e6));
    CHECK(p.transfer_time_ms(0, 0, 1) == 0.01);  // latency floor
    CHECK_THROWS_AS(p.transfer_time_ms(10, 0, 9), std::runtime_error);
    CHECK_THROWS_AS(p.transfer_time_ms(10, -1, 0), std::runtime_error);
}

TEST_CASE("exec_time distinguishes incapable from unknown") {
    Platform p;
    p.workers = {{0, DeviceKind::Cpu, 0}};
    p.num_nodes = 1;
    p.costs.set("GONLY", DeviceKind::Gpu, 3.0);
    p.costs.set("BOTH", DeviceKind::Cpu, 2.0);

    CHECK(p.exec_time_ms("BOTH", p.workers[0]) == 2.0);
    CHECK(p.can_run("BOTH", p.workers[0]));
    CHECK(!p.can_run("GONLY", p.workers[0]));
    CHECK_THROWS_WITH_AS(p.exec_time_ms("GONLY", p.workers[0]),
                         doctest::Contains("cannot run on cpu worker 0"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(p.exec_time_ms("NOWHERE", p.workers[0]),
                         doctest::Contains("no cost entry for task type NOWHERE"),
                         std::runtime_error);
}

TEST_CASE("platform files load and are checked") {
    testutil::TempDir dir("tbsim_platform");
    auto path = (dir / "small.json").string();
    testutil::write_file(path, R"({
      "workers": [
        {"id": 0, "kind": "cpu", "memory_node": 0},
        {"id": 1, "kind": "gpu", "memory_node": 1}
      ],
      "costs": {
        "UNIT": {"cpu": 2.0, "gpu": 1.0},
        "GONLY": {"gpu": 3.0}
      },
      "bandwidth": [[0, 1000], [1000, 0]],
      "latency_ms": 1.0
    })");
    Platform p = load_platform_file(path);
    CHECK(p.workers.size() == 2);
    CHECK(p.workers[1].kind == DeviceKind::Gpu);
    CHECK(p.num_nodes == 2);
    CHECK(p.costs.get("UNIT", DeviceKind::Cpu) == 2.0);
    CHECK(!p.costs.covers("GONLY", DeviceKind::Cpu));
    // 1e6 bytes at 1000 bytes/ms plus 1 ms latency.
    CHECK(p.transfer_time_ms(1'000'000, 0, 1) == doctest::Approx(1001.0));

    auto bad = (dir / "bad.json").string();
    testutil::write_file(bad, "{]");
    CHECK_THROWS_WITH_AS(load_platform_file(bad), doctest::Contains("bad JSON"),
                         std::runtime_error);
    testutil::write_file(bad, R"({"costs":{},"bandwidth":[[0]]})");
    CHECK_THROWS_WITH_AS(load_platform_file(bad),
                         doctest::Contains("missing \"workers\""),
                         std::runtime_error);
    testutil::write_file(bad, R"({
      "workers": [{"id": 0, "kind": "tpu", "memory_node": 0}],
      "costs": {}, "bandwidth": [[0]]})");
    CHECK_THROWS_WITH_AS(load_platform_file(bad),
                         doctest::Contains("unknown device kind"),
                         std::runtime_error);
    testutil::write_file(bad, R"({
      "workers": [{"id": 1, "kind": "cpu", "memory_node": 0}],
      "costs": {}, "bandwidth": [[0]]})");
    CHECK_THROWS_WITH_AS(load_platform_file(bad), doctest::Contains("dense"),
                         std::runtime_error);
    testutil::write_file(bad, R"({
      "workers": [{"id": 0, "kind": "cpu", "memory_node": 1}],
      "costs": {}, "bandwidth": [[0, 10], [10, 0]]})");
    CHECK_THROWS_WITH_AS(load_platform_file(bad),
                         doctest::Contains("memory node 0"), std::runtime_error);
    testutil::write_file(bad, R"({
      "workers": [
        {"id": 0, "kind": "cpu", "memory_node": 0},
        {"id": 1, "kind": "gpu", "memory_node": 1}
      ],
      "costs": {}, "bandwidth": [[0, 10], [20, 0]]})");
    CHECK_THROWS_WITH_AS(load_platform_file(bad), doctest::Contains("symmetric"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(load_platform_file((dir / "absent.json").string()),
                         doctest::Contains("cannot open"), std::runtime_error);
}

TEST_CASE("resolve_platform prefers preset names over paths") {
    CHECK(resolve_platform("homog2").workers.size() == 2);
    CHECK_THROWS_WITH_AS(resolve_platform("no_such_thing"),
                         doctest::Contains("cannot open"), std::runtime_error);
}

TEST_CASE("median GPU time uses the lower median") {
    CostTable t;
    t.set("A", DeviceKind::Gpu, 1.0);
    t.set("B", DeviceKind::Gpu, 2.0);
    t.set("C", DeviceKind::Gpu, 8.0);

    TaskGraph g;
    g.tasks = {{0, "A", {}, {}, {}}, {1, "B", {}, {}, {}}};
    CHECK(median_gpu_time_ms(g, t) == 1.0);  // even count: lower of the two

    g.tasks.push_back({2, "C", {}, {}, {}});
    CHECK(median_gpu_time_ms(g, t) == 2.0);

    g.tasks.push_back({3, "C", {}, {}, {}});
    CHECK(median_gpu_time_ms(g, t) == 2.0);

    TaskGraph empty;
    CHECK_THROWS_AS(median_gpu_time_ms(empty, t), std::runtime_error);
}
