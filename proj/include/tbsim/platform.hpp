#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tbsim/taskgraph.hpp"

namespace tbsim {

enum class DeviceKind { Cpu, Gpu };

const char* to_string(DeviceKind k);

struct Worker {
    int id = 0;  // dense 0..n-1
    DeviceKind kind = DeviceKind::Cpu;
    int memory_node = 0;
};

// Execution cost in milliseconds per (task type, device kind). A missing CPU
// entry means the type is GPU-only (and vice versa).
class CostTable {
public:
    void set(const std::string& type, DeviceKind kind, double ms);
    std::optional<double> find(const std::string& type, DeviceKind kind) const;

    // Throws std::runtime_error naming the type if absent.
    double get(const std::string& type, DeviceKind kind) const;
    double gpu_ms(const std::string& type) const;

    // Mean over the device kinds that have an entry for this type.
    double mean_ms(const std::string& type) const;

    bool covers(const std::string& type, DeviceKind kind) const;
    const std::map<std::pair<std::string, DeviceKind>, double>& entries() const {
        return entries_;
    }

private:
    std::map<std::pair<std::string, DeviceKind>, double> entries_;
};

// Memory node 0 is host RAM (all CPU workers live there and initial data is
// resident there); every GPU worker owns its own node.
struct Platform {
    std::string name;
    std::vector<Worker> workers;
    CostTable costs;
    int num_nodes = 1;
    double latency_ms = 0.0;
    std::vector<std::vector<double>> bandwidth;  // bytes/ms, symmetric, [from][to]

    double transfer_time_ms(std::int64_t bytes, int from_node, int to_node) const;
    double exec_time_ms(const std::string& type, const Worker& w) const;
    bool can_run(const std::string& type, const Worker& w) const;
};

// Built-in platforms: "2gpu", "26cpu_2gpu", "26cpu_1gpu", "homog2".
// All carry the default synthetic cost table.
Platform make_preset(const std::string& name);
std::vector<std::string> preset_names();

CostTable default_cost_table();

// JSON config with "workers", "costs", "bandwidth", "latency_ms" sections.
Platform load_platform_file(const std::string& path);

// Resolves a preset name or, failing that, a config file path.
Platform resolve_platform(const std::string& name_or_path);

// Median GPU time over the graph's tasks (lower median). Used for the unit
// time search start and for regulator defaults.
double median_gpu_time_ms(const TaskGraph& g, const CostTable& costs);

}  // namespace tbsim
