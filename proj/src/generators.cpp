#include <algorithm>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "tbsim/taskgraph.hpp"

namespace tbsim {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

// Raw engine draws only; std distributions are not bit-stable across
// implementations.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t uniform_below(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

}  // namespace

TaskGraph build_cholesky_dag(int nblocks, std::int64_t block_bytes) {
    if (nblocks < 1) throw std::invalid_argument("cholesky: nblocks must be >= 1");
    if (block_bytes <= 0) throw std::invalid_argument("cholesky: block_bytes must be > 0");
    const int n = nblocks;
    TaskGraph g;
    g.name = "cholesky_n" + std::to_string(n);

    // Lower-triangular tile grid, one handle per tile.
    std::vector<std::vector<HandleId>> tile(n, std::vector<HandleId>(n, -1));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
            tile[i][j] = static_cast<HandleId>(g.handles.size());
            g.handles.push_back({tile[i][j], block_bytes});
        }

    // Task ids per (kernel, indices), assigned in submission order.
    std::vector<std::vector<TaskId>> potrf(n, std::vector<TaskId>(1, -1));
    std::vector<std::vector<TaskId>> trsm(n, std::vector<TaskId>(n, -1));
    std::vector<std::vector<TaskId>> syrk(n, std::vector<TaskId>(n, -1));
    // gemm[i][j] holds the latest GEMM writing tile (i,j).
    std::vector<std::vector<TaskId>> gemm(n, std::vector<TaskId>(n, -1));

    auto add = [&g](const char* type, std::vector<TaskId> deps,
                    std::vector<HandleId> in, std::vector<HandleId> out) {
        TaskId id = static_cast<TaskId>(g.tasks.size());
        g.tasks.push_back({id, type, std::move(deps), std::move(in), std::move(out)});
        return id;
    };

    for (int k = 0; k < n; ++k) {
        {
            std::vector<TaskId> deps;
            if (k > 0) deps.push_back(syrk[k][k - 1]);
            potrf[k][0] = add("POTRF", std::move(deps), {tile[k][k]}, {tile[k][k]});
        }
        for (int i = k + 1; i < n; ++i) {
            std::vector<TaskId> deps{potrf[k][0]};
            if (k > 0) deps.push_back(gemm[i][k]);
            trsm[i][k] = add("TRSM", std::move(deps), {tile[k][k], tile[i][k]},
                             {tile[i][k]});
        }
        for (int i = k + 1; i < n; ++i) {
            {
                std::vector<TaskId> deps{trsm[i][k]};
                if (k > 0) deps.push_back(syrk[i][k - 1]);
                syrk[i][k] = add("SYRK", std::move(deps), {tile[i][k], tile[i][i]},
                                 {tile[i][i]});
            }
            for (int j = k + 1; j < i; ++j) {
                std::vector<TaskId> deps{trsm[i][k], trsm[j][k]};
                if (k > 0) deps.push_back(gemm[i][j]);
                gemm[i][j] = add("GEMM", std::move(deps),
                                 {tile[i][k], tile[j][k], tile[i][j]}, {tile[i][j]});
            }
        }
    }
    return g;
}

TaskGraph build_lu_dag(int nblocks, std::int64_t block_bytes) {
    if (nblocks < 1) throw std::invalid_argument("lu: nblocks must be >= 1");
    if (block_bytes <= 0) throw std::invalid_argument("lu: block_bytes must be > 0");
    const int n = nblocks;
    TaskGraph g;
    g.name = "lu_n" + std::to_string(n);

    std::vector<std::vector<HandleId>> tile(n, std::vector<HandleId>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            tile[i][j] = static_cast<HandleId>(g.handles.size());
            g.handles.push_back({tile[i][j], block_bytes});
        }

    std::vector<TaskId> getrf(n, -1);
    std::vector<std::vector<TaskId>> trsm_row(n, std::vector<TaskId>(n, -1));
    std::vector<std::vector<TaskId>> trsm_col(n, std::vector<TaskId>(n, -1));
    std::vector<std::vector<TaskId>> gemm(n, std::vector<TaskId>(n, -1));

    auto add = [&g](const char* type, std::vector<TaskId> deps,
                    std::vector<HandleId> in, std::vector<HandleId> out) {
        TaskId id = static_cast<TaskId>(g.tasks.size());
        g.tasks.push_back({id, type, std::move(deps), std::move(in), std::move(out)});
        return id;
    };

    for (int k = 0; k < n; ++k) {
        {
            std::vector<TaskId> deps;
            if (k > 0) deps.push_back(gemm[k][k]);
            getrf[k] = add("GETRF", std::move(deps), {tile[k][k]}, {tile[k][k]});
        }
        for (int j = k + 1; j < n; ++j) {
            std::vector<TaskId> deps{getrf[k]};
            if (k > 0) deps.push_back(gemm[k][j]);
            trsm_row[k][j] = add("TRSM", std::move(deps), {tile[k][k], tile[k][j]},
                                 {tile[k][j]});
        }
        for (int i = k + 1; i < n; ++i) {
            std::vector<TaskId> deps{getrf[k]};
            if (k > 0) deps.push_back(gemm[i][k]);
            trsm_col[i][k] = add("TRSM", std::move(deps), {tile[k][k], tile[i][k]},
                                 {tile[i][k]});
        }
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j) {
                std::vector<TaskId> deps{trsm_col[i][k], trsm_row[k][j]};
                if (k > 0) deps.push_back(gemm[i][j]);
                gemm[i][j] = add("GEMM", std::move(deps),
                                 {tile[i][k], tile[k][j], tile[i][j]}, {tile[i][j]});
            }
    }
    return g;
}

TaskGraph build_stencil_dag(int nblocks, int timesteps, std::int64_t block_bytes) {
    if (nblocks < 1) throw std::invalid_argument("heat: nblocks must be >= 1");
    if (timesteps < 1) throw std::invalid_argument("heat: timesteps must be >= 1");
    if (block_bytes <= 0) throw std::invalid_argument("heat: block_bytes must be > 0");
    const int n = nblocks;
    TaskGraph g;
    g.name = "heat_n" + std::to_string(n) + "_t" + std::to_string(timesteps);

    std::vector<std::vector<HandleId>> cell(n, std::vector<HandleId>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            cell[i][j] = static_cast<HandleId>(g.handles.size());
            g.handles.push_back({cell[i][j], block_bytes});
        }

    auto tid = [n](int t, int i, int j) {
        return static_cast<TaskId>((static_cast<std::int64_t>(t) - 1) * n * n +
                                   i * n + j);
    };

    const int di[] = {0, -1, 1, 0, 0};
    const int dj[] = {0, 0, 0, -1, 1};
    for (int t = 1; t <= timesteps; ++t)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                TaskNode task;
                task.id = tid(t, i, j);
                task.type = "STENCIL";
                for (int d = 0; d < 5; ++d) {
                    int ni = i + di[d], nj = j + dj[d];
                    if (ni < 0 || ni >= n || nj < 0 || nj >= n) continue;
                    if (t > 1) task.deps.push_back(tid(t - 1, ni, nj));
                    task.inputs.push_back(cell[ni][nj]);
                }
                task.outputs.push_back(cell[i][j]);
                g.tasks.push_back(std::move(task));
            }
    return g;
}

TaskGraph generate_layered_dag(int n_tasks, int n_layers, double edge_prob,
                               std::uint64_t seed) {
    if (n_layers < 1) throw std::invalid_argument("autogen: n_layers must be >= 1");
    if (n_tasks < n_layers)
        throw std::invalid_argument("autogen: n_tasks must be >= n_layers");
    if (!(edge_prob >= 0.0 && edge_prob <= 1.0))
        throw std::invalid_argument("autogen: edge_prob must be in [0,1]");

    std::mt19937_64 rng(seed);
    TaskGraph g;
    g.name = "autogen_n" + std::to_string(n_tasks) + "_l" + std::to_string(n_layers) +
             "_p" + num(edge_prob) + "_s" + std::to_string(seed);

    std::vector<std::vector<TaskId>> members(n_layers);
    for (int i = 0; i < n_tasks; ++i)
        members[i % n_layers].push_back(i);

    std::vector<std::vector<TaskId>> deps(n_tasks);
    for (int i = 0; i < n_tasks; ++i) {
        int layer = i % n_layers;
        if (layer == 0) continue;
        const auto& prev = members[layer - 1];
        for (TaskId p : prev)
            if (uniform01(rng) < edge_prob) deps[i].push_back(p);
        if (deps[i].empty())
            deps[i].push_back(prev[uniform_below(rng, prev.size())]);
    }

    // Type from total-degree quartile so cost heterogeneity lines up with
    // graph structure rather than ids.
    std::vector<int> degree(n_tasks, 0);
    for (int i = 0; i < n_tasks; ++i) {
        degree[i] += static_cast<int>(deps[i].size());
        for (TaskId p : deps[i]) degree[p] += 1;
    }
    std::vector<int> sorted = degree;
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&sorted, n_tasks](double q) {
        return sorted[static_cast<std::size_t>((n_tasks - 1) * q)];
    };
    const int q1 = quantile(0.25), q2 = quantile(0.5), q3 = quantile(0.75);

    static const std::int64_t kTileBytes[] = {
        160 * 160 * 4, 320 * 320 * 4, 640 * 640 * 4, 960 * 960 * 4};

    for (int i = 0; i < n_tasks; ++i) {
        g.handles.push_back(
            {static_cast<HandleId>(i), kTileBytes[uniform_below(rng, 4)]});
    }
    for (int i = 0; i < n_tasks; ++i) {
        TaskNode task;
        task.id = i;
        int bucket = degree[i] <= q1 ? 0 : degree[i] <= q2 ? 1 : degree[i] <= q3 ? 2 : 3;
        task.type = "LAYERK" + std::to_string(bucket);
        task.deps = deps[i];
        for (TaskId p : deps[i]) task.inputs.push_back(p);  // handle id == task id
        task.outputs.push_back(i);
        g.tasks.push_back(std::move(task));
    }
    return g;
}

}  // namespace tbsim
