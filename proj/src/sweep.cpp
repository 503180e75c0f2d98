// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#include "jwdm/sweep.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

namespace jwdm {

std::vector<SweepRow> lambda_z_sweep(const TrainConfig& config, const std::vector<double>& values,
                                     const SweepOptions& options) {
    if (values.empty()) throw std::invalid_argument("lambda_z_sweep: no values given");
    auto tasks = options.tasks;
    if (tasks.empty()) tasks.push_back(config.dataset.kind);

    std::vector<TrainConfig> runs;
    std::vector<SweepRow> rows;
    for (auto task : tasks) {
        for (double v : values) {
            TrainConfig c = config;
            c.weights.lambda_z = v;
            c.dataset.kind = task;
            if (!config.output_dir.empty()) {
                char name[96];
                std::snprintf(name, sizeof name, "%s_lz%g", std::string(data::to_string(task)).c_str(), v);
                c.output_dir = (std::filesystem::path(config.output_dir) / name).string();
            }
            c.validate();
            runs.push_back(c);
            rows.push_back(SweepRow{v, std::string(data::to_string(task)), {}, {}});
        }
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < runs.size(); i = next++) {
            try {
                const auto dataset = data::gen_domain_pair(runs[i].dataset);
                auto result = train(runs[i], dataset);
                rows[i].report = evaluate(result.state.bundle, dataset, options.eval);
                rows[i].bundle = std::move(result.state.bundle);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = runs.size();
            }
        }
    };
    const auto jobs = std::max<std::size_t>(1, std::min(options.jobs, runs.size()));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = EvalReport::csv_header() + "\n";
    for (const auto& r : rows) out += r.report.csv_row(r.lambda_z, r.task) + "\n";
    return out;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write sweep table '" + path.string() + "'");
    out << sweep_csv(rows);
}

}  // namespace jwdm
