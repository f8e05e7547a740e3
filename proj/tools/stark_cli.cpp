#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "stark/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Stark lattice toolkit: spectra, localization, dynamics and resolvent checks"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int workers = 1;
    bool export_matrices = false;

    struct Entry {
        const char* name;
        const char* help;
        std::optional<stark::Task> task;
    };
    const Entry entries[] = {
        {"run", "run the task named in the config", std::nullopt},
        {"spectrum", "diagonalize H and check residuals and shift periodicity", stark::Task::spectrum},
        {"cluster-spectrum", "Minkowski sums of sub-system spectra", stark::Task::cluster_spectrum},
        {"localization", "sector profiles, weighted norms and shell decay rates", stark::Task::localization},
        {"evolve", "Chebyshev time evolution and tail masses", stark::Task::evolve},
        {"resolvent-check", "G = D + I G, compactness and Fredholm probes", stark::Task::resolvent_check},
        {"selftest", "closed-form examples and Bessel bound checks", stark::Task::selftest},
    };

    std::optional<stark::Task> chosen;
    bool is_run = false;
    for (const auto& e : entries) {
        CLI::App* sub = app.add_subcommand(e.name, e.help);
        sub->add_option("--config", config_path, "JSON run configuration")->required(e.task != stark::Task::selftest);
        sub->add_option("--out", out_dir, "output directory (overrides the config)");
        sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
        sub->add_flag("--export-matrices", export_matrices, "write operators as (row, col, value) CSV");
        sub->callback([&, e] {
            chosen = e.task;
            is_run = !e.task.has_value();
        });
    }
    CLI::App* plot = app.add_subcommand("plot-data", "long-format plotting tables from a finished run");
    plot->add_option("--out", out_dir, "run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (plot->parsed()) return stark::emit_plot_data(out_dir);

    stark::RunOptions options;
    options.workers = workers;
    options.export_matrices = export_matrices;
    if (!out_dir.empty()) options.out = out_dir;
    if (!is_run) options.task_override = chosen;

    if (config_path.empty()) {
        // selftest without a config: run the suite into --out or ./selftest_out.
        const nlohmann::json doc = {{"task", "selftest"}};
        std::map<std::string, double> timings;
        try {
            stark::RunConfig cfg = stark::parse_run_config(doc);
            const std::filesystem::path dir = out_dir.empty() ? std::filesystem::path("selftest_out") : std::filesystem::path(out_dir);
            std::filesystem::create_directories(dir);
            const auto checks = stark::execute_task(cfg, dir, false, timings);
            bool all = true;
            for (const auto& c : checks) {
                all = all && c.passed;
                if (!c.passed) std::cerr << "check failed: " << c.name << "\n";
            }
            std::cout << (all ? "selftest passed" : "selftest FAILED") << " (" << checks.size() << " checks)\n";
            return all ? 0 : 2;
        } catch (const std::exception& e) {
            std::cerr << "selftest error: " << e.what() << "\n";
            return 1;
        }
    }
    return stark::run(config_path, options);
}
