// Config-driven runs: schema-checked JSON in, CSV/JSON artifacts and a
// manifest out, published atomically.

#pragma once

#include <complex>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "stark/dynamics.hpp"
#include "stark/localization.hpp"
#include "stark/model.hpp"

namespace stark {

inline constexpr const char* kToolVersion = "1.0.0";

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Task { spectrum, cluster_spectrum, localization, evolve, resolvent_check, selftest };

std::string to_string(Task t);
Task parse_task(const std::string& s);

struct InitialState {
    std::string kind = "product";  // product, symmetrized, csv, random
    std::vector<int> sites{0, 1};
    int eta = 1;
    std::string path;
};

struct DynamicsBlock {
    double t_max = 50.0;
    int samples = 200;
    double tolerance = 1e-12;
    std::vector<int> radii;
    InitialState initial_state;
};

struct ResolventBlockConfig {
    std::vector<std::complex<double>> z_grid;  // empty: default ladder plus a mid-gap point
};

struct RunConfig {
    Task task = Task::spectrum;
    ModelParams model;
    Window window;
    Basis basis = Basis::stark;
    DecayProbe probe;
    std::optional<long> com_a_max;
    DynamicsBlock dynamics;
    ResolventBlockConfig resolvent;
    std::map<int, Window> depth_windows;
    std::string output_dir = "stark_out";
    unsigned long long seed = 0;
    nlohmann::json echo;  // the validated document as given
};

RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

struct RunOptions {
    std::optional<std::string> out;
    std::optional<Task> task_override;
    int workers = 1;
    bool export_matrices = false;
};

struct Check {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
};

// Executes a task into `dir`; returns the asserted checks.
std::vector<Check> execute_task(const RunConfig& config, const std::filesystem::path& dir, bool export_matrices,
                                std::map<std::string, double>& timings);

// 0: all checks pass; 2: some check failed; 1: config or IO error.
int run(const std::filesystem::path& config_path, const RunOptions& options);

// Long-format plotting tables from a finished run directory; returns an exit code.
int emit_plot_data(const std::filesystem::path& run_dir);

}  // namespace stark
