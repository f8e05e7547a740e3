#include "stark/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <set>

#include "stark/io.hpp"
#include "stark/parallel.hpp"
#include "stark/resolvent.hpp"
#include "stark/selftest.hpp"
#include "stark/spectra.hpp"

namespace stark {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(Task t) {
    switch (t) {
        case Task::spectrum: return "spectrum";
        case Task::cluster_spectrum: return "cluster-spectrum";
        case Task::localization: return "localization";
        case Task::evolve: return "evolve";
        case Task::resolvent_check: return "resolvent-check";
        case Task::selftest: return "selftest";
    }
    return "unknown";
}

Task parse_task(const std::string& s) {
    for (Task t : {Task::spectrum, Task::cluster_spectrum, Task::localization, Task::evolve, Task::resolvent_check,
                   Task::selftest})
        if (to_string(t) == s) return t;
    throw ConfigError("unknown task '" + s + "'");
}

// ---------------------------------------------------------------- config

namespace {

void allow_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : keys) known = known || item.key() == k;
        if (!known) throw ConfigError(where + ": unknown key '" + item.key() + "'");
    }
}

template <class T>
T value_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    return obj.at(key).get<T>();
}

Window parse_window(const json& w, const std::string& where) {
    allow_keys(w, where, {"L", "interior_margin"});
    Window out;
    if (!w.contains("L") || !w.contains("interior_margin")) throw ConfigError(where + ": needs L and interior_margin");
    out.L = w.at("L").get<int>();
    out.interior_margin = w.at("interior_margin").get<int>();
    out.validate();
    return out;
}

ModelParams parse_model(const json& m) {
    allow_keys(m, "model", {"g", "h", "N", "statistics", "potential", "h_min"});
    ModelParams p;
    p.g = value_or(m, "g", p.g);
    p.h = value_or(m, "h", p.h);
    p.N = value_or(m, "N", p.N);
    p.h_min = value_or(m, "h_min", p.h_min);
    p.statistics = parse_statistics(value_or<std::string>(m, "statistics", "distinguishable"));
    if (m.contains("potential")) {
        const json& v = m.at("potential");
        allow_keys(v, "model.potential", {"kind", "U", "decay", "table"});
        p.potential.kind = parse_potential_kind(value_or<std::string>(v, "kind", "nearest_neighbor"));
        p.potential.U = value_or(v, "U", p.potential.U);
        p.potential.decay = value_or(v, "decay", p.potential.decay);
        if (v.contains("table")) {
            for (const auto& item : v.at("table").items()) {
                std::size_t used = 0;
                const long key = std::stol(item.key(), &used);
                if (used != item.key().size()) throw ConfigError("model.potential.table: keys must be integers");
                p.potential.table[key] = item.value().get<double>();
            }
        }
    }
    p.validate();
    return p;
}

}  // namespace

RunConfig parse_run_config(const json& doc) {
    try {
        allow_keys(doc, "config",
                   {"task", "model", "window", "basis", "probes", "dynamics", "resolvent", "cluster", "output_dir", "seed"});
        RunConfig c;
        c.echo = doc;
        c.task = parse_task(value_or<std::string>(doc, "task", "spectrum"));
        c.model = parse_model(doc.contains("model") ? doc.at("model") : json::object());
        if (doc.contains("window")) c.window = parse_window(doc.at("window"), "window");
        else if (c.task != Task::selftest) throw ConfigError("window: required");
        if (c.task != Task::selftest) require_adequate_window(c.model, c.window);
        c.basis = parse_basis(value_or<std::string>(doc, "basis", "stark"));
        c.output_dir = value_or<std::string>(doc, "output_dir", c.output_dir);
        c.seed = value_or<unsigned long long>(doc, "seed", 0ULL);

        if (doc.contains("probes")) {
            const json& p = doc.at("probes");
            allow_keys(p, "probes", {"theta_list", "shell_stat", "fit_range", "com_a_max"});
            c.probe.theta_list = value_or(p, "theta_list", c.probe.theta_list);
            c.probe.shell_stat = parse_shell_stat(value_or<std::string>(p, "shell_stat", "max"));
            if (p.contains("fit_range")) {
                const auto r = p.at("fit_range").get<std::vector<int>>();
                if (r.size() != 2) throw ConfigError("probes.fit_range: expected [r_lo, r_hi]");
                c.probe.r_lo = r[0];
                c.probe.r_hi = r[1];
            }
            if (p.contains("com_a_max")) c.com_a_max = p.at("com_a_max").get<long>();
        }
        c.probe.validate();

        if (doc.contains("dynamics")) {
            const json& d = doc.at("dynamics");
            allow_keys(d, "dynamics", {"t_max", "samples", "tolerance", "radii", "initial_state"});
            c.dynamics.t_max = value_or(d, "t_max", c.dynamics.t_max);
            c.dynamics.samples = value_or(d, "samples", c.dynamics.samples);
            c.dynamics.tolerance = value_or(d, "tolerance", c.dynamics.tolerance);
            c.dynamics.radii = value_or(d, "radii", c.dynamics.radii);
            if (d.contains("initial_state")) {
                const json& s = d.at("initial_state");
                allow_keys(s, "dynamics.initial_state", {"kind", "sites", "eta", "path"});
                auto& st = c.dynamics.initial_state;
                st.kind = value_or(s, "kind", st.kind);
                st.sites = value_or(s, "sites", st.sites);
                st.eta = value_or(s, "eta", st.eta);
                st.path = value_or(s, "path", st.path);
                if (st.kind != "product" && st.kind != "symmetrized" && st.kind != "csv" && st.kind != "random")
                    throw ConfigError("dynamics.initial_state.kind: unknown '" + st.kind + "'");
                if ((st.kind == "product" || st.kind == "symmetrized") && static_cast<int>(st.sites.size()) != c.model.N)
                    throw ConfigError("dynamics.initial_state.sites: need one site per particle");
            }
            PropagatorConfig pc{c.dynamics.t_max, c.dynamics.samples, c.dynamics.tolerance, std::nullopt};
            pc.validate();
        }

        if (doc.contains("resolvent")) {
            const json& r = doc.at("resolvent");
            allow_keys(r, "resolvent", {"z_grid"});
            if (r.contains("z_grid")) {
                for (const auto& z : r.at("z_grid")) {
                    const auto pair = z.get<std::vector<double>>();
                    if (pair.size() != 2) throw ConfigError("resolvent.z_grid: entries are [re, im]");
                    c.resolvent.z_grid.emplace_back(pair[0], pair[1]);
                }
            }
        }

        if (doc.contains("cluster")) {
            const json& cl = doc.at("cluster");
            allow_keys(cl, "cluster", {"depth_windows"});
            if (cl.contains("depth_windows")) {
                for (const auto& item : cl.at("depth_windows").items())
                    c.depth_windows[std::stoi(item.key())] = parse_window(item.value(), "cluster.depth_windows");
            }
        }
        return c;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

RunConfig load_run_config(const fs::path& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    return parse_run_config(doc);
}

// ---------------------------------------------------------------- tasks

namespace {

using Clock = std::chrono::steady_clock;

class PhaseTimer {
public:
    PhaseTimer(std::map<std::string, double>& sink, std::string name)
        : sink_(sink), name_(std::move(name)), start_(Clock::now()) {}
    ~PhaseTimer() { sink_[name_] += std::chrono::duration<double>(Clock::now() - start_).count(); }

private:
    std::map<std::string, double>& sink_;
    std::string name_;
    Clock::time_point start_;
};

Check make_check(std::string name, double value, double threshold) {
    return {std::move(name), std::isfinite(value) && value <= threshold, value, threshold};
}

Check make_flag(std::string name, bool ok) { return {std::move(name), ok, ok ? 1.0 : 0.0, 1.0}; }

void write_json(const fs::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

void export_matrix(const fs::path& path, const OperatorMatrix& op) {
    CsvWriter csv({"row", "col", "value"});
    for (int k = 0; k < op.matrix.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(op.matrix, k); it; ++it) csv.add(static_cast<long>(it.row())).add(static_cast<long>(it.col())).add(it.value()).end_row();
    write_text_file(path, csv.str());
}

std::map<int, Window> default_depth_windows(const RunConfig& c) {
    std::map<int, Window> out = c.depth_windows;
    for (int p = 1; p < c.model.N; ++p) {
        if (out.count(p)) continue;
        int L = (c.window.L * c.model.N + p - 1) / p;
        while (L > c.window.L && std::pow(2.0 * L + 1.0, p) > static_cast<double>(kDenseCap)) --L;
        out[p] = Window{L, std::min(c.window.interior_margin, L)};
    }
    return out;
}

std::string partition_label(const std::vector<int>& parts) {
    std::string s;
    for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? "+" : "") + std::to_string(parts[i]);
    return s;
}

json checks_json(const std::vector<Check>& checks) {
    json arr = json::array();
    for (const auto& c : checks) arr.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"threshold", c.threshold}});
    return arr;
}

SpectralResult diagonalize(const OperatorMatrix& H) {
    if (H.dimension() <= kDenseCap) return eigh(H);
    return extremal_eigs(H, 64, Which::lowest);
}

std::vector<Check> task_spectrum(const RunConfig& c, const fs::path& dir, bool export_matrices,
                                 std::map<std::string, double>& timings) {
    OperatorMatrix H;
    {
        PhaseTimer t(timings, "build");
        H = build_hamiltonian(c.model, c.window, c.basis);
    }
    SpectralResult r;
    {
        PhaseTimer t(timings, "diagonalize");
        r = diagonalize(H);
    }
    PhaseTimer t(timings, "write");
    if (export_matrices) export_matrix(dir / "hamiltonian.csv", H);
    const Eigen::MatrixXd R = H.matrix * r.eigenvectors - r.eigenvectors * r.eigenvalues.asDiagonal();
    CsvWriter csv({"index", "value", "interior", "residual"});
    for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i)
        csv.add(static_cast<long>(i)).add(r.eigenvalues(i)).add(r.boundary_mass(i) <= kInteriorMassTol ? 1L : 0L).add(R.col(i).norm()).end_row();
    write_text_file(dir / "eigenvalues.csv", csv.str());

    std::vector<Check> checks;
    checks.push_back(make_check("residual_max", r.residual_max, 1e-9 * std::max(1.0, r.norm_estimate)));
    checks.push_back(make_check("gram_deviation", r.gram_deviation, 1e-10));
    const double shift = 2.0 * c.model.h * c.model.N;
    const PeriodicityReport per = spectral_periodicity_check(r, shift);
    checks.push_back(make_check("shift_periodicity", per.compared ? per.max_distance : INFINITY, 1e-6));
    if (c.model.N == 1) {
        double worst = 0.0;
        const double step = 2.0 * std::abs(c.model.h);
        for (double e : r.interior_eigenvalues()) worst = std::max(worst, std::abs(e - step * std::round(e / step)));
        checks.push_back(make_check("ladder_lattice", worst, 1e-8));
    }
    if (c.model.statistics != Statistics::distinguishable) {
        const OperatorMatrix P = symmetrizer(c.model.N, c.window, c.model.eta(), c.basis);
        const SparseMatrix comm = P.matrix * H.matrix - H.matrix * P.matrix;
        double m = 0.0;
        for (int k = 0; k < comm.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(comm, k); it; ++it) m = std::max(m, std::abs(it.value()));
        checks.push_back(make_check("symmetrizer_commutator", m, 1e-12));
    }
    write_json(dir / "spectrum_report.json",
               {{"dimension", H.dimension()},
                {"interior_count", r.interior().size()},
                {"residual_max", r.residual_max},
                {"gram_deviation", r.gram_deviation},
                {"periodicity", {{"shift", shift}, {"max_distance", per.max_distance}, {"worst_eigenvalue", per.worst_eigenvalue}, {"compared", per.compared}}},
                {"checks", checks_json(checks)}});
    return checks;
}

std::vector<Check> task_cluster_spectrum(const RunConfig& c, const fs::path& dir, std::map<std::string, double>& timings) {
    ClusterSpectrum sigma;
    {
        PhaseTimer t(timings, "cluster_spectrum");
        sigma = cluster_spectrum(c.model, c.window, default_depth_windows(c), c.basis);
    }
    CsvWriter csv({"value", "partition"});
    for (const auto& p : sigma.points) csv.add(p.value).add(partition_label(p.partition)).end_row();
    write_text_file(dir / "cluster_spectrum.csv", csv.str());
    bool sorted = true;
    for (std::size_t i = 1; i < sigma.points.size(); ++i)
        sorted = sorted && sigma.points[i].value - sigma.points[i - 1].value > kClusterDedupTol;
    return {make_flag("nonempty", !sigma.points.empty()), make_flag("sorted_deduplicated", sorted)};
}

std::vector<Check> task_localization(const RunConfig& c, const fs::path& dir, bool export_matrices,
                                     std::map<std::string, double>& timings) {
    OperatorMatrix H;
    SpectralResult r;
    ClusterSpectrum sigma;
    {
        PhaseTimer t(timings, "diagonalize");
        H = build_hamiltonian(c.model, c.window, Basis::stark);
        r = eigh(H);
    }
    if (export_matrices) export_matrix(dir / "hamiltonian.csv", H);
    {
        PhaseTimer t(timings, "cluster_spectrum");
        sigma = cluster_spectrum(c.model, c.window, default_depth_windows(c), Basis::stark);
    }
    PhaseTimer t(timings, "probes");
    const double gap_min = 0.05 * 2.0 * std::abs(c.model.h);
    const long a_max = c.com_a_max ? *c.com_a_max : static_cast<long>(c.model.N) * c.window.L - c.window.interior_margin;
    const auto interior = r.interior();

    struct Probe {
        ComProfile profile;
        std::vector<ComDecayReport> com;
        ShellReport shells;
        std::vector<std::vector<double>> weighted;  // [theta][coordinate]
        double dist = 0.0;
    };
    std::vector<Probe> probes(interior.size());
    parallel_for(interior.size(), [&](std::size_t k) {
        const Eigen::Index i = interior[k];
        const Eigen::VectorXd psi = r.eigenvectors.col(i);
        Probe& p = probes[k];
        p.profile = com_profile(psi, H.index_map, r.eigenvalues(i), c.model.h);
        for (double th : c.probe.theta_list) {
            p.com.push_back(com_decay_check(p.profile, th, a_max));
            std::vector<double> w;
            for (int q = 0; q < c.model.N; ++q) w.push_back(weighted_norm(psi, H.index_map, q, th));
            p.weighted.push_back(w);
        }
        p.shells = superexp_shell_fit(psi, H.index_map, c.probe);
        p.dist = dist_to_cluster(r.eigenvalues(i), sigma);
    });

    CsvWriter com_csv({"eigen_index", "lambda", "com_center", "a", "norm", "bound"});
    CsvWriter shell_csv({"eigen_index", "r", "s", "rate"});
    json per_vector = json::array();
    double parseval = 0.0;
    int gated = 0, com_fail = 0, shell_fail = 0, c_infinite = 0;
    double c_min = INFINITY, c_max = 0.0;
    for (std::size_t k = 0; k < interior.size(); ++k) {
        const Probe& p = probes[k];
        const long idx = static_cast<long>(interior[k]);
        parseval = std::max(parseval, std::abs(p.profile.total_mass() - r.eigenvectors.col(interior[k]).squaredNorm()));
        const double C0 = p.com.front().fitted_C, th0 = p.com.front().theta;
        for (const auto& [a, norm] : p.profile.entries)
            com_csv.add(idx).add(p.profile.lambda).add(p.profile.com_center).add(a).add(norm)
                .add(C0 * std::exp(-th0 * std::abs(static_cast<double>(a) - p.profile.com_center))).end_row();
        for (std::size_t s = 0; s < p.shells.radii.size(); ++s)
            shell_csv.add(idx).add(static_cast<long>(p.shells.radii[s])).add(p.shells.amplitude[s]).add(p.shells.rate[s]).end_row();
        const bool is_gated = p.dist >= gap_min;
        json com_json = json::array();
        for (std::size_t q = 0; q < p.com.size(); ++q) {
            const auto& cr = p.com[q];
            com_json.push_back({{"theta", cr.theta}, {"fitted_C", cr.fitted_C}, {"tail_slope", cr.tail_slope}, {"passed", cr.passed}, {"weighted_norms", p.weighted[q]}});
            if (!std::isfinite(cr.fitted_C)) ++c_infinite;
            if (is_gated && !cr.passed) ++com_fail;
        }
        if (is_gated) {
            ++gated;
            if (!p.shells.passed) ++shell_fail;
            c_min = std::min(c_min, C0);
            c_max = std::max(c_max, C0);
        }
        per_vector.push_back({{"eigen_index", idx}, {"lambda", p.profile.lambda}, {"dist_to_cluster", p.dist}, {"gated", is_gated},
                              {"com", com_json}, {"shell", {{"passed", p.shells.passed}, {"max_drop", p.shells.max_drop}, {"last_rate", p.shells.last_rate}, {"vacuous", p.shells.vacuous}}}});
    }
    write_text_file(dir / "com_profile.csv", com_csv.str());
    write_text_file(dir / "shell_decay.csv", shell_csv.str());

    std::vector<Check> checks;
    checks.push_back(make_check("sector_parseval", parseval, 1e-10));
    checks.push_back(make_check("fitted_C_infinite", c_infinite, 0));
    checks.push_back(make_check("com_decay_failures", com_fail, 0));
    checks.push_back(make_check("shell_fit_failures", shell_fail, 0));
    checks.push_back(make_flag("interior_eigenvectors_found", !interior.empty()));
    write_json(dir / "decay_report.json",
               {{"gap_min", gap_min}, {"a_max", a_max}, {"interior_count", interior.size()}, {"gated_count", gated},
                {"fitted_C_spread", gated ? c_max / c_min : 0.0}, {"eigenvectors", per_vector}, {"checks", checks_json(checks)}});
    return checks;
}

Eigen::VectorXcd initial_state(const RunConfig& c, const IndexMap& map, int margin) {
    const auto& s = c.dynamics.initial_state;
    if (s.kind == "product") return product_state(map, s.sites);
    if (s.kind == "symmetrized") return symmetrized_state(map, s.sites, s.eta);
    if (s.kind == "csv") return load_state_csv(s.path, map);
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> dist;
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(map.size()));
    for (std::size_t i = 0; i < map.size(); ++i) {
        const double re = dist(rng), im = dist(rng);
        if (!map.near_boundary(i, margin)) v(static_cast<Eigen::Index>(i)) = {re, im};
    }
    return v.normalized();
}

std::vector<Check> task_evolve(const RunConfig& c, const fs::path& dir, bool export_matrices,
                               std::map<std::string, double>& timings) {
    OperatorMatrix H;
    {
        PhaseTimer t(timings, "build");
        H = build_hamiltonian(c.model, c.window, Basis::position);
    }
    if (export_matrices) export_matrix(dir / "hamiltonian.csv", H);
    std::vector<int> radii = c.dynamics.radii;
    if (radii.empty())
        for (int r = 0; r <= c.window.L; ++r) radii.push_back(r);
    const Eigen::VectorXcd psi0 = initial_state(c, H.index_map, c.window.interior_margin);
    PropagatorConfig pc{c.dynamics.t_max, c.dynamics.samples, c.dynamics.tolerance, std::nullopt};
    DensityTrace tr;
    {
        PhaseTimer t(timings, "evolve");
        tr = tail_trace(H, psi0, pc, radii);
    }
    PhaseTimer t(timings, "write");
    CsvWriter dens({"t", "x", "rho"});
    for (std::size_t s = 0; s < tr.times.size(); ++s)
        for (int x = -c.window.L; x <= c.window.L; ++x)
            dens.add(tr.times[s]).add(static_cast<long>(x)).add(tr.densities[s][static_cast<std::size_t>(x + c.window.L)]).end_row();
    write_text_file(dir / "density_trace.csv", dens.str());
    CsvWriter tail({"r", "sup_tail"});
    for (std::size_t i = 0; i < tr.radii.size(); ++i) tail.add(static_cast<long>(tr.radii[i])).add(tr.sup_tail[i]).end_row();
    write_text_file(dir / "tail_summary.csv", tail.str());

    std::vector<Check> checks{make_check("norm_drift", tr.norm_drift, 1e-10),
                              make_check("energy_drift", tr.energy_drift, 1e-8),
                              make_check("density_sum_error", tr.density_sum_error, 1e-8),
                              make_flag("sup_tail_monotone", tr.monotone),
                              make_check("safety_tail", tr.safety_tail, 1e-4),
                              make_check("refinement_delta", tr.refinement_delta, 1e-8)};
    write_json(dir / "evolve_report.json", {{"safety_radius", tr.safety_radius}, {"truncation_unsafe", tr.truncation_unsafe},
                                            {"refinement_delta", tr.refinement_delta}, {"checks", checks_json(checks)}});
    return checks;
}

double mid_gap_point(const RunConfig& c) {
    const ClusterSpectrum sigma = cluster_spectrum(c.model, c.window, default_depth_windows(c), Basis::stark);
    std::vector<std::vector<double>> spectra;
    for (const auto& D : enumerate_set_partitions(c.model.N)) {
        const OperatorMatrix H = build_cluster_hamiltonian(c.model, c.window, D, Basis::stark);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.dense(), Eigen::EigenvaluesOnly);
        spectra.emplace_back(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    }
    const auto pts = sigma.values();
    const double band = 2.0 * std::abs(c.model.h) * (c.window.L - c.window.interior_margin);
    double best = 0.0, best_d = -1.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double z = 0.5 * (pts[i] + pts[i - 1]);
        if (std::abs(z) > band) continue;
        double d = INFINITY;
        for (const auto& s : spectra) d = std::min(d, nearest_distance(z, s));
        if (d > best_d) {
            best_d = d;
            best = z;
        }
    }
    return best;
}

std::vector<Check> task_resolvent(const RunConfig& c, const fs::path& dir, std::map<std::string, double>& timings) {
    if (c.model.N < 2) throw ConfigError("resolvent-check: needs N >= 2");
    double v_norm = 0.0;
    {
        PhaseTimer t(timings, "interaction_norm");
        const OperatorMatrix V = build_interaction(c.model, c.window, Basis::stark);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(V.dense(), Eigen::EigenvaluesOnly);
        v_norm = es.eigenvalues().cwiseAbs().maxCoeff();
    }
    std::vector<Complex> grid = c.resolvent.z_grid;
    if (grid.empty()) {
        const double base = v_norm > 0.0 ? v_norm : 1.0;
        for (int k = 1; k <= 6; ++k) grid.emplace_back(0.0, std::ldexp(base, k));
        PhaseTimer t(timings, "mid_gap");
        grid.emplace_back(mid_gap_point(c), 0.0);
    }
    std::vector<FunctionalEquationReport> reps(grid.size());
    {
        PhaseTimer t(timings, "functional_equation");
        parallel_for(grid.size(), [&](std::size_t i) { reps[i] = functional_equation_residual(grid[i], c.model, c.window); });
    }
    std::vector<Check> checks;
    json fe = json::array();
    double prev_norm = INFINITY;
    bool ladder_ok = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& r = reps[i];
        const bool real_z = std::abs(grid[i].imag()) < 1e-12;
        const double tol = c.model.N >= 3 ? 1e-6 : (real_z ? 1e-7 : 1e-8);
        fe.push_back({{"z", {grid[i].real(), grid[i].imag()}}, {"residual", r.residual}, {"norm_I", r.norm_I}, {"norm_D", r.norm_D},
                      {"solver_residual", r.solver_residual}, {"tolerance", tol}});
        checks.push_back(make_check("functional_equation_z" + std::to_string(i), r.residual, tol));
        if (c.model.N == 2 && !real_z && grid[i].real() == 0.0 && grid[i].imag() > 0.0) {
            const double y = grid[i].imag();
            ladder_ok = ladder_ok && r.norm_I <= v_norm / y * (1.0 + 1e-3) && r.norm_I <= prev_norm * (1.0 + 1e-3);
            prev_norm = r.norm_I;
        }
    }
    if (c.model.N == 2) checks.push_back(make_flag("norm_I_ladder", ladder_ok));
    write_json(dir / "functional_eq.json", {{"norm_V", v_norm}, {"points", fe}});

    std::size_t first_imag = 0;
    while (first_imag < grid.size() && std::abs(grid[first_imag].imag()) < 1e-12) ++first_imag;
    if (first_imag < grid.size()) {
        PhaseTimer t(timings, "compactness");
        const CompactnessReport cr = compactness_proxy(build_I(grid[first_imag], c.model, c.window));
        CsvWriter sv({"k", "singular_value"});
        for (Eigen::Index k = 0; k < cr.singular_values.size(); ++k) sv.add(static_cast<long>(k + 1)).add(cr.singular_values(k)).end_row();
        write_text_file(dir / "iz_singular_values.csv", sv.str());
        checks.push_back(make_flag("compactness_proxy", cr.passed || cr.singular_values.size() == 0 || cr.singular_values(0) == 0.0));
    }
    {
        PhaseTimer t(timings, "fredholm");
        const FredholmReport fr = fredholm_probe(grid, c.model, c.window);
        CsvWriter fs_csv({"z_re", "z_im", "proximity", "nearest_eigenvalue", "flagged"});
        for (const auto& p : fr.points)
            fs_csv.add(p.z.real()).add(p.z.imag()).add(p.proximity).add(p.nearest_h_eigenvalue).add(p.flagged ? 1L : 0L).end_row();
        write_text_file(dir / "fredholm_scan.csv", fs_csv.str());
        checks.push_back(make_flag("fredholm_consistency", fr.passed));
    }
    return checks;
}

std::vector<Check> task_selftest(const fs::path& dir) {
    const SelftestResult res = run_selftest();
    json checks = json::array();
    std::vector<Check> out;
    for (const auto& c : res.checks) {
        checks.push_back({{"module", c.module}, {"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
        out.push_back(make_flag(c.module + ": " + c.name, c.passed));
    }
    json bounds = json::array();
    for (const auto& b : res.bounds) {
        json w = json::array();
        for (const auto& x : b.witnesses) w.push_back({{"index", x.index}, {"lhs", x.lhs}, {"rhs", x.rhs}});
        json entry = {{"bound", to_string(b.kind)}, {"max_ratio", b.max_ratio}, {"explicit_constant", b.explicit_constant},
                      {"passed", b.passed()}, {"witnesses", w}};
        if (b.fitted_C) entry["fitted_C"] = *b.fitted_C;
        if (b.fitted_c) entry["fitted_c"] = *b.fitted_c;
        bounds.push_back(entry);
        out.push_back(make_flag("bound: " + to_string(b.kind), b.passed()));
    }
    write_json(dir / "selftest.json", {{"checks", checks}, {"bounds", bounds}});
    return out;
}

}  // namespace

std::vector<Check> execute_task(const RunConfig& config, const fs::path& dir, bool export_matrices,
                                std::map<std::string, double>& timings) {
    switch (config.task) {
        case Task::spectrum: return task_spectrum(config, dir, export_matrices, timings);
        case Task::cluster_spectrum: return task_cluster_spectrum(config, dir, timings);
        case Task::localization: return task_localization(config, dir, export_matrices, timings);
        case Task::evolve: return task_evolve(config, dir, export_matrices, timings);
        case Task::resolvent_check: return task_resolvent(config, dir, timings);
        case Task::selftest: return task_selftest(dir);
    }
    return {};
}

int run(const fs::path& config_path, const RunOptions& options) {
    RunConfig config;
    try {
        config = load_run_config(config_path);
        if (options.task_override) {
            if (config.echo.contains("task") && config.task != *options.task_override)
                throw ConfigError("config task '" + to_string(config.task) + "' does not match subcommand '" +
                                  to_string(*options.task_override) + "'");
            config.task = *options.task_override;
        }
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
    set_worker_count(options.workers);

    fs::path out = config.output_dir;
    if (const char* env = std::getenv("STARK_OUTPUT_DIR"); env && *env) out = env;
    if (options.out) out = *options.out;
    const fs::path staging = out.string() + ".partial";

    std::map<std::string, double> timings;
    std::vector<Check> checks;
    try {
        fs::remove_all(staging);
        fs::create_directories(staging);
        checks = execute_task(config, staging, options.export_matrices, timings);
        bool all = true;
        for (const auto& c : checks) all = all && c.passed;
        json manifest = {{"tool_version", kToolVersion},
                         {"task", to_string(config.task)},
                         {"config", config.echo},
                         {"config_hash", hex64(fnv1a(config.echo.dump()))},
                         {"timings_seconds", timings},
                         {"checks", checks_json(checks)},
                         {"passed", all},
                         {"status", "complete"}};
        write_json(staging / "manifest.json", manifest);
        if (fs::exists(out)) fs::remove_all(out);
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        fs::rename(staging, out);
        for (const auto& c : checks)
            if (!c.passed)
                std::cerr << "check failed: " << c.name << " (value " << format_double(c.value) << ", threshold "
                          << format_double(c.threshold) << ")\n";
        return all ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << "\n";
    }
    std::error_code ec;
    fs::remove_all(staging, ec);
    return 1;
}

int emit_plot_data(const fs::path& run_dir) {
    try {
        int written = 0;
        if (fs::exists(run_dir / "shell_decay.csv")) {
            const CsvTable t = parse_csv(read_text_file(run_dir / "shell_decay.csv"));
            const auto ci = t.column("eigen_index"), cr = t.column("r"), cs = t.column("s"), crate = t.column("rate");
            CsvWriter w({"eigen_index", "r", "log10_s", "rate"});
            for (const auto& row : t.rows) {
                const double s = std::stod(row[cs]);
                if (s <= 0.0) continue;
                w.add(row[ci]).add(row[cr]).add(std::log10(s)).add(row[crate]).end_row();
            }
            write_text_file(run_dir / "plot_shell_decay.csv", w.str());
            ++written;
        }
        if (fs::exists(run_dir / "com_profile.csv")) {
            const CsvTable t = parse_csv(read_text_file(run_dir / "com_profile.csv"));
            const auto ci = t.column("eigen_index"), ca = t.column("a"), cc = t.column("com_center"), cn = t.column("norm");
            CsvWriter w({"eigen_index", "a_minus_center", "log10_norm"});
            for (const auto& row : t.rows) {
                const double n = std::stod(row[cn]);
                if (n <= 0.0) continue;
                w.add(row[ci]).add(std::stod(row[ca]) - std::stod(row[cc])).add(std::log10(n)).end_row();
            }
            write_text_file(run_dir / "plot_com_profile.csv", w.str());
            ++written;
        }
        if (fs::exists(run_dir / "tail_summary.csv")) {
            const CsvTable t = parse_csv(read_text_file(run_dir / "tail_summary.csv"));
            const auto cr = t.column("r"), cs = t.column("sup_tail");
            CsvWriter w({"r", "log10_sup_tail"});
            for (const auto& row : t.rows) {
                const double s = std::stod(row[cs]);
                if (s <= 0.0) continue;
                w.add(row[cr]).add(std::log10(s)).end_row();
            }
            write_text_file(run_dir / "plot_tail_summary.csv", w.str());
            ++written;
        }
        if (written == 0) {
            std::cerr << "plot-data: no shell_decay.csv, com_profile.csv or tail_summary.csv in " << run_dir << "\n";
            return 1;
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "plot-data failed: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace stark
