#include "contdyn/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <thread>

namespace contdyn {

namespace fs = std::filesystem;

bool RunRecord::has_numeric_event() const {
    return std::any_of(events.begin(), events.end(), [](const RunEvent& e) { return e.numeric; });
}

std::vector<std::string> csv_columns(ScenarioKind kind) {
    switch (kind) {
    case ScenarioKind::ClassicalDet:
        return {"t", "det_matrix", "det_scalar_ode", "det_liouville", "abs_error"};
    case ScenarioKind::QuantumDetU:
        return {"t", "re_det_u", "im_det_u", "re_det_u_exact", "im_det_u_exact", "unitarity_defect"};
    case ScenarioKind::ContinuitySweep:
        return {"t", "abs_det", "continuity_functional", "relative_rate_norm", "lyapunov_signed",
                "lyapunov_rate", "near_singular_flag"};
    case ScenarioKind::CrossingReport:
        return {"t", "det_h", "abs_det_u"};
    }
    return {};
}

std::string format_scalar(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    if (v == 0.0)
        return "0"; // no "-0"
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string format_optional(const std::optional<double>& v) {
    return v ? format_scalar(*v) : "nan";
}

class CsvBuilder {
public:
    explicit CsvBuilder(const std::vector<std::string>& columns) {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (i)
                text_ += ',';
            text_ += columns[i];
        }
        text_ += '\n';
    }

    template <typename... Cells>
    void row(const Cells&... cells) {
        bool first = true;
        ((text_ += (first ? "" : ","), text_ += cells, first = false), ...);
        text_ += '\n';
    }

    [[nodiscard]] const std::string& text() const noexcept { return text_; }

private:
    std::string text_;
};

void write_file(const fs::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path())
        fs::create_directories(path.parent_path(), ec);
    if (ec)
        throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out)
        throw IoError("failed writing '" + path.string() + "'");
}

fs::path resolve_output(const ScenarioConfig& config, const RunOptions& options) {
    fs::path p(config.output_path);
    if (options.output_dir)
        p = fs::path(*options.output_dir) / p.filename();
    return p;
}

fs::path sibling(const fs::path& main, const std::string& suffix, const std::string& ext) {
    return main.parent_path() / (main.stem().string() + suffix + ext);
}

std::string gnuplot_script(const fs::path& csv, const std::vector<std::string>& columns) {
    std::string s = "set datafile separator ','\nset key autotitle columnhead\nset xlabel 't'\nplot ";
    for (std::size_t i = 1; i < columns.size(); ++i) {
        if (i > 1)
            s += ", \\\n     ";
        s += "'" + csv.filename().string() + "' using 1:" + std::to_string(i + 1) + " with lines";
    }
    s += "\n";
    return s;
}

struct ClassicalSetup {
    EvolutionProblem<Real> problem;
    double gamma_effective = 0.0;
};

ClassicalSetup classical_problem(const ScenarioConfig& c) {
    ClassicalSetup s;
    s.problem.A = c.A->real_generator(c.seed);
    const std::size_t n = s.problem.A.dim;
    s.problem.B = c.B ? c.B->real_generator(c.seed) : RealGenerator::zero(n);
    s.problem.M0 = c.M0 ? c.M0->real_generator(c.seed)(c.t0) : RealMatrix::identity(n);
    s.problem.feedback = c.feedback_kind();
    s.problem.t0 = c.t0;
    s.problem.tf = c.tf;
    s.gamma_effective = c.feedback == FeedbackVariant::None ? 0.0 : c.gamma;
    return s;
}

void record_trajectory_event(const std::optional<SingularityEvent>& ev, RunRecord& rec) {
    if (ev)
        rec.events.push_back({"singularity", ev->time, ev->abs_det,
                              "|det M| fell below the singular threshold", true});
}

std::string run_classical(const ScenarioConfig& c, RunRecord& rec) {
    const ClassicalSetup s = classical_problem(c);
    const Trajectory<Real> traj = evolve(s.problem, c.n_steps);
    record_trajectory_event(traj.event, rec);

    const std::size_t n = s.problem.dim();
    const auto tr = trace_of_sum(s.problem.A, s.problem.B);
    const ScalarFunction tau = [tr](double t) { return tr(t); };
    const ScalarTrajectory scalar =
        det_ode_solve(tau, s.gamma_effective, n, traj.dets.front(), traj.times);
    if (scalar.blow_up)
        rec.events.push_back({"blow_up", scalar.blow_up->time_estimate, scalar.blow_up->last_value,
                              "scalar determinant law exceeded the overflow guard", true});
    const std::vector<double> integral = cumulative_integral(tau, traj.times);

    CsvBuilder csv(csv_columns(ScenarioKind::ClassicalDet));
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double d = traj.dets[k];
        const double ode = k < scalar.values.size() ? scalar.values[k] : std::nan("");
        const double liouville = traj.dets.front() * std::exp(integral[k]);
        csv.row(format_scalar(traj.times[k]), format_scalar(d), format_scalar(ode),
                format_scalar(liouville), format_scalar(std::abs(d - liouville)));
    }
    return csv.text();
}

std::string run_quantum(const ScenarioConfig& c, RunRecord& rec) {
    quantum::QuantumProblem q;
    q.H = c.hamiltonian->complex_generator(c.seed);
    q.hbar = c.hbar;
    q.t0 = c.t0;
    q.tf = c.tf;
    const Trajectory<Complex> traj = evolve(quantum::schrodinger_problem(q), c.n_steps);
    record_trajectory_event(traj.event, rec);
    const std::vector<Complex> exact = quantum::exact_det_U(q.H, q.hbar, q.t0, traj.times);
    const quantum::UnitarityReport report = quantum::unitarity_check(traj);
    if (!report.passes) {
        const auto worst = std::max_element(report.unitarity_defect.begin(), report.unitarity_defect.end());
        rec.events.push_back({"unitarity", traj.times[static_cast<std::size_t>(worst - report.unitarity_defect.begin())],
                              report.max_unitarity_defect,
                              "unitarity defect above " + format_scalar(report.tolerance), true});
    }

    CsvBuilder csv(csv_columns(ScenarioKind::QuantumDetU));
    for (std::size_t k = 0; k < traj.size(); ++k)
        csv.row(format_scalar(traj.times[k]), format_scalar(traj.dets[k].real()),
                format_scalar(traj.dets[k].imag()), format_scalar(exact[k].real()),
                format_scalar(exact[k].imag()), format_scalar(report.unitarity_defect[k]));
    return csv.text();
}

std::string run_continuity(const ScenarioConfig& c, RunRecord& rec) {
    const ClassicalSetup s = classical_problem(c);
    const Trajectory<Real> traj = evolve(s.problem, c.n_steps);
    record_trajectory_event(traj.event, rec);

    DiagnosticsConfig dc;
    dc.alpha = c.alpha;
    dc.near_singular_threshold = c.near_singular_threshold;
    dc.derivative_mode = c.derivative_mode;
    const DiagnosticsSeries series = annotate_trajectory(traj, s.problem, dc);

    CsvBuilder csv(csv_columns(ScenarioKind::ContinuitySweep));
    for (std::size_t k = 0; k < series.size(); ++k)
        csv.row(format_scalar(series.times[k]), format_scalar(series.abs_det[k]),
                format_scalar(series.continuity_functional[k]),
                format_optional(series.relative_rate_norm[k]),
                format_optional(series.lyapunov_signed[k]), format_scalar(series.lyapunov_rate[k]),
                std::string(series.near_singular[k] ? "1" : "0"));
    return csv.text();
}

std::string run_crossings(const ScenarioConfig& c, RunRecord& rec, std::string& crossings_csv) {
    const ComplexGenerator h = c.hamiltonian->complex_generator(c.seed);
    const TimeGrid grid = uniform_grid(c.t0, c.tf, c.n_steps);
    const ScalarFunction det_h = [&h](double t) { return det(h(t)).real(); };
    const std::vector<double> crossings = quantum::find_crossings(det_h, grid);
    const std::vector<Complex> det_u = quantum::exact_det_U(h, c.hbar, c.t0, grid);

    CsvBuilder csv(csv_columns(ScenarioKind::CrossingReport));
    for (std::size_t k = 0; k < grid.size(); ++k)
        csv.row(format_scalar(grid[k]), format_scalar(det_h(grid[k])), format_scalar(std::abs(det_u[k])));

    CsvBuilder roots({"index", "t_crossing"});
    for (std::size_t i = 0; i < crossings.size(); ++i) {
        roots.row(std::to_string(i), format_scalar(crossings[i]));
        rec.events.push_back({"crossing", crossings[i], 0.0, "det H changes sign", false});
    }
    crossings_csv = roots.text();
    return csv.text();
}

} // namespace

RunRecord run_scenario(const ScenarioConfig& input, const RunOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    ScenarioConfig config = input;
    if (options.seed)
        config.set_seed(*options.seed);

    RunRecord rec;
    rec.config_hash = config.hash();
    const fs::path out = resolve_output(config, options);

    std::string main_csv;
    std::string crossings_csv;
    try {
        switch (config.scenario) {
        case ScenarioKind::ClassicalDet: main_csv = run_classical(config, rec); break;
        case ScenarioKind::QuantumDetU: main_csv = run_quantum(config, rec); break;
        case ScenarioKind::ContinuitySweep: main_csv = run_continuity(config, rec); break;
        case ScenarioKind::CrossingReport: main_csv = run_crossings(config, rec, crossings_csv); break;
        }
    } catch (const IoError&) {
        throw;
    } catch (const Error& e) {
        rec.events.push_back({"numeric_error", config.t0, 0.0, e.what(), true});
    }

    if (!main_csv.empty()) {
        write_file(out, main_csv);
        rec.outputs.push_back(out.string());
        if (!crossings_csv.empty()) {
            const fs::path roots = sibling(out, "_crossings", out.extension().string());
            write_file(roots, crossings_csv);
            rec.outputs.push_back(roots.string());
        }
        if (config.gnuplot) {
            const fs::path gp = sibling(out, "", ".gp");
            write_file(gp, gnuplot_script(out, csv_columns(config.scenario)));
            rec.outputs.push_back(gp.string());
        }
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

std::string sweep_output_path(const std::string& base, const std::string& parameter, double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    const std::string repr(buf, res.ptr);
    const fs::path p(base);
    return (p.parent_path() / (p.stem().string() + "_" + parameter + "=" + repr + p.extension().string()))
        .string();
}

RunRecord run_sweep(const ScenarioConfig& config, const RunOptions& options) {
    if (!config.sweep)
        throw ConfigError("config has no sweep section", "sweep");
    const auto start = std::chrono::steady_clock::now();
    const SweepSpec& sweep = *config.sweep;
    const std::size_t count = sweep.values.size();

    std::vector<RunRecord> records(count);
    std::vector<std::exception_ptr> failures(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                ScenarioConfig point = config;
                point.sweep.reset();
                point.source.erase("sweep");
                point.set_parameter(sweep.parameter, sweep.values[i]);
                point.output_path = sweep_output_path(config.output_path, sweep.parameter, sweep.values[i]);
                records[i] = run_scenario(point, options);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };

    unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                            : options.threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back(worker);
    }
    for (const auto& f : failures)
        if (f)
            std::rethrow_exception(f);

    RunRecord merged;
    ScenarioConfig hashed = config;
    if (options.seed)
        hashed.set_seed(*options.seed);
    merged.config_hash = hashed.hash();
    for (std::size_t i = 0; i < count; ++i) {
        for (RunEvent e : records[i].events) {
            e.detail = sweep.parameter + "=" + format_scalar(sweep.values[i]) + ": " + e.detail;
            merged.events.push_back(std::move(e));
        }
        merged.outputs.insert(merged.outputs.end(), records[i].outputs.begin(), records[i].outputs.end());
    }
    merged.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return merged;
}

nlohmann::json to_json(const RunRecord& record) {
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(record.config_hash));
    nlohmann::json j;
    j["config_hash"] = hash;
    j["wall_seconds"] = record.wall_seconds;
    j["outputs"] = record.outputs;
    j["events"] = nlohmann::json::array();
    for (const RunEvent& e : record.events)
        j["events"].push_back({{"kind", e.kind}, {"time", e.time}, {"value", e.value},
                               {"detail", e.detail}, {"numeric", e.numeric}});
    return j;
}

} // namespace contdyn
