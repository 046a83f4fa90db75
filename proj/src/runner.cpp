#include "gsle/runner.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <regex>
#include <sstream>
#include <thread>

namespace gsle {

namespace fs = std::filesystem;

namespace {

/// Calls fn(i) for i in [0, n) on up to `workers` threads; the first exception is rethrown.
template <typename F>
void parallel_for(std::size_t n, unsigned workers, F&& fn)
{
    const unsigned w = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (w == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr failure;
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < w; ++k) {
        pool.emplace_back([&] {
            for (std::size_t i; !failed && (i = next.fetch_add(1)) < n;) {
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

struct File {
    std::FILE* f;
    explicit File(const fs::path& p) : f(std::fopen(p.c_str(), "w"))
    {
        if (!f) throw Error(ErrorCode::IoError, "cannot write '" + p.string() + "'");
    }
    ~File() { std::fclose(f); }
    File(const File&) = delete;
    File& operator=(const File&) = delete;
};

void put_header(std::FILE* f, const OutputHeader& h)
{
    std::fprintf(f, "# seed=%llu config_digest=%s\n", static_cast<unsigned long long>(h.seed), h.digest.c_str());
}

void put_num(std::FILE* f, double v, bool last = false)
{
    std::fprintf(f, last ? "%.17g\n" : "%.17g,", v);
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

double to_double(const std::string& s, const fs::path& where)
{
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw Error(ErrorCode::IoError, "malformed number '" + s + "' in " + where.string());
    return v;
}

struct Moments {
    double mean = 0.0;
    double stderr_ = 0.0;
};

Moments moments(const std::vector<double>& v)
{
    const double n = static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += x;
    const double mean = s / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

QuantumEnsemble summarize(const std::vector<std::unique_ptr<ObservableSeries>>& series)
{
    QuantumEnsemble e;
    e.members = series.size();
    for (std::size_t i = 0; i < series.front()->size(); ++i) {
        std::vector<double> x, p, v;
        for (const auto& s : series) {
            x.push_back(s->mean_x[i]);
            p.push_back(s->mean_p[i]);
        }
        const auto mx = moments(x);
        for (const auto& s : series) v.push_back(s->var_x[i] + (s->mean_x[i] - mx.mean) * (s->mean_x[i] - mx.mean));
        const auto mp = moments(p), mv = moments(v);
        e.times.push_back(series.front()->t[i]);
        e.mean_x.push_back(mx.mean);
        e.stderr_x.push_back(mx.stderr_);
        e.mean_p.push_back(mp.mean);
        e.stderr_p.push_back(mp.stderr_);
        e.var_x.push_back(mv.mean);
        e.stderr_var_x.push_back(mv.stderr_);
    }
    return e;
}

void write_text(const fs::path& p, const std::string& text)
{
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + p.string() + "'");
    out << text;
}

void write_error_json(const fs::path& dir, const std::string& code, const std::string& message, int status)
{
    try {
        fs::create_directories(dir);
        nlohmann::json j{{"code", code}, {"message", message}, {"exit_status", status}};
        write_text(dir / "error.json", j.dump(2) + "\n");
    } catch (...) {
        // The error is still reported on stderr by the caller.
    }
}

int report(const fs::path& dir, const std::string& code, const std::string& message, int status)
{
    std::cerr << "error [" << code << "]: " << message << "\n";
    write_error_json(dir, code, message, status);
    return status;
}

int exit_status(ErrorCode c)
{
    if (c == ErrorCode::NumericalBlowup) return kExitNumerical;
    if (c == ErrorCode::ConfigError) return kExitConfig;
    return kExitOther;
}

std::uint64_t trajectory_seed(std::uint64_t master) { return derive_seed(master, 0x7472616aULL); }

void write_trajectories(const fs::path& path, const TrajectoryEnsemble& tr, const OutputHeader& h)
{
    File out(path);
    put_header(out.f, h);
    std::fprintf(out.f, "t");
    for (std::size_t k = 0; k < tr.positions.size(); ++k) std::fprintf(out.f, ",x_%zu", k + 1);
    std::fprintf(out.f, "\n");
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        std::fprintf(out.f, "%.17g", tr.times[i]);
        for (const auto& p : tr.positions) std::fprintf(out.f, ",%.17g", p[i]);
        std::fprintf(out.f, "\n");
    }
}

void write_weak_values(const fs::path& path, const Snapshot& s, const PhysicalParams& params, const OutputHeader& h)
{
    const auto wv = weak_value(polar_decompose(s.psi, params), params);
    File out(path);
    put_header(out.f, h);
    std::fprintf(out.f, "# step=%zu t=%.17g\nx,re_p,im_p\n", s.step, s.t);
    const Grid& g = s.psi.grid();
    for (std::size_t j = 0; j < g.size(); ++j) {
        if (wv.node_mask[j]) std::fprintf(out.f, "%.17g,,\n", g.x(j));
        else std::fprintf(out.f, "%.17g,%.17g,%.17g\n", g.x(j), wv.real_part[j], wv.imag_part[j]);
    }
}

void bohmian_outputs(const ExperimentSpec& spec, const std::vector<Snapshot>& snaps, const fs::path& dir,
                     const OutputHeader& h, bool trajectories, bool weak_values)
{
    if (snaps.empty()) throw Error(ErrorCode::InsufficientData, "no snapshots available for post-processing");
    const auto& params = spec.sim.params;
    if (trajectories) {
        const auto tr = propagate_trajectories(snaps, spec.n_trajectories, trajectory_seed(spec.sim.seed), params,
                                               spec.trajectory_substeps);
        write_trajectories(dir / "trajectories.csv", tr, h);
    }
    if (weak_values)
        for (const auto& s : snaps) write_weak_values(dir / ("weak_values_" + std::to_string(s.step) + ".csv"), s, params, h);
}

void write_gup_report(const fs::path& path, const ExperimentSpec& spec, const WaveFunction& psi, const OutputHeader& h)
{
    const auto d = gup_discrepancy(psi, spec.sim.potential, spec.gup_alpha, spec.sim.params);
    File out(path);
    put_header(out.f, h);
    std::fprintf(out.f, "# gup_alpha=%.17g max_abs_diff=%.17g rms_diff=%.17g generic_scale=%.17g\n", spec.gup_alpha,
                 d.max_abs_diff, d.rms_diff, d.generic_scale);
    std::fprintf(out.f, "x,closed_form,generic\n");
    const Grid& g = psi.grid();
    for (std::size_t j = 0; j < g.size(); ++j)
        std::fprintf(out.f, "%.17g,%.17g,%.17g\n", g.x(j), d.closed_form[j], d.generic[j]);
}

void write_classical(const fs::path& path, const ClassicalEnsemble& e, const OutputHeader& h)
{
    File out(path);
    put_header(out.f, h);
    std::fprintf(out.f, "t,mean_x,stderr_x,mean_p,stderr_p,var_x,var_p\n");
    for (std::size_t i = 0; i < e.times.size(); ++i) {
        put_num(out.f, e.times[i]);
        put_num(out.f, e.mean_x[i]);
        put_num(out.f, e.stderr_x[i]);
        put_num(out.f, e.mean_p[i]);
        put_num(out.f, e.stderr_p[i]);
        put_num(out.f, e.var_x[i]);
        put_num(out.f, e.var_p[i], true);
    }
}

void write_quantum_ensemble(const fs::path& path, const QuantumEnsemble& e, const OutputHeader& h)
{
    File out(path);
    put_header(out.f, h);
    std::fprintf(out.f, "# members=%zu\nt,mean_x,stderr_x,mean_p,stderr_p,var_x,stderr_var_x\n", e.members);
    for (std::size_t i = 0; i < e.times.size(); ++i) {
        put_num(out.f, e.times[i]);
        put_num(out.f, e.mean_x[i]);
        put_num(out.f, e.stderr_x[i]);
        put_num(out.f, e.mean_p[i]);
        put_num(out.f, e.stderr_p[i]);
        put_num(out.f, e.var_x[i]);
        put_num(out.f, e.stderr_var_x[i], true);
    }
}

void write_comparison(const fs::path& path, const Comparison& c, const OutputHeader& h)
{
    File out(path);
    put_header(out.f, h);
    std::fprintf(out.f, "# score=%.17g fraction_x_within_3=%.17g\n", c.score, c.fraction_x_within_3);
    std::fprintf(out.f, "t,q_mean_x,q_stderr_x,c_mean_x,c_stderr_x,z_x,q_mean_p,q_stderr_p,c_mean_p,c_stderr_p,z_p,"
                        "q_var_x,c_var_x,z_var_x\n");
    for (const auto& r : c.rows) {
        for (double v : {r.t, r.q_mean_x, r.q_stderr_x, r.c_mean_x, r.c_stderr_x, r.z_x, r.q_mean_p, r.q_stderr_p,
                         r.c_mean_p, r.c_stderr_p, r.z_p, r.q_var_x, r.c_var_x})
            put_num(out.f, v);
        put_num(out.f, r.z_var_x, true);
    }
}

SimConfig resolved_sim(const ExperimentSpec& spec)
{
    SimConfig sim = spec.sim;
    if (!spec.initial_file.empty())
        sim.initial = ExplicitState{read_wavefunction_csv(spec.initial_file, sim.grid)};
    return sim;
}

void run_gsle(const ExperimentSpec& spec, const fs::path& dir, const OutputHeader& h)
{
    SimConfig sim = resolved_sim(spec);
    if (spec.ensemble_seeds == 1) {
        const auto rec = run(sim);
        if (spec.emit.observables) write_observables_csv(dir / "observables.csv", rec, h);
        if (spec.emit.snapshots) {
            fs::create_directories(dir / "snapshots");
            for (const auto& s : rec.snapshots)
                write_snapshot_csv(dir / "snapshots" / ("psi_" + std::to_string(s.step) + ".csv"), s, h);
        }
        if (spec.emit.noise) {
            File out(dir / "noise.csv");
            put_header(out.f, h);
            std::fprintf(out.f, "t,xi\n");
            for (std::size_t i = 0; i < rec.noise.size(); ++i) {
                put_num(out.f, rec.noise.times[i]);
                put_num(out.f, rec.noise.values[i], true);
            }
        }
        if (!rec.warnings.empty()) {
            std::string text;
            for (const auto& w : rec.warnings) text += w + "\n";
            write_text(dir / "warnings.txt", text);
            for (const auto& w : rec.warnings) std::cerr << "warning: " << w << "\n";
        }
        if (spec.emit.trajectories || spec.emit.weak_values)
            bohmian_outputs(spec, rec.snapshots, dir, h, spec.emit.trajectories, spec.emit.weak_values);
        if (spec.coupling.kind == CouplingSpec::Kind::gup) {
            const WaveFunction psi = rec.snapshots.empty() ? initial_wavefunction(sim) : rec.snapshots.back().psi;
            write_gup_report(dir / "gup_discrepancy.csv", spec, psi, h);
        }
        return;
    }

    // Seed ensemble: one directory per member plus a merged summary.
    sim.snapshot_stride = 0;
    std::vector<std::unique_ptr<ObservableSeries>> series(spec.ensemble_seeds);
    parallel_for(spec.ensemble_seeds, spec.workers, [&](std::size_t k) {
        SimConfig member = sim;
        member.seed = derive_seed(sim.seed, k);
        auto rec = run(member);
        const fs::path md = dir / ("member_" + std::to_string(k));
        fs::create_directories(md);
        if (spec.emit.observables) write_observables_csv(md / "observables.csv", rec, {member.seed, h.digest});
        series[k] = std::make_unique<ObservableSeries>(std::move(rec.series));
    });
    const auto e = summarize(series);
    write_quantum_ensemble(dir / "ensemble_observables.csv", e, h);
}

int run_post(const ExperimentSpec& spec, const fs::path& run_dir, const fs::path& out_dir, const OutputHeader& h)
{
    const fs::path sd = run_dir / "snapshots";
    if (!fs::is_directory(sd)) throw Error(ErrorCode::InsufficientData, "no snapshots directory in '" + run_dir.string() + "'");
    std::vector<Snapshot> snaps;
    static const std::regex name(R"(psi_(\d+)\.csv)");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(sd))
        if (std::regex_match(entry.path().filename().string(), name)) files.push_back(entry.path());
    for (const auto& f : files) snaps.push_back(read_snapshot_csv(f, spec.sim.grid));
    std::sort(snaps.begin(), snaps.end(), [](const Snapshot& a, const Snapshot& b) { return a.step < b.step; });
    fs::create_directories(out_dir);
    bohmian_outputs(spec, snaps, out_dir, h, true, true);
    return kExitOk;
}

} // namespace

std::uint64_t classical_seed(std::uint64_t master) { return derive_seed(master, 0x636c617373ULL); }

QuantumEnsemble gsle_ensemble(const SimConfig& config, std::size_t n_seeds, std::uint64_t master, unsigned workers)
{
    if (n_seeds < 1) throw Error(ErrorCode::InvalidParams, "ensemble needs at least one seed");
    SimConfig base = config;
    base.snapshot_stride = 0;
    std::vector<std::unique_ptr<ObservableSeries>> series(n_seeds);
    parallel_for(n_seeds, workers, [&](std::size_t k) {
        SimConfig member = base;
        member.seed = derive_seed(master, k);
        series[k] = std::make_unique<ObservableSeries>(run(member).series);
    });
    return summarize(series);
}

Comparison compare_ensembles(const QuantumEnsemble& q, const ClassicalEnsemble& c)
{
    if (q.times.size() != c.times.size())
        throw Error(ErrorCode::InvalidParams, "quantum and classical ensembles have different time axes");
    Comparison out;
    std::size_t within = 0;
    auto z = [](double a, double b, double sa, double sb) {
        const double s = std::sqrt(sa * sa + sb * sb);
        const double d = a - b;
        if (s > 0.0) return d / s;
        return d == 0.0 ? 0.0 : std::copysign(INFINITY, d);
    };
    for (std::size_t i = 0; i < q.times.size(); ++i) {
        ComparisonRow r;
        r.t = q.times[i];
        r.q_mean_x = q.mean_x[i];
        r.q_stderr_x = q.stderr_x[i];
        r.c_mean_x = c.mean_x[i];
        r.c_stderr_x = c.stderr_x[i];
        r.z_x = z(r.q_mean_x, r.c_mean_x, r.q_stderr_x, r.c_stderr_x);
        r.q_mean_p = q.mean_p[i];
        r.q_stderr_p = q.stderr_p[i];
        r.c_mean_p = c.mean_p[i];
        r.c_stderr_p = c.stderr_p[i];
        r.z_p = z(r.q_mean_p, r.c_mean_p, r.q_stderr_p, r.c_stderr_p);
        r.q_var_x = q.var_x[i];
        r.c_var_x = c.var_x[i];
        // Standard error of a Gaussian sample variance, sigma^2 sqrt(2/(n-1)).
        const double n_cl = static_cast<double>(c.n_particles);
        const double se_cv = n_cl > 1.0 ? c.var_x[i] * std::sqrt(2.0 / (n_cl - 1.0)) : 0.0;
        r.z_var_x = z(r.q_var_x, r.c_var_x, q.stderr_var_x[i], se_cv);
        out.score = std::max({out.score, std::abs(r.z_x), std::abs(r.z_p)});
        if (std::abs(r.z_x) < 3.0) ++within;
        out.rows.push_back(r);
    }
    out.fraction_x_within_3 = out.rows.empty() ? 0.0 : static_cast<double>(within) / static_cast<double>(out.rows.size());
    return out;
}

void write_observables_csv(const fs::path& path, const RunRecord& record, const OutputHeader& header)
{
    File out(path);
    put_header(out.f, header);
    std::fprintf(out.f, "t,norm,mean_x,mean_p,var_x,energy,W,xi\n");
    const auto& s = record.series;
    for (std::size_t i = 0; i < s.size(); ++i) {
        put_num(out.f, s.t[i]);
        put_num(out.f, s.norm[i]);
        put_num(out.f, s.mean_x[i]);
        put_num(out.f, s.mean_p[i]);
        put_num(out.f, s.var_x[i]);
        put_num(out.f, s.energy[i]);
        put_num(out.f, s.w[i]);
        put_num(out.f, s.xi[i], true);
    }
}

void write_snapshot_csv(const fs::path& path, const Snapshot& snapshot, const OutputHeader& header)
{
    File out(path);
    put_header(out.f, header);
    const Grid& g = snapshot.psi.grid();
    std::fprintf(out.f, "# grid x_min=%.17g x_max=%.17g points=%zu step=%zu t=%.17g\n", g.x_min(), g.x_max(), g.size(),
                 snapshot.step, snapshot.t);
    std::fprintf(out.f, "x,re,im\n");
    for (std::size_t j = 0; j < g.size(); ++j)
        std::fprintf(out.f, "%.17g,%.17g,%.17g\n", g.x(j), snapshot.psi[j].real(), snapshot.psi[j].imag());
}

std::vector<Complex> read_wavefunction_csv(const fs::path& path, const Grid& grid)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read '" + path.string() + "'");
    std::vector<Complex> v;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 'x') continue;
        const auto cells = split_csv(line);
        if (cells.size() < 3) throw Error(ErrorCode::IoError, "expected x,re,im columns in " + path.string());
        v.emplace_back(to_double(cells[1], path), to_double(cells[2], path));
    }
    if (v.size() != grid.size())
        throw Error(ErrorCode::InvalidField, "wavefunction file " + path.string() + " has " + std::to_string(v.size()) +
                                                 " rows, grid has " + std::to_string(grid.size()));
    return v;
}

Snapshot read_snapshot_csv(const fs::path& path, const Grid& grid)
{
    Snapshot s{0, 0.0, WaveFunction(grid, read_wavefunction_csv(path, grid))};
    std::ifstream in(path);
    std::string line;
    static const std::regex meta(R"(step=(\d+) t=(\S+))");
    while (std::getline(in, line) && !line.empty() && line[0] == '#') {
        std::smatch m;
        if (std::regex_search(line, m, meta)) {
            s.step = std::stoull(m[1]);
            s.t = to_double(m[2], path);
        }
    }
    return s;
}

int run_experiment(const ExperimentSpec& spec)
{
    const fs::path dir = spec.output_dir;
    try {
        fs::create_directories(dir);
        const OutputHeader h{spec.sim.seed, config_digest(spec)};
        const std::string text = to_config_text(spec);
        write_text(dir / "resolved_config.txt", "# seed=" + std::to_string(spec.sim.seed) + " config_digest=" + h.digest +
                                                    (spec.sim.sign == DampingSign::paper
                                                         ? "\n# note: sign = paper uses the literal minus sign of the "
                                                           "friction functional, which anti-damps\n"
                                                         : "\n") +
                                                    text);
        fs::remove(dir / "error.json");
        switch (spec.mode) {
        case Mode::gsle:
            run_gsle(spec, dir, h);
            break;
        case Mode::classical: {
            const auto e = langevin_ensemble(spec.classical, classical_seed(spec.sim.seed), spec.workers);
            write_classical(dir / "classical.csv", e, h);
            break;
        }
        case Mode::compare: {
            const SimConfig sim = resolved_sim(spec);
            const auto q = gsle_ensemble(sim, spec.ensemble_seeds, sim.seed, spec.workers);
            const auto c = langevin_ensemble(spec.classical, classical_seed(spec.sim.seed), spec.workers);
            write_quantum_ensemble(dir / "ensemble_observables.csv", q, h);
            write_classical(dir / "classical.csv", c, h);
            const auto cmp = compare_ensembles(q, c);
            write_comparison(dir / "comparison.csv", cmp, h);
            std::printf("comparison score %.4g, fraction of times with |z_x| < 3: %.4f\n", cmp.score,
                        cmp.fraction_x_within_3);
            break;
        }
        case Mode::bohmian_post:
            run_post(spec, dir, dir, h);
            break;
        }
    } catch (const Error& e) {
        return report(dir, std::string(to_string(e.code())), e.what(), exit_status(e.code()));
    } catch (const std::exception& e) {
        return report(dir, "InternalError", e.what(), kExitOther);
    }
    return kExitOk;
}

int post_process(const fs::path& run_dir, std::optional<fs::path> out, std::optional<std::uint64_t> seed)
{
    const fs::path out_dir = out.value_or(run_dir);
    try {
        ExperimentSpec spec = load_config((run_dir / "resolved_config.txt").string());
        if (seed) spec.sim.seed = *seed;
        const OutputHeader h{spec.sim.seed, config_digest(spec)};
        return run_post(spec, run_dir, out_dir, h);
    } catch (const Error& e) {
        return report(out_dir, std::string(to_string(e.code())), e.what(), exit_status(e.code()));
    } catch (const std::exception& e) {
        return report(out_dir, "InternalError", e.what(), kExitOther);
    }
}

int run_config_file(const std::string& path, const CliOverrides& overrides, std::optional<Mode> force_mode)
{
    ExperimentSpec spec;
    try {
        spec = load_config(path);
    } catch (const Error& e) {
        return report(overrides.out.value_or("out"), std::string(to_string(e.code())), e.what(), exit_status(e.code()));
    }
    if (overrides.seed) spec.sim.seed = *overrides.seed;
    if (overrides.workers) spec.workers = std::max(1u, *overrides.workers);
    if (overrides.out) spec.output_dir = *overrides.out;
    if (force_mode) spec.mode = *force_mode;
    return run_experiment(spec);
}

} // namespace gsle
