#include "curvband/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "curvband/solver.hpp"

namespace curvband {

namespace fs = std::filesystem;

namespace {

std::string num(double v)
{
    return fmt::format("{:.17g}", v);
}

// CSV output that leaves a trailing error marker unless committed.
class CsvFile {
public:
    CsvFile(const fs::path& path, std::string_view header) : out_(path)
    {
        if (!out_) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
        out_ << header << '\n';
    }
    CsvFile(const CsvFile&) = delete;
    CsvFile& operator=(const CsvFile&) = delete;
    ~CsvFile()
    {
        if (!committed_) out_ << "# error: output incomplete\n";
    }

    void row(std::string_view line) { out_ << line << '\n'; }
    void commit()
    {
        out_.flush();
        if (!out_) throw std::runtime_error("CSV write failed");
        committed_ = true;
    }

private:
    std::ofstream out_;
    bool committed_ = false;
};

template <class Fn>
void parallel_for(std::size_t count, Fn&& fn)
{
    const unsigned workers = std::min<unsigned>(thread_budget(), static_cast<unsigned>(count));
    std::vector<std::exception_ptr> errors(count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct Context {
    const RunConfig& config;
    SurfaceProfile profile;
    VectorPotentialSpec field;
    RadialGrid grid;
    fs::path dir;
    std::string summary;
    std::vector<fs::path> files;

    void line(std::string_view key, const std::string& value) { summary += fmt::format("{} = {}\n", key, value); }
};

void report_operators(Context& ctx)
{
    const RunConfig& c = ctx.config;
    for (int m : c.m_list) {
        const TangentialOperator op = build_tangential(ctx.profile, ctx.field, m, ctx.grid, c.mode, c.charge_e);
        const HermiticityReport h = hermiticity_report(op);
        ctx.line(fmt::format("hermiticity.m{}.max_asymmetry", m), num(h.max_asymmetry));
        ctx.line(fmt::format("hermiticity.m{}.anti_hermitian_norm", m), num(h.anti_hermitian_norm));
        ctx.line(fmt::format("hermiticity.m{}.anti_hermitian_is_coupling", m),
                 h.anti_hermitian_is_coupling ? "true" : "false");
        for (const auto& w : op.warnings) ctx.line("warning", w);
    }
    // difference between the printed and the Laplace-Beltrami kinetic terms
    const int m0 = c.m_list.front();
    const auto a = build_tangential(ctx.profile, ctx.field, m0, ctx.grid, OperatorMode::as_written, c.charge_e);
    const auto b =
        build_tangential(ctx.profile, ctx.field, m0, ctx.grid, OperatorMode::hermitian_corrected, c.charge_e);
    double discrepancy = (a.matrix.diag - b.matrix.diag).cwiseAbs().maxCoeff();
    discrepancy = std::max(discrepancy, (a.matrix.upper - b.matrix.upper).cwiseAbs().maxCoeff());
    discrepancy = std::max(discrepancy, (a.matrix.lower - b.matrix.lower).cwiseAbs().maxCoeff());
    ctx.line("mode_discrepancy.max_entry", num(discrepancy));

    const DecouplingReport d = decoupling_check(c.omega, ctx.field, ctx.profile, ctx.grid);
    ctx.line("decoupling.omega", num(d.omega));
    ctx.line("decoupling.ratio", num(d.ratio));
    ctx.line("decoupling.pass", d.pass ? "true" : "false");
}

void run_geometry(Context& ctx)
{
    const fs::path path = ctx.dir / "geometry.csv";
    CsvFile csv(path, "rho,Z,H,K,Hsq_minus_K,F_at_q0");
    ctx.files.push_back(path);
    for (double rho : ctx.grid.nodes()) {
        const GeometrySample g = eval_geometry(ctx.profile, rho);
        csv.row(fmt::format("{},{},{},{},{},{}", num(rho), num(g.Z), num(g.H), num(g.K),
                            num(g.H * g.H - g.K), num(g.F(0.0))));
    }
    csv.commit();
}

void run_gauge(Context& ctx)
{
    const GaugeReport r = is_coulomb_gauge(ctx.field, ctx.profile, ctx.grid, ctx.config.gauge_tol);
    const fs::path path = ctx.dir / "gauge.csv";
    CsvFile csv(path, "rho,divergence");
    ctx.files.push_back(path);
    for (std::size_t j = 0; j < r.divergence.size(); ++j)
        csv.row(fmt::format("{},{}", num(ctx.grid.node(j)), num(r.divergence[j])));
    if (!r.error.empty()) throw std::runtime_error("gauge check failed: " + r.error);
    csv.commit();
    ctx.line("gauge.pass", r.pass ? "true" : "false");
    ctx.line("gauge.tolerance", num(ctx.config.gauge_tol));
    ctx.line("gauge.max_violation", num(r.max_violation));
    ctx.line("gauge.rho_at_max", num(r.rho_at_max));
}

void run_spectrum(Context& ctx)
{
    const RunConfig& c = ctx.config;
    std::vector<Spectrum> spectra(c.m_list.size());
    parallel_for(c.m_list.size(), [&](std::size_t i) {
        const auto op = build_tangential(ctx.profile, ctx.field, c.m_list[i], ctx.grid, c.mode, c.charge_e);
        spectra[i] = eigen_solve(op, c.k_eigen);
    });

    for (const Spectrum& s : spectra) {
        const fs::path path = ctx.dir / fmt::format("spectrum_m{}.csv", s.m);
        CsvFile csv(path, "m,index,re_E,im_E,residual");
        ctx.files.push_back(path);
        for (std::size_t i = 0; i < s.eigenvalues.size(); ++i)
            csv.row(fmt::format("{},{},{},{},{}", s.m, i, num(s.eigenvalues[i].real()),
                                num(s.eigenvalues[i].imag()), num(s.residuals[i])));
        csv.commit();

        const std::pair<std::size_t, int> ground{0, c.n_normal};
        const auto total = total_energy(s, c.omega, std::span(&ground, 1));
        ctx.line(fmt::format("spectrum.m{}.method", s.m), std::string{to_string(s.method)});
        ctx.line(fmt::format("spectrum.m{}.ground", s.m),
                 fmt::format("{} {:+}i", num(s.eigenvalues[0].real()), s.eigenvalues[0].imag()));
        ctx.line(fmt::format("spectrum.m{}.ground_plus_normal_n{}", s.m, c.n_normal),
                 fmt::format("{} {:+}i", num(total[0].total.real()), total[0].total.imag()));
    }
}

void run_evolve(Context& ctx)
{
    const RunConfig& c = ctx.config;
    const int m = c.m_list.front();
    const auto op = build_tangential(ctx.profile, ctx.field, m, ctx.grid, c.mode, c.charge_e);
    const auto herm = hermitian_part(op);
    const CVector initial = eigen_solve(herm, 1).eigenvectors.col(0);
    const EvolutionTrace trace = evolve(op, initial, c.dt, c.steps, 0);

    const fs::path path = ctx.dir / "trace.csv";
    CsvFile csv(path, "t,norm,log_norm");
    ctx.files.push_back(path);
    for (std::size_t i = 0; i < trace.times.size(); ++i)
        csv.row(fmt::format("{},{},{}", num(trace.times[i]), num(trace.norms[i]), num(std::log(trace.norms[i]))));
    csv.commit();

    double mean_coupling = 0.0;
    for (double v : trace.weighted_coupling) mean_coupling += v;
    mean_coupling /= static_cast<double>(trace.weighted_coupling.size());

    const double slope = trace.log_norm_slope;
    ctx.line("evolve.m", std::to_string(m));
    ctx.line("evolve.log_norm_slope", num(slope));
    ctx.line("evolve.norm_ratio", num(trace.norms.back() / trace.norms.front()));
    ctx.line("evolve.mean_weighted_coupling", num(mean_coupling));
    ctx.line("evolve.behavior", std::abs(slope) < 1e-9 ? "conserved" : slope > 0.0 ? "growth" : "decay");
    for (const auto& w : trace.warnings) ctx.line("warning", w);
}

}  // namespace

std::string_view to_string(Command command)
{
    switch (command) {
    case Command::geometry: return "geometry";
    case Command::gauge_check: return "gauge-check";
    case Command::spectrum: return "spectrum";
    case Command::evolve: return "evolve";
    }
    return "unknown";
}

Command parse_command(std::string_view text)
{
    for (Command c : {Command::geometry, Command::gauge_check, Command::spectrum, Command::evolve})
        if (to_string(c) == text) return c;
    throw std::invalid_argument(fmt::format("unknown command '{}'", text));
}

unsigned thread_budget()
{
    unsigned budget = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("CURVBAND_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) budget = static_cast<unsigned>(v);
    }
    return budget;
}

RunResult run_command(const RunConfig& config, Command command)
{
    RunResult result;
    const fs::path dir = config.output_path;
    std::string summary =
        fmt::format("# curvband run summary\ncommand = {}\nmode = {}\n", to_string(command), to_string(config.mode));
    summary += "[config]\n" + serialize(config) + "[results]\n";
    try {
        validate(config);
        fs::create_directories(dir);
        SurfaceProfile profile = make_profile(config);
        VectorPotentialSpec field = make_field(config, profile);
        Context ctx{config, profile, std::move(field), make_grid(config), dir, {}, {}};
        report_operators(ctx);
        switch (command) {
        case Command::geometry: run_geometry(ctx); break;
        case Command::gauge_check: run_gauge(ctx); break;
        case Command::spectrum: run_spectrum(ctx); break;
        case Command::evolve: run_evolve(ctx); break;
        }
        summary += ctx.summary;
        result.files = std::move(ctx.files);
    } catch (const std::exception& e) {
        result.exit_code = 1;
        result.error = e.what();
        summary += fmt::format("error = {}\n", e.what());
    }

    result.summary = summary;
    std::error_code ec;
    if (fs::is_directory(dir, ec)) {
        std::ofstream out(dir / "summary.txt");
        out << summary;
        if (out) result.files.push_back(dir / "summary.txt");
    }
    return result;
}

}  // namespace curvband
