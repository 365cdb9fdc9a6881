#include "sgk/lab.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace sgk;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

enum Exit { ok = 0, internal = 1, invalid = 2, diverged = 3, check_failed = 4 };

struct Options {
    std::string config, out = "sgk_out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 1;
    // tensors
    std::string family = "legendre";
    int modes = 8;
    // converge-k
    int reference_modes = -1, nodes = -1;
    std::vector<double> eps;
};

void write_text(const fs::path& p, const std::string& s)
{
    std::ofstream f(p, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write " + p.string());
    f << s;
}

void write_json(const fs::path& p, const ordered_json& j) { write_text(p, j.dump(2) + "\n"); }

void write_manifest(const fs::path& dir, const std::string& kind, const RunConfig& c,
                    const std::vector<std::string>& outputs)
{
    std::string head = "# experiment = " + kind + "\n# code_version = " + kVersion +
                       "\n# seed = " + std::to_string(c.seed) + "\n# outputs =";
    for (const auto& o : outputs)
        head += " " + o;
    write_text(dir / "manifest.resolved.toml", head + "\n\n" + c.to_toml());
}

ordered_json fit_json(const FitResult& f)
{
    return {{"rate", f.rate}, {"prefactor", f.prefactor}, {"r2", f.r2}, {"t0", f.t0}, {"t1", f.t1},
            {"samples", f.samples}};
}

ordered_json header(const std::string& kind, const RunConfig& c)
{
    return {{"experiment", kind},
            {"code_version", kVersion},
            {"seed", c.seed},
            {"model", model_kind_name(c.model)},
            {"alpha", c.alpha}};
}

int cmd_audit(const RunConfig& c, const fs::path& out)
{
    auto model = build_model(c, c.eps);
    AuditOptions ao;
    ao.samples = c.audit_samples;
    ao.f_samples = c.audit_f_samples;
    ao.seed = c.seed;
    auto items = audit_assumptions(*model, ao);
    ordered_json j = header("audit", c);
    j["items"] = ordered_json::array();
    bool all = true;
    for (const auto& it : items) {
        j["items"].push_back({{"assumption", it.assumption},
                              {"fitted_constant", it.fitted_constant},
                              {"tolerance", it.tolerance},
                              {"pass", it.pass},
                              {"detail", it.detail}});
        all = all && it.pass;
    }
    if (model->kind() == ModelKind::boltzmann_full) {
        auto h = h_theorem_check(*model, c.h_samples, c.seed);
        j["items"].push_back({{"assumption", "H-theorem: -sum Q(f,f) log f >= -1e-8"},
                              {"fitted_constant", h.min_production},
                              {"tolerance", -1e-8},
                              {"pass", h.pass},
                              {"detail", std::to_string(h.samples) + " random positive f"}});
        all = all && h.pass;
    }
    j["pass"] = all;
    write_json(out / "audit.json", j);
    write_json(out / "summary.json", j);
    write_manifest(out, "audit", c, {"audit.json", "summary.json"});
    for (const auto& it : j["items"])
        std::printf("%-4s %s  (%.6g)\n", it["pass"].get<bool>() ? "ok" : "FAIL",
                    it["assumption"].get<std::string>().c_str(), it["fitted_constant"].get<double>());
    return all ? ok : check_failed;
}

int cmd_simulate(const RunConfig& c, const fs::path& out)
{
    SimulationResult r = simulate(c, c.eps);
    r.traj.write_csv((out / "trajectory.csv").string());
    const auto& first = r.traj.records.front();
    const auto& last = r.traj.records.back();
    double min_f = 1e300;
    for (const auto& rec : r.traj.records)
        min_f = std::min(min_f, rec.min_f);
    ordered_json j = header("simulate", c);
    j["eps"] = c.eps;
    j["xi"] = c.xi_for(c.eps);
    j["modes"] = c.modes;
    j["t_final"] = last.t;
    j["fit_E_K"] = r.fit_ok ? fit_json(r.fit) : ordered_json(r.fit_error);
    j["micro_ratio_final"] = r.micro_ratio;
    j["E_K_initial"] = first.ek;
    j["E_K_final"] = last.ek;
    j["max_pi_G"] = r.traj.max_pi_g;
    j["min_f"] = min_f;
    j["warnings"] = r.traj.warnings;
    ordered_json checks = {{"pi_G_conserved", r.traj.max_pi_g <= 1e-8},
                           {"distribution_nonnegative", min_f >= 0.0},
                           {"energy_decreased", last.ek < first.ek || first.ek == 0.0}};
    bool all = true;
    for (auto& [k, v] : checks.items())
        all = all && v.get<bool>();
    j["checks"] = checks;
    j["pass"] = all;
    write_json(out / "summary.json", j);
    write_manifest(out, "simulate", c, {"trajectory.csv", "summary.json"});
    for (const auto& w : r.traj.warnings)
        std::fprintf(stderr, "warning: %s\n", w.c_str());
    if (r.fit_ok)
        std::printf("E_K decay rate %.6g (R^2 %.6f), micro ratio %.3e\n", r.fit.rate, r.fit.r2, r.micro_ratio);
    return all ? ok : check_failed;
}

int cmd_sweep(const RunConfig& c, const fs::path& out, const std::vector<double>& eps, int jobs)
{
    std::vector<std::string> dirs(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "cell_%02zu", i);
        dirs[i] = buf;
        fs::create_directories(out / dirs[i]);
    }
    auto s = sweep_eps(c, eps, jobs, [&](const SweepCell& cell) {
        std::fprintf(stderr, "eps = %g: %s\n", cell.eps, cell.ok ? "done" : cell.error.c_str());
    });
    std::FILE* fp = std::fopen((out / "sweep.csv").string().c_str(), "w");
    if (!fp)
        throw std::runtime_error("cannot write sweep.csv");
    std::fputs("eps,rate,prefactor,r2,t0,t1,micro_ratio,status\n", fp);
    ordered_json j = header("sweep-eps", c);
    j["cells"] = ordered_json::array();
    bool any_div = false;
    for (std::size_t i = 0; i < s.cells.size(); ++i) {
        const auto& cell = s.cells[i];
        const auto& f = cell.result.fit;
        std::string status = cell.ok ? "ok" : (cell.error.rfind("diverged", 0) == 0 ? "diverged" : "failed");
        any_div = any_div || status == "diverged";
        std::fprintf(fp, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%s\n", cell.eps, f.rate, f.prefactor, f.r2, f.t0,
                     f.t1, cell.result.micro_ratio, status.c_str());
        ordered_json cj = {{"eps", cell.eps}, {"dir", dirs[i]}, {"status", status}};
        if (cell.ok) {
            cj["fit_E_K"] = fit_json(f);
            cj["micro_ratio_final"] = cell.result.micro_ratio;
            cell.result.traj.write_csv((out / dirs[i] / "trajectory.csv").string());
            ordered_json sj = header("sweep-cell", c);
            sj["eps"] = cell.eps;
            sj["fit_E_K"] = fit_json(f);
            sj["micro_ratio_final"] = cell.result.micro_ratio;
            write_json(out / dirs[i] / "summary.json", sj);
        } else {
            cj["error"] = cell.error;
        }
        j["cells"].push_back(cj);
    }
    std::fclose(fp);
    j["law"] = s.law;
    j["spread"] = s.spread;
    j["scaling_pass"] = s.scaling_pass;
    if (c.alpha == 1)
        j["micro_ratio_ordered"] = s.micro_ordered;
    if (c.alpha == 0 && s.cells.size() == 2 && s.cells[0].ok && s.cells[1].ok) {
        double rr = s.cells[0].result.fit.rate / s.cells[1].result.fit.rate;
        double er = s.cells[0].eps / s.cells[1].eps;
        j["rate_ratio"] = rr;
        j["eps_ratio"] = er;
    }
    bool pass = s.scaling_pass && (c.alpha == 0 || s.micro_ordered);
    j["pass"] = pass;
    write_json(out / "summary.json", j);
    write_manifest(out, "sweep-eps", c, {"sweep.csv", "summary.json", "cell_*/trajectory.csv"});
    std::printf("spread %.4f (%s): %s\n", s.spread, s.law.c_str(), pass ? "pass" : "fail");
    if (any_div)
        return diverged;
    return pass ? ok : check_failed;
}

int cmd_converge(const RunConfig& c, const fs::path& out, int nodes, int kref, int jobs)
{
    auto s = converge_k(c, c.converge_modes, nodes, kref, jobs);
    std::FILE* fp = std::fopen((out / "converge.csv").string().c_str(), "w");
    if (!fp)
        throw std::runtime_error("cannot write converge.csv");
    std::fputs("K,err_total,err_RK,err_eK,fitted_rate\n", fp);
    ordered_json j = header("converge-k", c);
    j["nodes"] = nodes;
    j["rows"] = ordered_json::array();
    for (const auto& r : s.rows) {
        std::fprintf(fp, "%d,%.17g,%.17g,%.17g,%.17g\n", r.K, r.err_total, r.err_rk, r.err_ek,
                     r.fit_ok ? r.fit.rate : std::nan(""));
        j["rows"].push_back({{"K", r.K},
                             {"K_ref", r.K_ref},
                             {"err_total", r.err_total},
                             {"err_RK", r.err_rk},
                             {"err_eK", r.err_ek},
                             {"err_total_linf_z", r.err_total_linfz},
                             {"fitted_rate", r.fit_ok ? ordered_json(r.fit.rate) : ordered_json(nullptr)},
                             {"fit_r2", r.fit_ok ? ordered_json(r.fit.r2) : ordered_json(nullptr)},
                             {"R_K_label", r.report.label},
                             {"triangle_ok", r.triangle_ok}});
    }
    std::fclose(fp);
    j["monotone"] = s.monotone;
    j["ratio_last_first"] = s.ratio_last_first;
    j["pass"] = s.monotone;
    write_json(out / "summary.json", j);
    write_manifest(out, "converge-k", c, {"converge.csv", "summary.json"});
    for (const auto& r : s.rows)
        std::printf("K=%-3d total %.3e  R^K %.3e  e^K %.3e\n", r.K, r.err_total, r.err_rk, r.err_ek);
    return s.monotone ? ok : check_failed;
}

int cmd_tensors(const RunConfig& c, const fs::path& out)
{
    GpcBasis b(c.family, c.modes, c.quad_nodes);
    write_tensor_csvs(b, out.string());
    CouplingTensors T(b);
    auto gf = sup_norm_growth(b, c.modes);
    ordered_json j = {{"experiment", "tensors"},
                      {"code_version", kVersion},
                      {"family", family_name(c.family)},
                      {"modes", c.modes},
                      {"off_band", T.off_band()},
                      {"growth_exponent", gf.p},
                      {"nominal_growth", b.nominal_growth()}};
    write_json(out / "summary.json", j);
    write_manifest(out, "tensors", c, {"G.csv", "T0.csv", "T1.csv", "summary.json"});
    std::printf("%s K=%d: growth exponent %.4f\n", family_name(c.family).c_str(), c.modes, gf.p);
    return ok;
}

}

int main(int argc, char** argv)
{
    CLI::App app{"gPC stochastic-Galerkin kinetic lab"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--config", o.config, "TOML configuration file");
    app.add_option("--out", o.out, "output directory");
    auto* seed_opt = app.add_option("--seed", o.seed, "random seed (overrides [run] seed)");
    app.add_option("--jobs", o.jobs, "concurrent runs")->check(CLI::PositiveNumber);
    auto* audit = app.add_subcommand("audit", "check the collision-operator assumptions");
    auto* sim = app.add_subcommand("simulate", "integrate one gPC-SG run");
    auto* sweep = app.add_subcommand("sweep-eps", "decay rates across Knudsen numbers");
    sweep->add_option("--eps", o.eps, "eps values (overrides [sweep] eps)");
    auto* conv = app.add_subcommand("converge-k", "gPC error against a collocation reference");
    conv->add_option("--reference-modes", o.reference_modes, "K_ref for the R^K tail (0: min(4K, nodes))");
    conv->add_option("--nodes", o.nodes, "collocation nodes");
    auto* tens = app.add_subcommand("tensors", "dump the coupling tensors");
    tens->add_option("--family", o.family, "legendre or chebyshev");
    tens->add_option("--modes", o.modes, "number of modes K");
    for (auto* s : {audit, sim, sweep, conv, tens}) {
        s->add_option("--config", o.config, "TOML configuration file");
        s->add_option("--out", o.out, "output directory");
        s->add_option("--seed", o.seed, "random seed")->excludes(seed_opt);
        s->add_option("--jobs", o.jobs, "concurrent runs")->check(CLI::PositiveNumber);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? ok : invalid;
    }
    o.seed_set = seed_opt->count() > 0;
    for (auto* s : {audit, sim, sweep, conv, tens})
        if (s->get_option("--seed")->count() > 0)
            o.seed_set = true;

    try {
        RunConfig c = o.config.empty() ? RunConfig() : RunConfig::load(o.config);
        if (o.seed_set)
            c.seed = o.seed;
        if (tens->parsed()) {
            c.family = parse_family(o.family);
            if (o.modes < 1)
                throw ConfigError("--modes must be positive");
            c.modes = o.modes;
        }
        if (conv->parsed()) {
            if (o.nodes >= 0)
                c.converge_nodes = o.nodes;
            if (o.reference_modes >= 0)
                c.reference_modes = o.reference_modes;
        }
        if (sweep->parsed() && !o.eps.empty())
            c.sweep_eps = o.eps;
        c.validate();
        fs::path out(o.out);
        fs::create_directories(out);
        if (audit->parsed())
            return cmd_audit(c, out);
        if (sim->parsed())
            return cmd_simulate(c, out);
        if (sweep->parsed())
            return cmd_sweep(c, out, c.sweep_eps, o.jobs);
        if (conv->parsed())
            return cmd_converge(c, out, c.converge_nodes, c.reference_modes, o.jobs);
        return cmd_tensors(c, out);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return invalid;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return invalid;
    } catch (const DivergenceError& e) {
        std::fprintf(stderr, "divergence: %s\n", e.what());
        return diverged;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return internal;
    }
}
