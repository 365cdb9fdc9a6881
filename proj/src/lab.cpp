#include "sgk/lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace sgk {

const char* const kVersion = "0.1.0";

namespace {

const std::map<std::string, std::set<std::string>>& schema()
{
    static const std::map<std::string, std::set<std::string>> s = {
        {"model", {"kind", "alpha", "eps"}},
        {"kernel", {"gamma", "c_phi", "beta0", "a0", "xi", "a1", "m_sigma", "c_b", "c_b_star"}},
        {"grid", {"nx", "dv", "nv", "lv"}},
        {"gpc", {"family", "modes", "quad_nodes"}},
        {"stepper", {"dt", "scheme", "solver", "cfl", "t_final"}},
        {"diagnostics",
         {"record_every", "q", "s", "weight_A", "weight_alpha", "weight_b", "weight_a", "divergence_factor",
          "fit_drop"}},
        {"initial", {"delta", "z_profile", "noise"}},
        {"sweep", {"eps"}},
        {"converge", {"modes", "nodes", "reference_modes", "projected_data"}},
        {"audit", {"samples", "f_samples", "h_samples"}},
        {"run", {"seed"}},
    };
    return s;
}

std::string num(double x)
{
    char buf[40];
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    std::snprintf(buf, sizeof buf, "%.17g", x);
    std::string s = buf;
    if (s.find_first_of(".eEn") == std::string::npos)
        s += ".0";
    return s;
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

int as_int(const ConfigTable& t, const char* sec, const char* key, int def)
{
    long long v = t.integer(sec, key, def);
    if (v < -2147483647LL || v > 2147483647LL)
        throw ConfigError(std::string("[") + sec + "] " + key + ": out of range");
    return static_cast<int>(v);
}

template <typename F>
void wrap(const std::string& where, F&& f)
{
    try {
        f();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

}

RunConfig::RunConfig()
{
    diagnostics.record_every = 10;
}

RunConfig RunConfig::from_table(const ConfigTable& t)
{
    for (const auto& [sec, keys] : t.sections()) {
        auto s = schema().find(sec);
        if (s == schema().end())
            throw ConfigError(t.source() + ": unknown section [" + sec + "]");
        for (const auto& [key, e] : keys)
            if (!s->second.count(key))
                throw ConfigError(t.source() + ":" + std::to_string(e.line) + ": unknown key '" + key + "' in [" +
                                  sec + "]");
    }
    RunConfig c;
    wrap("[model] kind", [&] { c.model = parse_model_kind(t.string("model", "kind", model_kind_name(c.model))); });
    c.alpha = as_int(t, "model", "alpha", c.alpha);
    c.eps = t.number("model", "eps", c.eps);

    auto& k = c.kernel;
    k.gamma = t.number("kernel", "gamma", k.gamma);
    k.c_phi = t.number("kernel", "c_phi", k.c_phi);
    k.beta0 = t.number("kernel", "beta0", k.beta0);
    k.a0 = t.number("kernel", "a0", k.a0);
    k.xi = t.number("kernel", "xi", k.xi);
    k.a1 = t.number("kernel", "a1", k.a1);
    k.m_sigma = as_int(t, "kernel", "m_sigma", k.m_sigma);
    k.c_b = t.number("kernel", "c_b", k.c_b);
    k.c_b_star = t.number("kernel", "c_b_star", k.c_b_star);

    c.nx = as_int(t, "grid", "nx", c.nx);
    c.dv = as_int(t, "grid", "dv", c.dv);
    c.nv = as_int(t, "grid", "nv", c.nv);
    c.lv = t.number("grid", "lv", c.lv);

    wrap("[gpc] family", [&] { c.family = parse_family(t.string("gpc", "family", family_name(c.family))); });
    c.modes = as_int(t, "gpc", "modes", c.modes);
    c.quad_nodes = as_int(t, "gpc", "quad_nodes", c.quad_nodes);

    c.stepper.dt = t.number("stepper", "dt", c.stepper.dt);
    wrap("[stepper] scheme",
         [&] { c.stepper.scheme = parse_scheme(t.string("stepper", "scheme", scheme_name(c.stepper.scheme))); });
    wrap("[stepper] solver",
         [&] { c.stepper.solver = parse_solver(t.string("stepper", "solver", solver_name(c.stepper.solver))); });
    c.stepper.cfl = t.number("stepper", "cfl", c.stepper.cfl);
    c.t_final = t.number("stepper", "t_final", c.t_final);

    auto& d = c.diagnostics;
    d.record_every = as_int(t, "diagnostics", "record_every", d.record_every);
    d.q = t.number("diagnostics", "q", d.q);
    d.s = as_int(t, "diagnostics", "s", d.s);
    d.weights.A = t.number("diagnostics", "weight_A", d.weights.A);
    d.weights.alpha = t.number("diagnostics", "weight_alpha", d.weights.alpha);
    d.weights.b = t.number("diagnostics", "weight_b", d.weights.b);
    d.weights.a = t.number("diagnostics", "weight_a", d.weights.a);
    d.divergence_factor = t.number("diagnostics", "divergence_factor", d.divergence_factor);
    c.fit_drop = t.number("diagnostics", "fit_drop", c.fit_drop);

    c.initial.delta = t.number("initial", "delta", c.initial.delta);
    c.initial.z_profile = t.string("initial", "z_profile", c.initial.z_profile);
    c.initial.noise = t.number("initial", "noise", c.initial.noise);

    c.sweep_eps = t.array("sweep", "eps", c.sweep_eps);
    {
        std::vector<double> def(c.converge_modes.begin(), c.converge_modes.end());
        auto m = t.array("converge", "modes", def);
        c.converge_modes.clear();
        for (double x : m) {
            if (x != std::floor(x) || x < 1 || x > 1e6)
                throw ConfigError("[converge] modes: entries must be positive integers");
            c.converge_modes.push_back(static_cast<int>(x));
        }
    }
    c.converge_nodes = as_int(t, "converge", "nodes", c.converge_nodes);
    c.reference_modes = as_int(t, "converge", "reference_modes", c.reference_modes);
    c.projected_data = t.boolean("converge", "projected_data", c.projected_data);

    c.audit_samples = as_int(t, "audit", "samples", c.audit_samples);
    c.audit_f_samples = as_int(t, "audit", "f_samples", c.audit_f_samples);
    c.h_samples = as_int(t, "audit", "h_samples", c.h_samples);

    long long seed = t.integer("run", "seed", static_cast<long long>(c.seed));
    if (seed < 0)
        throw ConfigError("[run] seed: must be non-negative");
    c.seed = static_cast<std::uint64_t>(seed);
    c.validate();
    return c;
}

RunConfig RunConfig::load(const std::string& path)
{
    return from_table(ConfigTable::load(path));
}

void RunConfig::validate() const
{
    auto req = [](bool ok, const std::string& m) {
        if (!ok)
            throw ConfigError(m);
    };
    req(alpha == 0 || alpha == 1, "[model] alpha must be 0 or 1");
    req(eps > 0 && std::isfinite(eps), "[model] eps must be positive");
    req(!is_boltzmann(model) || dv == 2, "[grid] Boltzmann models need dv = 2");
    req(dv == 1 || dv == 2, "[grid] dv must be 1 or 2");
    req(nx >= 2 && (nx & (nx - 1)) == 0, "[grid] nx must be a power of two");
    req(nv >= 5, "[grid] nv must be at least 5");
    req(lv > 0, "[grid] lv must be positive");
    req(modes >= 1 && modes <= 64, "[gpc] modes must be in 1..64");
    req(quad_nodes == 0 || quad_nodes >= 2 * modes, "[gpc] quad_nodes must be 0 (auto) or at least 2 * modes");
    req(stepper.dt > 0 && std::isfinite(stepper.dt), "[stepper] dt must be positive");
    req(t_final > 0 && std::isfinite(t_final), "[stepper] t_final must be positive");
    req(stepper.cfl > 0, "[stepper] cfl must be positive");
    req(!(stepper.solver == CollisionSolver::bdf2 && stepper.scheme != Scheme::implicit),
        "[stepper] solver bdf2 requires scheme = \"implicit\"");
    req(diagnostics.record_every >= 1, "[diagnostics] record_every must be >= 1");
    req(diagnostics.q >= 0, "[diagnostics] q must be non-negative");
    req(diagnostics.s >= 0 && diagnostics.s <= 2, "[diagnostics] s must be 0, 1 or 2");
    req(diagnostics.divergence_factor > 1, "[diagnostics] divergence_factor must exceed 1");
    req(fit_drop >= 0 && fit_drop < 1, "[diagnostics] fit_drop must be in [0, 1)");
    req(initial.delta >= 0, "[initial] delta must be non-negative");
    req(initial.noise >= 0, "[initial] noise must be non-negative");
    req(initial.z_profile == "affine" || initial.z_profile == "exp" || initial.z_profile == "const",
        "[initial] z_profile must be affine, exp or const");
    for (double e : sweep_eps)
        req(e > 0 && std::isfinite(e), "[sweep] eps entries must be positive");
    for (int k : converge_modes)
        req(k >= 1 && 2 * k <= converge_nodes, "[converge] every K needs nodes >= 2K");
    req(reference_modes == 0 || reference_modes <= converge_nodes, "[converge] reference_modes exceeds nodes");
    req(audit_samples >= 10 && audit_f_samples >= 1 && h_samples >= 1, "[audit] sample counts too small");
    req(kernel.m_sigma >= 1, "[kernel] m_sigma must be positive");
    req(kernel.c_phi > 0, "[kernel] c_phi must be positive");
    req(kernel.beta0 > 0, "[kernel] beta0 must be positive");
    req(kernel.gamma >= 0 && kernel.gamma <= 1, "[kernel] gamma must be in [0, 1]");
}

std::string RunConfig::to_toml() const
{
    std::ostringstream o;
    o << "[model]\n";
    o << "kind = " << quoted(model_kind_name(model)) << "\n";
    o << "alpha = " << alpha << "\n";
    o << "eps = " << num(eps) << "\n\n";
    o << "[kernel]\n";
    o << "gamma = " << num(kernel.gamma) << "\n";
    o << "c_phi = " << num(kernel.c_phi) << "\n";
    o << "beta0 = " << num(kernel.beta0) << "\n";
    o << "a0 = " << num(kernel.a0) << "\n";
    o << "xi = " << num(kernel.xi) << "   # negative: 0.1 * eps\n";
    o << "a1 = " << num(kernel.a1) << "\n";
    o << "m_sigma = " << kernel.m_sigma << "\n";
    o << "c_b = " << num(kernel.c_b) << "\n";
    o << "c_b_star = " << num(kernel.c_b_star) << "\n\n";
    o << "[grid]\n";
    o << "nx = " << nx << "\n";
    o << "dv = " << dv << "\n";
    o << "nv = " << nv << "\n";
    o << "lv = " << num(lv) << "\n\n";
    o << "[gpc]\n";
    o << "family = " << quoted(family_name(family)) << "\n";
    o << "modes = " << modes << "\n";
    o << "quad_nodes = " << quad_nodes << "\n\n";
    o << "[stepper]\n";
    o << "dt = " << num(stepper.dt) << "\n";
    o << "scheme = " << quoted(scheme_name(stepper.scheme)) << "\n";
    o << "solver = " << quoted(solver_name(stepper.solver)) << "\n";
    o << "cfl = " << num(stepper.cfl) << "\n";
    o << "t_final = " << num(t_final) << "\n\n";
    o << "[diagnostics]\n";
    o << "record_every = " << diagnostics.record_every << "\n";
    o << "q = " << num(diagnostics.q) << "\n";
    o << "s = " << diagnostics.s << "\n";
    o << "weight_A = " << num(diagnostics.weights.A) << "\n";
    o << "weight_alpha = " << num(diagnostics.weights.alpha) << "\n";
    o << "weight_b = " << num(diagnostics.weights.b) << "\n";
    o << "weight_a = " << num(diagnostics.weights.a) << "\n";
    o << "divergence_factor = " << num(diagnostics.divergence_factor) << "\n";
    o << "fit_drop = " << num(fit_drop) << "\n\n";
    o << "[initial]\n";
    o << "delta = " << num(initial.delta) << "\n";
    o << "z_profile = " << quoted(initial.z_profile) << "\n";
    o << "noise = " << num(initial.noise) << "\n\n";
    o << "[sweep]\n";
    o << "eps = [";
    for (std::size_t i = 0; i < sweep_eps.size(); ++i)
        o << (i ? ", " : "") << num(sweep_eps[i]);
    o << "]\n\n";
    o << "[converge]\n";
    o << "modes = [";
    for (std::size_t i = 0; i < converge_modes.size(); ++i)
        o << (i ? ", " : "") << converge_modes[i];
    o << "]\n";
    o << "nodes = " << converge_nodes << "\n";
    o << "reference_modes = " << reference_modes << "\n";
    o << "projected_data = " << (projected_data ? "true" : "false") << "\n\n";
    o << "[audit]\n";
    o << "samples = " << audit_samples << "\n";
    o << "f_samples = " << audit_f_samples << "\n";
    o << "h_samples = " << h_samples << "\n\n";
    o << "[run]\n";
    o << "seed = " << seed << "\n";
    return o.str();
}

ModelPtr build_model(const RunConfig& c, double eps)
{
    KernelSpec k = c.kernel;
    k.xi = c.xi_for(eps);
    auto g = std::make_shared<PhaseGrid>(c.nx, c.dv, c.nv, c.lv);
    return std::make_shared<CollisionModel>(g, c.model, k);
}

std::shared_ptr<const GpcBasis> build_basis(const RunConfig& c, int K)
{
    return std::make_shared<GpcBasis>(c.family, K, c.quad_nodes > 0 ? std::max(c.quad_nodes, 2 * K) : 0);
}

namespace {

DiagnosticsSettings diag_for(const RunConfig& c)
{
    DiagnosticsSettings d = c.diagnostics;
    d.weights.q = d.q;
    d.weights.s = d.s;
    d.weights.gamma = c.kernel.gamma;
    return d;
}

InitialSpec initial_for(const RunConfig& c)
{
    InitialSpec s = c.initial;
    s.seed = c.seed;
    return s;
}

}

SimulationResult simulate(const RunConfig& c, double eps)
{
    SimulationResult r;
    r.eps = eps;
    auto model = build_model(c, eps);
    SgSystem sys(model, build_basis(c, c.modes), c.alpha, eps, c.stepper);
    GpcField h = initial_data(sys, initial_for(c));
    r.traj = run(sys, h, c.t_final, diag_for(c));
    std::vector<double> t, y;
    for (const auto& rec : r.traj.records) {
        t.push_back(rec.t);
        y.push_back(rec.ek);
    }
    try {
        r.fit = fit_decay(t, y, c.fit_drop);
        r.fit_ok = true;
    } catch (const std::invalid_argument& e) {
        r.fit_error = e.what();
    }
    const auto& last = r.traj.records.back();
    r.micro_ratio = last.l2 > 0 ? last.hperp_lambda / last.l2 : 0.0;
    return r;
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn)
{
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::mutex mu;
    int next = 0;
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w)
        pool.emplace_back([&] {
            for (;;) {
                int i;
                {
                    std::lock_guard<std::mutex> lk(mu);
                    i = next++;
                }
                if (i >= n)
                    return;
                fn(i);
            }
        });
    for (auto& th : pool)
        th.join();
}

SweepSummary sweep_eps(const RunConfig& c, const std::vector<double>& eps_list, int jobs,
                       const std::function<void(const SweepCell&)>& on_cell)
{
    if (eps_list.empty())
        throw ConfigError("sweep: empty eps list");
    for (double e : eps_list)
        if (!(e > 0))
            throw ConfigError("sweep: eps entries must be positive");
    SweepSummary s;
    s.alpha = c.alpha;
    s.cells.resize(eps_list.size());
    std::mutex cb;
    parallel_for(static_cast<int>(eps_list.size()), jobs, [&](int i) {
        SweepCell& cell = s.cells[i];
        cell.eps = eps_list[i];
        try {
            cell.result = simulate(c, cell.eps);
            cell.ok = cell.result.fit_ok;
            if (!cell.ok)
                cell.error = cell.result.fit_error;
        } catch (const DivergenceError& e) {
            cell.error = std::string("diverged: ") + e.what();
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
        if (on_cell) {
            std::lock_guard<std::mutex> lk(cb);
            on_cell(cell);
        }
    });
    std::vector<double> vals;
    bool all_ok = true;
    for (const auto& cell : s.cells) {
        if (!cell.ok || !(cell.result.fit.rate > 0)) {
            all_ok = false;
            continue;
        }
        vals.push_back(c.alpha == 1 ? cell.result.fit.rate : cell.result.fit.rate / cell.eps);
    }
    s.law = c.alpha == 1 ? "alpha=1: max/min fitted rate <= 1.25" : "alpha=0: max/min of rate/eps <= 1.25";
    if (!vals.empty()) {
        auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());
        s.spread = *mx / *mn;
    }
    s.scaling_pass = all_ok && !vals.empty() && s.spread <= 1.25;
    // ordering of the late micro ratio by decreasing eps
    std::vector<std::pair<double, double>> mr;
    for (const auto& cell : s.cells)
        if (cell.ok)
            mr.push_back({cell.eps, cell.result.micro_ratio});
    std::sort(mr.begin(), mr.end(), [](auto& a, auto& b) { return a.first > b.first; });
    s.micro_ordered = all_ok && mr.size() >= 2;
    for (std::size_t i = 1; i < mr.size(); ++i)
        if (!(mr[i].first < mr[i - 1].first && mr[i].second < mr[i - 1].second))
            s.micro_ordered = false;
    return s;
}

ConvergeSummary converge_k(const RunConfig& c, const std::vector<int>& Ks, int nodes, int k_ref, int jobs)
{
    if (Ks.empty())
        throw ConfigError("converge-k: empty K list");
    int kmax = *std::max_element(Ks.begin(), Ks.end());
    if (nodes < 2 * kmax)
        throw ConfigError("converge-k: nodes must be at least 2 * max K");
    if (k_ref > nodes)
        throw ConfigError("converge-k: reference modes exceed nodes");
    auto model = build_model(c, c.eps);
    CollocationRequest req;
    req.nodes = nodes;
    req.K = kmax;
    req.projected_data = c.projected_data;
    req.initial = initial_for(c);
    req.t_final = c.t_final;
    req.diagnostics = diag_for(c);
    req.jobs = jobs;
    CollocationSet set = collocation_solve(model, c.family, c.alpha, c.eps, c.stepper, req);

    ConvergeSummary out;
    out.rows.resize(Ks.size());
    std::vector<std::string> errors(Ks.size());
    parallel_for(static_cast<int>(Ks.size()), jobs, [&](int i) {
        try {
            int K = Ks[i];
            auto basis = build_basis(c, K);
            SgSystem sys(model, basis, c.alpha, c.eps, c.stepper);
            // P_K of the collocation data P_kmax g is P_K g, so e^K(0) = 0 either way
            GpcField h = initial_data(sys, req.initial);
            std::vector<GpcField> snaps;
            std::vector<double> times;
            run(sys, h, c.t_final, req.diagnostics, [&](double t, const GpcField& s) {
                snaps.push_back(s);
                times.push_back(t);
            });
            ConvergeRow& row = out.rows[i];
            row.K = K;
            row.K_ref = k_ref > 0 ? k_ref : std::min(4 * K, nodes);
            row.report = error_decomposition(snaps, times, set, row.K_ref, c.diagnostics.s);
            const auto& last = row.report.records.back();
            row.err_total = last.total;
            row.err_rk = last.rk;
            row.err_ek = last.ek;
            row.err_total_linfz = last.total_linfz;
            row.tail_truncated = row.report.tail_truncated;
            for (const auto& r : row.report.records)
                row.triangle_ok = row.triangle_ok && r.triangle_ok;
            try {
                std::vector<double> t, y;
                for (const auto& r : row.report.records) {
                    t.push_back(r.t);
                    y.push_back(r.total);
                }
                row.fit = fit_decay(t, y, c.fit_drop);
                row.fit_ok = true;
            } catch (const std::invalid_argument&) {
                row.fit_ok = false;
            }
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < Ks.size(); ++i)
        if (!errors[i].empty())
            throw std::runtime_error("converge-k: K = " + std::to_string(Ks[i]) + ": " + errors[i]);
    out.monotone = true;
    for (std::size_t i = 1; i < out.rows.size(); ++i)
        if (!(out.rows[i].K > out.rows[i - 1].K && out.rows[i].err_total < out.rows[i - 1].err_total))
            out.monotone = false;
    out.ratio_last_first = out.rows.front().err_total > 0 ? out.rows.back().err_total / out.rows.front().err_total : 0;
    return out;
}

HTheoremResult h_theorem_check(const CollisionModel& m, int samples, std::uint64_t seed)
{
    const auto& g = m.grid();
    const int n = g.nvel();
    HTheoremResult r;
    r.samples = samples;
    r.min_production = HUGE_VAL;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<double> f(n), q(n);
    for (int t = 0; t < samples; ++t) {
        for (int i = 0; i < n; ++i)
            f[i] = u(rng) * std::exp(-0.1 * g.speed2(i));
        double z = samples > 1 ? -1.0 + 2.0 * t / (samples - 1) : 0.0;
        m.apply_Q(f.data(), z, q.data());
        double prod = 0;
        for (int i = 0; i < n; ++i)
            prod -= g.w()[i] * q[i] * std::log(f[i]);
        r.min_production = std::min(r.min_production, prod);
    }
    r.pass = r.min_production >= -1e-8;
    return r;
}

void write_tensor_csvs(const GpcBasis& b, const std::string& dir)
{
    CouplingTensors T(b);
    const int K = b.modes();
    auto open = [&](const char* name) {
        std::string p = (std::filesystem::path(dir) / name).string();
        std::FILE* fp = std::fopen(p.c_str(), "w");
        if (!fp)
            throw std::runtime_error("cannot open " + p);
        return fp;
    };
    std::FILE* fg = open("G.csv");
    std::fputs("k,i,value\n", fg);
    for (int k = 1; k <= K; ++k)
        for (int i = 1; i <= K; ++i)
            std::fprintf(fg, "%d,%d,%.17g\n", k, i, T.G()(k - 1, i - 1));
    std::fclose(fg);
    for (int which = 0; which < 2; ++which) {
        std::FILE* ft = open(which == 0 ? "T0.csv" : "T1.csv");
        std::fputs("k,i,j,value\n", ft);
        for (int k = 1; k <= K; ++k)
            for (int i = 1; i <= K; ++i)
                for (int j = 1; j <= K; ++j)
                    std::fprintf(ft, "%d,%d,%d,%.17g\n", k, i, j, which == 0 ? T.T0(k, i, j) : T.T1(k, i, j));
        std::fclose(ft);
    }
}

}
