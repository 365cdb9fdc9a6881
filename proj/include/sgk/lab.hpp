#pragma once

#include "sgk/config.hpp"
#include "sgk/oracle.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace sgk {

extern const char* const kVersion;

struct RunConfig {
    // [model]
    ModelKind model = ModelKind::relaxation;
    int alpha = 1;
    double eps = 0.1;
    // [kernel]; xi < 0 means 0.1 * eps
    KernelSpec kernel{0.0, 1.0, 8.0, 0.0, -1.0, 0.0, 16, 0.0, 0.0};
    // [grid]
    int nx = 8, dv = 1, nv = 48;
    double lv = 8.0;
    // [gpc]
    Family family = Family::legendre;
    int modes = 8;
    int quad_nodes = 0;
    // [stepper]
    StepperSettings stepper{0.05, Scheme::implicit, CollisionSolver::bdf2, 0.5};
    double t_final = 50.0;
    // [diagnostics]
    DiagnosticsSettings diagnostics{};
    double fit_drop = 0.2;
    // [initial]
    InitialSpec initial{};
    // [sweep]
    std::vector<double> sweep_eps{1.0, 0.1, 0.01};
    // [converge]
    std::vector<int> converge_modes{2, 4, 6, 8};
    int converge_nodes = 32;
    int reference_modes = 0;   // 0: min(4K, nodes)
    bool projected_data = false;
    // [audit]
    int audit_samples = 1000;
    int audit_f_samples = 20;
    int h_samples = 50;
    // [run]
    std::uint64_t seed = 1;

    RunConfig();
    static RunConfig from_table(const ConfigTable& t);
    static RunConfig load(const std::string& path);
    void validate() const;
    double xi_for(double e) const { return kernel.xi < 0 ? 0.1 * e : kernel.xi; }
    std::string to_toml() const;
};

ModelPtr build_model(const RunConfig& c, double eps);
std::shared_ptr<const GpcBasis> build_basis(const RunConfig& c, int K);

struct SimulationResult {
    double eps = 0;
    Trajectory traj;
    FitResult fit;
    bool fit_ok = false;
    std::string fit_error;
    double micro_ratio = 0;   // |h_perp|_Lambda / |h|_L2 at the last record
};

// throws DivergenceError on blow-up
SimulationResult simulate(const RunConfig& c, double eps);

struct SweepCell {
    double eps = 0;
    bool ok = false;
    std::string error;
    SimulationResult result;
};

struct SweepSummary {
    int alpha = 1;
    std::vector<SweepCell> cells;
    double spread = 0;        // alpha=1: max/min rate; alpha=0: max/min of rate/eps
    bool scaling_pass = false;
    bool micro_ordered = false;   // late micro ratio strictly decreasing as eps decreases
    std::string law;
};

SweepSummary sweep_eps(const RunConfig& c, const std::vector<double>& eps_list, int jobs,
                       const std::function<void(const SweepCell&)>& on_cell = {});

struct ConvergeRow {
    int K = 0, K_ref = 0;
    double err_total = 0, err_rk = 0, err_ek = 0, err_total_linfz = 0;
    bool tail_truncated = false;
    bool triangle_ok = true;
    FitResult fit;
    bool fit_ok = false;
    ErrorReport report;
};

struct ConvergeSummary {
    std::vector<ConvergeRow> rows;
    bool monotone = false;
    double ratio_last_first = 0;
};

ConvergeSummary converge_k(const RunConfig& c, const std::vector<int>& Ks, int nodes, int k_ref, int jobs);

struct HTheoremResult {
    int samples = 0;
    double min_production = 0;   // min over samples of -sum w Q(f,f) log f
    bool pass = false;
};

HTheoremResult h_theorem_check(const CollisionModel& m, int samples, std::uint64_t seed);

void write_tensor_csvs(const GpcBasis& b, const std::string& dir);

// runs fn(i) for i in [0, n) on up to jobs threads
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

}
