#pragma once

#include "sgk/sg_solver.hpp"

#include <string>
#include <vector>

namespace sgk {

// Ordinary least squares of log y against t.
struct FitResult {
    double rate = 0;        // y ~ prefactor * exp(-rate t)
    double prefactor = 0;
    double r2 = 0;
    double t0 = 0, t1 = 0;  // fit window
    int samples = 0;
};

// Drops the first drop_fraction of the samples; needs >= 10 samples and y > 0 in the window.
FitResult fit_decay(const std::vector<double>& t, const std::vector<double>& y, double drop_fraction = 0.2);

struct CollocationRequest {
    int nodes = 32;
    int K = 4;                // gPC size the data is prepared for
    bool projected_data = true;   // initial profile P_K g(z) instead of g(z)
    InitialSpec initial;
    double t_final = 1.0;
    DiagnosticsSettings diagnostics;
    int jobs = 1;
};

struct CollocationSet {
    Family family = Family::legendre;
    std::vector<double> nodes, weights;
    std::vector<double> times;                      // record times (shared by all nodes)
    std::vector<std::vector<Field>> snapshots;      // [node][record]
    std::vector<Trajectory> trajectories;
    int requested_K = 0;

    // reference coefficients hhat_k(t_r), k = 1..kmax
    std::vector<Field> project(int record, const GpcBasis& basis) const;
};

CollocationSet collocation_solve(ModelPtr model, Family family, int alpha, double eps, const StepperSettings& st,
                                 const CollocationRequest& req);

struct ErrorRecord {
    double t = 0;
    double rk = 0;          // |R^K|, H^s_{x,v} L2_z
    double ek = 0;          // |e^K|
    double total = 0;       // |h^e|
    double total_linfz = 0; // max over the 257-point Chebyshev grid of |h^e(z)|_{H^s}
    double rk_linfz = 0;
    double ek_linfz = 0;
    bool triangle_ok = true;
};

struct ErrorReport {
    int K = 0, K_ref = 0;
    bool tail_truncated = false;   // K_ref <= K: R^K is 0 by construction
    std::string label;
    std::vector<ErrorRecord> records;
};

// gpc: snapshots of the gPC solution at the collocation record times.
ErrorReport error_decomposition(const std::vector<GpcField>& gpc, const std::vector<double>& times,
                                const CollocationSet& ref, int K_ref, int s = 1);

// log-linear fit of the total error series (same window policy as fit_decay).
FitResult decay_consistency(const ErrorReport& rep);

}
