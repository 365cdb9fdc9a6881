#include "sgk/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

namespace sgk {

FitResult fit_decay(const std::vector<double>& t, const std::vector<double>& y, double drop_fraction)
{
    if (t.size() != y.size())
        throw std::invalid_argument("fit: time and value series differ in length");
    if (t.size() < 10)
        throw std::invalid_argument("fit: need at least 10 samples");
    if (drop_fraction < 0 || drop_fraction >= 1)
        throw std::invalid_argument("fit: drop fraction outside [0, 1)");
    std::size_t start = static_cast<std::size_t>(std::floor(drop_fraction * static_cast<double>(t.size())));
    if (t.size() - start < 3)
        throw std::invalid_argument("fit: window too short");
    double mt = 0, my = 0;
    const double n = static_cast<double>(t.size() - start);
    std::vector<double> ly(t.size());
    for (std::size_t i = start; i < t.size(); ++i) {
        if (!(y[i] > 0) || !std::isfinite(y[i]))
            throw std::invalid_argument("fit: non-positive value in window");
        ly[i] = std::log(y[i]);
        mt += t[i];
        my += ly[i];
    }
    mt /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = start; i < t.size(); ++i) {
        double a = t[i] - mt, b = ly[i] - my;
        sxx += a * a;
        sxy += a * b;
        syy += b * b;
    }
    if (sxx == 0)
        throw std::invalid_argument("fit: window has a single time");
    FitResult r;
    double slope = sxy / sxx;
    r.rate = -slope;
    r.prefactor = std::exp(my - slope * mt);
    // constant (or exactly log-linear) series: residual is zero
    double ssr = 0;
    for (std::size_t i = start; i < t.size(); ++i) {
        double e = ly[i] - (my + slope * (t[i] - mt));
        ssr += e * e;
    }
    r.r2 = syy > 0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
    if (syy > 0 && ssr <= 1e-28 * std::max(1.0, syy))
        r.r2 = 1.0;
    r.t0 = t[start];
    r.t1 = t.back();
    r.samples = static_cast<int>(t.size() - start);
    return r;
}

std::vector<Field> CollocationSet::project(int record, const GpcBasis& basis) const
{
    if (basis.family() != family)
        throw std::invalid_argument("collocation: basis family differs from the collocation rule");
    const int K = basis.modes();
    const auto& proto = snapshots.front()[record];
    std::vector<Field> out(K, Field(proto.grid));
    std::vector<double> psi(K);
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        basis.psi_all(nodes[j], psi.data());
        const auto& h = snapshots[j][record];
        for (int k = 0; k < K; ++k) {
            double c = weights[j] * psi[k];
            for (std::size_t i = 0; i < h.data.size(); ++i)
                out[k].data[i] += c * h.data[i];
        }
    }
    return out;
}

CollocationSet collocation_solve(ModelPtr model, Family family, int alpha, double eps, const StepperSettings& st,
                                 const CollocationRequest& req)
{
    if (req.K < 1)
        throw std::invalid_argument("collocation: K must be positive");
    if (req.nodes < 2 * req.K)
        throw std::invalid_argument("collocation: need at least 2K nodes");
    CollocationSet set;
    set.family = family;
    set.requested_K = req.K;
    Quadrature q = gauss_rule(family, req.nodes);
    set.nodes = q.nodes;
    set.weights = q.weights;
    const int n = req.nodes;
    set.snapshots.resize(n);
    set.trajectories.resize(n);

    Field base = base_initial_field(model->grid_ptr(), model->null_space(), req.initial);
    GpcBasis bk(family, req.K);
    auto proj = project_to_basis(bk, [&](double z) { return z_profile_value(req.initial.z_profile, z); });

    std::vector<std::string> errors(n);
    auto solve_node = [&](int j) {
        double z = set.nodes[j];
        double scale;
        if (req.projected_data) {
            std::vector<double> psi(req.K);
            bk.psi_all(z, psi.data());
            scale = 0;
            for (int k = 0; k < req.K; ++k)
                scale += proj[k] * psi[k];
        } else {
            scale = z_profile_value(req.initial.z_profile, z);
        }
        Field h0 = base;
        for (auto& x : h0.data)
            x *= scale;
        std::vector<Field> snaps;
        RecordHook hook = [&](double, const GpcField& s) { snaps.push_back(s.modes[0]); };
        try {
            auto res = deterministic_run(model, z, alpha, eps, st, h0, req.t_final, req.diagnostics, hook);
            set.trajectories[j] = std::move(res.traj);
            set.snapshots[j] = std::move(snaps);
        } catch (const std::exception& e) {
            errors[j] = e.what();
        }
    };
    int jobs = std::max(1, std::min(req.jobs, n));
    if (jobs == 1) {
        for (int j = 0; j < n; ++j)
            solve_node(j);
    } else {
        std::mutex mu;
        int next = 0;
        std::vector<std::thread> pool;
        for (int w = 0; w < jobs; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    int j;
                    {
                        std::lock_guard<std::mutex> lk(mu);
                        j = next++;
                    }
                    if (j >= n)
                        return;
                    solve_node(j);
                }
            });
        for (auto& th : pool)
            th.join();
    }
    for (int j = 0; j < n; ++j)
        if (!errors[j].empty()) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "collocation node %d (z = %.6f) failed: ", j, set.nodes[j]);
            throw std::runtime_error(buf + errors[j]);
        }
    for (const auto& r : set.trajectories[0].records)
        set.times.push_back(r.t);
    return set;
}

ErrorReport error_decomposition(const std::vector<GpcField>& gpc, const std::vector<double>& times,
                                const CollocationSet& ref, int K_ref, int s)
{
    if (gpc.empty())
        throw std::invalid_argument("error decomposition: no gPC snapshots");
    if (gpc.size() != times.size() || times.size() != ref.times.size())
        throw std::invalid_argument("error decomposition: gPC and collocation records differ");
    for (std::size_t r = 0; r < times.size(); ++r)
        if (std::abs(times[r] - ref.times[r]) > 1e-9 * std::max(1.0, std::abs(times[r])))
            throw std::invalid_argument("error decomposition: record times differ");
    const GpcBasis& bK = *gpc.front().basis;
    const int K = bK.modes();
    if (bK.family() != ref.family)
        throw std::invalid_argument("error decomposition: basis family differs from the collocation rule");
    if (!gpc.front().grid().same_as(*ref.snapshots.front().front().grid))
        throw std::invalid_argument("error decomposition: phase grids differ");
    if (K_ref < K)
        throw std::invalid_argument("error decomposition: K_ref below K");
    if (K_ref > static_cast<int>(ref.nodes.size()))
        throw std::invalid_argument("error decomposition: K_ref exceeds the collocation node count");

    ErrorReport rep;
    rep.K = K;
    rep.K_ref = K_ref;
    rep.tail_truncated = K_ref <= K;
    rep.label = rep.tail_truncated ? "tail-truncated estimate (R^K = 0 by construction)"
                                   : "R^K estimated from modes K+1..K_ref of the collocation projection";
    auto bref = std::make_shared<GpcBasis>(bK.family(), K_ref);
    GridPtr g = gpc.front().modes[0].grid;
    for (std::size_t r = 0; r < times.size(); ++r) {
        auto hhat = ref.project(static_cast<int>(r), *bref);
        GpcField err(bref, g), tail(bref, g), num(bref, g);
        for (int k = 0; k < K_ref; ++k) {
            for (std::size_t i = 0; i < hhat[k].data.size(); ++i) {
                double e = hhat[k].data[i] - (k < K ? gpc[r].modes[k].data[i] : 0.0);
                err.modes[k].data[i] = e;
                if (k < K)
                    num.modes[k].data[i] = e;
                else
                    tail.modes[k].data[i] = e;
            }
        }
        ZNorms ze = z_norms(err, s), zt = z_norms(tail, s), zn = z_norms(num, s);
        ErrorRecord rec;
        rec.t = times[r];
        rec.total = ze.modal;
        rec.rk = zt.modal;
        rec.ek = zn.modal;
        rec.total_linfz = ze.linfz;
        rec.rk_linfz = zt.linfz;
        rec.ek_linfz = zn.linfz;
        double slack = 1e-12 * std::max(1.0, rec.total);
        rec.triangle_ok = rec.total <= rec.rk + rec.ek + slack &&
                          rec.total_linfz <= rec.rk_linfz + rec.ek_linfz + 1e-12 * std::max(1.0, rec.total_linfz);
        rep.records.push_back(rec);
    }
    return rep;
}

FitResult decay_consistency(const ErrorReport& rep)
{
    std::vector<double> t, y;
    for (const auto& r : rep.records) {
        t.push_back(r.t);
        y.push_back(r.total);
    }
    return fit_decay(t, y);
}

}
