#include "sgk/sg_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace sgk {

Scheme parse_scheme(const std::string& s)
{
    if (s == "strang")
        return Scheme::strang;
    if (s == "lie")
        return Scheme::lie;
    if (s == "implicit")
        return Scheme::implicit;
    throw std::invalid_argument("unknown scheme '" + s + "' (strang, lie, implicit)");
}

std::string scheme_name(Scheme s)
{
    return s == Scheme::strang ? "strang" : s == Scheme::lie ? "lie" : "implicit";
}

CollisionSolver parse_solver(const std::string& s)
{
    if (s == "implicit_euler")
        return CollisionSolver::implicit_euler;
    if (s == "crank_nicolson")
        return CollisionSolver::crank_nicolson;
    if (s == "bdf2")
        return CollisionSolver::bdf2;
    throw std::invalid_argument("unknown collision solver '" + s + "' (implicit_euler, crank_nicolson, bdf2)");
}

std::string solver_name(CollisionSolver s)
{
    return s == CollisionSolver::implicit_euler ? "implicit_euler"
           : s == CollisionSolver::crank_nicolson ? "crank_nicolson"
                                                  : "bdf2";
}

template <typename Scalar>
BlockTridiag<Scalar>::BlockTridiag(std::vector<Mat> diag, std::vector<Mat> lower, std::vector<Mat> upper)
{
    const int K = static_cast<int>(diag.size());
    coupled_ = false;
    for (int k = 0; k < K; ++k) {
        if (k > 0 && lower[k].size() && lower[k].cwiseAbs().maxCoeff() != 0.0)
            coupled_ = true;
        if (k + 1 < K && upper[k].size() && upper[k].cwiseAbs().maxCoeff() != 0.0)
            coupled_ = true;
    }
    lu_.reserve(K);
    if (!coupled_) {
        for (int k = 0; k < K; ++k)
            lu_.emplace_back(diag[k]);
        return;
    }
    m_.resize(K);
    upper_ = std::move(upper);
    lu_.emplace_back(diag[0]);
    for (int k = 1; k < K; ++k) {
        // M_k = A_k Dp_{k-1}^{-1}  via  Dp^T M^T = A^T
        Mat At = lower[k].transpose();
        Mat Mt = lu_[k - 1].transpose().solve(At);
        m_[k] = Mt.transpose();
        Mat dp = diag[k] - m_[k] * upper_[k - 1];
        lu_.emplace_back(dp);
    }
}

template <typename Scalar>
void BlockTridiag<Scalar>::solve(std::vector<Mat>& rhs) const
{
    const int K = blocks();
    if (!coupled_) {
        for (int k = 0; k < K; ++k)
            rhs[k] = lu_[k].solve(rhs[k]);
        return;
    }
    for (int k = 1; k < K; ++k)
        rhs[k] -= m_[k] * rhs[k - 1];
    rhs[K - 1] = lu_[K - 1].solve(rhs[K - 1]);
    for (int k = K - 2; k >= 0; --k) {
        Mat y = rhs[k] - upper_[k] * rhs[k + 1];
        rhs[k] = lu_[k].solve(y);
    }
}

template class BlockTridiag<double>;
template class BlockTridiag<std::complex<double>>;

SgSystem::SgSystem(ModelPtr model, std::shared_ptr<const GpcBasis> basis, int alpha, double eps,
                   StepperSettings st, std::optional<double> z_freeze)
    : model_(std::move(model)), basis_(std::move(basis)), alpha_(alpha), eps_(eps), st_(st), zf_(z_freeze)
{
    if (alpha != 0 && alpha != 1)
        throw std::invalid_argument("scaling alpha must be 0 or 1");
    if (!(eps > 0))
        throw std::invalid_argument("epsilon must be positive");
    if (!(st.dt > 0))
        throw std::invalid_argument("time step must be positive");
    if (st.solver == CollisionSolver::bdf2 && st.scheme != Scheme::implicit)
        throw std::invalid_argument("bdf2 is only available with the implicit scheme");
    if (zf_ && !(*zf_ >= -1.0 && *zf_ <= 1.0))
        throw std::invalid_argument("z outside [-1, 1]");
    tensors_ = std::make_shared<CouplingTensors>(*basis_);
    if (tensors_->off_band() > 1e-12)
        throw std::invalid_argument("coupling matrix S~ is not tridiagonal: the random kernel must be linear in z");
    const int K = basis_->modes();
    if (zf_) {
        l0e_ = model_->L0() + (*zf_) * model_->L1();
        gc_ = Eigen::MatrixXd::Zero(K, K);
    } else {
        l0e_ = model_->L0();
        gc_ = tensors_->G();
        for (int k = 0; k < K; ++k)
            for (int i = 0; i < K; ++i)
                if (std::abs(k - i) != 1)
                    gc_(k, i) = 0.0;
    }
}

Eigen::MatrixXd SgSystem::nu_ki(int iv) const
{
    const int K = basis_->modes();
    double n0 = model_->nu0()[iv], n1 = model_->nu1()[iv];
    if (zf_)
        n0 += *zf_ * n1;
    Eigen::MatrixXd m = n1 * gc_;
    m.diagonal().array() += n0;
    (void)K;
    return m;
}

double SgSystem::coupling_norm() const
{
    double l1 = model_->L1().cwiseAbs().maxCoeff();
    return gc_.cwiseAbs().maxCoeff() * l1;
}

void SgSystem::apply_linear(const GpcField& h, GpcField& out) const
{
    const int K = basis_->modes();
    const auto& g = h.grid();
    const int n = g.nvel(), nx = g.nx();
    std::vector<Eigen::MatrixXd> l1h(K);
    bool coupled = gc_.cwiseAbs().maxCoeff() != 0.0;
    if (coupled)
        for (int i = 0; i < K; ++i)
            l1h[i] = model_->L1() * Eigen::Map<const Eigen::MatrixXd>(h.modes[i].data.data(), n, nx);
    for (int k = 0; k < K; ++k) {
        Eigen::Map<const Eigen::MatrixXd> H(h.modes[k].data.data(), n, nx);
        Eigen::Map<Eigen::MatrixXd> O(out.modes[k].data.data(), n, nx);
        O.noalias() = l0e_ * H;
        if (coupled)
            for (int i = std::max(0, k - 1); i <= std::min(K - 1, k + 1); ++i)
                if (gc_(k, i) != 0.0)
                    O += gc_(k, i) * l1h[i];
    }
}

void SgSystem::nonlinear(const GpcField& h, GpcField& out) const
{
    const int K = basis_->modes();
    for (auto& m : out.modes)
        std::fill(m.data.begin(), m.data.end(), 0.0);
    if (!model_->nonlinear())
        return;
    const auto& g = h.grid();
    const int n = g.nvel(), nx = g.nx();
    const auto& T = *tensors_;
    std::vector<double> f0(n), f1(n);
    for (int i = 1; i <= K; ++i)
        for (int j = i; j <= K; ++j) {
            double mult = (i == j) ? 1.0 : 2.0;
            bool any = false;
            for (int k = 1; k <= K; ++k)
                if (T.T0(k, i, j) != 0.0 || (!zf_ && T.T1(k, i, j) != 0.0))
                    any = true;
            if (!any)
                continue;
            for (int ix = 0; ix < nx; ++ix) {
                const double* hi = h.modes[i - 1].row(ix);
                const double* hj = h.modes[j - 1].row(ix);
                std::fill(f0.begin(), f0.end(), 0.0);
                std::fill(f1.begin(), f1.end(), 0.0);
                if (zf_) {
                    model_->apply_F_parts(hi, hj, 1.0, *zf_, f0.data());
                } else {
                    model_->apply_F_parts(hi, hj, 1.0, 0.0, f0.data());
                    model_->apply_F_parts(hi, hj, 0.0, 1.0, f1.data());
                }
                for (int k = 1; k <= K; ++k) {
                    double t0 = mult * T.T0(k, i, j), t1 = zf_ ? 0.0 : mult * T.T1(k, i, j);
                    if (t0 == 0.0 && t1 == 0.0)
                        continue;
                    double* o = out.modes[k - 1].row(ix);
                    for (int v = 0; v < n; ++v)
                        o[v] += t0 * f0[v] + t1 * f1[v];
                }
            }
        }
}

Stepper::Stepper(const SgSystem& sys)
    : sys_(sys)
{
}

void Stepper::transport(GpcField& h, double dt) const
{
    const auto& g = h.grid();
    const int n = g.nvel();
    const XFft& fft = xfft_for(g.nx(), n);
    const double sc = std::pow(sys_.eps(), -sys_.alpha());
    std::vector<std::complex<double>> hat(static_cast<std::size_t>(fft.nk()) * n);
    for (auto& m : h.modes) {
        fft.forward(m.data.data(), hat.data());
        for (int k = 0; k < fft.nk(); ++k) {
            double kk = fft.wavenumber(k);
            if (kk == 0.0)
                continue;
            for (int iv = 0; iv < n; ++iv) {
                double ph = -kk * sc * g.v(iv, 0) * dt;
                hat[static_cast<std::size_t>(k) * n + iv] *= std::complex<double>(std::cos(ph), std::sin(ph));
            }
        }
        fft.backward(hat.data(), m.data.data());
    }
}

const BlockTridiag<double>& Stepper::split_factor(double tau)
{
    auto& slot = split_cache_[tau];
    if (!slot) {
        const int K = sys_.K();
        const int n = sys_.model().grid().nvel();
        const auto& L1 = sys_.model().L1();
        std::vector<Eigen::MatrixXd> d(K), lo(K), up(K);
        for (int k = 0; k < K; ++k) {
            d[k] = Eigen::MatrixXd::Identity(n, n) - tau * sys_.L0e();
            if (k > 0 && sys_.Gc()(k, k - 1) != 0.0)
                lo[k] = -tau * sys_.Gc()(k, k - 1) * L1;
            else
                lo[k] = Eigen::MatrixXd::Zero(n, n);
            if (k + 1 < K && sys_.Gc()(k, k + 1) != 0.0)
                up[k] = -tau * sys_.Gc()(k, k + 1) * L1;
            else
                up[k] = Eigen::MatrixXd::Zero(n, n);
        }
        slot = std::make_unique<BlockTridiag<double>>(std::move(d), std::move(lo), std::move(up));
    }
    return *slot;
}

void Stepper::collision(GpcField& h, double dt)
{
    if (sys_.settings().solver == CollisionSolver::bdf2)
        throw std::invalid_argument("bdf2 is only available with the implicit scheme");
    const int K = sys_.K();
    const auto& g = h.grid();
    const int n = g.nvel(), nx = g.nx();
    const double a = std::pow(sys_.eps(), -1.0 - sys_.alpha());
    const double b = std::pow(sys_.eps(), -static_cast<double>(sys_.alpha()));
    const double theta = sys_.settings().solver == CollisionSolver::crank_nicolson ? 0.5 : 1.0;
    std::vector<Eigen::MatrixXd> rhs(K);
    GpcField tmp = h;
    if (theta < 1.0)
        sys_.apply_linear(h, tmp);
    GpcField F = h;
    sys_.nonlinear(h, F);
    for (int k = 0; k < K; ++k) {
        rhs[k] = Eigen::Map<const Eigen::MatrixXd>(h.modes[k].data.data(), n, nx);
        if (theta < 1.0)
            rhs[k] += (1.0 - theta) * dt * a * Eigen::Map<const Eigen::MatrixXd>(tmp.modes[k].data.data(), n, nx);
        if (sys_.model().nonlinear())
            rhs[k] += dt * b * Eigen::Map<const Eigen::MatrixXd>(F.modes[k].data.data(), n, nx);
    }
    split_factor(theta * dt * a).solve(rhs);
    for (int k = 0; k < K; ++k)
        Eigen::Map<Eigen::MatrixXd>(h.modes[k].data.data(), n, nx) = rhs[k];
}

const BlockTridiag<std::complex<double>>& Stepper::mono_factor(int kx, double ci, double theta)
{
    const auto& g = sys_.model().grid();
    const XFft& fft = xfft_for(g.nx(), g.nvel());
    double kk = fft.wavenumber(kx);
    double dt = sys_.settings().dt;
    auto key = std::make_tuple(kk, ci, theta * dt);
    auto& slot = mono_cache_[key];
    if (!slot) {
        const int K = sys_.K();
        const int n = g.nvel();
        const double a = std::pow(sys_.eps(), -1.0 - sys_.alpha());
        const double b = std::pow(sys_.eps(), -static_cast<double>(sys_.alpha()));
        const double tau = theta * dt;
        CMat base = (-tau * a * sys_.L0e()).cast<std::complex<double>>();
        for (int iv = 0; iv < n; ++iv)
            base(iv, iv) += std::complex<double>(ci, tau * kk * b * g.v(iv, 0));
        CMat L1c = sys_.model().L1().cast<std::complex<double>>();
        std::vector<CMat> d(K, base), lo(K), up(K);
        for (int k = 0; k < K; ++k) {
            lo[k] = (k > 0 && sys_.Gc()(k, k - 1) != 0.0) ? CMat(-tau * a * sys_.Gc()(k, k - 1) * L1c)
                                                          : CMat::Zero(n, n);
            up[k] = (k + 1 < K && sys_.Gc()(k, k + 1) != 0.0) ? CMat(-tau * a * sys_.Gc()(k, k + 1) * L1c)
                                                              : CMat::Zero(n, n);
        }
        slot = std::make_unique<BlockTridiag<std::complex<double>>>(std::move(d), std::move(lo), std::move(up));
    }
    return *slot;
}

void Stepper::step_implicit(GpcField& h)
{
    const int K = sys_.K();
    const auto& g = h.grid();
    const int n = g.nvel();
    const XFft& fft = xfft_for(g.nx(), n);
    const int nk = fft.nk();
    const double dt = sys_.settings().dt;
    const double a = std::pow(sys_.eps(), -1.0 - sys_.alpha());
    const double b = std::pow(sys_.eps(), -static_cast<double>(sys_.alpha()));
    const auto solver = sys_.settings().solver;
    const bool nonlin = sys_.model().nonlinear();

    std::vector<std::vector<std::complex<double>>> hat(K, std::vector<std::complex<double>>(static_cast<std::size_t>(nk) * n));
    std::vector<std::vector<std::complex<double>>> fhat;
    for (int k = 0; k < K; ++k)
        fft.forward(h.modes[k].data.data(), hat[k].data());
    if (nonlin) {
        GpcField F = h;
        sys_.nonlinear(h, F);
        fhat.assign(K, std::vector<std::complex<double>>(static_cast<std::size_t>(nk) * n));
        for (int k = 0; k < K; ++k)
            fft.forward(F.modes[k].data.data(), fhat[k].data());
    }
    bool bdf = solver == CollisionSolver::bdf2 && have_prev_;
    if (solver == CollisionSolver::bdf2 && prev_h_.empty()) {
        prev_h_.assign(nk, CMat::Zero(n, K));
        prev_f_.assign(nk, CMat::Zero(n, K));
    }
    const auto& L0e = sys_.L0e();
    const auto& L1 = sys_.model().L1();
    const auto& Gc = sys_.Gc();
    for (int kx = 0; kx < nk; ++kx) {
        CMat X(n, K), Fx = CMat::Zero(n, K);
        for (int k = 0; k < K; ++k)
            for (int iv = 0; iv < n; ++iv)
                X(iv, k) = hat[k][static_cast<std::size_t>(kx) * n + iv];
        if (nonlin)
            for (int k = 0; k < K; ++k)
                for (int iv = 0; iv < n; ++iv)
                    Fx(iv, k) = fhat[k][static_cast<std::size_t>(kx) * n + iv];
        bool zero = X.cwiseAbs().maxCoeff() == 0.0 && Fx.cwiseAbs().maxCoeff() == 0.0;
        if (bdf)
            zero = zero && prev_h_[kx].cwiseAbs().maxCoeff() == 0.0 && prev_f_[kx].cwiseAbs().maxCoeff() == 0.0;
        CMat Xn = CMat::Zero(n, K);
        if (!zero) {
            std::vector<CMat> rhs(K);
            double ci = 1.0, theta = 1.0;
            if (solver == CollisionSolver::crank_nicolson) {
                theta = 0.5;
                // explicit half: X + dt/2 A X
                double kk = fft.wavenumber(kx);
                CMat AX = (L0e * X.real()).cast<std::complex<double>>() +
                          std::complex<double>(0, 1) * (L0e * X.imag()).cast<std::complex<double>>();
                AX *= a;
                if (Gc.cwiseAbs().maxCoeff() != 0.0) {
                    CMat L1X = (L1 * X.real()).cast<std::complex<double>>() +
                               std::complex<double>(0, 1) * (L1 * X.imag()).cast<std::complex<double>>();
                    for (int k = 0; k < K; ++k)
                        for (int i = std::max(0, k - 1); i <= std::min(K - 1, k + 1); ++i)
                            if (Gc(k, i) != 0.0)
                                AX.col(k) += a * Gc(k, i) * L1X.col(i);
                }
                for (int iv = 0; iv < n; ++iv)
                    AX.row(iv) -= std::complex<double>(0, kk * b * g.v(iv, 0)) * X.row(iv);
                for (int k = 0; k < K; ++k)
                    rhs[k] = X.col(k) + 0.5 * dt * AX.col(k) + dt * b * Fx.col(k);
            } else if (bdf) {
                ci = 1.5;
                for (int k = 0; k < K; ++k)
                    rhs[k] = 2.0 * X.col(k) - 0.5 * prev_h_[kx].col(k) + dt * b * (2.0 * Fx.col(k) - prev_f_[kx].col(k));
            } else {
                for (int k = 0; k < K; ++k)
                    rhs[k] = X.col(k) + dt * b * Fx.col(k);
            }
            mono_factor(kx, ci, theta).solve(rhs);
            for (int k = 0; k < K; ++k)
                Xn.col(k) = rhs[k];
        }
        if (solver == CollisionSolver::bdf2) {
            prev_h_[kx] = X;
            prev_f_[kx] = Fx;
        }
        for (int k = 0; k < K; ++k)
            for (int iv = 0; iv < n; ++iv)
                hat[k][static_cast<std::size_t>(kx) * n + iv] = Xn(iv, k);
    }
    if (solver == CollisionSolver::bdf2)
        have_prev_ = true;
    for (int k = 0; k < K; ++k)
        fft.backward(hat[k].data(), h.modes[k].data.data());
}

void Stepper::step(GpcField& h)
{
    const double dt = sys_.settings().dt;
    switch (sys_.settings().scheme) {
    case Scheme::strang:
        transport(h, 0.5 * dt);
        collision(h, dt);
        transport(h, 0.5 * dt);
        break;
    case Scheme::lie:
        transport(h, dt);
        collision(h, dt);
        break;
    case Scheme::implicit:
        step_implicit(h);
        break;
    }
}

void Trajectory::write_csv(const std::string& path) const
{
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp)
        throw std::runtime_error("cannot open " + path);
    std::fputs("t,E_K,hypo,l2,hperp_lambda,moment_drift,min_f", fp);
    std::size_t K = records.empty() ? 0 : records.front().mode_norms.size();
    for (std::size_t k = 1; k <= K; ++k)
        std::fprintf(fp, ",norm_%zu", k);
    std::fputc('\n', fp);
    for (const auto& r : records) {
        std::fprintf(fp, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.t, r.ek, r.hypo, r.l2, r.hperp_lambda,
                     r.moment_drift, r.min_f);
        for (double v : r.mode_norms)
            std::fprintf(fp, ",%.17g", v);
        std::fputc('\n', fp);
    }
    std::fclose(fp);
}

Trajectory run(const SgSystem& sys, GpcField& state, double t_final, const DiagnosticsSettings& ds,
               const RecordHook& hook)
{
    if (!(t_final > 0))
        throw std::invalid_argument("t_final must be positive");
    if (ds.record_every < 1)
        throw std::invalid_argument("record interval must be at least one step");
    for (const auto& m : state.modes)
        if (!m.finite())
            throw std::invalid_argument("initial state has non-finite entries");
    const auto& g = state.grid();
    const NullSpace& ns = sys.model().null_space();
    const double gamma = sys.model().kernel().gamma;
    const double eps = sys.eps();
    const int K = sys.K();
    HypoFunctional hf(g, ns, ds.weights, eps);
    Trajectory tr;
    if (auto w = energy_exponent_warning(sys.basis(), ds.q))
        tr.warnings.push_back(*w);

    std::vector<std::vector<double>> m0(K);
    for (int k = 0; k < K; ++k)
        m0[k] = global_moments(state.modes[k], ns);

    std::vector<double> znodes;
    if (sys.z_freeze() || K == 1)
        znodes = {0.0};
    else
        znodes = sys.basis().quad().nodes;

    auto record = [&](double t) {
        TrajectoryRecord r;
        r.t = t;
        double l2 = 0, hp = 0, hy = 0;
        for (int k = 1; k <= K; ++k) {
            const Field& h = state.modes[k - 1];
            double hs = hs_norm(h, ds.s);
            double wk = std::pow(static_cast<double>(k), 2.0 * ds.q);
            r.ek += wk * hs * hs;
            r.mode_norms.push_back(hs);
            double n2 = inner(h, h);
            l2 += n2;
            double lp = lambda_norm(micro_part(h, ns), gamma);
            hp += lp * lp;
            hy += wk * hf(h);
            auto mom = global_moments(h, ns);
            for (std::size_t i = 0; i < mom.size(); ++i) {
                r.moment_drift += std::abs(mom[i] - m0[k - 1][i]);
                tr.max_pi_g = std::max(tr.max_pi_g, std::abs(mom[i]));
            }
        }
        r.l2 = std::sqrt(l2);
        r.hperp_lambda = std::sqrt(hp);
        r.hypo = hy;
        double mf = 1e300;
        const auto& mm = g.maxw();
        const auto& m = g.sqrt_maxw();
        for (double z : znodes) {
            Field hz = K == 1 ? state.modes[0] : reconstruct(state, z);
            for (int ix = 0; ix < g.nx(); ++ix)
                for (int iv = 0; iv < g.nvel(); ++iv)
                    mf = std::min(mf, mm[iv] + eps * m[iv] * hz.at(ix, iv));
        }
        r.min_f = mf;
        tr.records.push_back(std::move(r));
        if (hook)
            hook(t, state);
    };

    record(0.0);
    const TrajectoryRecord r0 = tr.records.front();
    const double dt = sys.settings().dt;
    if (sys.model().nonlinear() && r0.l2 > 0) {
        double lim = sys.settings().cfl * std::pow(eps, sys.alpha()) / r0.l2;
        if (dt > lim)
            throw std::invalid_argument("time step violates the nonlinear step rule dt <= cfl eps^alpha / |h|");
    }
    const long nsteps = static_cast<long>(std::ceil(t_final / dt - 1e-9));
    Stepper stepper(sys);
    for (long s = 1; s <= nsteps; ++s) {
        stepper.step(state);
        bool rec = (s % ds.record_every == 0) || s == nsteps;
        if (!rec) {
            for (const auto& m : state.modes)
                if (!std::isfinite(m.data[0]))
                    throw DivergenceError("non-finite state at step " + std::to_string(s));
            continue;
        }
        for (const auto& m : state.modes)
            if (!m.finite())
                throw DivergenceError("non-finite state at step " + std::to_string(s));
        record(s * dt);
        const auto& r = tr.records.back();
        auto blown = [&](double now, double init) { return init > 0 && now > ds.divergence_factor * init; };
        if (blown(r.ek, r0.ek) || blown(r.l2, r0.l2) || blown(r.hypo, r0.hypo)) {
            char buf[256];
            std::snprintf(buf, sizeof buf,
                          "divergence at t = %.6g: E_K %.3e (initial %.3e), l2 %.3e (initial %.3e)", r.t, r.ek,
                          r0.ek, r.l2, r0.l2);
            throw DivergenceError(buf);
        }
    }
    return tr;
}

double z_profile_value(const std::string& profile, double z)
{
    if (profile == "affine")
        return 1.0 + 0.5 * z;
    if (profile == "exp")
        return std::exp(z);
    if (profile == "const")
        return 1.0;
    throw std::invalid_argument("unknown z profile '" + profile + "' (affine, exp, const)");
}

std::vector<double> default_profile(const PhaseGrid& g)
{
    std::vector<double> w(g.nvel());
    double n2 = 0;
    for (int iv = 0; iv < g.nvel(); ++iv) {
        w[iv] = g.v(iv, g.dim_v() - 1) * std::exp(-0.25 * g.speed2(iv)) * g.sqrt_maxw()[iv];
        n2 += g.w()[iv] * w[iv] * w[iv];
    }
    for (auto& x : w)
        x /= std::sqrt(n2);
    return w;
}

Field base_initial_field(GridPtr g, const NullSpace& ns, const InitialSpec& spec)
{
    Field h(g);
    auto w = default_profile(*g);
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> nd;
    for (int ix = 0; ix < g->nx(); ++ix)
        for (int iv = 0; iv < g->nvel(); ++iv) {
            double v = spec.delta * std::cos(g->x(ix)) * w[iv];
            if (spec.noise != 0.0)
                v += spec.delta * spec.noise * nd(rng) * g->sqrt_maxw()[iv];
            h.at(ix, iv) = v;
        }
    Field pg = pi_G(h, ns);
    for (std::size_t i = 0; i < h.data.size(); ++i)
        h.data[i] -= pg.data[i];
    return h;
}

GpcField initial_data(const SgSystem& sys, const InitialSpec& spec)
{
    GridPtr g = sys.model().grid_ptr();
    Field base = base_initial_field(g, sys.model().null_space(), spec);
    GpcField h(sys.basis_ptr(), g);
    std::vector<double> scale;
    if (sys.z_freeze()) {
        scale.assign(sys.K(), 0.0);
        scale[0] = z_profile_value(spec.z_profile, *sys.z_freeze());
    } else {
        scale = project_to_basis(sys.basis(), [&](double z) { return z_profile_value(spec.z_profile, z); });
    }
    for (int k = 0; k < sys.K(); ++k)
        for (std::size_t i = 0; i < base.data.size(); ++i)
            h.modes[k].data[i] = scale[k] * base.data[i];
    return h;
}

DeterministicResult deterministic_run(ModelPtr model, double z, int alpha, double eps, const StepperSettings& st,
                                      const Field& h0, double t_final, const DiagnosticsSettings& ds,
                                      const RecordHook& hook)
{
    auto basis = std::make_shared<GpcBasis>(Family::legendre, 1);
    SgSystem sys(std::move(model), basis, alpha, eps, st, z);
    GpcField state(basis, h0.grid);
    state.modes[0] = h0;
    DeterministicResult res;
    res.traj = run(sys, state, t_final, ds, hook);
    res.final_state = state.modes[0];
    return res;
}

}
