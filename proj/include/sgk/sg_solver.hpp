#pragma once

#include "sgk/collision.hpp"
#include "sgk/gpc_basis.hpp"
#include "sgk/phase_space.hpp"

#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgk {

enum class Scheme { strang, lie, implicit };
enum class CollisionSolver { implicit_euler, crank_nicolson, bdf2 };

Scheme parse_scheme(const std::string& s);
std::string scheme_name(Scheme s);
CollisionSolver parse_solver(const std::string& s);
std::string solver_name(CollisionSolver s);

struct StepperSettings {
    double dt = 0.05;
    Scheme scheme = Scheme::strang;
    CollisionSolver solver = CollisionSolver::implicit_euler;
    double cfl = 0.5;   // nonlinear rule: dt <= cfl * eps^alpha / |h|
};

class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Block tridiagonal solver with dense n x n blocks; factorization cached.
template <typename Scalar>
class BlockTridiag {
public:
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    // diag[k], lower[k] = block (k, k-1) (k >= 1), upper[k] = block (k, k+1)
    BlockTridiag(std::vector<Mat> diag, std::vector<Mat> lower, std::vector<Mat> upper);
    // rhs[k]: n x m; solved in place
    void solve(std::vector<Mat>& rhs) const;
    int blocks() const { return static_cast<int>(lu_.size()); }

private:
    std::vector<Eigen::PartialPivLU<Mat>> lu_;
    std::vector<Mat> m_, upper_;
    bool coupled_;
};

// gPC-SG system for one model, basis, scaling and Knudsen number.
class SgSystem {
public:
    SgSystem(ModelPtr model, std::shared_ptr<const GpcBasis> basis, int alpha, double eps,
             StepperSettings st, std::optional<double> z_freeze = std::nullopt);

    const CollisionModel& model() const { return *model_; }
    ModelPtr model_ptr() const { return model_; }
    std::shared_ptr<const GpcBasis> basis_ptr() const { return basis_; }
    const GpcBasis& basis() const { return *basis_; }
    const CouplingTensors& tensors() const { return *tensors_; }
    int alpha() const { return alpha_; }
    double eps() const { return eps_; }
    const StepperSettings& settings() const { return st_; }
    int K() const { return basis_->modes(); }
    std::optional<double> z_freeze() const { return zf_; }

    // kernel realized in the Galerkin coupling: b0 -> L0e, b1 -> L1 through Gc
    const Eigen::MatrixXd& L0e() const { return l0e_; }
    const Eigen::MatrixXd& Gc() const { return gc_; }
    // nu_ki(v) = nu0(v) delta_ki + nu1(v) G_ki at velocity node iv
    Eigen::MatrixXd nu_ki(int iv) const;
    // largest entry of the inter-mode coupling blocks
    double coupling_norm() const;

    void apply_linear(const GpcField& h, GpcField& out) const;
    void nonlinear(const GpcField& h, GpcField& out) const;

private:
    ModelPtr model_;
    std::shared_ptr<const GpcBasis> basis_;
    std::shared_ptr<const CouplingTensors> tensors_;
    int alpha_;
    double eps_;
    StepperSettings st_;
    std::optional<double> zf_;
    Eigen::MatrixXd l0e_, gc_;
};

class Stepper {
public:
    explicit Stepper(const SgSystem& sys);

    void step(GpcField& h);
    void transport(GpcField& h, double dt) const;
    void collision(GpcField& h, double dt);
    void reset() { have_prev_ = false; }
    const SgSystem& system() const { return sys_; }

private:
    using CMat = Eigen::MatrixXcd;
    void step_implicit(GpcField& h);
    const BlockTridiag<double>& split_factor(double theta_dt);
    const BlockTridiag<std::complex<double>>& mono_factor(int kx, double ci, double theta);

    const SgSystem& sys_;
    std::map<double, std::unique_ptr<BlockTridiag<double>>> split_cache_;
    std::map<std::tuple<double, double, double>, std::unique_ptr<BlockTridiag<std::complex<double>>>> mono_cache_;
    bool have_prev_ = false;
    std::vector<CMat> prev_h_, prev_f_;   // per Fourier mode, K*nvel x 1 stacked as nvel x K
};

struct DiagnosticsSettings {
    int record_every = 1;
    double q = 3.0;
    int s = 1;
    FunctionalWeights weights;
    double divergence_factor = 1e6;
};

struct TrajectoryRecord {
    double t = 0;
    double ek = 0, hypo = 0, l2 = 0, hperp_lambda = 0, moment_drift = 0, min_f = 0;
    std::vector<double> mode_norms;
};

struct Trajectory {
    std::vector<TrajectoryRecord> records;
    std::vector<std::string> warnings;
    double max_pi_g = 0;   // largest |Pi_G h_k| moment seen
    void write_csv(const std::string& path) const;
};

using RecordHook = std::function<void(double t, const GpcField&)>;

Trajectory run(const SgSystem& sys, GpcField& state, double t_final, const DiagnosticsSettings& ds,
               const RecordHook& hook = {});

struct InitialSpec {
    double delta = 0.1;
    std::string z_profile = "affine";   // affine: 1 + 0.5 z, exp: e^z, const: 1
    double noise = 0.0;
    std::uint64_t seed = 1;
};

double z_profile_value(const std::string& profile, double z);
// w(v) = v_1 exp(-|v|^2/4) M(v), unit L2_v norm
std::vector<double> default_profile(const PhaseGrid& g);
// delta * cos(x) * w(v) (plus optional noise), global equilibrium part removed
Field base_initial_field(GridPtr g, const NullSpace& ns, const InitialSpec& spec);
GpcField initial_data(const SgSystem& sys, const InitialSpec& spec);

struct DeterministicResult {
    Trajectory traj;
    Field final_state;
};

DeterministicResult deterministic_run(ModelPtr model, double z, int alpha, double eps, const StepperSettings& st,
                                      const Field& h0, double t_final, const DiagnosticsSettings& ds,
                                      const RecordHook& hook = {});

}
