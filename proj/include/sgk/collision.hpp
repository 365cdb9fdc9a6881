#pragma once

#include "sgk/phase_space.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace sgk {

enum class ModelKind { relaxation, fokker_planck, linearized_boltzmann, boltzmann_full };

ModelKind parse_model_kind(const std::string& s);
std::string model_kind_name(ModelKind k);
bool is_boltzmann(ModelKind k);

// B = C_phi |v - v*|^gamma b(cos theta, z), b = b0(c) + b1(c) z with
// b0(c) = beta0 (1 + a0 c) / |S|, b1(c) = xi (1 + a1 c) / |S|.
// For relaxation and Fokker-Planck only the angular masses beta0, xi matter.
struct KernelSpec {
    double gamma = 0.0;
    double c_phi = 1.0;
    double beta0 = 1.0;
    double a0 = 0.0;
    double xi = 0.0;
    double a1 = 0.0;
    int m_sigma = 16;
    double c_b = 0.0;        // declared bound on |b|; 0 means computed
    double c_b_star = 0.0;   // declared bound on |b1|; 0 means computed

    double sphere_measure(int dv) const;
    double b0(double c, int dv) const;
    double b1(double c, int dv) const;
    double b(double c, double z, int dv) const { return b0(c, dv) + z * b1(c, dv); }
    double phi(double r) const;

    struct Bounds {
        double min_b, max_abs_b, max_abs_b1;
    };
    // Checks nonnegativity and the declared bounds on a (theta, z) grid.
    Bounds validate(int dv) const;
};

// Per-collision data of the conservative projection discretization.
struct CollisionTable {
    std::vector<std::int32_t> node;   // 6 per collision: alpha, beta, lam, lam*, mu, mu*
    std::vector<double> r;            // energy interpolation weight
    std::vector<double> wbase;        // w_a w_b (2pi/M) phi(|g|)
    std::vector<double> cosang;       // cos theta
    std::size_t size() const { return r.size(); }
    std::size_t dropped = 0;
};

CollisionTable build_collision_table(const PhaseGrid& grid, const KernelSpec& kernel);

class CollisionModel {
public:
    CollisionModel(GridPtr grid, ModelKind kind, const KernelSpec& kernel);

    ModelKind kind() const { return kind_; }
    const KernelSpec& kernel() const { return kernel_; }
    const PhaseGrid& grid() const { return *grid_; }
    GridPtr grid_ptr() const { return grid_; }
    const NullSpace& null_space() const { return *ns_; }
    std::shared_ptr<const NullSpace> null_space_ptr() const { return ns_; }
    bool nonlinear() const { return kind_ == ModelKind::boltzmann_full; }
    bool has_F() const { return is_boltzmann(kind_); }

    // L(z) = L0 + z L1 as dense nvel x nvel matrices acting on velocity vectors of h
    const Eigen::MatrixXd& L0() const { return L0_; }
    const Eigen::MatrixXd& L1() const { return L1_; }
    Eigen::MatrixXd L(double z) const { return L0_ + z * L1_; }

    // nu(v, z) = nu0 + z nu1
    const Eigen::VectorXd& nu0() const { return nu0_; }
    const Eigen::VectorXd& nu1() const { return nu1_; }
    Eigen::VectorXd collision_frequency(double z) const { return nu0_ + z * nu1_; }

    const CollisionTable* table() const { return table_.get(); }

    // velocity-level operators (length nvel)
    void apply_L(const double* h, double z, double* out) const;
    void apply_L_direct(const double* h, double z, double* out) const;
    // F(g,h; z) = F0 + z F1 (symmetric bilinear); accumulates c0 F0 + c1 F1 into out
    void apply_F_parts(const double* g, const double* h, double c0, double c1, double* out) const;
    void apply_F(const double* g, const double* h, double z, double* out) const;
    void apply_Q(const double* f, double z, double* out) const;

    // Field-level wrappers
    Field apply_L(const Field& h, double z) const;
    Field apply_F(const Field& g, const Field& h, double z) const;
    Field apply_Q(const Field& f, double z) const;

    // Lambda and K = L + Lambda in matrix form
    Eigen::MatrixXd Lambda(double z) const;
    Eigen::MatrixXd Kmat(double z) const;

private:
    void require_boltzmann(const char* op) const;
    void build_relaxation();
    void build_fokker_planck();
    void build_boltzmann();
    void direct_nu();

    GridPtr grid_;
    ModelKind kind_;
    KernelSpec kernel_;
    std::shared_ptr<NullSpace> ns_;
    Eigen::MatrixXd L0_, L1_;
    Eigen::VectorXd nu0_, nu1_;
    std::unique_ptr<CollisionTable> table_;
};

using ModelPtr = std::shared_ptr<const CollisionModel>;

struct AuditItem {
    std::string assumption;
    double fitted_constant = 0;
    double tolerance = 0;
    bool pass = false;
    std::string detail;
};

struct AuditOptions {
    int samples = 1000;
    int f_samples = 20;
    std::uint64_t seed = 1;
};

std::vector<AuditItem> audit_assumptions(const CollisionModel& model, const AuditOptions& opt = {});

}
