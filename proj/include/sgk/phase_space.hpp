#pragma once

#include "sgk/gpc_basis.hpp"

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sgk {

// Periodic x on [0, 2pi) (d_x = 1) times a truncated uniform velocity grid.
class PhaseGrid {
public:
    PhaseGrid(int nx, int dv, int nv, double lv);

    int nx() const { return nx_; }
    int dim_v() const { return dv_; }
    int nv() const { return nv_; }
    double lv() const { return lv_; }
    double dvel() const { return dvel_; }
    double dx() const { return dx_; }
    int nvel() const { return nvel_; }
    std::size_t size() const { return static_cast<std::size_t>(nx_) * nvel_; }

    double x(int i) const { return dx_ * i; }
    // component a of velocity node iv
    double v(int iv, int a) const { return vel_[static_cast<std::size_t>(iv) * dv_ + a]; }
    double speed2(int iv) const { return speed2_[iv]; }
    const std::vector<double>& w() const { return w_; }
    // node index along axis a of flat velocity index iv
    int axis_index(int iv, int a) const;
    int flat(const int* idx) const;

    const std::vector<double>& maxw() const { return maxw_; }     // 𝓜
    const std::vector<double>& sqrt_maxw() const { return sqrtm_; } // M

    bool same_as(const PhaseGrid& o) const
    {
        return nx_ == o.nx_ && dv_ == o.dv_ && nv_ == o.nv_ && lv_ == o.lv_;
    }

private:
    int nx_, dv_, nv_, nvel_;
    double lv_, dvel_, dx_;
    std::vector<double> vel_, speed2_, w_, maxw_, sqrtm_;
};

using GridPtr = std::shared_ptr<const PhaseGrid>;

struct Maxwellian {
    std::vector<double> mm;   // 𝓜(v)
    std::vector<double> m;    // M(v) = sqrt(𝓜)
    double mass = 0.0;
};

Maxwellian maxwellian(const PhaseGrid& grid);

enum class Rep { perturbation, distribution };

// One real sample h(x_i, v_j), stored x-major: data[ix * nvel + iv].
struct Field {
    GridPtr grid;
    std::vector<double> data;
    Rep rep = Rep::perturbation;

    Field() = default;
    explicit Field(GridPtr g, Rep r = Rep::perturbation)
        : grid(std::move(g)), data(grid->size(), 0.0), rep(r)
    {
    }

    double& at(int ix, int iv) { return data[static_cast<std::size_t>(ix) * grid->nvel() + iv]; }
    double at(int ix, int iv) const { return data[static_cast<std::size_t>(ix) * grid->nvel() + iv]; }
    double* row(int ix) { return data.data() + static_cast<std::size_t>(ix) * grid->nvel(); }
    const double* row(int ix) const { return data.data() + static_cast<std::size_t>(ix) * grid->nvel(); }
    bool finite() const;
};

Field to_distribution(const Field& h, double eps);
Field to_perturbation(const Field& f, double eps);

struct GpcField {
    std::shared_ptr<const GpcBasis> basis;
    std::vector<Field> modes;   // modes[k-1] = h_k

    GpcField() = default;
    GpcField(std::shared_ptr<const GpcBasis> b, GridPtr g)
        : basis(std::move(b)), modes(basis->modes(), Field(std::move(g)))
    {
    }
    int K() const { return static_cast<int>(modes.size()); }
    const PhaseGrid& grid() const { return *modes.front().grid; }
};

// Orthonormal (in the trapezoid inner product) basis of a collision null space.
class NullSpace {
public:
    // full: {M, v_a M, |v|^2 M}; otherwise {M} only
    NullSpace(const PhaseGrid& grid, bool full);

    int dim() const { return static_cast<int>(phi_.size()); }
    const std::vector<double>& phi(int i) const { return phi_[i]; }
    int nvel() const { return nvel_; }

    // coefficients <h, phi_i>_v of one velocity vector
    void coeffs(const double* h, double* c) const;
    void project(const double* h, double* out) const;

private:
    int nvel_;
    std::vector<double> w_;
    std::vector<std::vector<double>> phi_;
};

Field pi_L(const Field& h, const NullSpace& ns);
Field micro_part(const Field& h, const NullSpace& ns);
Field pi_G(const Field& h, const NullSpace& ns);
// Global moments int int h phi_i dx dv.
std::vector<double> global_moments(const Field& h, const NullSpace& ns);

double inner(const Field& a, const Field& b);
double l2norm(const Field& a);

// Real FFT along x for every velocity column at once.
class XFft {
public:
    XFft(int nx, int howmany);
    ~XFft();
    XFft(const XFft&) = delete;
    XFft& operator=(const XFft&) = delete;

    int nx() const { return nx_; }
    int nk() const { return nx_ / 2 + 1; }
    // in: nx*howmany reals (x-major); out: nk*howmany complex (k-major)
    void forward(const double* in, std::complex<double>* out) const;
    // normalized inverse; input preserved
    void backward(const std::complex<double>* in, double* out) const;
    // wavenumber used for differentiation and transport (Nyquist -> 0)
    double wavenumber(int k) const { return (2 * k == nx_) ? 0.0 : static_cast<double>(k); }

private:
    int nx_, howmany_;
    void* fwd_;
    void* bwd_;
};

const XFft& xfft_for(int nx, int howmany);

Field dx_field(const Field& h, int order = 1);
Field dv_field(const Field& h, int axis);

struct NormSet {
    double l2 = 0, hs = 0, lambda = 0, hs_lambda = 0;
};

NormSet norms(const Field& h, int s, double gamma);
double hs_norm(const Field& h, int s);
double lambda_norm(const Field& h, double gamma);

struct FunctionalWeights {
    double A = 1.0, alpha = 1.0, b = 1.0, a = 0.5;
    double q = 3.0;
    int s = 1;
    double gamma = 0.0;
};

class HypoFunctional {
public:
    HypoFunctional(const PhaseGrid& grid, const NullSpace& ns, const FunctionalWeights& w, double eps);

    double operator()(const Field& h) const;
    double kappa1() const { return kappa1_; }
    double kappa2() const { return kappa2_; }
    double proj_grad_bound() const { return c_; }
    // individual terms: A|h|^2, alpha|dx h|^2, b|dv hperp|^2, a eps <dx h, dv1 h>
    std::array<double, 4> terms(const Field& h) const;

private:
    const NullSpace* ns_;
    FunctionalWeights w_;
    double eps_, c_ = 0, kappa1_ = 0, kappa2_ = 0;
};

double h1_norm_sq(const Field& h);

double energy_ek(const GpcField& hK, double q, int s, double gamma = 0.0);
std::optional<std::string> energy_exponent_warning(const GpcBasis& basis, double q);

Field reconstruct(const GpcField& hK, double z);

struct ZNorms {
    double l2z = 0;     // (int |h(z)|_{H^s}^2 pi dz)^{1/2}
    double linfz = 0;   // max over 257 Chebyshev extrema
    double modal = 0;   // (sum_k |h_k|_{H^s}^2)^{1/2}
};

ZNorms z_norms(const GpcField& hK, int s);

void write_binary(const Field& h, const std::string& path);
Field read_binary(const std::string& path);
void write_csv(const Field& h, const std::string& path);

}
