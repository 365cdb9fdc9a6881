#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace sgk {

enum class Family { legendre, chebyshev };

Family parse_family(const std::string& name);
std::string family_name(Family f);

struct Quadrature {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// n-point Gauss rule for the probability weight of the family.
Quadrature gauss_rule(Family f, int n);

// Orthonormal polynomials psi_1..psi_K on [-1,1]; psi_k has degree k-1.
class GpcBasis {
public:
    GpcBasis(Family family, int K, int quad_count = 0);

    Family family() const { return family_; }
    int modes() const { return K_; }
    const Quadrature& quad() const { return quad_; }

    // Off-diagonal recurrence coefficient linking degrees n-1 and n (n >= 1).
    // z p_n = a_{n+1} p_{n+1} + a_n p_{n-1}; the diagonal coefficients vanish.
    double recurrence(int n) const;

    double weight(double z) const;
    // 1-based: psi(1, z) == 1.
    double psi(int k, double z) const;
    void psi_all(double z, double* out) const;
    void psi_all(double z, int count, double* out) const;

    // Nominal sup-norm growth exponent p of the family.
    double nominal_growth() const;

private:
    Family family_;
    int K_;
    Quadrature quad_;
};

struct GrowthFit {
    std::vector<double> sup;   // sup[k-1] = max |psi_k|
    double p = 0.0;
};

GrowthFit sup_norm_growth(const GpcBasis& basis, int K);

// G_ki = int z psi_k psi_i pi dz (0-based storage).
Eigen::MatrixXd jacobi_matrix(const GpcBasis& basis);

// Degree pattern: int z^budget psi_k psi_i psi_j can be nonzero only if
// every degree is at most the sum of the other two plus the budget.
bool triple_allowed(int k, int i, int j, int budget);

class CouplingTensors {
public:
    explicit CouplingTensors(const GpcBasis& basis);

    int modes() const { return K_; }
    const Eigen::MatrixXd& G() const { return G_; }
    // 1-based accessors.
    double T0(int k, int i, int j) const { return t0_[idx(k, i, j)]; }
    double T1(int k, int i, int j) const { return t1_[idx(k, i, j)]; }
    const std::vector<double>& t0_data() const { return t0_; }
    const std::vector<double>& t1_data() const { return t1_; }

    Eigen::MatrixXd s_tilde(double b0, double b1) const;
    double s_triple(double b0, double b1, int k, int i, int j) const
    {
        return b0 * T0(k, i, j) + b1 * T1(k, i, j);
    }

    // Largest |G_ki| outside the tridiagonal band.
    double off_band() const;

private:
    std::size_t idx(int k, int i, int j) const
    {
        return (static_cast<std::size_t>(k - 1) * K_ + (i - 1)) * K_ + (j - 1);
    }
    int K_;
    Eigen::MatrixXd G_;
    std::vector<double> t0_, t1_;
};

std::vector<double> project_to_basis(const GpcBasis& basis, const std::function<double(double)>& g);

// Chebyshev extrema cos(pi j / (n-1)), j = 0..n-1.
std::vector<double> chebyshev_extrema(int n);

}
