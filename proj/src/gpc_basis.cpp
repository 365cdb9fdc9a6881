#include "sgk/gpc_basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sgk {

Family parse_family(const std::string& name)
{
    if (name == "legendre")
        return Family::legendre;
    if (name == "chebyshev")
        return Family::chebyshev;
    throw std::invalid_argument("unknown gPC family '" + name + "' (expected legendre or chebyshev)");
}

std::string family_name(Family f)
{
    return f == Family::legendre ? "legendre" : "chebyshev";
}

namespace {

// Legendre P_n and P_n' by the classical recurrence.
void legendre_pd(int n, double x, double& p, double& dp)
{
    double p0 = 1.0, p1 = x;
    if (n == 0) {
        p = 1.0;
        dp = 0.0;
        return;
    }
    for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    p = p1;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
}

}

Quadrature gauss_rule(Family f, int n)
{
    if (n < 1)
        throw std::invalid_argument("gauss_rule: n must be positive");
    Quadrature q;
    q.nodes.resize(n);
    q.weights.resize(n);
    const double pi = std::numbers::pi;
    if (f == Family::chebyshev) {
        for (int j = 0; j < n; ++j) {
            q.nodes[j] = -std::cos((2.0 * j + 1.0) * pi / (2.0 * n));
            q.weights[j] = 1.0 / n;
        }
        // exact symmetry
        for (int j = 0; j < n / 2; ++j)
            q.nodes[n - 1 - j] = -q.nodes[j];
        if (n % 2)
            q.nodes[n / 2] = 0.0;
        return q;
    }
    int half = (n + 1) / 2;
    for (int j = 0; j < half; ++j) {
        double x = std::cos(pi * (j + 0.75) / (n + 0.5));
        double p = 0, dp = 0;
        for (int it = 0; it < 100; ++it) {
            legendre_pd(n, x, p, dp);
            double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        legendre_pd(n, x, p, dp);
        double w = 1.0 / ((1.0 - x * x) * dp * dp);    // 2/(..) for dz, halved for pi = 1/2
        q.nodes[j] = -x;
        q.nodes[n - 1 - j] = x;
        q.weights[j] = w;
        q.weights[n - 1 - j] = w;
    }
    if (n % 2)
        q.nodes[n / 2] = 0.0;
    return q;
}

GpcBasis::GpcBasis(Family family, int K, int quad_count)
    : family_(family), K_(K)
{
    if (K < 1)
        throw std::invalid_argument("build_basis: K must be at least 1");
    if (quad_count == 0)
        quad_count = 4 * K;
    if (quad_count < 2 * K)
        throw std::invalid_argument("build_basis: quad_count must be at least 2K to certify orthonormality");
    quad_ = gauss_rule(family, quad_count);
}

double GpcBasis::recurrence(int n) const
{
    if (n < 1)
        return 0.0;
    if (family_ == Family::legendre)
        return n / std::sqrt(4.0 * n * n - 1.0);
    return n == 1 ? std::sqrt(0.5) : 0.5;
}

double GpcBasis::weight(double z) const
{
    if (z < -1.0 || z > 1.0)
        return 0.0;
    if (family_ == Family::legendre)
        return 0.5;
    return 1.0 / (std::numbers::pi * std::sqrt(1.0 - z * z));
}

void GpcBasis::psi_all(double z, int count, double* out) const
{
    if (count <= 0)
        return;
    out[0] = 1.0;
    if (count == 1)
        return;
    out[1] = z / recurrence(1);
    for (int n = 1; n + 1 < count; ++n)
        out[n + 1] = (z * out[n] - recurrence(n) * out[n - 1]) / recurrence(n + 1);
}

void GpcBasis::psi_all(double z, double* out) const
{
    psi_all(z, K_, out);
}

double GpcBasis::psi(int k, double z) const
{
    std::vector<double> v(k);
    psi_all(z, k, v.data());
    return v[k - 1];
}

double GpcBasis::nominal_growth() const
{
    return family_ == Family::legendre ? 0.5 : 0.0;
}

GrowthFit sup_norm_growth(const GpcBasis& basis, int K)
{
    const int npts = 10000;
    GrowthFit fit;
    fit.sup.assign(K, 0.0);
    std::vector<double> v(K);
    for (int i = 0; i < npts; ++i) {
        double z = -1.0 + 2.0 * i / (npts - 1);
        basis.psi_all(z, K, v.data());
        for (int k = 0; k < K; ++k)
            fit.sup[k] = std::max(fit.sup[k], std::abs(v[k]));
    }
    // slope over k >= 2; the constant mode sits outside the power law
    int k0 = K >= 3 ? 2 : 1;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (int k = k0; k <= K; ++k) {
        double x = std::log(static_cast<double>(k)), y = std::log(fit.sup[k - 1]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    double den = n * sxx - sx * sx;
    fit.p = den > 0 ? (n * sxy - sx * sy) / den : 0.0;
    return fit;
}

Eigen::MatrixXd jacobi_matrix(const GpcBasis& basis)
{
    const int K = basis.modes();
    const auto& q = basis.quad();
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(K, K);
    std::vector<double> v(K);
    for (std::size_t m = 0; m < q.nodes.size(); ++m) {
        basis.psi_all(q.nodes[m], v.data());
        double wz = q.weights[m] * q.nodes[m];
        for (int k = 0; k < K; ++k)
            for (int i = 0; i <= k; ++i)
                G(k, i) += wz * v[k] * v[i];
    }
    for (int k = 0; k < K; ++k)
        for (int i = k + 1; i < K; ++i)
            G(k, i) = G(i, k);
    return G;
}

bool triple_allowed(int k, int i, int j, int budget)
{
    int a = k - 1, b = i - 1, c = j - 1;
    return a <= b + c + budget && b <= a + c + budget && c <= a + b + budget;
}

CouplingTensors::CouplingTensors(const GpcBasis& basis)
    : K_(basis.modes()), G_(jacobi_matrix(basis))
{
    const int K = K_;
    // exact for degree 3(K-1)+1
    int n = std::max<int>(basis.quad().nodes.size(), (3 * K) / 2 + 1);
    Quadrature q = gauss_rule(basis.family(), n);
    std::size_t K3 = static_cast<std::size_t>(K) * K * K;
    t0_.assign(K3, 0.0);
    t1_.assign(K3, 0.0);
    std::vector<double> v(K);
    std::vector<double> s0(K3, 0.0), s1(K3, 0.0);
    for (int m = 0; m < n; ++m) {
        basis.psi_all(q.nodes[m], v.data());
        double w = q.weights[m], wz = w * q.nodes[m];
        for (int k = 0; k < K; ++k)
            for (int i = 0; i <= k; ++i)
                for (int j = 0; j <= i; ++j) {
                    double p = v[k] * v[i] * v[j];
                    std::size_t id = (static_cast<std::size_t>(k) * K + i) * K + j;
                    s0[id] += w * p;
                    s1[id] += wz * p;
                }
    }
    for (int k = 0; k < K; ++k)
        for (int i = 0; i <= k; ++i)
            for (int j = 0; j <= i; ++j) {
                std::size_t id = (static_cast<std::size_t>(k) * K + i) * K + j;
                int perm[6][3] = {{k, i, j}, {k, j, i}, {i, k, j}, {i, j, k}, {j, k, i}, {j, i, k}};
                for (auto& p : perm) {
                    std::size_t t = (static_cast<std::size_t>(p[0]) * K + p[1]) * K + p[2];
                    t0_[t] = s0[id];
                    t1_[t] = s1[id];
                }
            }
}

Eigen::MatrixXd CouplingTensors::s_tilde(double b0, double b1) const
{
    Eigen::MatrixXd S = b1 * G_;
    S.diagonal().array() += b0;
    return S;
}

double CouplingTensors::off_band() const
{
    double m = 0.0;
    for (int k = 0; k < K_; ++k)
        for (int i = 0; i < K_; ++i)
            if (std::abs(k - i) > 1)
                m = std::max(m, std::abs(G_(k, i)));
    return m;
}

std::vector<double> project_to_basis(const GpcBasis& basis, const std::function<double(double)>& g)
{
    const int K = basis.modes();
    const auto& q = basis.quad();
    std::vector<double> c(K, 0.0), v(K);
    for (std::size_t m = 0; m < q.nodes.size(); ++m) {
        basis.psi_all(q.nodes[m], v.data());
        double gw = g(q.nodes[m]) * q.weights[m];
        for (int k = 0; k < K; ++k)
            c[k] += gw * v[k];
    }
    return c;
}

std::vector<double> chebyshev_extrema(int n)
{
    std::vector<double> z(n);
    for (int j = 0; j < n; ++j)
        z[j] = -std::cos(std::numbers::pi * j / (n - 1));
    z[0] = -1.0;
    z[n - 1] = 1.0;
    return z;
}

}
