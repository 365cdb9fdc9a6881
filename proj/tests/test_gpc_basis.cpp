#include "doctest.h"
#include "sgk/gpc_basis.hpp"

#include <cmath>
#include <random>

using namespace sgk;

TEST_CASE("build_basis rejects bad arguments")
{
    CHECK_THROWS_AS(GpcBasis(Family::legendre, 0), std::invalid_argument);
    CHECK_THROWS_AS(GpcBasis(Family::legendre, 4, 7), std::invalid_argument);
    CHECK_NOTHROW(GpcBasis(Family::legendre, 4, 8));
    CHECK_THROWS_AS(parse_family("hermite"), std::invalid_argument);
}

TEST_CASE("low-order polynomials")
{
    GpcBasis L1(Family::legendre, 1);
    CHECK(L1.psi(1, 0.3) == 1.0);
    GpcBasis L(Family::legendre, 4);
    for (double z : {-1.0, -0.4, 0.0, 0.7, 1.0})
        CHECK(L.psi(2, z) == doctest::Approx(std::sqrt(3.0) * z).epsilon(1e-15));
    CHECK(L.psi(3, 0.5) == doctest::Approx(std::sqrt(5.0) * (1.5 * 0.25 - 0.5)).epsilon(1e-14));
    GpcBasis C(Family::chebyshev, 3);
    for (double z : {-0.9, 0.2, 1.0})
        CHECK(C.psi(2, z) == doctest::Approx(std::sqrt(2.0) * z).epsilon(1e-15));
    CHECK(C.psi(3, 0.3) == doctest::Approx(std::sqrt(2.0) * (2 * 0.09 - 1)).epsilon(1e-14));
}

TEST_CASE("weights integrate to one and Gram matrix is identity")
{
    for (Family f : {Family::legendre, Family::chebyshev}) {
        for (int K : {1, 5, 12, 24}) {
            GpcBasis b(f, K);
            double s = 0;
            for (double w : b.quad().weights)
                s += w;
            CHECK(std::abs(s - 1.0) <= 1e-12);
            std::vector<double> v(K);
            std::vector<double> gram(K * K, 0.0);
            for (std::size_t m = 0; m < b.quad().nodes.size(); ++m) {
                b.psi_all(b.quad().nodes[m], v.data());
                for (int j = 0; j < K; ++j)
                    for (int k = 0; k < K; ++k)
                        gram[j * K + k] += b.quad().weights[m] * v[j] * v[k];
            }
            double res = 0;
            for (int j = 0; j < K; ++j)
                for (int k = 0; k < K; ++k)
                    res = std::max(res, std::abs(gram[j * K + k] - (j == k ? 1.0 : 0.0)));
            CHECK(res <= 1e-12);
        }
    }
    // Legendre weight is 1/2 pointwise; Chebyshev integrates to 1 by midpoint in theta
    GpcBasis L(Family::legendre, 2);
    CHECK(L.weight(0.3) == 0.5);
    GpcBasis C(Family::chebyshev, 2);
    double s = 0;
    int n = 200000;
    for (int i = 0; i < n; ++i) {
        double th = M_PI * (i + 0.5) / n;
        s += C.weight(std::cos(th)) * std::sin(th) * M_PI / n;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("recurrence coefficients are the closed forms")
{
    GpcBasis L(Family::legendre, 6);
    CHECK(L.recurrence(1) == doctest::Approx(1.0 / std::sqrt(3.0)));
    CHECK(L.recurrence(2) == doctest::Approx(2.0 / std::sqrt(15.0)));
    GpcBasis C(Family::chebyshev, 6);
    CHECK(C.recurrence(1) == doctest::Approx(std::sqrt(0.5)));
    CHECK(C.recurrence(4) == 0.5);
}

TEST_CASE("Gauss rules integrate monomials exactly")
{
    for (Family f : {Family::legendre, Family::chebyshev}) {
        int n = 9;
        Quadrature q = gauss_rule(f, n);
        for (int p = 0; p <= 2 * n - 1; ++p) {
            double s = 0;
            for (int i = 0; i < n; ++i)
                s += q.weights[i] * std::pow(q.nodes[i], p);
            double exact = 0;
            if (p % 2 == 0) {
                if (f == Family::legendre)
                    exact = 1.0 / (p + 1);
                else {
                    // (p-1)!! / p!!
                    exact = 1.0;
                    for (int k = 1; k <= p; k += 2)
                        exact *= static_cast<double>(k) / (k + 1);
                }
            }
            CHECK(std::abs(s - exact) <= 1e-14);
        }
    }
}

TEST_CASE("sup-norm growth exponents")
{
    GrowthFit l = sup_norm_growth(GpcBasis(Family::legendre, 16), 16);
    CHECK(l.sup[0] == 1.0);
    CHECK(l.sup[4] == doctest::Approx(3.0).epsilon(1e-12));
    // numpy oracle for the slope over k = 2..16
    CHECK(l.p == doctest::Approx(0.5532633311778485).epsilon(1e-9));
    CHECK(l.p >= 0.4);
    CHECK(l.p <= 0.6);
    GrowthFit c = sup_norm_growth(GpcBasis(Family::chebyshev, 16), 16);
    CHECK(std::abs(c.p) <= 0.05);
    CHECK(c.sup[3] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("Jacobi matrix")
{
    GpcBasis L(Family::legendre, 6);
    auto G = jacobi_matrix(L);
    CHECK(G(0, 1) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(G(1, 2) == doctest::Approx(2.0 / std::sqrt(15.0)).epsilon(1e-14));
    CHECK(std::abs(G(0, 2)) <= 1e-15);
    for (int k = 0; k < 6; ++k) {
        CHECK(std::abs(G(k, k)) <= 1e-15);
        for (int i = 0; i < 6; ++i) {
            CHECK(G(k, i) == G(i, k));
            if (std::abs(k - i) > 1)
                CHECK(std::abs(G(k, i)) <= 1e-12);
        }
    }
    GpcBasis C(Family::chebyshev, 5);
    auto Gc = jacobi_matrix(C);
    CHECK(Gc(0, 1) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
    CHECK(Gc(2, 3) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("triple tensors: values, symmetry, sparsity")
{
    GpcBasis L(Family::legendre, 6);
    CouplingTensors T(L);
    CHECK(std::abs(T.T0(2, 2, 2)) <= 1e-15);
    CHECK(T.T1(2, 2, 2) == doctest::Approx(3.0 * std::sqrt(3.0) / 5.0).epsilon(1e-13));
    CHECK(T.T0(2, 3, 4) == doctest::Approx(0.8783100656536786).epsilon(1e-13));
    CHECK(T.T1(2, 3, 3) == doctest::Approx(0.9072647087265537).epsilon(1e-13));
    for (int i = 1; i <= 6; ++i)
        for (int j = 1; j <= 6; ++j)
            CHECK(std::abs(T.T0(1, i, j) - (i == j ? 1.0 : 0.0)) <= 1e-13);

    GpcBasis C(Family::chebyshev, 6);
    CouplingTensors Tc(C);
    CHECK(Tc.T0(3, 3, 5) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-13));

    for (Family f : {Family::legendre, Family::chebyshev}) {
        int K = 10;
        GpcBasis b(f, K);
        CouplingTensors t(b);
        double asym = 0, off0 = 0, off1 = 0;
        for (int k = 1; k <= K; ++k)
            for (int i = 1; i <= K; ++i)
                for (int j = 1; j <= K; ++j) {
                    int p[6][3] = {{k, i, j}, {k, j, i}, {i, k, j}, {i, j, k}, {j, k, i}, {j, i, k}};
                    for (auto& q : p) {
                        asym = std::max(asym, std::abs(t.T0(k, i, j) - t.T0(q[0], q[1], q[2])));
                        asym = std::max(asym, std::abs(t.T1(k, i, j) - t.T1(q[0], q[1], q[2])));
                    }
                    if (!triple_allowed(k, i, j, 0))
                        off0 = std::max(off0, std::abs(t.T0(k, i, j)));
                    if (!triple_allowed(k, i, j, 1))
                        off1 = std::max(off1, std::abs(t.T1(k, i, j)));
                }
        CHECK(asym <= 1e-13);
        CHECK(off0 <= 1e-12);
        CHECK(off1 <= 1e-12);
        CHECK(t.off_band() <= 1e-12);
    }
}

TEST_CASE("assembled coupling views and the tensor bound")
{
    for (Family f : {Family::legendre, Family::chebyshev}) {
        const int K = 8;
        GpcBasis b(f, K);
        CouplingTensors t(b);
        auto S = t.s_tilde(0.7, 0.2);
        CHECK(S(0, 0) == doctest::Approx(0.7));
        CHECK(S(0, 1) == doctest::Approx(0.2 * t.G()(0, 1)));
        // |S_mnk(c)| / n^p <= C (C_b + xi C_z) with C = max_k |psi_k|_inf / k^p
        double p = b.nominal_growth();
        GrowthFit g = sup_norm_growth(b, K);
        double C = 0;
        for (int k = 1; k <= K; ++k)
            C = std::max(C, g.sup[k - 1] / std::pow(k, p));
        double xi = 0.3;
        double worst = 0;
        for (int ic = 0; ic <= 20; ++ic) {
            double c = -1 + 0.1 * ic;
            double b0 = (1 + 0.5 * c) / (2 * M_PI), b1 = xi * (1 + 0.2 * c) / (2 * M_PI);
            double Cb = 0;
            for (double z : {-1.0, 1.0})
                Cb = std::max(Cb, std::abs(b0 + b1 * z));
            double bound = C * (Cb + std::abs(b1));
            for (int m = 1; m <= K; ++m)
                for (int n = 1; n <= K; ++n)
                    for (int k = 1; k <= K; ++k)
                        worst = std::max(worst, std::abs(t.s_triple(b0, b1, m, n, k)) / std::pow(n, p) / bound);
        }
        CHECK(worst <= 1.0);
    }
}

TEST_CASE("projection")
{
    GpcBasis L(Family::legendre, 5);
    auto one = project_to_basis(L, [](double) { return 1.0; });
    CHECK(one[0] == doctest::Approx(1.0).epsilon(1e-15));
    for (int k = 1; k < 5; ++k)
        CHECK(std::abs(one[k]) <= 1e-14);
    auto lin = project_to_basis(L, [](double z) { return z; });
    CHECK(lin[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
    auto last = project_to_basis(L, [&](double z) { return L.psi(5, z); });
    for (int k = 0; k < 5; ++k)
        CHECK(std::abs(last[k] - (k == 4 ? 1.0 : 0.0)) <= 1e-13);

    for (Family f : {Family::legendre, Family::chebyshev}) {
        const int K = 7;
        GpcBasis b(f, K);
        auto poly = [](double z) { return 0.3 - z + 2 * z * z * z - 0.5 * std::pow(z, 6); };
        auto c = project_to_basis(b, poly);
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(-1, 1);
        std::vector<double> v(K);
        double err = 0;
        for (int i = 0; i < 100; ++i) {
            double z = u(rng);
            b.psi_all(z, v.data());
            double s = 0;
            for (int k = 0; k < K; ++k)
                s += c[k] * v[k];
            err = std::max(err, std::abs(s - poly(z)));
        }
        CHECK(err <= 1e-12);
    }
}
