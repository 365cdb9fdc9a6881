#include "doctest.h"
#include "sgk/collision.hpp"

#include <cmath>
#include <random>

using namespace sgk;

namespace {

double wdot(const PhaseGrid& g, const std::vector<double>& a, const std::vector<double>& b)
{
    double s = 0;
    for (int i = 0; i < g.nvel(); ++i)
        s += g.w()[i] * a[i] * b[i];
    return s;
}

std::vector<double> randvec(int n, std::mt19937_64& rng)
{
    std::normal_distribution<double> nd;
    std::vector<double> v(n);
    for (auto& x : v)
        x = nd(rng);
    return v;
}

// decaying random perturbation, h = M * (smooth random)
std::vector<double> randpert(const PhaseGrid& g, std::mt19937_64& rng)
{
    auto v = randvec(g.nvel(), rng);
    for (int i = 0; i < g.nvel(); ++i)
        v[i] *= g.sqrt_maxw()[i];
    return v;
}

const CollisionModel& boltz()
{
    static KernelSpec k{0.0, 1.0, 1.0, 0.3, 0.2, -0.4, 16};
    static CollisionModel m(std::make_shared<PhaseGrid>(2, 2, 17, 7.0), ModelKind::boltzmann_full, k);
    return m;
}

}

TEST_CASE("kernel validation")
{
    KernelSpec k;
    k.beta0 = 1.0;
    k.xi = 1.5;   // b0 + b1 z < 0 at z = -1
    CHECK_THROWS_AS(k.validate(2), std::invalid_argument);
    k.xi = 0.5;
    auto bd = k.validate(2);
    CHECK(bd.min_b >= 0);
    CHECK(bd.max_abs_b == doctest::Approx(1.5 / (2 * M_PI)));
    k.c_b = 0.1;
    CHECK_THROWS_AS(k.validate(2), std::invalid_argument);
    k.c_b = 0;
    k.c_b_star = 0.01;
    CHECK_THROWS_AS(k.validate(2), std::invalid_argument);
    KernelSpec g;
    g.gamma = 1.5;
    CHECK_THROWS_AS(g.validate(2), std::invalid_argument);
    CHECK_THROWS_AS(parse_model_kind("landau"), std::invalid_argument);
}

TEST_CASE("collision frequency")
{
    auto g = std::make_shared<PhaseGrid>(2, 2, 17, 7.0);
    KernelSpec k;
    CollisionModel m(g, ModelKind::linearized_boltzmann, k);
    Eigen::VectorXd nu = m.collision_frequency(0.3);
    for (int i = 0; i < g->nvel(); ++i)
        CHECK(std::abs(nu[i] - 1.0) <= 1e-10);

    KernelSpec kz{0.0, 1.0, 1.0, 0.0, 0.3, 0.5, 16};
    CollisionModel mz(g, ModelKind::linearized_boltzmann, kz);
    // affine in z: fit through z = -1, 1 and check three more points
    Eigen::VectorXd a = mz.collision_frequency(-1.0), b = mz.collision_frequency(1.0);
    for (double z : {-0.5, 0.0, 0.7}) {
        Eigen::VectorXd p = 0.5 * (1 - z) * a + 0.5 * (1 + z) * b;
        CHECK((mz.collision_frequency(z) - p).cwiseAbs().maxCoeff() <= 1e-12);
    }

    // hard-sphere-like: nu(0) = angular mass * int |v*| M dv* = sqrt(pi/2)
    auto g25 = std::make_shared<PhaseGrid>(2, 2, 25, 8.0);
    KernelSpec k1;
    k1.gamma = 1.0;
    k1.beta0 = 2.0;
    CollisionModel m1(g25, ModelKind::linearized_boltzmann, k1);
    int center = 12 * 25 + 12;
    CHECK(g25->speed2(center) == 0.0);
    double exact = 2.0 * std::sqrt(M_PI / 2);
    double e25 = std::abs(m1.nu0()[center] - exact);
    CHECK(e25 <= 1.5e-2 * exact);
    auto g49 = std::make_shared<PhaseGrid>(2, 2, 49, 8.0);
    CollisionModel m49(g49, ModelKind::relaxation, k1);
    // same quadrature, refined: error decreases
    double s = 0;
    for (int i = 0; i < g49->nvel(); ++i)
        s += g49->w()[i] * std::sqrt(g49->speed2(i)) * g49->maxw()[i];
    CHECK(std::abs(2.0 * s - exact) < 0.25 * e25);
    for (int i = 0; i < g25->nvel(); ++i)
        CHECK(m1.nu0()[i] > 0);
}

TEST_CASE("linear operators: null space, symmetry, dissipativity")
{
    std::vector<CollisionModel> models;
    KernelSpec k{0.0, 1.0, 1.0, 0.3, 0.2, -0.4, 16};
    auto g1 = std::make_shared<PhaseGrid>(2, 1, 48, 8.0);
    auto g2 = std::make_shared<PhaseGrid>(2, 2, 17, 7.0);
    models.emplace_back(g1, ModelKind::relaxation, k);
    models.emplace_back(g2, ModelKind::relaxation, k);
    models.emplace_back(g1, ModelKind::fokker_planck, k);
    models.emplace_back(g2, ModelKind::fokker_planck, k);
    std::mt19937_64 rng(41);
    for (const auto& m : models) {
        INFO(model_kind_name(m.kind()), " dv=", m.grid().dim_v());
        const auto& g = m.grid();
        int n = g.nvel();
        CHECK(m.null_space().dim() == (m.kind() == ModelKind::fokker_planck ? 1 : g.dim_v() + 2));
        std::vector<double> out(n), out2(n);
        for (int i = 0; i < m.null_space().dim(); ++i)
            for (double z : {-1.0, 0.0, 1.0}) {
                m.apply_L(m.null_space().phi(i).data(), z, out.data());
                CHECK(std::sqrt(wdot(g, out, out)) <= 1e-8);
            }
        for (int t = 0; t < 20; ++t) {
            auto h = randvec(n, rng), f = randvec(n, rng);
            double hn = std::sqrt(wdot(g, h, h));
            for (double z : {-0.8, 0.5}) {
                m.apply_L(h.data(), z, out.data());
                m.apply_L_direct(h.data(), z, out2.data());
                double diff = 0, mx = 0;
                for (int i = 0; i < n; ++i) {
                    diff = std::max(diff, std::abs(out[i] - out2[i]));
                    mx = std::max(mx, std::abs(out[i]));
                }
                CHECK(diff <= 1e-10 * mx);
                CHECK(wdot(g, out, h) <= 1e-12 * hn * hn);
                std::vector<double> lf(n);
                m.apply_L(f.data(), z, lf.data());
                CHECK(std::abs(wdot(g, out, f) - wdot(g, h, lf)) <= 1e-8 * hn * std::sqrt(wdot(g, f, f)));
                for (int i = 0; i < m.null_space().dim(); ++i)
                    CHECK(std::abs(wdot(g, out, m.null_space().phi(i))) <= 1e-8 * hn);
            }
        }
        // relaxation: h perp N(L) -> L h = -h
        if (m.kind() == ModelKind::relaxation) {
            auto h = randvec(n, rng);
            std::vector<double> p(n);
            m.null_space().project(h.data(), p.data());
            for (int i = 0; i < n; ++i)
                h[i] -= p[i];
            m.apply_L(h.data(), 0.0, out.data());
            for (int i = 0; i < n; ++i)
                CHECK(std::abs(out[i] + h[i]) <= 1e-12 * (1 + std::abs(h[i])));
        }
    }
}

TEST_CASE("Boltzmann linearization")
{
    const auto& m = boltz();
    const auto& g = m.grid();
    int n = g.nvel();
    CHECK(m.null_space().dim() == 4);
    CHECK(m.table()->size() > 100000);
    std::vector<double> out(n), out2(n);
    for (int i = 0; i < 4; ++i)
        for (double z : {-1.0, 0.0, 1.0}) {
            m.apply_L(m.null_space().phi(i).data(), z, out.data());
            CHECK(std::sqrt(wdot(g, out, out)) <= 1e-8);
        }
    std::mt19937_64 rng(43);
    for (int t = 0; t < 5; ++t) {
        auto h = randvec(n, rng);
        for (double z : {-0.6, 0.9}) {
            m.apply_L(h.data(), z, out.data());
            m.apply_L_direct(h.data(), z, out2.data());
            double diff = 0, mx = 0;
            for (int i = 0; i < n; ++i) {
                diff = std::max(diff, std::abs(out[i] - out2[i]));
                mx = std::max(mx, std::abs(out[i]));
            }
            CHECK(diff <= 1e-10 * mx);
        }
    }
    // z-affinity
    Eigen::MatrixXd a = m.L(-1.0), b = m.L(0.0), c = m.L(1.0);
    for (double z : {-0.3, 0.45}) {
        Eigen::MatrixXd interp = b + 0.5 * z * (c - a);
        CHECK((m.L(z) - interp).cwiseAbs().maxCoeff() <= 1e-12 * a.cwiseAbs().maxCoeff());
    }
    // Lambda diagonal positive; K = L + Lambda
    Eigen::MatrixXd K = m.Kmat(0.2);
    CHECK((K - m.L(0.2) - m.Lambda(0.2)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(m.collision_frequency(0.2).minCoeff() > 0);
}

TEST_CASE("nonlinear term F")
{
    const auto& m = boltz();
    const auto& g = m.grid();
    int n = g.nvel();
    std::vector<double> zero(n, 0.0), out(n), out2(n);
    m.apply_F(zero.data(), zero.data(), 0.4, out.data());
    for (double x : out)
        CHECK(x == 0.0);
    std::mt19937_64 rng(47);
    for (int t = 0; t < 5; ++t) {
        auto gv = randvec(n, rng), hv = randvec(n, rng);
        m.apply_F(gv.data(), hv.data(), 0.3, out.data());
        m.apply_F(hv.data(), gv.data(), 0.3, out2.data());
        CHECK(out == out2);
        double nn = std::sqrt(wdot(g, gv, gv) * wdot(g, hv, hv));
        for (int i = 0; i < 4; ++i)
            CHECK(std::abs(wdot(g, out, m.null_space().phi(i))) <= 1e-6 * nn);
    }
    // F is the second-order term of Q around the Maxwellian
    auto h = randpert(g, rng);
    std::vector<double> F(n), Lh(n), q(n), f(n);
    double z = -0.5;
    m.apply_F(h.data(), h.data(), z, F.data());
    m.apply_L(h.data(), z, Lh.data());
    double eps = 1e-3;
    for (int i = 0; i < n; ++i)
        f[i] = g.maxw()[i] + eps * g.sqrt_maxw()[i] * h[i];
    m.apply_Q(f.data(), z, q.data());
    double err = 0, ref = 0;
    for (int i = 0; i < n; ++i) {
        double est = (q[i] / g.sqrt_maxw()[i] - eps * Lh[i]) / (eps * eps);
        err = std::max(err, std::abs(est - F[i]) * g.sqrt_maxw()[i]);
        ref = std::max(ref, std::abs(F[i]) * g.sqrt_maxw()[i]);
    }
    CHECK(err <= 1e-2 * ref);
}

TEST_CASE("full collision operator")
{
    const auto& m = boltz();
    const auto& g = m.grid();
    int n = g.nvel();
    std::vector<double> q(n);
    m.apply_Q(g.maxw().data(), 0.7, q.data());
    for (double x : q)
        CHECK(std::abs(x) <= 1e-7);
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> f(n);
        for (int i = 0; i < n; ++i)
            f[i] = u(rng) * std::exp(-0.1 * g.speed2(i));
        double z = -1.0 + 2.0 * t / 49.0;
        m.apply_Q(f.data(), z, q.data());
        double mass = 0, px = 0, py = 0, en = 0, ent = 0, f2 = 0;
        for (int i = 0; i < n; ++i) {
            double w = g.w()[i];
            mass += w * q[i];
            px += w * q[i] * g.v(i, 0);
            py += w * q[i] * g.v(i, 1);
            en += w * q[i] * g.speed2(i);
            ent -= w * q[i] * std::log(f[i]);
            f2 += w * f[i] * f[i];
        }
        CHECK(std::abs(mass) <= 1e-6 * f2);
        CHECK(std::abs(px) <= 1e-6 * f2);
        CHECK(std::abs(py) <= 1e-6 * f2);
        CHECK(std::abs(en) <= 1e-6 * f2);
        CHECK(ent >= -1e-8);
    }
    std::vector<double> bad(n, 0.1);
    bad[5] = -1e-3;
    CHECK_THROWS_AS(m.apply_Q(bad.data(), 0.0, q.data()), std::invalid_argument);
    auto rel = CollisionModel(std::make_shared<PhaseGrid>(2, 1, 48, 8.0), ModelKind::relaxation, KernelSpec{});
    CHECK_THROWS_AS(rel.apply_Q(bad.data(), 0.0, q.data()), std::invalid_argument);
    CHECK_THROWS_AS(CollisionModel(std::make_shared<PhaseGrid>(2, 1, 48, 8.0), ModelKind::linearized_boltzmann,
                                   KernelSpec{}),
                    std::invalid_argument);
}

TEST_CASE("assumption audits")
{
    AuditOptions opt;
    opt.samples = 200;
    auto rel = CollisionModel(std::make_shared<PhaseGrid>(2, 1, 48, 8.0), ModelKind::relaxation, KernelSpec{});
    auto items = audit_assumptions(rel, opt);
    bool found = false;
    for (const auto& it : items) {
        INFO(it.assumption, " ", it.fitted_constant, " ", it.detail);
        CHECK(it.pass);
        if (it.assumption == "H3 local coercivity") {
            found = true;
            CHECK(std::abs(it.fitted_constant - 1.0) <= 1e-10);
        }
    }
    CHECK(found);
    opt.f_samples = 3;
    for (const auto& it : audit_assumptions(boltz(), opt)) {
        INFO(it.assumption, " ", it.fitted_constant, " ", it.detail);
        CHECK(it.pass);
    }
}
