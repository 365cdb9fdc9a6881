#include "doctest.h"
#include "sgk/phase_space.hpp"

#include <cmath>
#include <cstdio>
#include <random>

using namespace sgk;

namespace {

GridPtr grid1(int nx = 8, int nv = 64, double lv = 8.0)
{
    return std::make_shared<PhaseGrid>(nx, 1, nv, lv);
}

Field random_field(const GridPtr& g, std::mt19937_64& rng)
{
    std::normal_distribution<double> nd;
    Field h(g);
    double c[3][4];
    for (auto& r : c)
        for (auto& x : r)
            x = nd(rng);
    for (int ix = 0; ix < g->nx(); ++ix)
        for (int iv = 0; iv < g->nvel(); ++iv) {
            double x = g->x(ix), v1 = g->v(iv, 0);
            double s = 0;
            for (int k = 0; k < 3; ++k)
                s += (c[k][0] * std::cos(k * x) + c[k][1] * std::sin(k * x)) * (c[k][2] + c[k][3] * v1 + 0.3 * v1 * v1 * c[k][0]);
            h.at(ix, iv) = s * g->sqrt_maxw()[iv] + 1e-3 * nd(rng) * g->sqrt_maxw()[iv];
        }
    return h;
}

}

TEST_CASE("grid validation")
{
    CHECK_THROWS_AS(PhaseGrid(6, 1, 64, 8.0), std::invalid_argument);
    CHECK_THROWS_AS(PhaseGrid(8, 3, 64, 8.0), std::invalid_argument);
    CHECK_THROWS_AS(PhaseGrid(8, 1, 12, 8.0), std::invalid_argument);   // dv > lv/8
    CHECK_THROWS_AS(PhaseGrid(8, 1, 64, 3.0), std::invalid_argument);   // mass deficit
    CHECK_NOTHROW(PhaseGrid(8, 2, 24, 8.0));
}

TEST_CASE("Maxwellian")
{
    auto g = grid1(4, 65, 8.0);
    auto m = maxwellian(*g);
    CHECK(m.mm[32] == doctest::Approx(0.3989422804014327).epsilon(1e-15));
    CHECK(std::abs(1.0 - m.mass) <= 1e-10);
    double m1 = 0, m2 = 0;
    for (int i = 0; i < g->nvel(); ++i) {
        m1 += g->w()[i] * g->v(i, 0) * m.mm[i];
        m2 += g->w()[i] * g->speed2(i) * m.mm[i];
        CHECK(m.mm[i] > 0);
        CHECK(m.m[i] * m.m[i] == doctest::Approx(m.mm[i]).epsilon(1e-14));
    }
    CHECK(std::abs(m1) <= 1e-12);
    CHECK(std::abs(m2 - 1.0) <= 1e-8);
    PhaseGrid g2(4, 2, 24, 8.0);
    double e2 = 0;
    for (int i = 0; i < g2.nvel(); ++i)
        e2 += g2.w()[i] * g2.speed2(i) * g2.maxw()[i];
    CHECK(std::abs(e2 - 2.0) <= 1e-8);
}

TEST_CASE("perturbation round trip")
{
    auto g = grid1();
    std::mt19937_64 rng(3);
    Field h = random_field(g, rng);
    for (double eps : {1.0, 0.1}) {
        Field back = to_perturbation(to_distribution(h, eps), eps);
        double err = 0, mx = 0;
        for (std::size_t i = 0; i < h.data.size(); ++i) {
            err = std::max(err, std::abs(back.data[i] - h.data[i]));
            mx = std::max(mx, std::abs(h.data[i]));
        }
        CHECK(err <= 1e-14 * std::max(1.0, mx) / eps);
    }
    CHECK_THROWS(to_perturbation(h, 0.1));
}

TEST_CASE("fluid projection")
{
    auto g = grid1(4, 65, 8.0);
    NullSpace ns(*g, true);
    CHECK(ns.dim() == 3);
    const auto& M = g->sqrt_maxw();
    Field h(g), v3(g), herm(g);
    for (int ix = 0; ix < g->nx(); ++ix)
        for (int iv = 0; iv < g->nvel(); ++iv) {
            double v = g->v(iv, 0);
            h.at(ix, iv) = M[iv];
            v3.at(ix, iv) = v * v * v * M[iv];
            herm.at(ix, iv) = (v * v * v - 3 * v) * M[iv];
        }
    Field p = pi_L(h, ns);
    for (std::size_t i = 0; i < h.data.size(); ++i)
        CHECK(std::abs(p.data[i] - h.data[i]) <= 1e-12);
    Field p3 = pi_L(v3, ns);
    double err = 0;
    for (int ix = 0; ix < g->nx(); ++ix)
        for (int iv = 0; iv < g->nvel(); ++iv)
            err = std::max(err, std::abs(p3.at(ix, iv) - 3 * g->v(iv, 0) * M[iv]));
    CHECK(err <= 1e-8);
    Field ph = pi_L(herm, ns);
    for (double x : ph.data)
        CHECK(std::abs(x) <= 1e-8);
    Field mh = micro_part(herm, ns);
    for (std::size_t i = 0; i < mh.data.size(); ++i)
        CHECK(std::abs(mh.data[i] - herm.data[i]) <= 1e-8);
    Field mn = micro_part(h, ns);
    for (double x : mn.data)
        CHECK(std::abs(x) <= 1e-12);

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        Field r = random_field(g, rng);
        Field rp = micro_part(r, ns);
        Field pp = pi_L(rp, ns);
        double n = l2norm(r);
        CHECK(l2norm(pp) <= 1e-10 * n);
        Field pl = pi_L(r, ns);
        CHECK(std::abs(inner(pl, rp)) <= 1e-10 * n * n);
        Field pl2 = pi_L(pl, ns);
        for (std::size_t i = 0; i < pl.data.size(); ++i)
            CHECK(std::abs(pl2.data[i] - pl.data[i]) <= 1e-12 * n);
        // self-adjoint
        Field s = random_field(g, rng);
        CHECK(std::abs(inner(pi_L(r, ns), s) - inner(r, pi_L(s, ns))) <= 1e-12 * n * l2norm(s));
        CHECK(std::abs(inner(pi_G(r, ns), s) - inner(r, pi_G(s, ns))) <= 1e-12 * n * l2norm(s));
        Field g1 = pi_G(r, ns), g2 = pi_G(g1, ns);
        for (std::size_t i = 0; i < g1.data.size(); ++i)
            CHECK(std::abs(g2.data[i] - g1.data[i]) <= 1e-12 * n);
    }
    Field c(g);
    for (int ix = 0; ix < g->nx(); ++ix)
        for (int iv = 0; iv < g->nvel(); ++iv)
            c.at(ix, iv) = std::cos(g->x(ix)) * M[iv];
    for (double x : pi_G(c, ns).data)
        CHECK(std::abs(x) <= 1e-12);
    Field gm = pi_G(h, ns);
    for (std::size_t i = 0; i < h.data.size(); ++i)
        CHECK(std::abs(gm.data[i] - h.data[i]) <= 1e-12);
}

TEST_CASE("norms")
{
    auto g = grid1(16, 64, 8.0);
    Field z(g);
    auto n0 = norms(z, 2, 1.0);
    CHECK(n0.l2 == 0);
    CHECK(n0.hs == 0);
    CHECK(n0.lambda == 0);
    CHECK(n0.hs_lambda == 0);
    CHECK_THROWS_AS(norms(z, 3, 0.0), std::invalid_argument);

    std::mt19937_64 rng(11);
    Field r = random_field(g, rng);
    auto nr = norms(r, 1, 0.0);
    CHECK(nr.lambda == nr.l2);
    CHECK(nr.hs_lambda == nr.hs);

    const auto& M = g->sqrt_maxw();
    Field s(g), c(g);
    for (int ix = 0; ix < g->nx(); ++ix)
        for (int iv = 0; iv < g->nvel(); ++iv) {
            double gv = (1 + g->v(iv, 0)) * M[iv];
            s.at(ix, iv) = std::sin(g->x(ix)) * gv;
            c.at(ix, iv) = std::cos(g->x(ix)) * gv;
        }
    CHECK(std::abs(l2norm(dx_field(s)) - l2norm(c)) <= 1e-10);
    // v-derivative of the Maxwellian profile: d/dv (v M) = (1 - v^2/2) M
    Field vm(g), dvm(g);
    for (int ix = 0; ix < g->nx(); ++ix)
        for (int iv = 0; iv < g->nvel(); ++iv) {
            double v = g->v(iv, 0);
            vm.at(ix, iv) = v * M[iv];
            dvm.at(ix, iv) = (1 - 0.5 * v * v) * M[iv];
        }
    Field d = dv_field(vm, 0);
    double err = 0;
    for (std::size_t i = 0; i < d.data.size(); ++i)
        err = std::max(err, std::abs(d.data[i] - dvm.data[i]));
    CHECK(err <= 5e-4);
    // nonnegative and zero only at zero
    CHECK(norms(r, 2, 1.0).hs_lambda > norms(r, 2, 0.0).hs);
}

TEST_CASE("hypocoercivity functional")
{
    auto g = std::make_shared<PhaseGrid>(8, 2, 20, 7.0);
    NullSpace ns(*g, true);
    FunctionalWeights w;
    CHECK_THROWS_AS(HypoFunctional(*g, ns, FunctionalWeights{1, 1, 1, 4.5}, 1.0), std::invalid_argument);
    HypoFunctional eta(*g, ns, w, 1.0);
    Field z(g);
    CHECK(eta(z) == 0.0);
    std::mt19937_64 rng(17);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 100; ++trial) {
        Field h(g);
        for (auto& x : h.data)
            x = nd(rng);
        if (trial % 2)
            h = random_field(g, rng);
        double v = eta(h), n1 = h1_norm_sq(h);
        CHECK(v >= 0);
        CHECK(eta.kappa1() * n1 <= v);
        CHECK(v <= eta.kappa2() * n1);
    }
    // a = 0: three independent squared norms
    FunctionalWeights w0{2.0, 3.0, 0.5, 0.0};
    HypoFunctional eta0(*g, ns, w0, 1.0);
    Field h = random_field(g, rng);
    Field hx = dx_field(h), hp = micro_part(h, ns);
    double p2 = 0;
    for (int a = 0; a < 2; ++a) {
        Field d = dv_field(hp, a);
        p2 += inner(d, d);
    }
    CHECK(eta0(h) == doctest::Approx(2.0 * inner(h, h) + 3.0 * inner(hx, hx) + 0.5 * p2).epsilon(1e-13));
    // mixing term is linear in eps
    double m1 = HypoFunctional(*g, ns, w, 1.0).terms(h)[3];
    for (double eps : {0.1, 0.01}) {
        double me = HypoFunctional(*g, ns, w, eps).terms(h)[3];
        CHECK(me == doctest::Approx(eps * m1).epsilon(1e-12));
    }
}

TEST_CASE("energy and reconstruction")
{
    auto g = grid1(8, 48, 8.0);
    auto b = std::make_shared<GpcBasis>(Family::legendre, 4);
    GpcField hk(b, g);
    CHECK(energy_ek(hk, 3, 1) == 0.0);
    std::mt19937_64 rng(23);
    Field r = random_field(g, rng);
    double n = hs_norm(r, 1);
    for (auto& x : r.data)
        x /= n;
    hk.modes[0] = r;
    CHECK(energy_ek(hk, 3, 1) == doctest::Approx(1.0).epsilon(1e-12));
    hk.modes[0] = Field(g);
    hk.modes[1] = r;
    CHECK(energy_ek(hk, 3, 1) == doctest::Approx(64.0).epsilon(1e-12));
    CHECK(energy_exponent_warning(*b, 3.0) == std::nullopt);
    CHECK(energy_exponent_warning(*b, 2.5).has_value());
    CHECK(energy_exponent_warning(GpcBasis(Family::chebyshev, 2), 2.5) == std::nullopt);

    auto b1 = std::make_shared<GpcBasis>(Family::legendre, 1);
    GpcField one(b1, g);
    one.modes[0] = r;
    Field rz = reconstruct(one, 0.37);
    CHECK(rz.data == r.data);
    CHECK_THROWS_AS(reconstruct(one, 1.5), std::invalid_argument);

    // projection of g(z) phi(x,v) matches g at the nodes up to the projection error
    auto b6 = std::make_shared<GpcBasis>(Family::legendre, 10);
    auto coef = project_to_basis(*b6, [](double z) { return std::exp(z); });
    GpcField e(b6, g);
    for (int k = 0; k < 10; ++k)
        for (std::size_t i = 0; i < r.data.size(); ++i)
            e.modes[k].data[i] = coef[k] * r.data[i];
    for (double z : {-0.9, 0.1, 0.8}) {
        Field f = reconstruct(e, z);
        for (std::size_t i = 0; i < f.data.size(); ++i)
            CHECK(std::abs(f.data[i] - std::exp(z) * r.data[i]) <= 1e-9 * (1 + std::abs(r.data[i])));
    }

    // Parseval
    GpcField p(b, g);
    double sum = 0;
    for (int k = 0; k < 4; ++k) {
        p.modes[k] = random_field(g, rng);
        double hn = hs_norm(p.modes[k], 1);
        sum += hn * hn;
    }
    ZNorms zn = z_norms(p, 1);
    CHECK(zn.l2z * zn.l2z == doctest::Approx(sum).epsilon(1e-12));
    CHECK(zn.modal * zn.modal == doctest::Approx(sum).epsilon(1e-12));
    CHECK(zn.linfz >= zn.l2z);
    ZNorms z0 = z_norms(p, 0);
    double direct = 0;
    const auto& q = b->quad();
    for (std::size_t m = 0; m < q.nodes.size(); ++m) {
        Field f = reconstruct(p, q.nodes[m]);
        direct += q.weights[m] * inner(f, f);
    }
    CHECK(std::abs(direct - z0.l2z * z0.l2z) <= 1e-10 * direct);
}

TEST_CASE("serialization")
{
    auto g = std::make_shared<PhaseGrid>(4, 2, 17, 7.0);
    std::mt19937_64 rng(29);
    Field r = random_field(g, rng);
    std::string path = "sgk_field_roundtrip.bin";
    write_binary(r, path);
    Field back = read_binary(path);
    CHECK(back.data == r.data);
    CHECK(back.grid->same_as(*g));
    std::remove(path.c_str());
    write_csv(r, "sgk_field.csv");
    std::FILE* fp = std::fopen("sgk_field.csv", "r");
    REQUIRE(fp);
    char line[128];
    REQUIRE(std::fgets(line, sizeof line, fp));
    CHECK(std::string(line) == "x,v1,v2,value\n");
    std::fclose(fp);
    std::remove("sgk_field.csv");
}
