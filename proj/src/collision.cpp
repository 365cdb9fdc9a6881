#include "sgk/collision.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sgk {

ModelKind parse_model_kind(const std::string& s)
{
    if (s == "relaxation")
        return ModelKind::relaxation;
    if (s == "fokker_planck")
        return ModelKind::fokker_planck;
    if (s == "linearized_boltzmann")
        return ModelKind::linearized_boltzmann;
    if (s == "boltzmann_full")
        return ModelKind::boltzmann_full;
    throw std::invalid_argument("unknown collision model '" + s + "'");
}

std::string model_kind_name(ModelKind k)
{
    switch (k) {
    case ModelKind::relaxation: return "relaxation";
    case ModelKind::fokker_planck: return "fokker_planck";
    case ModelKind::linearized_boltzmann: return "linearized_boltzmann";
    case ModelKind::boltzmann_full: return "boltzmann_full";
    }
    return "?";
}

bool is_boltzmann(ModelKind k)
{
    return k == ModelKind::linearized_boltzmann || k == ModelKind::boltzmann_full;
}

double KernelSpec::sphere_measure(int dv) const
{
    return dv == 1 ? 2.0 : 2.0 * std::numbers::pi;
}

double KernelSpec::b0(double c, int dv) const
{
    return beta0 * (1.0 + a0 * c) / sphere_measure(dv);
}

double KernelSpec::b1(double c, int dv) const
{
    return xi * (1.0 + a1 * c) / sphere_measure(dv);
}

double KernelSpec::phi(double r) const
{
    return gamma == 0.0 ? c_phi : c_phi * std::pow(r, gamma);
}

KernelSpec::Bounds KernelSpec::validate(int dv) const
{
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw std::invalid_argument("kernel: gamma must lie in [0, 1]");
    if (!(c_phi > 0))
        throw std::invalid_argument("kernel: c_phi must be positive");
    if (m_sigma < 4 || m_sigma % 2)
        throw std::invalid_argument("kernel: m_sigma must be an even number >= 4");
    Bounds bd{1e300, 0.0, 0.0};
    const int n = 65;
    for (int i = 0; i < n; ++i) {
        double c = std::cos(std::numbers::pi * i / (n - 1));
        bd.max_abs_b1 = std::max(bd.max_abs_b1, std::abs(b1(c, dv)));
        for (int j = 0; j < n; ++j) {
            double z = -1.0 + 2.0 * j / (n - 1);
            double v = b(c, z, dv);
            bd.min_b = std::min(bd.min_b, v);
            bd.max_abs_b = std::max(bd.max_abs_b, std::abs(v));
        }
    }
    if (bd.min_b < -1e-14)
        throw std::invalid_argument("kernel: b0 + b1 z is negative somewhere on [-1,1] (nonnegativity violated)");
    if (c_b > 0 && bd.max_abs_b > c_b * (1 + 1e-12))
        throw std::invalid_argument("kernel: |b| exceeds the declared bound c_b");
    if (c_b_star > 0 && bd.max_abs_b1 > c_b_star * (1 + 1e-12))
        throw std::invalid_argument("kernel: |b1| exceeds the declared bound c_b_star");
    return bd;
}

namespace {

struct P2 {
    int i, j;
};

}

CollisionTable build_collision_table(const PhaseGrid& grid, const KernelSpec& kernel)
{
    if (grid.dim_v() != 2)
        throw std::invalid_argument("Boltzmann collisions require a two-dimensional velocity grid");
    const int nv = grid.nv(), n = grid.nvel(), M = kernel.m_sigma;
    const double dvel = grid.dvel();
    const auto& w = grid.w();
    std::vector<double> cs(M), sn(M);
    for (int m = 0; m < M; ++m) {
        cs[m] = std::cos(2.0 * std::numbers::pi * m / M);
        sn[m] = std::sin(2.0 * std::numbers::pi * m / M);
    }
    const double wsig = 2.0 * std::numbers::pi / M;
    static const int nb[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};

    CollisionTable t;
    auto inside = [&](int i, int j) { return i >= 0 && i < nv && j >= 0 && j < nv; };
    for (int a = 0; a < n; ++a) {
        int ai = a / nv, aj = a % nv;
        for (int b = a + 1; b < n; ++b) {
            int bi = b / nv, bj = b % nv;
            // twice the center and four times R^2 are integers
            int sx = ai + bi, sy = aj + bj;
            double cx = 0.5 * sx, cy = 0.5 * sy;
            int gx = ai - bi, gy = aj - bj;
            double R2 = 0.25 * (gx * gx + gy * gy);
            double R = std::sqrt(R2), g = std::sqrt(static_cast<double>(gx * gx + gy * gy));
            double base = 0.5 * w[a] * w[b] * wsig * kernel.phi(dvel * g);
            for (int m = 0; m < M; ++m) {
                double px = cx + R * cs[m], py = cy + R * sn[m];
                P2 n0{static_cast<int>(std::lround(px)), static_cast<int>(std::lround(py))};
                auto energy = [&](P2 p) {
                    double dx = p.i - cx, dy = p.j - cy;
                    return dx * dx + dy * dy;
                };
                double e0 = energy(n0);
                P2 lo = n0, hi = n0;
                double r = 0.0;
                bool ok = true;
                if (e0 != R2) {
                    bool below = e0 < R2;
                    double best = 1e300;
                    bool found = false;
                    P2 pick{0, 0};
                    for (const auto& d : nb) {
                        P2 q{n0.i + d[0], n0.j + d[1]};
                        double e = energy(q);
                        if (below ? !(e > R2) : !(e <= R2))
                            continue;
                        double dist = (q.i - px) * (q.i - px) + (q.j - py) * (q.j - py);
                        if (dist < best) {
                            best = dist;
                            pick = q;
                            found = true;
                        }
                    }
                    if (!found) {
                        ok = false;
                    } else {
                        if (below)
                            hi = pick;
                        else
                            lo = pick;
                        double elo = energy(lo), ehi = energy(hi);
                        r = (R2 - elo) / (ehi - elo);
                    }
                }
                P2 los{sx - lo.i, sy - lo.j}, his{sx - hi.i, sy - hi.j};
                if (!ok || !inside(lo.i, lo.j) || !inside(los.i, los.j) || !inside(hi.i, hi.j) ||
                    !inside(his.i, his.j)) {
                    ++t.dropped;
                    continue;
                }
                t.node.push_back(a);
                t.node.push_back(b);
                t.node.push_back(lo.i * nv + lo.j);
                t.node.push_back(los.i * nv + los.j);
                t.node.push_back(hi.i * nv + hi.j);
                t.node.push_back(his.i * nv + his.j);
                t.r.push_back(r);
                t.wbase.push_back(base);
                t.cosang.push_back((cs[m] * gx + sn[m] * gy) / g);
            }
        }
    }
    return t;
}

CollisionModel::CollisionModel(GridPtr grid, ModelKind kind, const KernelSpec& kernel)
    : grid_(std::move(grid)), kind_(kind), kernel_(kernel)
{
    kernel_.validate(grid_->dim_v());
    if (is_boltzmann(kind_) && grid_->dim_v() != 2)
        throw std::invalid_argument("Boltzmann models require dv = 2");
    ns_ = std::make_shared<NullSpace>(*grid_, kind_ != ModelKind::fokker_planck);
    const int n = grid_->nvel();
    L0_ = Eigen::MatrixXd::Zero(n, n);
    L1_ = Eigen::MatrixXd::Zero(n, n);
    nu0_ = Eigen::VectorXd::Zero(n);
    nu1_ = Eigen::VectorXd::Zero(n);
    switch (kind_) {
    case ModelKind::relaxation: build_relaxation(); break;
    case ModelKind::fokker_planck: build_fokker_planck(); break;
    default: build_boltzmann(); break;
    }
}

void CollisionModel::build_relaxation()
{
    const int n = grid_->nvel();
    const auto& w = grid_->w();
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < ns_->dim(); ++i) {
        const auto& p = ns_->phi(i);
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                P(j, k) += p[j] * w[k] * p[k];
    }
    P -= Eigen::MatrixXd::Identity(n, n);
    L0_ = kernel_.c_phi * kernel_.beta0 * P;
    L1_ = kernel_.c_phi * kernel_.xi * P;
    nu0_.setConstant(kernel_.c_phi * kernel_.beta0);
    nu1_.setConstant(kernel_.c_phi * kernel_.xi);
}

void CollisionModel::build_fokker_planck()
{
    const auto& g = *grid_;
    const int n = g.nvel(), nv = g.nv();
    const auto& w = g.w();
    const auto& m = g.sqrt_maxw();
    const double dv = g.dvel();
    // Dirichlet form sum_f om_f (H_+ - H_-)(G_+ - G_-), H = h/M
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int a = 0; a < g.dim_v(); ++a) {
        int stride = (g.dim_v() == 2 && a == 0) ? nv : 1;
        for (int iv = 0; iv < n; ++iv) {
            if (g.axis_index(iv, a) == nv - 1)
                continue;
            int jv = iv + stride;
            double wperp = 1.0;
            if (g.dim_v() == 2) {
                int other = g.axis_index(iv, 1 - a);
                wperp = (other == 0 || other == nv - 1) ? 0.5 * dv : dv;
            }
            double om = wperp * dv * m[iv] * m[jv] / (dv * dv);
            double ci = 1.0 / m[iv], cj = 1.0 / m[jv];
            A(iv, iv) += om * ci * ci;
            A(jv, jv) += om * cj * cj;
            A(iv, jv) -= om * ci * cj;
            A(jv, iv) -= om * ci * cj;
        }
    }
    for (int j = 0; j < n; ++j)
        A.row(j) /= -w[j];
    L0_ = kernel_.c_phi * kernel_.beta0 * A;
    L1_ = kernel_.c_phi * kernel_.xi * A;
    nu0_ = -L0_.diagonal();
    nu1_ = -L1_.diagonal();
}

void CollisionModel::build_boltzmann()
{
    const auto& g = *grid_;
    const int n = g.nvel(), dv = g.dim_v();
    table_ = std::make_unique<CollisionTable>(build_collision_table(g, kernel_));
    const auto& w = g.w();
    const auto& mm = g.maxw();
    const auto& m = g.sqrt_maxw();
    std::vector<double> im(n);
    for (int i = 0; i < n; ++i)
        im[i] = 1.0 / m[i];
    const bool rand = kernel_.xi != 0.0;
    const auto& T = *table_;
    double* L0 = L0_.data();
    double* L1 = L1_.data();
    for (std::size_t c = 0; c < T.size(); ++c) {
        const std::int32_t* nd = &T.node[6 * c];
        double r = T.r[c];
        double d[6] = {-1.0, -1.0, 1.0 - r, 1.0 - r, r, r};
        double e[6];
        for (int a = 0; a < 6; ++a)
            e[a] = d[a] * im[nd[a]];
        double mab = T.wbase[c] * mm[nd[0]] * mm[nd[1]];
        double k0 = mab * kernel_.b0(T.cosang[c], dv);
        double k1 = rand ? mab * kernel_.b1(T.cosang[c], dv) : 0.0;
        for (int a = 0; a < 6; ++a) {
            double* col0 = L0 + static_cast<std::size_t>(nd[a]) * n;
            double* col1 = L1 + static_cast<std::size_t>(nd[a]) * n;
            for (int b = 0; b < 6; ++b) {
                double p = e[a] * e[b];
                col0[nd[b]] -= k0 * p;
                if (rand)
                    col1[nd[b]] -= k1 * p;
            }
        }
    }
    for (int j = 0; j < n; ++j) {
        L0_.row(j) /= w[j];
        L1_.row(j) /= w[j];
    }
    direct_nu();
}

void CollisionModel::direct_nu()
{
    // angular sums of b over uniform angles equal the angular masses exactly
    const auto& g = *grid_;
    const int n = g.nvel();
    const auto& w = g.w();
    const auto& mm = g.maxw();
    for (int a = 0; a < n; ++a) {
        double s = 0;
        for (int b = 0; b < n; ++b) {
            double r2 = 0;
            for (int k = 0; k < g.dim_v(); ++k) {
                double d = g.v(a, k) - g.v(b, k);
                r2 += d * d;
            }
            s += w[b] * kernel_.phi(std::sqrt(r2)) * mm[b];
        }
        nu0_[a] = kernel_.beta0 * s;
        nu1_[a] = kernel_.xi * s;
    }
}

void CollisionModel::require_boltzmann(const char* op) const
{
    if (!is_boltzmann(kind_))
        throw std::invalid_argument(std::string(op) + ": requires a Boltzmann model (got " + model_kind_name(kind_) + ")");
}

void CollisionModel::apply_L(const double* h, double z, double* out) const
{
    const int n = grid_->nvel();
    Eigen::Map<const Eigen::VectorXd> hv(h, n);
    Eigen::Map<Eigen::VectorXd> o(out, n);
    o.noalias() = L0_ * hv;
    if (z != 0.0)
        o.noalias() += z * (L1_ * hv);
}

void CollisionModel::apply_L_direct(const double* h, double z, double* out) const
{
    const auto& g = *grid_;
    const int n = g.nvel(), dv = g.dim_v();
    switch (kind_) {
    case ModelKind::relaxation: {
        ns_->project(h, out);
        double rate = kernel_.c_phi * (kernel_.beta0 + kernel_.xi * z);
        for (int i = 0; i < n; ++i)
            out[i] = rate * (out[i] - h[i]);
        return;
    }
    case ModelKind::fokker_planck: {
        const int nv = g.nv();
        const auto& m = g.sqrt_maxw();
        const double dvel = g.dvel();
        std::fill(out, out + n, 0.0);
        for (int a = 0; a < dv; ++a) {
            int stride = (dv == 2 && a == 0) ? nv : 1;
            for (int iv = 0; iv < n; ++iv) {
                if (g.axis_index(iv, a) == nv - 1)
                    continue;
                int jv = iv + stride;
                double wperp = 1.0;
                if (dv == 2) {
                    int other = g.axis_index(iv, 1 - a);
                    wperp = (other == 0 || other == nv - 1) ? 0.5 * dvel : dvel;
                }
                double flux = wperp / dvel * m[iv] * m[jv] * (h[jv] / m[jv] - h[iv] / m[iv]);
                out[iv] += flux / m[iv];
                out[jv] -= flux / m[jv];
            }
        }
        double sig = kernel_.c_phi * (kernel_.beta0 + kernel_.xi * z);
        for (int i = 0; i < n; ++i)
            out[i] *= sig / g.w()[i];
        return;
    }
    default: break;
    }
    const auto& T = *table_;
    const auto& w = g.w();
    const auto& mm = g.maxw();
    const auto& m = g.sqrt_maxw();
    std::fill(out, out + n, 0.0);
    for (std::size_t c = 0; c < T.size(); ++c) {
        const std::int32_t* nd = &T.node[6 * c];
        double r = T.r[c];
        double d[6] = {-1.0, -1.0, 1.0 - r, 1.0 - r, r, r};
        double D = 0;
        for (int a = 0; a < 6; ++a)
            D += d[a] * h[nd[a]] / m[nd[a]];
        double kap = T.wbase[c] * mm[nd[0]] * mm[nd[1]] * kernel_.b(T.cosang[c], z, dv);
        for (int a = 0; a < 6; ++a)
            out[nd[a]] -= kap * D * d[a];
    }
    for (int j = 0; j < n; ++j)
        out[j] /= w[j] * m[j];
}

void CollisionModel::apply_F_parts(const double* gv, const double* hv, double c0, double c1, double* out) const
{
    require_boltzmann("apply_F");
    const auto& g = *grid_;
    const int n = g.nvel(), dv = g.dim_v();
    const auto& T = *table_;
    const auto& w = g.w();
    const auto& mm = g.maxw();
    const auto& m = g.sqrt_maxw();
    std::vector<double> acc(n, 0.0), G(n), H(n);
    for (int i = 0; i < n; ++i) {
        G[i] = gv[i] / m[i];
        H[i] = hv[i] / m[i];
    }
    for (std::size_t c = 0; c < T.size(); ++c) {
        const std::int32_t* nd = &T.node[6 * c];
        double r = T.r[c], q = 1.0 - r;
        double bz = c0 * kernel_.b0(T.cosang[c], dv) + c1 * kernel_.b1(T.cosang[c], dv);
        if (bz == 0.0)
            continue;
        double Ga = G[nd[0]], Gb = G[nd[1]], Ha = H[nd[0]], Hb = H[nd[1]];
        double s1g = q * (G[nd[2]] + G[nd[3]]) + r * (G[nd[4]] + G[nd[5]]);
        double s1h = q * (H[nd[2]] + H[nd[3]]) + r * (H[nd[4]] + H[nd[5]]);
        double s2 = q * (G[nd[2]] * H[nd[2]] + G[nd[3]] * H[nd[3]]) + r * (G[nd[4]] * H[nd[4]] + G[nd[5]] * H[nd[5]]);
        double quad = 0.5 * (s1g * s1h - s2) - 0.5 * (Ga * Hb + Ha * Gb);
        double v = T.wbase[c] * mm[nd[0]] * mm[nd[1]] * bz * quad;
        acc[nd[0]] += v;
        acc[nd[1]] += v;
        acc[nd[2]] -= q * v;
        acc[nd[3]] -= q * v;
        acc[nd[4]] -= r * v;
        acc[nd[5]] -= r * v;
    }
    for (int j = 0; j < n; ++j)
        out[j] += acc[j] / (w[j] * m[j]);
}

void CollisionModel::apply_F(const double* g, const double* h, double z, double* out) const
{
    std::fill(out, out + grid_->nvel(), 0.0);
    apply_F_parts(g, h, 1.0, z, out);
}

void CollisionModel::apply_Q(const double* f, double z, double* out) const
{
    require_boltzmann("apply_Q");
    const auto& g = *grid_;
    const int n = g.nvel(), dv = g.dim_v();
    for (int i = 0; i < n; ++i)
        if (!(f[i] >= 0.0))
            throw std::invalid_argument("apply_Q: distribution has negative or non-finite values");
    const auto& T = *table_;
    const auto& w = g.w();
    std::vector<double> acc(n, 0.0);
    for (std::size_t c = 0; c < T.size(); ++c) {
        const std::int32_t* nd = &T.node[6 * c];
        double r = T.r[c];
        double F = f[nd[0]] * f[nd[1]];
        double plo = f[nd[2]] * f[nd[3]];
        double G = r == 0.0 ? plo : std::pow(plo, 1.0 - r) * std::pow(f[nd[4]] * f[nd[5]], r);
        double v = T.wbase[c] * kernel_.b(T.cosang[c], z, dv) * (G - F);
        acc[nd[0]] += v;
        acc[nd[1]] += v;
        acc[nd[2]] -= (1.0 - r) * v;
        acc[nd[3]] -= (1.0 - r) * v;
        acc[nd[4]] -= r * v;
        acc[nd[5]] -= r * v;
    }
    for (int j = 0; j < n; ++j)
        out[j] = acc[j] / w[j];
}

Field CollisionModel::apply_L(const Field& h, double z) const
{
    Field out(h.grid, Rep::perturbation);
    for (int ix = 0; ix < h.grid->nx(); ++ix)
        apply_L(h.row(ix), z, out.row(ix));
    return out;
}

Field CollisionModel::apply_F(const Field& g, const Field& h, double z) const
{
    Field out(h.grid, Rep::perturbation);
    for (int ix = 0; ix < h.grid->nx(); ++ix)
        apply_F(g.row(ix), h.row(ix), z, out.row(ix));
    return out;
}

Field CollisionModel::apply_Q(const Field& f, double z) const
{
    if (f.rep != Rep::distribution)
        throw std::invalid_argument("apply_Q: expects a distribution field");
    Field out(f.grid, Rep::distribution);
    for (int ix = 0; ix < f.grid->nx(); ++ix)
        apply_Q(f.row(ix), z, out.row(ix));
    return out;
}

Eigen::MatrixXd CollisionModel::Lambda(double z) const
{
    return collision_frequency(z).asDiagonal();
}

Eigen::MatrixXd CollisionModel::Kmat(double z) const
{
    return L(z) + Lambda(z);
}

}
