#include "sgk/phase_space.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace sgk {

PhaseGrid::PhaseGrid(int nx, int dv, int nv, double lv)
    : nx_(nx), dv_(dv), nv_(nv), lv_(lv)
{
    if (nx < 2 || (nx & (nx - 1)) != 0)
        throw std::invalid_argument("grid: nx must be a power of two (got " + std::to_string(nx) + ")");
    if (dv != 1 && dv != 2)
        throw std::invalid_argument("grid: velocity dimension must be 1 or 2");
    if (nv < 5)
        throw std::invalid_argument("grid: need at least 5 velocity points per axis");
    if (!(lv > 0))
        throw std::invalid_argument("grid: lv must be positive");
    dvel_ = 2.0 * lv / (nv - 1);
    if (dvel_ > lv / 8.0 + 1e-14)
        throw std::invalid_argument("grid: velocity spacing exceeds lv/8; increase nv");
    dx_ = 2.0 * std::numbers::pi / nx;
    nvel_ = dv == 1 ? nv : nv * nv;

    std::vector<double> x1(nv), w1(nv, dvel_);
    for (int i = 0; i < nv; ++i)
        x1[i] = -lv + i * dvel_;
    x1[nv - 1] = lv;
    w1[0] = w1[nv - 1] = 0.5 * dvel_;

    vel_.resize(static_cast<std::size_t>(nvel_) * dv);
    speed2_.resize(nvel_);
    w_.resize(nvel_);
    for (int iv = 0; iv < nvel_; ++iv) {
        double s2 = 0, w = 1;
        for (int a = 0; a < dv; ++a) {
            int i = axis_index(iv, a);
            vel_[static_cast<std::size_t>(iv) * dv + a] = x1[i];
            s2 += x1[i] * x1[i];
            w *= w1[i];
        }
        speed2_[iv] = s2;
        w_[iv] = w;
    }
    maxw_.resize(nvel_);
    sqrtm_.resize(nvel_);
    double norm = std::pow(2.0 * std::numbers::pi, -0.5 * dv);
    double mass = 0;
    for (int iv = 0; iv < nvel_; ++iv) {
        maxw_[iv] = norm * std::exp(-0.5 * speed2_[iv]);
        sqrtm_[iv] = std::sqrt(norm) * std::exp(-0.25 * speed2_[iv]);
        mass += w_[iv] * maxw_[iv];
    }
    if (std::abs(1.0 - mass) > 1e-10)
        throw std::invalid_argument("grid: Maxwellian mass " + std::to_string(mass) +
                                    " outside tolerance; enlarge lv or refine nv");
}

int PhaseGrid::axis_index(int iv, int a) const
{
    if (dv_ == 1)
        return iv;
    return a == 0 ? iv / nv_ : iv % nv_;
}

int PhaseGrid::flat(const int* idx) const
{
    return dv_ == 1 ? idx[0] : idx[0] * nv_ + idx[1];
}

Maxwellian maxwellian(const PhaseGrid& grid)
{
    Maxwellian m{grid.maxw(), grid.sqrt_maxw(), 0.0};
    for (int iv = 0; iv < grid.nvel(); ++iv)
        m.mass += grid.w()[iv] * m.mm[iv];
    return m;
}

bool Field::finite() const
{
    return std::all_of(data.begin(), data.end(), [](double x) { return std::isfinite(x); });
}

Field to_distribution(const Field& h, double eps)
{
    if (h.rep != Rep::perturbation)
        throw std::invalid_argument("to_distribution: field is not a perturbation");
    Field f(h.grid, Rep::distribution);
    const auto& mm = h.grid->maxw();
    const auto& m = h.grid->sqrt_maxw();
    int nvel = h.grid->nvel();
    for (std::size_t i = 0; i < h.data.size(); ++i) {
        int iv = static_cast<int>(i % nvel);
        f.data[i] = mm[iv] + eps * m[iv] * h.data[i];
    }
    return f;
}

Field to_perturbation(const Field& f, double eps)
{
    if (f.rep != Rep::distribution)
        throw std::invalid_argument("to_perturbation: field is not a distribution");
    Field h(f.grid, Rep::perturbation);
    const auto& mm = f.grid->maxw();
    const auto& m = f.grid->sqrt_maxw();
    int nvel = f.grid->nvel();
    for (std::size_t i = 0; i < f.data.size(); ++i) {
        int iv = static_cast<int>(i % nvel);
        h.data[i] = (f.data[i] - mm[iv]) / (eps * m[iv]);
    }
    return h;
}

NullSpace::NullSpace(const PhaseGrid& grid, bool full)
    : nvel_(grid.nvel()), w_(grid.w())
{
    const auto& m = grid.sqrt_maxw();
    std::vector<std::vector<double>> raw;
    raw.push_back(m);
    if (full) {
        for (int a = 0; a < grid.dim_v(); ++a) {
            std::vector<double> f(nvel_);
            for (int iv = 0; iv < nvel_; ++iv)
                f[iv] = grid.v(iv, a) * m[iv];
            raw.push_back(f);
        }
        std::vector<double> f(nvel_);
        for (int iv = 0; iv < nvel_; ++iv)
            f[iv] = grid.speed2(iv) * m[iv];
        raw.push_back(f);
    }
    auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0;
        for (int i = 0; i < nvel_; ++i)
            s += w_[i] * a[i] * b[i];
        return s;
    };
    for (auto f : raw) {
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& p : phi_) {
                double c = dot(f, p);
                for (int i = 0; i < nvel_; ++i)
                    f[i] -= c * p[i];
            }
        double n = std::sqrt(dot(f, f));
        for (auto& x : f)
            x /= n;
        phi_.push_back(std::move(f));
    }
}

void NullSpace::coeffs(const double* h, double* c) const
{
    for (int i = 0; i < dim(); ++i) {
        double s = 0;
        const auto& p = phi_[i];
        for (int j = 0; j < nvel_; ++j)
            s += w_[j] * h[j] * p[j];
        c[i] = s;
    }
}

void NullSpace::project(const double* h, double* out) const
{
    double c[8];
    coeffs(h, c);
    std::fill(out, out + nvel_, 0.0);
    for (int i = 0; i < dim(); ++i)
        for (int j = 0; j < nvel_; ++j)
            out[j] += c[i] * phi_[i][j];
}

Field pi_L(const Field& h, const NullSpace& ns)
{
    Field out(h.grid, h.rep);
    for (int ix = 0; ix < h.grid->nx(); ++ix)
        ns.project(h.row(ix), out.row(ix));
    return out;
}

Field micro_part(const Field& h, const NullSpace& ns)
{
    Field out = pi_L(h, ns);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = h.data[i] - out.data[i];
    return out;
}

Field pi_G(const Field& h, const NullSpace& ns)
{
    const auto& g = *h.grid;
    std::vector<double> mean(g.nvel(), 0.0), proj(g.nvel());
    for (int ix = 0; ix < g.nx(); ++ix)
        for (int iv = 0; iv < g.nvel(); ++iv)
            mean[iv] += h.at(ix, iv);
    for (auto& m : mean)
        m /= g.nx();
    ns.project(mean.data(), proj.data());
    Field out(h.grid, h.rep);
    for (int ix = 0; ix < g.nx(); ++ix)
        std::copy(proj.begin(), proj.end(), out.row(ix));
    return out;
}

std::vector<double> global_moments(const Field& h, const NullSpace& ns)
{
    std::vector<double> mom(ns.dim(), 0.0);
    double c[8];
    for (int ix = 0; ix < h.grid->nx(); ++ix) {
        ns.coeffs(h.row(ix), c);
        for (int i = 0; i < ns.dim(); ++i)
            mom[i] += h.grid->dx() * c[i];
    }
    return mom;
}

double inner(const Field& a, const Field& b)
{
    const auto& g = *a.grid;
    const auto& w = g.w();
    double s = 0;
    for (int ix = 0; ix < g.nx(); ++ix) {
        const double* pa = a.row(ix);
        const double* pb = b.row(ix);
        for (int iv = 0; iv < g.nvel(); ++iv)
            s += w[iv] * pa[iv] * pb[iv];
    }
    return s * g.dx();
}

double l2norm(const Field& a)
{
    return std::sqrt(inner(a, a));
}

namespace {
std::mutex fftw_mutex;
}

XFft::XFft(int nx, int howmany)
    : nx_(nx), howmany_(howmany)
{
    std::lock_guard<std::mutex> lock(fftw_mutex);
    std::vector<double> r(static_cast<std::size_t>(nx) * howmany);
    std::vector<std::complex<double>> c(static_cast<std::size_t>(nk()) * howmany);
    int n[1] = {nx};
    auto* cp = reinterpret_cast<fftw_complex*>(c.data());
    fwd_ = fftw_plan_many_dft_r2c(1, n, howmany, r.data(), nullptr, howmany, 1, cp, nullptr, howmany, 1,
                                  FFTW_ESTIMATE | FFTW_UNALIGNED);
    bwd_ = fftw_plan_many_dft_c2r(1, n, howmany, cp, nullptr, howmany, 1, r.data(), nullptr, howmany, 1,
                                  FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!fwd_ || !bwd_)
        throw std::runtime_error("FFTW planning failed");
}

XFft::~XFft()
{
    std::lock_guard<std::mutex> lock(fftw_mutex);
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

void XFft::forward(const double* in, std::complex<double>* out) const
{
    fftw_execute_dft_r2c(static_cast<fftw_plan>(fwd_), const_cast<double*>(in),
                         reinterpret_cast<fftw_complex*>(out));
}

void XFft::backward(const std::complex<double>* in, double* out) const
{
    std::vector<std::complex<double>> tmp(in, in + static_cast<std::size_t>(nk()) * howmany_);
    fftw_execute_dft_c2r(static_cast<fftw_plan>(bwd_), reinterpret_cast<fftw_complex*>(tmp.data()), out);
    double s = 1.0 / nx_;
    for (std::size_t i = 0; i < static_cast<std::size_t>(nx_) * howmany_; ++i)
        out[i] *= s;
}

const XFft& xfft_for(int nx, int howmany)
{
    static std::mutex m;
    static std::map<std::pair<int, int>, std::unique_ptr<XFft>> cache;
    std::lock_guard<std::mutex> lock(m);
    auto& p = cache[{nx, howmany}];
    if (!p)
        p = std::make_unique<XFft>(nx, howmany);
    return *p;
}

Field dx_field(const Field& h, int order)
{
    const auto& g = *h.grid;
    const XFft& fft = xfft_for(g.nx(), g.nvel());
    std::vector<std::complex<double>> hat(static_cast<std::size_t>(fft.nk()) * g.nvel());
    fft.forward(h.data.data(), hat.data());
    for (int k = 0; k < fft.nk(); ++k) {
        std::complex<double> mult = std::pow(std::complex<double>(0.0, fft.wavenumber(k)), order);
        for (int iv = 0; iv < g.nvel(); ++iv)
            hat[static_cast<std::size_t>(k) * g.nvel() + iv] *= mult;
    }
    Field out(h.grid, h.rep);
    fft.backward(hat.data(), out.data.data());
    return out;
}

Field dv_field(const Field& h, int axis)
{
    const auto& g = *h.grid;
    Field out(h.grid, h.rep);
    const int nv = g.nv();
    const double c = 1.0 / (12.0 * g.dvel());
    int stride = (g.dim_v() == 2 && axis == 0) ? nv : 1;
    for (int ix = 0; ix < g.nx(); ++ix) {
        const double* in = h.row(ix);
        double* o = out.row(ix);
        for (int iv = 0; iv < g.nvel(); ++iv) {
            int i = g.axis_index(iv, axis);
            auto val = [&](int off) {
                int j = i + off;
                return (j < 0 || j >= nv) ? 0.0 : in[iv + off * stride];
            };
            o[iv] = c * (-val(2) + 8.0 * val(1) - 8.0 * val(-1) + val(-2));
        }
    }
    return out;
}

namespace {

std::vector<Field> derivative_set(const Field& h, int s)
{
    if (s < 0 || s > 2)
        throw std::invalid_argument("norms: Sobolev order must be 0, 1 or 2 (got " + std::to_string(s) + ")");
    int dv = h.grid->dim_v();
    std::vector<Field> out{h};
    if (s >= 1) {
        Field hx = dx_field(h);
        out.push_back(hx);
        std::vector<Field> hv;
        for (int a = 0; a < dv; ++a)
            hv.push_back(dv_field(h, a));
        for (auto& f : hv)
            out.push_back(f);
        if (s == 2) {
            out.push_back(dx_field(h, 2));
            for (int a = 0; a < dv; ++a)
                out.push_back(dv_field(hx, a));
            for (int a = 0; a < dv; ++a)
                for (int b = a; b < dv; ++b)
                    out.push_back(dv_field(hv[a], b));
        }
    }
    return out;
}

double weighted_sq(const Field& h, double gamma)
{
    const auto& g = *h.grid;
    const auto& w = g.w();
    double s = 0;
    for (int ix = 0; ix < g.nx(); ++ix) {
        const double* p = h.row(ix);
        for (int iv = 0; iv < g.nvel(); ++iv) {
            double lw = gamma == 0.0 ? 1.0 : std::pow(1.0 + std::sqrt(g.speed2(iv)), gamma);
            s += w[iv] * lw * p[iv] * p[iv];
        }
    }
    return s * g.dx();
}

}

NormSet norms(const Field& h, int s, double gamma)
{
    auto ds = derivative_set(h, s);
    NormSet n;
    n.l2 = std::sqrt(weighted_sq(h, 0.0));
    n.lambda = std::sqrt(weighted_sq(h, gamma));
    double a = 0, b = 0;
    for (const auto& f : ds) {
        a += weighted_sq(f, 0.0);
        b += weighted_sq(f, gamma);
    }
    n.hs = std::sqrt(a);
    n.hs_lambda = std::sqrt(b);
    return n;
}

double hs_norm(const Field& h, int s)
{
    double a = 0;
    for (const auto& f : derivative_set(h, s))
        a += weighted_sq(f, 0.0);
    return std::sqrt(a);
}

double lambda_norm(const Field& h, double gamma)
{
    return std::sqrt(weighted_sq(h, gamma));
}

double h1_norm_sq(const Field& h)
{
    double n = hs_norm(h, 1);
    return n * n;
}

HypoFunctional::HypoFunctional(const PhaseGrid& grid, const NullSpace& ns, const FunctionalWeights& w, double eps)
    : ns_(&ns), w_(w), eps_(eps)
{
    if (!(w.A > 0 && w.alpha > 0 && w.b > 0))
        throw std::invalid_argument("functional weights: A, alpha, b must be positive");
    if (w.a * w.a * eps * eps >= 4.0 * w.alpha * w.b)
        throw std::invalid_argument("functional weights violate a^2 eps^2 < 4 alpha b");

    // c = operator norm of grad_v restricted to the null space
    int m = ns.dim();
    auto gp = std::make_shared<PhaseGrid>(1 << 1, grid.dim_v(), grid.nv(), grid.lv());
    Eigen::MatrixXd Gam = Eigen::MatrixXd::Zero(m, m);
    std::vector<Field> grads;
    for (int a = 0; a < grid.dim_v(); ++a) {
        std::vector<Field> d;
        for (int i = 0; i < m; ++i) {
            Field f(gp);
            for (int ix = 0; ix < gp->nx(); ++ix)
                std::copy(ns.phi(i).begin(), ns.phi(i).end(), f.row(ix));
            d.push_back(dv_field(f, a));
        }
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                Gam(i, j) += inner(d[i], d[j]) / (gp->nx() * gp->dx());
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Gam);
    c_ = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));

    double t = w.a * eps;
    Eigen::Matrix3d Qm, Qp;
    Qm << w.A, -0.5 * t * c_, 0, -0.5 * t * c_, w.alpha, -0.5 * t, 0, -0.5 * t, w.b;
    Qp = Qm.cwiseAbs();
    double mu_min = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(Qm).eigenvalues().minCoeff();
    double mu_max = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(Qp).eigenvalues().maxCoeff();
    if (mu_min <= 0)
        throw std::invalid_argument("functional weights are not positive definite for this eps");
    double f = std::max(1.0 + 2.0 * c_ * c_, 2.0);
    kappa1_ = mu_min / f;
    kappa2_ = mu_max * f;
}

std::array<double, 4> HypoFunctional::terms(const Field& h) const
{
    Field hx = dx_field(h);
    Field hp = micro_part(h, *ns_);
    double p2 = 0;
    for (int a = 0; a < h.grid->dim_v(); ++a) {
        Field d = dv_field(hp, a);
        p2 += inner(d, d);
    }
    Field hv1 = dv_field(h, 0);
    return {w_.A * inner(h, h), w_.alpha * inner(hx, hx), w_.b * p2, w_.a * eps_ * inner(hx, hv1)};
}

double HypoFunctional::operator()(const Field& h) const
{
    auto t = terms(h);
    return t[0] + t[1] + t[2] + t[3];
}

double energy_ek(const GpcField& hK, double q, int s, double gamma)
{
    double e = 0;
    for (int k = 1; k <= hK.K(); ++k) {
        const Field& h = hK.modes[k - 1];
        double n = gamma == 0.0 ? hs_norm(h, s) : norms(h, s, gamma).hs_lambda;
        e += std::pow(static_cast<double>(k), 2.0 * q) * n * n;
    }
    return e;
}

std::optional<std::string> energy_exponent_warning(const GpcBasis& basis, double q)
{
    double p = basis.nominal_growth();
    if (q > p + 2.0)
        return std::nullopt;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "energy exponent q = %g does not exceed p + 2 = %g for the %s basis; "
                  "K-uniform decay bounds are not guaranteed",
                  q, p + 2.0, family_name(basis.family()).c_str());
    return std::string(buf);
}

Field reconstruct(const GpcField& hK, double z)
{
    if (!(z >= -1.0 && z <= 1.0))
        throw std::invalid_argument("reconstruct: z outside [-1, 1]");
    std::vector<double> psi(hK.K());
    hK.basis->psi_all(z, hK.K(), psi.data());
    Field out(hK.modes[0].grid, hK.modes[0].rep);
    for (int k = 0; k < hK.K(); ++k) {
        const auto& d = hK.modes[k].data;
        for (std::size_t i = 0; i < d.size(); ++i)
            out.data[i] += psi[k] * d[i];
    }
    return out;
}

ZNorms z_norms(const GpcField& hK, int s)
{
    const int K = hK.K();
    std::vector<std::vector<Field>> ds;
    for (const auto& h : hK.modes)
        ds.push_back(derivative_set(h, s));
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(K, K);
    for (int k = 0; k < K; ++k)
        for (int l = 0; l <= k; ++l) {
            double v = 0;
            for (std::size_t m = 0; m < ds[k].size(); ++m)
                v += inner(ds[k][m], ds[l][m]);
            gram(k, l) = gram(l, k) = v;
        }
    ZNorms zn;
    zn.modal = std::sqrt(std::max(0.0, gram.trace()));
    Eigen::VectorXd psi(K);
    const auto& q = hK.basis->quad();
    double acc = 0;
    for (std::size_t m = 0; m < q.nodes.size(); ++m) {
        hK.basis->psi_all(q.nodes[m], K, psi.data());
        acc += q.weights[m] * psi.dot(gram * psi);
    }
    zn.l2z = std::sqrt(std::max(0.0, acc));
    for (double z : chebyshev_extrema(257)) {
        hK.basis->psi_all(z, K, psi.data());
        zn.linfz = std::max(zn.linfz, std::sqrt(std::max(0.0, psi.dot(gram * psi))));
    }
    return zn;
}

namespace {
const char kMagic[4] = {'S', 'G', 'K', 'F'};
}

void write_binary(const Field& h, const std::string& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot open " + path);
    const auto& g = *h.grid;
    std::uint32_t version = 1;
    std::int32_t dims[4] = {g.nx(), g.dim_v(), g.nv(), h.rep == Rep::distribution ? 1 : 0};
    double lv = g.lv();
    std::uint64_t count = h.data.size();
    char dtype[4] = {'f', '6', '4', 0};
    os.write(kMagic, 4);
    os.write(reinterpret_cast<const char*>(&version), sizeof version);
    os.write(reinterpret_cast<const char*>(dims), sizeof dims);
    os.write(reinterpret_cast<const char*>(&lv), sizeof lv);
    os.write(dtype, 4);
    os.write(reinterpret_cast<const char*>(&count), sizeof count);
    os.write(reinterpret_cast<const char*>(h.data.data()), static_cast<std::streamsize>(count * sizeof(double)));
}

Field read_binary(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("cannot open " + path);
    char magic[4];
    std::uint32_t version;
    std::int32_t dims[4];
    double lv;
    char dtype[4];
    std::uint64_t count;
    is.read(magic, 4);
    is.read(reinterpret_cast<char*>(&version), sizeof version);
    is.read(reinterpret_cast<char*>(dims), sizeof dims);
    is.read(reinterpret_cast<char*>(&lv), sizeof lv);
    is.read(dtype, 4);
    is.read(reinterpret_cast<char*>(&count), sizeof count);
    if (!is || std::memcmp(magic, kMagic, 4) != 0 || version != 1 || std::strncmp(dtype, "f64", 3) != 0)
        throw std::runtime_error(path + ": not a field snapshot");
    auto g = std::make_shared<PhaseGrid>(dims[0], dims[1], dims[2], lv);
    Field f(g, dims[3] ? Rep::distribution : Rep::perturbation);
    if (count != f.data.size())
        throw std::runtime_error(path + ": payload size mismatch");
    is.read(reinterpret_cast<char*>(f.data.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (!is)
        throw std::runtime_error(path + ": truncated payload");
    return f;
}

void write_csv(const Field& h, const std::string& path)
{
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp)
        throw std::runtime_error("cannot open " + path);
    const auto& g = *h.grid;
    std::fputs(g.dim_v() == 1 ? "x,v1,value\n" : "x,v1,v2,value\n", fp);
    for (int ix = 0; ix < g.nx(); ++ix)
        for (int iv = 0; iv < g.nvel(); ++iv) {
            if (g.dim_v() == 1)
                std::fprintf(fp, "%.17g,%.17g,%.17g\n", g.x(ix), g.v(iv, 0), h.at(ix, iv));
            else
                std::fprintf(fp, "%.17g,%.17g,%.17g,%.17g\n", g.x(ix), g.v(iv, 0), g.v(iv, 1), h.at(ix, iv));
        }
    std::fclose(fp);
}

}
