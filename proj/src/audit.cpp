#include "sgk/collision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace sgk {

namespace {

struct VSpace {
    const PhaseGrid& g;
    double dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const
    {
        double s = 0;
        for (int i = 0; i < g.nvel(); ++i)
            s += g.w()[i] * a[i] * b[i];
        return s;
    }
    double norm(const Eigen::VectorXd& a) const { return std::sqrt(dot(a, a)); }
    double lam_sq(const Eigen::VectorXd& a, double gamma) const
    {
        double s = 0;
        for (int i = 0; i < g.nvel(); ++i)
            s += g.w()[i] * std::pow(1.0 + std::sqrt(g.speed2(i)), gamma) * a[i] * a[i];
        return s;
    }
};

std::string fmt(const char* label, double v)
{
    std::ostringstream os;
    os.precision(6);
    os << label << v;
    return os.str();
}

}

std::vector<AuditItem> audit_assumptions(const CollisionModel& model, const AuditOptions& opt)
{
    const PhaseGrid& g = model.grid();
    const int n = g.nvel();
    const double gamma = model.kernel().gamma;
    const NullSpace& ns = model.null_space();
    VSpace vs{g};
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    auto random_vec = [&]() {
        Eigen::VectorXd h(n);
        for (int i = 0; i < n; ++i)
            h[i] = nd(rng);
        return h;
    };
    const Eigen::MatrixXd& L = model.L0();
    Eigen::VectorXd nu = model.nu0();
    std::vector<AuditItem> out;

    // H1: Lambda bounds
    {
        double lo = 1e300, hi = 0;
        for (int i = 0; i < n; ++i) {
            double r = nu[i] / std::pow(1.0 + std::sqrt(g.speed2(i)), gamma);
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        bool inside = true;
        for (int s = 0; s < opt.samples; ++s) {
            Eigen::VectorXd h = random_vec();
            Eigen::VectorXd lh = nu.cwiseProduct(h);
            double ratio = vs.dot(lh, h) / vs.lam_sq(h, gamma);
            if (ratio < lo * (1 - 1e-12) || ratio > hi * (1 + 1e-12))
                inside = false;
        }
        out.push_back({"H1 collision frequency bounds", lo, 0.0, lo > 0 && inside, fmt("nu_upper=", hi)});
    }
    // H1: self-adjointness
    {
        const Eigen::MatrixXd Lm = model.L(-1.0), Lp = model.L(1.0);
        double worst = 0;
        for (int s = 0; s < opt.samples; ++s) {
            Eigen::VectorXd a = random_vec(), b = random_vec();
            for (const Eigen::MatrixXd* Lz : {&Lm, &Lp}) {
                double d = std::abs(vs.dot(*Lz * a, b) - vs.dot(a, *Lz * b)) / (vs.norm(a) * vs.norm(b));
                worst = std::max(worst, d);
            }
        }
        out.push_back({"H1 self-adjointness", worst, 1e-8, worst <= 1e-8, ""});
    }
    // null space annihilation and moment conservation
    {
        double ann = 0;
        for (int i = 0; i < ns.dim(); ++i) {
            Eigen::Map<const Eigen::VectorXd> p(ns.phi(i).data(), n);
            for (double z : {-1.0, 0.0, 1.0})
                ann = std::max(ann, vs.norm(model.L(z) * p) / vs.norm(p));
        }
        out.push_back({"null-space annihilation", ann, 1e-8, ann <= 1e-8,
                       "null-space dimension " + std::to_string(ns.dim())});
        double mom = 0;
        for (int s = 0; s < opt.samples; ++s) {
            Eigen::VectorXd h = random_vec();
            Eigen::VectorXd lh = L * h;
            for (int i = 0; i < ns.dim(); ++i) {
                Eigen::Map<const Eigen::VectorXd> p(ns.phi(i).data(), n);
                mom = std::max(mom, std::abs(vs.dot(lh, p)) / vs.norm(h));
            }
        }
        out.push_back({"moment conservation of L", mom, 1e-8, mom <= 1e-8, ""});
    }
    // dissipativity and H3 coercivity
    {
        double worst = -1e300, lam = 1e300;
        for (int s = 0; s < opt.samples; ++s) {
            Eigen::VectorXd h = random_vec();
            double q = vs.dot(L * h, h);
            worst = std::max(worst, q / vs.dot(h, h));
            Eigen::VectorXd hp(n);
            ns.project(h.data(), hp.data());
            hp = h - hp;
            double lp = vs.lam_sq(hp, gamma);
            if (std::sqrt(vs.dot(hp, hp)) > 1e-8 * vs.norm(h))
                lam = std::min(lam, -q / lp);
        }
        out.push_back({"dissipativity <Lh,h> <= 0", worst, 1e-12, worst <= 1e-12, ""});

        // exact constant: generalized eigenproblem on the orthogonal complement of the null space
        Eigen::VectorXd sw = Eigen::Map<const Eigen::VectorXd>(g.w().data(), n).cwiseSqrt();
        Eigen::MatrixXd S = sw.asDiagonal() * L * sw.cwiseInverse().asDiagonal();
        S = -0.5 * (S + S.transpose());
        Eigen::MatrixXd N(n, ns.dim());
        for (int i = 0; i < ns.dim(); ++i)
            N.col(i) = sw.cwiseProduct(Eigen::Map<const Eigen::VectorXd>(ns.phi(i).data(), n));
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(N);
        Eigen::MatrixXd Qfull = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
        Eigen::MatrixXd Qc = Qfull.rightCols(n - ns.dim());
        Eigen::VectorXd lw(n);
        for (int i = 0; i < n; ++i)
            lw[i] = std::pow(1.0 + std::sqrt(g.speed2(i)), gamma);
        Eigen::MatrixXd A = Qc.transpose() * S * Qc;
        Eigen::MatrixXd B = Qc.transpose() * lw.asDiagonal() * Qc;
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(A, B, Eigen::EigenvaluesOnly);
        double exact = ges.eigenvalues().minCoeff();
        out.push_back({"H3 local coercivity", lam, 0.0, lam > 0 && exact > 0, fmt("spectral_gap=", exact)});

        // H2 proxy: singular values of the symmetrized K
        Eigen::MatrixXd Ks = sw.asDiagonal() * model.Kmat(0.0) * sw.cwiseInverse().asDiagonal();
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(Ks);
        const auto& sv = svd.singularValues();
        int rank = 0;
        for (int i = 0; i < sv.size(); ++i)
            if (sv[i] > 0.1 * sv[0])
                ++rank;
        double tail = rank < sv.size() ? sv[rank] / sv[0] : 0.0;
        out.push_back({"H2 proxy singular-value decay of K", static_cast<double>(rank), static_cast<double>(n),
                       rank < n, fmt("s_rank+1/s_1=", tail) + fmt(" rank_fraction=", double(rank) / n)});
    }
    // H4 / H5 for the nonlinear term
    if (model.has_F()) {
        double leak = 0, cf = 0;
        std::vector<double> F(n);
        // F carries 1/M factors, so sample decaying fields M * noise
        auto decaying = [&]() {
            Eigen::VectorXd h = random_vec();
            for (int i = 0; i < n; ++i)
                h[i] *= g.sqrt_maxw()[i];
            return h;
        };
        for (int s = 0; s < opt.f_samples; ++s) {
            Eigen::VectorXd h = decaying(), f = decaying();
            model.apply_F(h.data(), h.data(), 0.0, F.data());
            Eigen::Map<Eigen::VectorXd> Fv(F.data(), n);
            double h2 = vs.dot(h, h);
            for (int i = 0; i < ns.dim(); ++i) {
                Eigen::Map<const Eigen::VectorXd> p(ns.phi(i).data(), n);
                leak = std::max(leak, std::abs(vs.dot(Fv, p)) / h2);
            }
            double c = std::abs(vs.dot(Fv, f)) /
                       (vs.norm(h) * std::sqrt(vs.lam_sq(h, gamma)) * std::sqrt(vs.lam_sq(f, gamma)));
            cf = std::max(cf, c);
        }
        out.push_back({"H4 invariant leakage of F", leak, 1e-6, leak <= 1e-6, ""});
        out.push_back({"H5 proxy bilinear bound C_F", cf, 1e12, std::isfinite(cf) && cf <= 1e12, ""});
    } else {
        out.push_back({"H4 invariant leakage of F", 0.0, 1e-6, true, "model has no nonlinear term"});
        out.push_back({"H5 proxy bilinear bound C_F", 0.0, 1e12, true, "model has no nonlinear term"});
    }
    return out;
}

}
