#include "ulr/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ulr::krylov {

LinearOperator from_dense(const CMatrix& h)
{
    return {h.rows(), [h](const CVector& in, CVector& out) { out.noalias() = h * in; }};
}

namespace {

struct KrylovBasis {
    std::vector<CVector> v;
    std::vector<double> alpha;
    std::vector<double> beta; ///< beta[k] couples v[k] and v[k+1]
    bool invariant = false;   ///< the space closed under H
    CVector tail;             ///< H v_last - alpha v_last - beta v_prev (unnormalized)
};

KrylovBasis build(const LinearOperator& h, const CVector& start, int m, int& applications)
{
    KrylovBasis kb;
    CVector w(h.dim);
    kb.v.push_back(start / start.norm());
    for (int k = 0; k < m; ++k) {
        h.apply(kb.v[static_cast<std::size_t>(k)], w);
        ++applications;
        const double a = kb.v[static_cast<std::size_t>(k)].dot(w).real();
        kb.alpha.push_back(a);
        // Full reorthogonalization, twice.
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& u : kb.v)
                w -= u * u.dot(w);
        const double b = w.norm();
        kb.tail = w;
        if (k + 1 == m)
            break;
        const double scale = std::max(1.0, std::abs(a));
        if (b <= 1e-13 * scale) {
            kb.invariant = true;
            break;
        }
        kb.beta.push_back(b);
        kb.v.push_back(w / b);
    }
    return kb;
}

RMatrix tridiagonal(const KrylovBasis& kb)
{
    const auto n = static_cast<Eigen::Index>(kb.alpha.size());
    RMatrix t = RMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        t(i, i) = kb.alpha[static_cast<std::size_t>(i)];
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        t(i, i + 1) = kb.beta[static_cast<std::size_t>(i)];
        t(i + 1, i) = kb.beta[static_cast<std::size_t>(i)];
    }
    return t;
}

} // namespace

Eigenpair lowest_eigenpair(const LinearOperator& h, const CVector& seed, const LanczosOptions& opts)
{
    if (seed.size() != h.dim || seed.norm() == 0.0)
        throw InvalidInput("lowest_eigenpair: seed must be a nonzero vector of the operator dimension");
    const int m = static_cast<int>(std::min<Eigen::Index>(opts.krylov_dim, h.dim));

    Eigenpair out;
    CVector x = seed / seed.norm();
    CVector hx(h.dim);
    for (int restart = 0; restart <= opts.max_restarts; ++restart) {
        const KrylovBasis kb = build(h, x, m, out.iterations);
        Eigen::SelfAdjointEigenSolver<RMatrix> es(tridiagonal(kb));
        const RVector s = es.eigenvectors().col(0);
        x.setZero();
        for (Eigen::Index i = 0; i < s.size(); ++i)
            x += s(i) * kb.v[static_cast<std::size_t>(i)];
        x.normalize();
        h.apply(x, hx);
        ++out.iterations;
        out.value = x.dot(hx).real();
        out.residual = (hx - out.value * x).norm();
        out.residual_history.push_back(out.residual);
        if (out.residual < opts.tol) {
            out.vector = x;
            return out;
        }
    }
    std::ostringstream os;
    os << "lowest_eigenpair: no convergence to " << opts.tol << "; residual history:";
    for (double r : out.residual_history)
        os << ' ' << r;
    throw NumericalError(os.str());
}

CVector propagate(const LinearOperator& h, const CVector& v, double t, int krylov_dim, double tol)
{
    if (v.size() != h.dim)
        throw InvalidInput("propagate: vector dimension mismatch");
    const double norm = v.norm();
    if (norm == 0.0 || t == 0.0)
        return v;
    const int m = static_cast<int>(std::min<Eigen::Index>(krylov_dim, h.dim));
    CVector cur = v;
    double remaining = t;
    double step = t;
    int applications = 0;
    while (std::abs(remaining) > 0.0) {
        const KrylovBasis kb = build(h, cur, m, applications);
        Eigen::SelfAdjointEigenSolver<RMatrix> es(tridiagonal(kb));
        const double beta_tail = kb.invariant ? 0.0 : kb.tail.norm();
        if (std::abs(step) > std::abs(remaining))
            step = remaining;
        CVector y;
        for (int halvings = 0;; ++halvings) {
            const RMatrix& Z = es.eigenvectors();
            const CVector phases = (-kI * step * es.eigenvalues().cast<Complex>()).array().exp();
            y = Z.cast<Complex>() * (phases.asDiagonal() * Z.row(0).transpose().cast<Complex>());
            const double err = beta_tail * std::abs(y(y.size() - 1));
            if (err <= tol || halvings > 60)
                break;
            step *= 0.5;
        }
        CVector next = CVector::Zero(h.dim);
        for (Eigen::Index i = 0; i < y.size(); ++i)
            next += y(i) * kb.v[static_cast<std::size_t>(i)];
        cur = next * cur.norm();
        remaining -= step;
        if (std::abs(remaining) < 1e-15 * std::abs(t))
            break;
    }
    return cur;
}

} // namespace ulr::krylov
