#include "ulr/kernel_core.hpp"

#include <algorithm>
#include <sstream>

namespace ulr::kernel {

namespace {

double hermitian_defect(const CMatrix& h)
{
    return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

// Picks a unit vector inside the column span of `basis` (orthonormal columns)
// by projecting e_0, e_1, ... in order and keeping the first that survives.
CVector first_basis_projection(const CMatrix& basis)
{
    const Eigen::Index dim = basis.rows();
    for (Eigen::Index k = 0; k < dim; ++k) {
        CVector proj = basis * basis.row(k).adjoint();
        const double n = proj.norm();
        if (n > 1e-6)
            return proj / n;
    }
    return basis.col(0);
}

} // namespace

PsdReport psd_check(const CMatrix& gram, double tol)
{
    if (gram.rows() != gram.cols() || gram.rows() == 0)
        throw InvalidInput("psd_check: matrix must be square and nonempty");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(gram, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        std::ostringstream os;
        os << "psd_check: eigensolver did not converge (n=" << gram.rows()
           << ", frobenius=" << gram.norm() << ", max|entry|=" << gram.cwiseAbs().maxCoeff() << ")";
        throw NumericalError(os.str());
    }
    const RVector& ev = es.eigenvalues();
    PsdReport r;
    r.min_eig = ev.minCoeff();
    r.norm = std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
    r.pass = r.min_eig >= -tol * std::max(1.0, r.norm);
    return r;
}

Spectrum spectral_decomposition(const CMatrix& h, double herm_tol)
{
    if (h.rows() != h.cols() || h.rows() == 0)
        throw InvalidInput("spectral_decomposition: matrix must be square and nonempty");
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    if (hermitian_defect(h) > herm_tol * scale)
        throw InvalidInput("spectral_decomposition: operator is not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    if (es.info() != Eigen::Success)
        throw NumericalError("spectral_decomposition: eigensolver did not converge (n=" +
                             std::to_string(h.rows()) + ")");
    return {es.eigenvalues(), es.eigenvectors()};
}

CMatrix damping_operator(const Spectrum& s, double lambda)
{
    if (!(lambda > 0.0))
        throw InvalidInput("damping_operator: Lambda must be positive");
    const RVector f = (-(s.values.array().square()) / lambda).exp();
    return s.vectors * f.cast<Complex>().asDiagonal() * s.vectors.adjoint();
}

CMatrix normal_ordered(const CMatrix& h, const CVector& ref)
{
    const Complex e = ref.dot(h * ref);
    CMatrix out = h;
    out.diagonal().array() -= e.real();
    return out;
}

CMatrix ground_normal_ordered(const CMatrix& h)
{
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw NumericalError("ground_normal_ordered: eigensolver did not converge");
    CMatrix out = h;
    out.diagonal().array() -= es.eigenvalues()(0);
    return out;
}

QuotientSet quotient_set(const CMatrix& h, const CMatrix& vectors, double lambda,
                         const std::vector<CVector>& trials)
{
    if (!(lambda > 0.0))
        throw InvalidInput("quotient_set: Lambda must be positive");
    if (vectors.rows() != h.rows())
        throw InvalidInput("quotient_set: vectors do not live in the operator's space");
    const Spectrum s = spectral_decomposition(h);
    const RVector damp = (-(s.values.array().square()) / lambda).exp();

    QuotientSet out;
    for (const auto& a : trials) {
        if (a.size() != vectors.cols())
            throw InvalidInput("quotient_set: coefficient vector has wrong length");
        if (a.cwiseAbs().maxCoeff() == 0.0)
            throw InvalidInput("quotient_set: all-zero coefficient vector");
        const CVector psi = vectors * a;
        const CVector c = s.vectors.adjoint() * psi;
        const double num = (c.cwiseAbs2().array() * damp.array()).sum();
        const double den = c.squaredNorm();
        if (!(den > 0.0))
            throw InvalidInput("quotient_set: coefficients produce the zero vector");
        out.coefficients.push_back(a);
        out.numerators.push_back(num);
        out.denominators.push_back(den);
        out.values.push_back(num / den);
    }
    return out;
}

void fix_phase(CVector& v)
{
    if (v.size() == 0)
        return;
    const double vmax = v.cwiseAbs().maxCoeff();
    Eigen::Index idx = 0;
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        if (std::abs(v(k)) >= vmax * (1.0 - 1e-10)) {
            idx = k;
            break;
        }
    }
    const Complex ph = std::abs(v(idx)) > 0 ? std::conj(v(idx)) / std::abs(v(idx)) : Complex{1.0};
    v *= ph;
    v(idx) = Complex{v(idx).real(), 0.0};
}

RecenteredFiducial recenter(const CMatrix& h, double lambda)
{
    if (!(lambda > 0.0))
        throw InvalidInput("recenter: Lambda must be positive");
    const Spectrum s = spectral_decomposition(h);
    const Eigen::Index n = s.values.size();
    const double scale = std::max(1.0, s.values.cwiseAbs().maxCoeff());
    const double tol = 1e-10 * scale;

    // Smallest E^2; ties to the smallest E.
    double best_sq = s.values(0) * s.values(0);
    for (Eigen::Index i = 1; i < n; ++i)
        best_sq = std::min(best_sq, s.values(i) * s.values(i));
    double chosen = 0.0;
    bool have = false;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double e = s.values(i);
        if (std::abs(e * e - best_sq) <= tol * scale && (!have || e < chosen)) {
            chosen = e;
            have = true;
        }
    }

    std::vector<Eigen::Index> block;
    for (Eigen::Index i = 0; i < n; ++i)
        if (std::abs(s.values(i) - chosen) <= tol)
            block.push_back(i);

    CMatrix basis(h.rows(), static_cast<Eigen::Index>(block.size()));
    for (std::size_t j = 0; j < block.size(); ++j)
        basis.col(static_cast<Eigen::Index>(j)) = s.vectors.col(block[j]);

    RecenteredFiducial out;
    out.degeneracy = block.size();
    out.vector = block.size() == 1 ? CVector(basis.col(0)) : first_basis_projection(basis);
    out.vector.normalize();
    fix_phase(out.vector);
    out.energy = out.vector.dot(h * out.vector).real();
    out.quotient_achieved = std::exp(-chosen * chosen / lambda);
    out.iterations = 1;
    if (out.degeneracy > 1)
        out.warning = "degenerate maximizer: eigenspace dimension " + std::to_string(out.degeneracy) +
                      ", resolved by basis order";
    return out;
}

RecenteredFiducial recenter(const CMatrix& h, double lambda, const CMatrix& span)
{
    if (!(lambda > 0.0))
        throw InvalidInput("recenter: Lambda must be positive");
    if (span.rows() != h.rows() || span.cols() == 0)
        throw InvalidInput("recenter: span does not match the operator dimension");

    // Modified Gram-Schmidt in column order; dependent columns are dropped.
    std::vector<CVector> cols;
    for (Eigen::Index j = 0; j < span.cols(); ++j) {
        CVector v = span.col(j);
        for (const auto& u : cols)
            v -= u * u.dot(v);
        const double nv = v.norm();
        if (nv > 1e-10 * std::max(1.0, span.col(j).norm()))
            cols.push_back(v / nv);
    }
    if (cols.empty())
        throw InvalidInput("recenter: span is the zero subspace");
    CMatrix basis(h.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j)
        basis.col(static_cast<Eigen::Index>(j)) = cols[j];

    const Spectrum s = spectral_decomposition(h);
    const CMatrix damp = damping_operator(s, lambda);
    const CMatrix reduced = basis.adjoint() * damp * basis;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(reduced);
    if (es.info() != Eigen::Success)
        throw NumericalError("recenter: eigensolver did not converge on the span");

    const Eigen::Index r = reduced.rows();
    const double top = es.eigenvalues()(r - 1);
    std::vector<Eigen::Index> block;
    for (Eigen::Index i = 0; i < r; ++i)
        if (std::abs(es.eigenvalues()(i) - top) <= 1e-12 * std::max(1.0, std::abs(top)))
            block.push_back(i);

    CMatrix top_space(r, static_cast<Eigen::Index>(block.size()));
    for (std::size_t j = 0; j < block.size(); ++j)
        top_space.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(block[j]);
    CMatrix lifted = basis * top_space;

    RecenteredFiducial out;
    out.degeneracy = block.size();
    if (block.size() == 1) {
        out.vector = lifted.col(0);
    } else {
        // Tie-break inside the maximizing space by the smallest H value.
        const CMatrix hred = lifted.adjoint() * h * lifted;
        Eigen::SelfAdjointEigenSolver<CMatrix> hs(hred);
        const double emin = hs.eigenvalues()(0);
        std::vector<Eigen::Index> low;
        for (Eigen::Index i = 0; i < hred.rows(); ++i)
            if (std::abs(hs.eigenvalues()(i) - emin) <= 1e-10 * std::max(1.0, std::abs(emin)))
                low.push_back(i);
        CMatrix sub(h.rows(), static_cast<Eigen::Index>(low.size()));
        for (std::size_t j = 0; j < low.size(); ++j)
            sub.col(static_cast<Eigen::Index>(j)) = lifted * hs.eigenvectors().col(low[j]);
        out.degeneracy = low.size();
        out.vector = low.size() == 1 ? CVector(sub.col(0)) : first_basis_projection(sub);
    }
    out.vector.normalize();
    fix_phase(out.vector);
    out.energy = out.vector.dot(h * out.vector).real();
    out.quotient_achieved = out.vector.dot(damp * out.vector).real();
    out.iterations = 1;
    if (out.degeneracy > 1)
        out.warning = "degenerate maximizer: eigenspace dimension " + std::to_string(out.degeneracy) +
                      ", resolved by basis order";
    return out;
}

NormalizedKernel normalize_diagonal(const CMatrix& k)
{
    NormalizedKernel out;
    out.diagonal_factors = k.diagonal().real();
    if ((out.diagonal_factors.array() <= 0.0).any())
        throw NumericalError("normalize_diagonal: nonpositive diagonal entry");
    const RVector inv = out.diagonal_factors.array().rsqrt();
    out.entries = inv.cast<Complex>().asDiagonal() * k * inv.cast<Complex>().asDiagonal();
    return out;
}

} // namespace ulr::kernel
