#pragma once

// Reproducing-kernel machinery shared by the physics modules: Gram sections of
// kernels, positive-semidefiniteness checks, the constraint-damped quotient set
// and the recentering of a fiducial vector.

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ulr/types.hpp"

namespace ulr::kernel {

/// Finite Gram section K_jk = kernel(label_j, label_k).
template <class Label>
struct GramMatrix {
    std::vector<Label> labels;
    CMatrix entries;
};

/// Builds the Gram matrix of `kernel` over `labels`. The upper triangle
/// (diagonal included) is evaluated; the lower triangle is its conjugate, so
/// the result is Hermitian bit for bit.
template <class Label, class Kernel>
GramMatrix<Label> gram_matrix(const Kernel& kernel, std::vector<Label> labels)
{
    if (labels.empty())
        throw InvalidInput("gram_matrix: label list is empty");
    const auto n = static_cast<Eigen::Index>(labels.size());
    CMatrix K(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = j; k < n; ++k) {
            const Complex v = kernel(labels[j], labels[k]);
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw NumericalError("gram_matrix: non-finite kernel value at pair (" +
                                     std::to_string(j) + ", " + std::to_string(k) + ")");
            K(j, k) = v;
            if (k != j)
                K(k, j) = std::conj(v);
        }
    }
    return {std::move(labels), std::move(K)};
}

struct PsdReport {
    double min_eig = 0.0;
    double norm = 0.0; ///< spectral norm max|eig|
    bool pass = false;
};

/// pass iff min_eig >= -tol * max(1, ||G||).
PsdReport psd_check(const CMatrix& gram, double tol);

template <class Label>
PsdReport psd_check(const GramMatrix<Label>& gram, double tol)
{
    return psd_check(gram.entries, tol);
}

/// Eigendecomposition of a Hermitian matrix, ascending eigenvalues.
struct Spectrum {
    RVector values;
    CMatrix vectors;
};

/// Throws InvalidInput if `h` is not Hermitian to `herm_tol` (relative).
Spectrum spectral_decomposition(const CMatrix& h, double herm_tol = 1e-12);

/// Dense e^{-H^2/Lambda}.
CMatrix damping_operator(const Spectrum& spectrum, double lambda);

/// H - <ref|H|ref> for unit `ref`: normal ordering with respect to a vector.
CMatrix normal_ordered(const CMatrix& h, const CVector& ref);

/// H - E_min: normal ordering with respect to the ground state of H. The
/// result is nonnegative and its ground state is a null vector.
CMatrix ground_normal_ordered(const CMatrix& h);

struct QuotientSet {
    std::vector<CVector> coefficients;
    std::vector<double> numerators;
    std::vector<double> denominators;
    std::vector<double> values;
};

/// For each trial {a_j}: psi = sum_j a_j v_j and
/// value = <psi|e^{-H^2/Lambda}|psi> / <psi|psi>. `vectors` holds v_j as columns.
QuotientSet quotient_set(const CMatrix& h, const CMatrix& vectors, double lambda,
                         const std::vector<CVector>& trials);

struct RecenteredFiducial {
    CVector vector;
    double quotient_achieved = 0.0;
    int iterations = 0;
    double energy = 0.0;          ///< <v|H|v> of the returned vector
    std::size_t degeneracy = 1;   ///< dimension of the maximizing eigenspace
    std::string warning;          ///< nonempty when degeneracy survives tie-breaking
};

/// Maximizer of the damped quotient over the whole truncated space: the
/// eigenvector of H^2 with the smallest eigenvalue. Ties go to the smaller
/// H-eigenvalue, then to the lowest basis index. Phase fixed so the
/// largest-modulus component is real positive.
RecenteredFiducial recenter(const CMatrix& h, double lambda);

/// Same maximization restricted to the column span of `span`.
RecenteredFiducial recenter(const CMatrix& h, double lambda, const CMatrix& span);

/// Rotates `v` so that its largest-modulus component (lowest index among
/// near-ties) is real and positive.
void fix_phase(CVector& v);

/// K_jk / sqrt(K_jj K_kk) with the discarded diagonal factors.
struct NormalizedKernel {
    CMatrix entries;
    RVector diagonal_factors;
};
NormalizedKernel normalize_diagonal(const CMatrix& k);

} // namespace ulr::kernel
