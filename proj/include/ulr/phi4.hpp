#pragma once

// Quartic lattice field on a periodic ring of 1-4 sites. Each site carries an
// M-oscillator truncated to D levels; the Hamiltonian acts on the product
// basis either densely or through per-site strided applications.

#include <optional>
#include <string>
#include <vector>

#include "ulr/kernel_core.hpp"
#include "ulr/krylov.hpp"
#include "ulr/lattice.hpp"

namespace ulr::phi4 {

using lattice::FieldConfig;

struct Phi4Spec {
    int sites = 2;
    double box_length = 4.0;
    double m0 = 1.0;
    double g = 0.0;
    double M = 1.0;
    int D = 24;
    std::optional<double> counterterm; ///< delta m^2 at this cutoff
    std::string counterterm_provenance;

    double spacing() const { return box_length / sites; }
    void validate() const;
};

inline constexpr long kMaxMatrixFreeDim = 1000000;
inline constexpr long kMaxDenseDim = 4096;

/// Spectral Laplacian of a periodic ring of n sites as a site quadratic form,
/// G_xy = n^{-1} sum_j k_j^2 cos(k_j (x - y) dx), j in (-n/2, n/2].
RMatrix ring_gradient_form(int n, double box_length);

/// H = sum_x [Pi_x^2/2 + (m0^2 + dm^2) Phi_x^2/2 + g Phi_x^4 / dx] + Phi^T G Phi / 2
/// in canonical site variables Phi = sqrt(dx) phi, normal ordered about the
/// product fiducial.
class Phi4Hamiltonian {
public:
    explicit Phi4Hamiltonian(const Phi4Spec& spec);

    const Phi4Spec& spec() const { return spec_; }
    long dim() const { return dim_; }
    double normal_order_constant() const { return shift_; }
    const RMatrix& gradient() const { return G_; }

    /// Per-site compressions (D x D).
    const CMatrix& phi() const { return q_; }
    const CMatrix& pi() const { return p_; }
    const CMatrix& phi2() const { return q2_; }
    const CMatrix& phi4() const { return q4_; }

    void apply(const CVector& in, CVector& out) const;
    krylov::LinearOperator op() const;

    /// Explicit matrix; only for dim <= kMaxDenseDim.
    CMatrix dense() const;

    /// Applies a single-site matrix at `site` to a product-basis vector.
    CVector apply_site(const CMatrix& a, int site, const CVector& in) const;

private:
    void add_site(const CMatrix& a, int site, Complex coeff, const CVector& in, CVector& out) const;

    Phi4Spec spec_;
    long dim_ = 0;
    std::vector<long> stride_;
    RMatrix G_;
    CMatrix q_, p_, q2_, q4_;
    std::vector<CMatrix> locals_;
    double shift_ = 0.0;
};

struct GroundState {
    double E0 = 0.0;
    CVector vector;
    double residual = 0.0;
    int iterations = 0;
    std::vector<double> residual_history;
};

/// Lanczos from the product fiducial e_0.
GroundState ground_state_iterative(const Phi4Hamiltonian& h, double tol = 1e-10);

/// <Phi^4> - 3 <Phi^2>^2 at `site`.
double kurtosis_excess(const Phi4Hamiltonian& h, const CVector& v, int site = 0);

struct KernelReport {
    CMatrix kernel;
    double E0 = 0.0;
    double residual = 0.0;
    double kurtosis_excess = 0.0;
    bool dense_path = false;
    double dense_E0 = 0.0;            ///< dense path only
    double recenter_overlap = 0.0;    ///< |<kernel::recenter|v0>|, dense path only
    std::size_t degeneracy = 1;
    std::string warning;
};

enum class Evolution { automatic, dense, krylov };

/// <label''| e^{-i dt (H - E0)} |label'> with |label> = prod_x W_x(sqrt(dx) pi_x, sqrt(dx) phi_x) v0
/// and W = e^{i(p Phi - q Pi)}. `lambda` enters only the dense recenter cross-check.
KernelReport recentered_phi4_kernel(const Phi4Spec& spec, const std::vector<FieldConfig>& labels,
                                    double dt, double lambda = 1.0, Evolution evolution = Evolution::automatic);

struct MIndependence {
    KernelReport first;
    KernelReport second;
    double deviation = 0.0;
};

MIndependence m_independence(Phi4Spec spec, double M1, double M2, const std::vector<FieldConfig>& labels,
                             double dt, double lambda = 1.0);

} // namespace ulr::phi4
