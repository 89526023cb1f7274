#pragma once

// One canonical degree of freedom in a truncated oscillator basis: coherent
// states, their overlaps and propagators, and the auxiliary (S,T) constraint
// sector evaluated channel by channel in the eigenbasis of H.

#include <string>
#include <vector>

#include "ulr/kernel_core.hpp"
#include "ulr/types.hpp"

namespace ulr::oscillator {

/// How a polynomial Hamiltonian is ordered once assembled.
enum class Ordering {
    as_written,      ///< operator words taken literally
    fiducial_normal, ///< the fiducial expectation is subtracted, <eta|H|eta> = 0
};

/// One monomial: coefficient times a word read left to right. Letters:
/// 'Q', 'P' canonical operators; 'a' annihilator; 'A' creator; 'x' = a + A.
struct Term {
    double coefficient = 0.0;
    std::string word;
};

struct HamiltonianSpec {
    std::vector<Term> terms;
    Ordering ordering = Ordering::as_written;
    std::string name;

    /// omega a^dag a
    static HamiltonianSpec harmonic(double omega);
    /// omega a^dag a + g (a^dag + a)^4
    static HamiltonianSpec quartic(double omega, double g);
    /// (P^2 + omega^2 Q^2)/2, normal ordered about the fiducial.
    static HamiltonianSpec quadratic(double omega);

    int degree() const;
};

struct OscillatorRep {
    int dim = 0;
    double omega = 1.0; ///< fiducial frequency: (Omega Q + iP) eta = 0
    CMatrix q;
    CMatrix p;
    CMatrix h;
    HamiltonianSpec spec;
    double normal_order_constant = 0.0; ///< subtracted from H (0 for as_written)
    kernel::Spectrum q_spectrum;
    kernel::Spectrum p_spectrum;
    kernel::Spectrum h_spectrum;
};

/// Q = (a + a^dag)/sqrt(2 Omega), P = i sqrt(Omega/2)(a^dag - a), exact
/// compressions of the infinite matrices; H assembled per `spec`.
OscillatorRep build_oscillator_rep(int dim, double omega, const HamiltonianSpec& spec);

/// Compression to `dim` levels of a word in the ladder algebra.
CMatrix operator_word(int dim, double omega, const std::string& word);

struct Label {
    double p = 0.0;
    double q = 0.0;
};

enum class Convention {
    ordered, ///< |p,q> = e^{-iqP} e^{ipQ} |eta>
    weyl,    ///< |p,q> = e^{i(pQ - qP)} |eta>
};

/// Displaces `fiducial` to label (p, q). Exponentials are applied through the
/// eigendecompositions of the truncated P and Q.
CVector displace(const OscillatorRep& rep, const CVector& fiducial, double p, double q,
                 Convention convention = Convention::ordered);

/// Occupation of the two highest levels.
double top_occupation(const CVector& v);

/// Coherent vector about the oscillator ground state e_0. Throws
/// TruncationError when the top-level occupation exceeds `top_tol`.
CVector coherent_vector(const OscillatorRep& rep, double p, double q,
                        Convention convention = Convention::ordered, double top_tol = 1e-10);

/// Closed-form overlap <p'',q''|p',q'> in the ordered convention.
Complex overlap_analytic(double p2, double q2, double p1, double q1, double omega);

/// Columns are coherent vectors for `labels`.
CMatrix coherent_vectors(const OscillatorRep& rep, const std::vector<Label>& labels,
                         Convention convention = Convention::ordered);

/// <v_j| e^{-i dt H} |v_k>.
CMatrix propagator_kernel(const kernel::Spectrum& h, double dt, const CMatrix& vectors);
CMatrix propagator_kernel(const OscillatorRep& rep, double dt, const std::vector<Label>& labels);

/// Labels of the auxiliary canonical pair (S, T).
struct ConstraintSector {
    double lambda = 1.0; ///< Gaussian width of the constraint surrogate
    double delta = 1e-3; ///< half-width of the spectral interval |S + H| <= delta
    double s2 = 0.0;
    double t2 = 0.0;
    double s1 = 0.0;
    double t1 = 0.0;
};

void validate(const ConstraintSector& sector);

/// Per H-eigenvalue E: e^{-(s''+E)^2/2Lambda} e^{-i(t''-t')E} e^{-(s'+E)^2/2Lambda}.
CMatrix constrained_kernel(const kernel::Spectrum& h, const ConstraintSector& sector,
                           const CMatrix& vectors);
CMatrix constrained_kernel(const OscillatorRep& rep, const ConstraintSector& sector,
                           const std::vector<Label>& labels);

/// Direct interval projection (2 delta)^{-1} E(|S + H| <= delta) between the
/// Gaussian (S,T) coherent states; tends to constrained_kernel as delta -> 0.
CMatrix interval_projected_kernel(const kernel::Spectrum& h, const ConstraintSector& sector,
                                  const CMatrix& vectors);

struct ReducedTimeKernel {
    CMatrix reduced;
    CMatrix propagator;
    double max_deviation = 0.0;
    double s_integral_constant = 0.0;   ///< divided out: (2 pi Lambda)
    double channel_constant_spread = 0.0; ///< max relative spread of per-channel s-integrals
};

/// Integrates s'' and s' out of the constrained kernel by quadrature in each
/// H channel, rescales by the s-integral constant and compares with the plain
/// propagator.
ReducedTimeKernel reduced_time_kernel(const kernel::Spectrum& h, double lambda, double dt,
                                      const CMatrix& vectors);
ReducedTimeKernel reduced_time_kernel(const OscillatorRep& rep, double lambda, double dt,
                                      const std::vector<Label>& labels);

} // namespace ulr::oscillator
