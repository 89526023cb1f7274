#pragma once

// Free scalar field on a periodic lattice, starting from the ultralocal
// coherent-state representation with fiducial width M. The regularized
// Hamiltonian keeps the first N Fourier modes; each retained mode is an
// oscillator of frequency omega_n = sqrt(k_n^2 + m^2) written in the
// M-representation. Recentering each mode on the ground state of its
// oscillator turns the ultralocal kernel into the relativistic one.

#include <string>
#include <vector>

#include "ulr/kernel_core.hpp"
#include "ulr/lattice.hpp"
#include "ulr/oscillator.hpp"

namespace ulr::free_field {

using lattice::FieldConfig;
using lattice::LatticeSpec;

double frequency(double k2, double m);

/// L'' L' exp[dx^d sum_x u''*(x) u'(x)], u = (sqrt(M) phi + i pi / sqrt(M)) / sqrt(2).
Complex ultralocal_overlap(const FieldConfig& f2, const FieldConfig& f1, double M, const LatticeSpec& spec);

/// N'' N' exp[int z''*(k) e^{-i dt omega(k)} z'(k) d^dk] with z(k) built from the
/// discrete Fourier transforms of pi and phi and the box measure (2 pi / L)^d.
Complex relativistic_kernel(const FieldConfig& f2, const FieldConfig& f1, double m, double dt,
                            const LatticeSpec& spec);

/// Single real mode of frequency omega:
/// exp(z''* e^{-i omega dt} z' - |z''|^2/2 - |z'|^2/2), z = (sqrt(omega) phi + i pi/sqrt(omega))/sqrt(2).
Complex mode_kernel(double omega, double pi2, double phi2, double pi1, double phi1, double dt);

/// Closed-form ground state of (P^2 + omega^2 Q^2)/2 in the first D levels of
/// the M-oscillator basis (squeezed vacuum, tanh r = (omega - M)/(omega + M)).
CVector squeezed_vacuum(double M, double omega, int D);

/// |<eta_M|eta_omega>| = (2 sqrt(M omega) / (M + omega))^{1/2}.
double vacuum_overlap(double M, double omega);

/// Levels kept for a mode: at least D_base, at least 40 + 20 |ln(omega/M)|,
/// and enough that the squeezed-vacuum amplitude tail falls below 1e-14.
int mode_truncation(double omega, double M, int D_base);

struct ModeOscillator {
    lattice::Mode mode;
    double k = 0.0;
    double omega = 0.0;
    double M = 1.0;
    oscillator::OscillatorRep rep; ///< Omega = M, H = (P^2 + omega^2 Q^2)/2 normal ordered about eta_M
};

ModeOscillator mode_oscillator(double omega, double M, int D_base);

/// First N modes in lattice mode order; the remaining modes carry no Hamiltonian.
std::vector<ModeOscillator> truncated_hamiltonian(int N, double m, double M, int D_base,
                                                  const LatticeSpec& spec);

struct ModeRecentering {
    CVector fiducial;              ///< ground state of the mode oscillator, M-basis
    kernel::Spectrum spectrum;     ///< of H normal ordered about `fiducial`
    double ground_shift = 0.0;     ///< lowest eigenvalue of the fiducial-ordered H
    double overlap_with_original = 0.0;
    double analytic_deviation = 0.0; ///< max |fiducial - squeezed_vacuum|
    double quotient = 0.0;
    std::size_t degeneracy = 1;
    std::string warning;
};

/// Re-normal-orders the mode Hamiltonian about its ground state and
/// maximizes the damped quotient.
ModeRecentering recenter_mode(const ModeOscillator& mode, double lambda);

struct DiagnosticsRow {
    int N = 0;
    double damped_overlap = 0.0;
    double time_kernel_modulus = 0.0;
    double recenter_deviation = 0.0;
};

struct ModeSignal {
    double damped = 0.0;        ///< <eta_M| e^{-H^2/Lambda} |eta_M>
    double time_modulus = 0.0;  ///< |<eta_M| e^{-i dt H} |eta_M>|
    double recenter_deviation = 0.0;
};

ModeSignal mode_signal(const ModeOscillator& mode, double lambda, double dt);

/// Cumulative products over modes 1..N, for each N in `N_list` (N <= site count).
std::vector<DiagnosticsRow> incompatibility_diagnostics(const std::vector<int>& N_list, double m, double M,
                                                        double lambda, double dt, const LatticeSpec& spec,
                                                        int D_base, int jobs = 1);

/// Same with explicit mode frequencies omega_1, omega_2, ... in place of a lattice.
std::vector<DiagnosticsRow> incompatibility_diagnostics(const std::vector<int>& N_list,
                                                        const std::vector<double>& omegas, double M,
                                                        double lambda, double dt, int D_base, int jobs = 1);

struct RecenteredKernel {
    CMatrix kernel;              ///< full kernel: recentered retained modes times ultralocal rest
    CMatrix retained;            ///< recentered retained modes only
    CMatrix relativistic_retained;
    CMatrix target;              ///< relativistic on retained modes, ultralocal on the rest
    double retained_deviation = 0.0;
    double full_deviation = 0.0;
    double max_fiducial_deviation = 0.0;
    std::vector<int> truncations;
    std::vector<std::string> warnings;
};

RecenteredKernel recentered_kernel(int N, double m, double M, double lambda, double dt,
                                   const std::vector<FieldConfig>& labels, const LatticeSpec& spec,
                                   int D_base, int jobs = 1);

/// Product over modes 1..N of the vacuum overlaps between masses m and m'.
std::vector<double> mass_inequivalence_profile(double m1, double m2, const LatticeSpec& spec);

} // namespace ulr::free_field
