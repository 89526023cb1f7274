#pragma once

// Classical dynamics of a single degree of freedom, in the standard form
// (time t as the evolution parameter) and in the reparametrized form where t
// and its conjugate s are dynamical and the Lagrange multiplier lambda(tau)
// enforces the constraint s + H(q,p) = 0.

#include <functional>
#include <iosfwd>
#include <vector>

namespace ulr::classical {

struct PhasePoint {
    double q = 0.0;
    double p = 0.0;
};

struct ExtendedPhasePoint {
    double tau = 0.0;
    double t = 0.0;
    double q = 0.0;
    double p = 0.0;
    double s = 0.0;
};

/// H(q,p) with its gradient.
struct Hamiltonian {
    std::function<double(double, double)> value;
    std::function<double(double, double)> d_dq;
    std::function<double(double, double)> d_dp;
};

Hamiltonian harmonic(double omega = 1.0);
Hamiltonian free_particle();
Hamiltonian constant(double c);

struct TimedPoint {
    double t = 0.0;
    PhasePoint y;
};
using Trajectory = std::vector<TimedPoint>;
using ExtendedTrajectory = std::vector<ExtendedPhasePoint>;

/// Classic RK4 with a fixed step; the step is shrunk slightly so the grid ends
/// exactly at t1.
Trajectory integrate_hamilton(const Hamiltonian& h, PhasePoint y0, double t0, double t1, double dt);

using Multiplier = std::function<double(double)>;

/// Point on the constraint surface s = -H(q,p).
ExtendedPhasePoint on_shell(const Hamiltonian& h, PhasePoint y, double t0 = 0.0, double tau0 = 0.0);

/// Integrates dq/dtau = lambda dH/dp, dp/dtau = -lambda dH/dq, dt/dtau = lambda,
/// ds/dtau = 0 from y0.tau to tau1. Rejects lambda <= 0 at any evaluated tau.
ExtendedTrajectory integrate_reparam(const Hamiltonian& h, const Multiplier& lambda,
                                     ExtendedPhasePoint y0, double tau1, double dtau);

/// As above, stepping until t reaches t_end.
ExtendedTrajectory integrate_reparam_until(const Hamiltonian& h, const Multiplier& lambda,
                                           ExtendedPhasePoint y0, double t_end, double dtau);

struct EquivalenceReport {
    double max_dev = 0.0;          ///< max |dq| + |dp| after re-mapping to t
    double constraint_drift = 0.0; ///< max |s + H(q,p)| along the reparametrized run
    std::size_t compared = 0;
};

/// Interpolates the reparametrized run onto the time grid of `standard`
/// (four-point cubic in t) over the overlapping time range.
EquivalenceReport equivalence_report(const Trajectory& standard, const ExtendedTrajectory& reparam,
                                     const Hamiltonian& h);

/// Columns tau,t,q,p,s.
void write_csv(std::ostream& os, const ExtendedTrajectory& traj);

} // namespace ulr::classical
