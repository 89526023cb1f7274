#include "ulr/classical.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "ulr/types.hpp"

namespace ulr::classical {

Hamiltonian harmonic(double omega)
{
    return {[omega](double q, double p) { return 0.5 * (p * p + omega * omega * q * q); },
            [omega](double q, double) { return omega * omega * q; },
            [](double, double p) { return p; }};
}

Hamiltonian free_particle()
{
    return {[](double, double p) { return 0.5 * p * p; },
            [](double, double) { return 0.0; },
            [](double, double p) { return p; }};
}

Hamiltonian constant(double c)
{
    return {[c](double, double) { return c; },
            [](double, double) { return 0.0; },
            [](double, double) { return 0.0; }};
}

namespace {

long step_count(double span, double dt)
{
    if (!(dt > 0.0))
        throw InvalidInput("step size must be positive");
    if (!(span >= 0.0))
        throw InvalidInput("integration interval must be nonnegative");
    return std::max(1L, static_cast<long>(std::ceil(span / dt - 1e-9)));
}

void check_finite(double q, double p, double t)
{
    if (!std::isfinite(q) || !std::isfinite(p))
        throw NumericalError("integration diverged; last valid time " + std::to_string(t));
}

struct Deriv {
    double q, p;
};

Deriv flow(const Hamiltonian& h, double q, double p, double scale)
{
    return {scale * h.d_dp(q, p), -scale * h.d_dq(q, p)};
}

} // namespace

Trajectory integrate_hamilton(const Hamiltonian& h, PhasePoint y0, double t0, double t1, double dt)
{
    const long n = step_count(t1 - t0, dt);
    const double step = (t1 - t0) / static_cast<double>(n);
    Trajectory out;
    out.reserve(static_cast<std::size_t>(n) + 1);
    out.push_back({t0, y0});
    PhasePoint y = y0;
    for (long i = 0; i < n; ++i) {
        const auto k1 = flow(h, y.q, y.p, 1.0);
        const auto k2 = flow(h, y.q + 0.5 * step * k1.q, y.p + 0.5 * step * k1.p, 1.0);
        const auto k3 = flow(h, y.q + 0.5 * step * k2.q, y.p + 0.5 * step * k2.p, 1.0);
        const auto k4 = flow(h, y.q + step * k3.q, y.p + step * k3.p, 1.0);
        y.q += step / 6.0 * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q);
        y.p += step / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
        const double t = t0 + static_cast<double>(i + 1) * step;
        check_finite(y.q, y.p, out.back().t);
        out.push_back({t, y});
    }
    return out;
}

ExtendedPhasePoint on_shell(const Hamiltonian& h, PhasePoint y, double t0, double tau0)
{
    return {tau0, t0, y.q, y.p, -h.value(y.q, y.p)};
}

namespace {

double checked_multiplier(const Multiplier& lambda, double tau)
{
    const double l = lambda(tau);
    if (!(l > 0.0) || !std::isfinite(l))
        throw InvalidInput("lambda(tau) must be positive; got " + std::to_string(l) +
                           " at tau = " + std::to_string(tau));
    return l;
}

ExtendedPhasePoint rk4_extended(const Hamiltonian& h, const Multiplier& lambda,
                                const ExtendedPhasePoint& y, double step)
{
    const double l1 = checked_multiplier(lambda, y.tau);
    const double lm = checked_multiplier(lambda, y.tau + 0.5 * step);
    const double l4 = checked_multiplier(lambda, y.tau + step);
    const auto k1 = flow(h, y.q, y.p, l1);
    const auto k2 = flow(h, y.q + 0.5 * step * k1.q, y.p + 0.5 * step * k1.p, lm);
    const auto k3 = flow(h, y.q + 0.5 * step * k2.q, y.p + 0.5 * step * k2.p, lm);
    const auto k4 = flow(h, y.q + step * k3.q, y.p + step * k3.p, l4);
    ExtendedPhasePoint next = y;
    next.q += step / 6.0 * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q);
    next.p += step / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
    next.t += step / 6.0 * (l1 + 4.0 * lm + l4);
    // ds/dtau = 0
    next.tau = y.tau + step;
    check_finite(next.q, next.p, y.t);
    return next;
}

void check_on_shell(const Hamiltonian& h, const ExtendedPhasePoint& y0)
{
    const double e = h.value(y0.q, y0.p);
    if (std::abs(y0.s + e) > 1e-12 * std::max(1.0, std::abs(e)))
        throw InvalidInput("initial point is off the constraint surface: s + H = " +
                           std::to_string(y0.s + e));
}

} // namespace

ExtendedTrajectory integrate_reparam(const Hamiltonian& h, const Multiplier& lambda,
                                     ExtendedPhasePoint y0, double tau1, double dtau)
{
    check_on_shell(h, y0);
    const long n = step_count(tau1 - y0.tau, dtau);
    const double step = (tau1 - y0.tau) / static_cast<double>(n);
    ExtendedTrajectory out;
    out.reserve(static_cast<std::size_t>(n) + 1);
    out.push_back(y0);
    for (long i = 0; i < n; ++i) {
        auto next = rk4_extended(h, lambda, out.back(), step);
        next.tau = y0.tau + static_cast<double>(i + 1) * step;
        out.push_back(next);
    }
    return out;
}

ExtendedTrajectory integrate_reparam_until(const Hamiltonian& h, const Multiplier& lambda,
                                           ExtendedPhasePoint y0, double t_end, double dtau)
{
    check_on_shell(h, y0);
    if (!(dtau > 0.0))
        throw InvalidInput("step size must be positive");
    ExtendedTrajectory out{y0};
    long i = 0;
    while (out.back().t < t_end) {
        auto next = rk4_extended(h, lambda, out.back(), dtau);
        next.tau = y0.tau + static_cast<double>(++i) * dtau;
        out.push_back(next);
        if (i > 1'000'000'000L)
            throw NumericalError("integrate_reparam_until: t does not reach t_end");
    }
    return out;
}

namespace {

double lagrange4(const double* x, const double* y, double at)
{
    double sum = 0.0;
    for (int i = 0; i < 4; ++i) {
        double w = 1.0;
        for (int j = 0; j < 4; ++j)
            if (j != i)
                w *= (at - x[j]) / (x[i] - x[j]);
        sum += w * y[i];
    }
    return sum;
}

} // namespace

EquivalenceReport equivalence_report(const Trajectory& standard, const ExtendedTrajectory& reparam,
                                     const Hamiltonian& h)
{
    if (reparam.size() < 4 || standard.empty())
        throw InvalidInput("equivalence_report: trajectories too short");
    for (std::size_t i = 1; i < reparam.size(); ++i)
        if (!(reparam[i].t > reparam[i - 1].t))
            throw InvalidInput("equivalence_report: reparametrized times are not strictly increasing");

    const double lo = reparam.front().t;
    const double hi = reparam.back().t;

    EquivalenceReport r;
    std::vector<double> ts(reparam.size());
    for (std::size_t i = 0; i < reparam.size(); ++i)
        ts[i] = reparam[i].t;

    for (const auto& sample : standard) {
        if (sample.t < lo || sample.t > hi)
            continue;
        auto it = std::upper_bound(ts.begin(), ts.end(), sample.t);
        auto j = static_cast<std::ptrdiff_t>(it - ts.begin()) - 1;
        j = std::clamp<std::ptrdiff_t>(j - 1, 0, static_cast<std::ptrdiff_t>(ts.size()) - 4);
        double x[4], q[4], p[4];
        for (int k = 0; k < 4; ++k) {
            const auto& e = reparam[static_cast<std::size_t>(j + k)];
            x[k] = e.t;
            q[k] = e.q;
            p[k] = e.p;
        }
        const double dq = std::abs(lagrange4(x, q, sample.t) - sample.y.q);
        const double dp = std::abs(lagrange4(x, p, sample.t) - sample.y.p);
        r.max_dev = std::max(r.max_dev, dq + dp);
        ++r.compared;
    }
    if (r.compared == 0)
        throw InvalidInput("equivalence_report: time ranges do not overlap");

    for (const auto& e : reparam)
        r.constraint_drift = std::max(r.constraint_drift, std::abs(e.s + h.value(e.q, e.p)));
    return r;
}

void write_csv(std::ostream& os, const ExtendedTrajectory& traj)
{
    os << "tau,t,q,p,s\n";
    char buf[160];
    for (const auto& e : traj) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", e.tau, e.t, e.q, e.p, e.s);
        os << buf;
    }
}

} // namespace ulr::classical
