#include "ulr/oscillator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ulr/quadrature.hpp"

namespace ulr::oscillator {

HamiltonianSpec HamiltonianSpec::harmonic(double omega)
{
    return {{{omega, "Aa"}}, Ordering::as_written, "harmonic"};
}

HamiltonianSpec HamiltonianSpec::quartic(double omega, double g)
{
    return {{{omega, "Aa"}, {g, "xxxx"}}, Ordering::as_written, "quartic"};
}

HamiltonianSpec HamiltonianSpec::quadratic(double omega)
{
    return {{{0.5, "PP"}, {0.5 * omega * omega, "QQ"}}, Ordering::fiducial_normal, "quadratic"};
}

int HamiltonianSpec::degree() const
{
    std::size_t d = 0;
    for (const auto& t : terms)
        d = std::max(d, t.word.size());
    return static_cast<int>(d);
}

CMatrix operator_word(int dim, double omega, const std::string& word)
{
    const int full = dim + static_cast<int>(word.size()) + 1;
    CMatrix a = CMatrix::Zero(full, full);
    for (int k = 1; k < full; ++k)
        a(k - 1, k) = std::sqrt(static_cast<double>(k));
    const CMatrix ad = a.adjoint();

    CMatrix out = CMatrix::Identity(full, full);
    for (char c : word) {
        switch (c) {
        case 'a': out = out * a; break;
        case 'A': out = out * ad; break;
        case 'x': out = out * (a + ad); break;
        case 'Q': out = out * ((a + ad) / std::sqrt(2.0 * omega)); break;
        case 'P': out = out * (kI * std::sqrt(omega / 2.0) * (ad - a)); break;
        default: throw InvalidInput(std::string("operator word: unknown letter '") + c + "'");
        }
    }
    return out.topLeftCorner(dim, dim);
}

OscillatorRep build_oscillator_rep(int dim, double omega, const HamiltonianSpec& spec)
{
    if (dim < 8)
        throw InvalidInput("build_oscillator_rep: truncation D must be at least 8");
    if (!(omega > 0.0))
        throw InvalidInput("build_oscillator_rep: Omega must be positive");
    if (dim <= 2 * spec.degree())
        throw InvalidInput("build_oscillator_rep: D = " + std::to_string(dim) +
                           " too small for a degree-" + std::to_string(spec.degree()) + " Hamiltonian");

    OscillatorRep rep;
    rep.dim = dim;
    rep.omega = omega;
    rep.spec = spec;
    rep.q = operator_word(dim, omega, "Q");
    rep.p = operator_word(dim, omega, "P");
    rep.h = CMatrix::Zero(dim, dim);
    for (const auto& t : spec.terms)
        rep.h += t.coefficient * operator_word(dim, omega, t.word);
    if ((rep.h - rep.h.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, rep.h.cwiseAbs().maxCoeff()))
        throw InvalidInput("build_oscillator_rep: Hamiltonian '" + spec.name + "' is not Hermitian");
    rep.h = 0.5 * (rep.h + rep.h.adjoint());
    if (spec.ordering == Ordering::fiducial_normal) {
        rep.normal_order_constant = rep.h(0, 0).real();
        rep.h.diagonal().array() -= rep.normal_order_constant;
    }
    rep.q_spectrum = kernel::spectral_decomposition(rep.q);
    rep.p_spectrum = kernel::spectral_decomposition(rep.p);
    rep.h_spectrum = kernel::spectral_decomposition(rep.h);
    return rep;
}

namespace {

CVector apply_exp(const kernel::Spectrum& s, double coef, const CVector& v)
{
    // e^{i coef X} v
    const CVector phases = (kI * coef * s.values.cast<Complex>()).array().exp();
    return s.vectors * (phases.asDiagonal() * (s.vectors.adjoint() * v));
}

} // namespace

CVector displace(const OscillatorRep& rep, const CVector& fiducial, double p, double q,
                 Convention convention)
{
    if (fiducial.size() != rep.dim)
        throw InvalidInput("displace: fiducial has wrong dimension");
    CVector v = apply_exp(rep.q_spectrum, p, fiducial);
    v = apply_exp(rep.p_spectrum, -q, v);
    if (convention == Convention::weyl)
        v *= std::exp(kI * (0.5 * p * q));
    return v;
}

double top_occupation(const CVector& v)
{
    const auto n = v.size();
    double occ = std::norm(v(n - 1));
    if (n > 1)
        occ += std::norm(v(n - 2));
    return occ;
}

CVector coherent_vector(const OscillatorRep& rep, double p, double q, Convention convention,
                        double top_tol)
{
    CVector e0 = CVector::Zero(rep.dim);
    e0(0) = 1.0;
    CVector v = displace(rep, e0, p, q, convention);
    const double occ = top_occupation(v);
    if (occ > top_tol)
        throw TruncationError("coherent_vector: top-level occupation " + std::to_string(occ) +
                              " at (p, q) = (" + std::to_string(p) + ", " + std::to_string(q) +
                              "); increase D beyond " + std::to_string(rep.dim));
    return v;
}

Complex overlap_analytic(double p2, double q2, double p1, double q1, double omega)
{
    const double dp = p2 - p1;
    const double dq = q2 - q1;
    return std::exp(Complex{-0.25 * (dp * dp / omega + omega * dq * dq), 0.5 * (p2 + p1) * dq});
}

CMatrix coherent_vectors(const OscillatorRep& rep, const std::vector<Label>& labels,
                         Convention convention)
{
    CMatrix out(rep.dim, static_cast<Eigen::Index>(labels.size()));
    for (std::size_t j = 0; j < labels.size(); ++j)
        out.col(static_cast<Eigen::Index>(j)) = coherent_vector(rep, labels[j].p, labels[j].q, convention);
    return out;
}

namespace {

CMatrix sandwich(const kernel::Spectrum& h, const CVector& channel, const CMatrix& vectors)
{
    const CMatrix c = h.vectors.adjoint() * vectors;
    return c.adjoint() * channel.asDiagonal() * c;
}

} // namespace

CMatrix propagator_kernel(const kernel::Spectrum& h, double dt, const CMatrix& vectors)
{
    const CVector ch = (-kI * dt * h.values.cast<Complex>()).array().exp();
    return sandwich(h, ch, vectors);
}

CMatrix propagator_kernel(const OscillatorRep& rep, double dt, const std::vector<Label>& labels)
{
    return propagator_kernel(rep.h_spectrum, dt, coherent_vectors(rep, labels));
}

void validate(const ConstraintSector& sector)
{
    if (!(sector.lambda > 0.0))
        throw InvalidInput("ConstraintSector: Lambda must be positive");
    if (!(sector.delta > 0.0))
        throw InvalidInput("ConstraintSector: delta must be positive");
}

CMatrix constrained_kernel(const kernel::Spectrum& h, const ConstraintSector& sector,
                           const CMatrix& vectors)
{
    validate(sector);
    const double dt = sector.t2 - sector.t1;
    CVector ch(h.values.size());
    for (Eigen::Index i = 0; i < h.values.size(); ++i) {
        const double e = h.values(i);
        const double damp = -((sector.s2 + e) * (sector.s2 + e) + (sector.s1 + e) * (sector.s1 + e)) /
                            (2.0 * sector.lambda);
        ch(i) = std::exp(Complex{damp, -dt * e});
    }
    return sandwich(h, ch, vectors);
}

CMatrix constrained_kernel(const OscillatorRep& rep, const ConstraintSector& sector,
                           const std::vector<Label>& labels)
{
    return constrained_kernel(rep.h_spectrum, sector, coherent_vectors(rep, labels));
}

CMatrix interval_projected_kernel(const kernel::Spectrum& h, const ConstraintSector& sector,
                                  const CMatrix& vectors)
{
    validate(sector);
    const double dt = sector.t2 - sector.t1;
    CVector ch(h.values.size());
    for (Eigen::Index i = 0; i < h.values.size(); ++i) {
        const double e = h.values(i);
        // S-values u with |u + E| <= delta.
        const quad::Rule r = quad::gauss_legendre(16, -e - sector.delta, -e + sector.delta);
        Complex acc = 0.0;
        for (std::size_t k = 0; k < r.nodes.size(); ++k) {
            const double u = r.nodes[k];
            const double g = -((u - sector.s2) * (u - sector.s2) + (u - sector.s1) * (u - sector.s1)) /
                             (2.0 * sector.lambda);
            acc += r.weights[k] * std::exp(Complex{g, dt * u});
        }
        ch(i) = acc / (2.0 * sector.delta);
    }
    return sandwich(h, ch, vectors);
}

ReducedTimeKernel reduced_time_kernel(const kernel::Spectrum& h, double lambda, double dt,
                                      const CMatrix& vectors)
{
    if (!(lambda > 0.0))
        throw InvalidInput("reduced_time_kernel: Lambda must be positive");
    const double width = std::sqrt(lambda);
    const double constant = 2.0 * std::numbers::pi * lambda;

    ReducedTimeKernel out;
    out.s_integral_constant = constant;
    CVector ch(h.values.size());
    for (Eigen::Index i = 0; i < h.values.size(); ++i) {
        const double e = h.values(i);
        std::vector<double> edges;
        for (int k = -24; k <= 24; ++k)
            edges.push_back(-e + 0.5 * k * width);
        const quad::Rule r = quad::composite(edges, 16);
        const double one = quad::integrate(r, [&](double s) { return std::exp(-(s + e) * (s + e) / (2.0 * lambda)); });
        // s'' and s' integrals are identical in each channel.
        const double both = one * one;
        out.channel_constant_spread = std::max(out.channel_constant_spread, std::abs(both / constant - 1.0));
        ch(i) = std::exp(Complex{0.0, -dt * e}) * (both / constant);
    }
    out.reduced = sandwich(h, ch, vectors);
    out.propagator = propagator_kernel(h, dt, vectors);
    out.max_deviation = (out.reduced - out.propagator).cwiseAbs().maxCoeff();
    return out;
}

ReducedTimeKernel reduced_time_kernel(const OscillatorRep& rep, double lambda, double dt,
                                      const std::vector<Label>& labels)
{
    return reduced_time_kernel(rep.h_spectrum, lambda, dt, coherent_vectors(rep, labels));
}

} // namespace ulr::oscillator
