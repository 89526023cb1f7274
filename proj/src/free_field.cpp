#include "ulr/free_field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ulr/parallel.hpp"

namespace ulr::free_field {

double frequency(double k2, double m)
{
    return std::sqrt(k2 + m * m);
}

Complex ultralocal_overlap(const FieldConfig& f2, const FieldConfig& f1, double M, const LatticeSpec& spec)
{
    if (!(M > 0.0))
        throw InvalidInput("ultralocal_overlap: M must be positive");
    lattice::validate(f2, spec);
    lattice::validate(f1, spec);
    const double w = spec.cell_volume();
    const double sm = std::sqrt(M);
    Complex exponent = 0.0;
    for (int x = 0; x < spec.site_count(); ++x) {
        const Complex u2 = Complex{sm * f2.phi(x), f2.pi(x) / sm} / std::sqrt(2.0);
        const Complex u1 = Complex{sm * f1.phi(x), f1.pi(x) / sm} / std::sqrt(2.0);
        exponent += w * (std::conj(u2) * u1 - 0.5 * std::norm(u2) - 0.5 * std::norm(u1));
    }
    return std::exp(exponent);
}

Complex relativistic_kernel(const FieldConfig& f2, const FieldConfig& f1, double m, double dt,
                            const LatticeSpec& spec)
{
    lattice::validate(f2, spec);
    lattice::validate(f1, spec);
    if (spec.dimension() == 1 && !(m > 0.0))
        throw InvalidInput("relativistic_kernel: m must be positive in one space dimension "
                           "(the massless case needs extra care and is excluded)");
    if (!(m > 0.0))
        throw InvalidInput("relativistic_kernel: m = 0 leaves the k = 0 mode of a finite box with "
                           "zero frequency");

    const int d = spec.dimension();
    const int n = spec.sites_per_dim();
    const double dk = 2.0 * std::numbers::pi / spec.box_length();
    const double measure = std::pow(dk, d);
    const double ft_norm = spec.cell_volume() / std::pow(2.0 * std::numbers::pi, 0.5 * d);

    Complex exponent = 0.0;
    const int lo = -n / 2 + 1;
    const int hi = n / 2;
    const int lo_y = d == 3 ? lo : 0;
    const int hi_y = d == 3 ? hi : 0;
    for (int jx = lo; jx <= hi; ++jx)
        for (int jy = lo_y; jy <= hi_y; ++jy)
            for (int jz = lo_y; jz <= hi_y; ++jz) {
                const double kx = dk * jx, ky = dk * jy, kz = dk * jz;
                const double omega = frequency(kx * kx + ky * ky + kz * kz, m);
                Complex phi2 = 0.0, pi2 = 0.0, phi1 = 0.0, pi1 = 0.0;
                for (int x = 0; x < spec.site_count(); ++x) {
                    const auto pos = spec.site_position(x);
                    const Complex e = std::exp(Complex{0.0, -(kx * pos[0] + ky * pos[1] + kz * pos[2])});
                    phi2 += e * f2.phi(x);
                    pi2 += e * f2.pi(x);
                    phi1 += e * f1.phi(x);
                    pi1 += e * f1.pi(x);
                }
                phi2 *= ft_norm;
                pi2 *= ft_norm;
                phi1 *= ft_norm;
                pi1 *= ft_norm;
                const double so = std::sqrt(omega);
                const Complex z2 = (so * phi2 + kI * pi2 / so) / std::sqrt(2.0);
                const Complex z1 = (so * phi1 + kI * pi1 / so) / std::sqrt(2.0);
                exponent += measure * (std::conj(z2) * std::exp(Complex{0.0, -omega * dt}) * z1 -
                                       0.5 * std::norm(z2) - 0.5 * std::norm(z1));
            }
    return std::exp(exponent);
}

Complex mode_kernel(double omega, double pi2, double phi2, double pi1, double phi1, double dt)
{
    const double so = std::sqrt(omega);
    const Complex z2 = Complex{so * phi2, pi2 / so} / std::sqrt(2.0);
    const Complex z1 = Complex{so * phi1, pi1 / so} / std::sqrt(2.0);
    return std::exp(std::conj(z2) * std::exp(Complex{0.0, -omega * dt}) * z1 - 0.5 * std::norm(z2) -
                    0.5 * std::norm(z1));
}

CVector squeezed_vacuum(double M, double omega, int D)
{
    if (!(M > 0.0) || !(omega > 0.0) || D < 1)
        throw InvalidInput("squeezed_vacuum: M, omega must be positive and D >= 1");
    const double zeta = (M - omega) / (M + omega);
    const double sech = 2.0 * std::sqrt(M * omega) / (M + omega);
    CVector v = CVector::Zero(D);
    double c = std::sqrt(sech);
    for (int j = 0; 2 * j < D; ++j) {
        v(2 * j) = c;
        c *= zeta * std::sqrt((2.0 * j + 1.0) * (2.0 * j + 2.0)) / (2.0 * (j + 1.0));
    }
    return v;
}

double vacuum_overlap(double M, double omega)
{
    return std::sqrt(2.0 * std::sqrt(M * omega) / (M + omega));
}

int mode_truncation(double omega, double M, int D_base)
{
    const double ratio = std::abs(std::log(omega / M));
    int d = std::max(D_base, static_cast<int>(std::ceil(40.0 + 20.0 * ratio)));
    const double t = std::abs(omega - M) / (omega + M);
    if (t > 1e-12)
        d = std::max(d, static_cast<int>(std::ceil(2.0 * std::log(1e-14) / std::log(t))) + 20); // c_2j ~ t^j
    return d;
}

ModeOscillator mode_oscillator(double omega, double M, int D_base)
{
    if (!(omega > 0.0) || !(M > 0.0))
        throw InvalidInput("mode_oscillator: omega and M must be positive");
    ModeOscillator mo;
    mo.omega = omega;
    mo.M = M;
    mo.rep = oscillator::build_oscillator_rep(mode_truncation(omega, M, D_base), M,
                                              oscillator::HamiltonianSpec::quadratic(omega));
    return mo;
}

std::vector<ModeOscillator> truncated_hamiltonian(int N, double m, double M, int D_base,
                                                  const LatticeSpec& spec)
{
    if (N < 0 || N > spec.site_count())
        throw InvalidInput("truncated_hamiltonian: N must lie in [0, mode count]");
    if (D_base < 8)
        throw InvalidInput("truncated_hamiltonian: D must be at least 8");
    if (!(M > 0.0))
        throw InvalidInput("truncated_hamiltonian: M must be positive");
    if (!(m > 0.0))
        throw InvalidInput("truncated_hamiltonian: m must be positive");
    std::vector<ModeOscillator> out;
    for (int n = 0; n < N; ++n) {
        const auto& md = spec.modes()[static_cast<std::size_t>(n)];
        ModeOscillator mo = mode_oscillator(frequency(md.k2, m), M, D_base);
        mo.mode = md;
        mo.k = std::sqrt(md.k2);
        out.push_back(std::move(mo));
    }
    return out;
}

ModeRecentering recenter_mode(const ModeOscillator& mode, double lambda)
{
    const CMatrix& h = mode.rep.h;
    const kernel::Spectrum& s = mode.rep.h_spectrum;
    ModeRecentering out;
    out.ground_shift = s.values(0);
    const CMatrix shifted = kernel::ground_normal_ordered(h);
    const auto fid = kernel::recenter(shifted, lambda);
    out.fiducial = fid.vector;
    out.quotient = fid.quotient_achieved;
    out.degeneracy = fid.degeneracy;
    out.warning = fid.warning;
    out.spectrum.values = s.values.array() - s.values(0);
    out.spectrum.vectors = s.vectors;
    out.overlap_with_original = std::abs(out.fiducial(0));
    const CVector analytic = squeezed_vacuum(mode.M, mode.omega, mode.rep.dim);
    out.analytic_deviation = (out.fiducial - analytic).cwiseAbs().maxCoeff();
    return out;
}

ModeSignal mode_signal(const ModeOscillator& mode, double lambda, double dt)
{
    if (!(lambda > 0.0))
        throw InvalidInput("mode_signal: Lambda must be positive");
    const auto& s = mode.rep.h_spectrum;
    // Weights |<E|eta_M>|^2 of the fiducial in the H eigenbasis.
    const RVector w = s.vectors.row(0).cwiseAbs2().transpose();
    ModeSignal out;
    out.damped = (w.array() * (-(s.values.array().square()) / lambda).exp()).sum();
    Complex amp = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i)
        amp += w(i) * std::exp(Complex{0.0, -dt * s.values(i)});
    out.time_modulus = std::abs(amp);
    out.recenter_deviation = recenter_mode(mode, lambda).analytic_deviation;
    return out;
}

namespace {

std::vector<DiagnosticsRow> cumulate(const std::vector<int>& N_list, const std::vector<ModeSignal>& sig)
{
    std::vector<DiagnosticsRow> rows;
    for (int N : N_list) {
        if (N < 0 || static_cast<std::size_t>(N) > sig.size())
            throw InvalidInput("incompatibility_diagnostics: N = " + std::to_string(N) + " exceeds mode count");
        DiagnosticsRow r{N, 1.0, 1.0, 0.0};
        for (int n = 0; n < N; ++n) {
            r.damped_overlap *= sig[static_cast<std::size_t>(n)].damped;
            r.time_kernel_modulus *= sig[static_cast<std::size_t>(n)].time_modulus;
            r.recenter_deviation = std::max(r.recenter_deviation, sig[static_cast<std::size_t>(n)].recenter_deviation);
        }
        rows.push_back(r);
    }
    return rows;
}

int max_of(const std::vector<int>& v)
{
    return v.empty() ? 0 : *std::max_element(v.begin(), v.end());
}

} // namespace

std::vector<DiagnosticsRow> incompatibility_diagnostics(const std::vector<int>& N_list, double m, double M,
                                                        double lambda, double dt, const LatticeSpec& spec,
                                                        int D_base, int jobs)
{
    std::vector<double> omegas;
    const int nmax = std::min(max_of(N_list), spec.site_count());
    for (int n = 0; n < nmax; ++n)
        omegas.push_back(frequency(spec.modes()[static_cast<std::size_t>(n)].k2, m));
    if (max_of(N_list) > spec.site_count())
        throw InvalidInput("incompatibility_diagnostics: N exceeds the lattice mode count");
    return incompatibility_diagnostics(N_list, omegas, M, lambda, dt, D_base, jobs);
}

std::vector<DiagnosticsRow> incompatibility_diagnostics(const std::vector<int>& N_list,
                                                        const std::vector<double>& omegas, double M,
                                                        double lambda, double dt, int D_base, int jobs)
{
    if (!(M > 0.0) || !(lambda > 0.0))
        throw InvalidInput("incompatibility_diagnostics: M and Lambda must be positive");
    const auto nmax = static_cast<std::size_t>(std::max(0, max_of(N_list)));
    if (nmax > omegas.size())
        throw InvalidInput("incompatibility_diagnostics: fewer frequencies than requested modes");
    // Modes sharing a frequency share a signal; compute each distinct one once.
    std::vector<double> distinct;
    for (std::size_t n = 0; n < nmax; ++n)
        if (std::find(distinct.begin(), distinct.end(), omegas[n]) == distinct.end())
            distinct.push_back(omegas[n]);
    const auto signals = parallel_map(distinct.size(), jobs, [&](std::size_t i) {
        return mode_signal(mode_oscillator(distinct[i], M, D_base), lambda, dt);
    });
    std::vector<ModeSignal> per_mode;
    for (std::size_t n = 0; n < nmax; ++n) {
        const auto it = std::find(distinct.begin(), distinct.end(), omegas[n]);
        per_mode.push_back(signals[static_cast<std::size_t>(it - distinct.begin())]);
    }
    return cumulate(N_list, per_mode);
}

RecenteredKernel recentered_kernel(int N, double m, double M, double lambda, double dt,
                                   const std::vector<FieldConfig>& labels, const LatticeSpec& spec,
                                   int D_base, int jobs)
{
    if (labels.empty())
        throw InvalidInput("recentered_kernel: no labels");
    if (!(lambda > 0.0))
        throw InvalidInput("recentered_kernel: Lambda must be positive");
    for (const auto& f : labels)
        lattice::validate(f, spec);

    const auto J = static_cast<Eigen::Index>(labels.size());
    const int modes = spec.site_count();
    const auto oscillators = truncated_hamiltonian(N, m, M, D_base, spec);

    // Mode coordinates of every label.
    std::vector<RVector> pi_n, phi_n;
    for (const auto& f : labels) {
        pi_n.push_back(spec.to_modes(f.pi));
        phi_n.push_back(spec.to_modes(f.phi));
    }

    struct ModeResult {
        CMatrix numeric;
        CMatrix analytic;
        int dim = 0;
        double fiducial_deviation = 0.0;
        std::string warning;
    };

    const auto per_mode = parallel_map(static_cast<std::size_t>(N), jobs, [&](std::size_t n) {
        const auto& mo = oscillators[n];
        const auto rc = recenter_mode(mo, lambda);
        const auto idx = static_cast<Eigen::Index>(n);
        CMatrix vecs(mo.rep.dim, J);
        for (Eigen::Index j = 0; j < J; ++j)
            vecs.col(j) = oscillator::displace(mo.rep, rc.fiducial, pi_n[static_cast<std::size_t>(j)](idx),
                                               phi_n[static_cast<std::size_t>(j)](idx),
                                               oscillator::Convention::weyl);
        ModeResult r;
        r.numeric = oscillator::propagator_kernel(rc.spectrum, dt, vecs);
        r.analytic.resize(J, J);
        for (Eigen::Index a = 0; a < J; ++a)
            for (Eigen::Index b = 0; b < J; ++b)
                r.analytic(a, b) = mode_kernel(mo.omega, pi_n[static_cast<std::size_t>(a)](idx),
                                               phi_n[static_cast<std::size_t>(a)](idx),
                                               pi_n[static_cast<std::size_t>(b)](idx),
                                               phi_n[static_cast<std::size_t>(b)](idx), dt);
        r.dim = mo.rep.dim;
        r.fiducial_deviation = rc.analytic_deviation;
        r.warning = rc.warning;
        return r;
    });

    RecenteredKernel out;
    out.retained = CMatrix::Ones(J, J);
    out.relativistic_retained = CMatrix::Ones(J, J);
    for (const auto& r : per_mode) {
        out.retained.array() *= r.numeric.array();
        out.relativistic_retained.array() *= r.analytic.array();
        out.truncations.push_back(r.dim);
        out.max_fiducial_deviation = std::max(out.max_fiducial_deviation, r.fiducial_deviation);
        if (!r.warning.empty())
            out.warnings.push_back(r.warning);
    }

    // Unretained modes keep the ultralocal fiducial and carry no Hamiltonian.
    CMatrix rest = CMatrix::Ones(J, J);
    for (int n = N; n < modes; ++n)
        for (Eigen::Index a = 0; a < J; ++a)
            for (Eigen::Index b = 0; b < J; ++b)
                rest(a, b) *= mode_kernel(M, pi_n[static_cast<std::size_t>(a)](n), phi_n[static_cast<std::size_t>(a)](n),
                                          pi_n[static_cast<std::size_t>(b)](n), phi_n[static_cast<std::size_t>(b)](n), 0.0);
    out.kernel = out.retained.cwiseProduct(rest);

    if (N == modes) {
        out.target.resize(J, J);
        for (Eigen::Index a = 0; a < J; ++a)
            for (Eigen::Index b = 0; b < J; ++b)
                out.target(a, b) = relativistic_kernel(labels[static_cast<std::size_t>(a)],
                                                       labels[static_cast<std::size_t>(b)], m, dt, spec);
    } else {
        out.target = out.relativistic_retained.cwiseProduct(rest);
    }
    out.retained_deviation = (out.retained - out.relativistic_retained).cwiseAbs().maxCoeff();
    out.full_deviation = (out.kernel - out.target).cwiseAbs().maxCoeff();
    return out;
}

std::vector<double> mass_inequivalence_profile(double m1, double m2, const LatticeSpec& spec)
{
    if (!(m1 > 0.0) || !(m2 > 0.0))
        throw InvalidInput("mass_inequivalence_profile: masses must be positive");
    std::vector<double> out;
    double prod = 1.0;
    for (const auto& md : spec.modes()) {
        prod *= vacuum_overlap(frequency(md.k2, m1), frequency(md.k2, m2));
        out.push_back(prod);
    }
    return out;
}

} // namespace ulr::free_field
