#include "ulr/phi4.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "ulr/oscillator.hpp"

namespace ulr::phi4 {

void Phi4Spec::validate() const
{
    if (sites < 1 || sites > 4)
        throw InvalidInput("phi4: sites must lie in 1..4");
    if (!(box_length > 0.0))
        throw InvalidInput("phi4: box_length must be positive");
    if (!std::isfinite(m0))
        throw InvalidInput("phi4: m0 must be finite");
    if (!(g >= 0.0))
        throw InvalidInput("phi4: g must be nonnegative");
    if (!(M > 0.0))
        throw InvalidInput("phi4: M must be positive");
    if (D < 8)
        throw InvalidInput("phi4: D must be at least 8");
    double dim = 1.0;
    for (int i = 0; i < sites; ++i)
        dim *= D;
    if (dim > static_cast<double>(kMaxMatrixFreeDim)) {
        std::ostringstream os;
        os << "phi4: product dimension D^sites = " << dim << " exceeds " << kMaxMatrixFreeDim
           << "; use D <= " << static_cast<int>(std::floor(std::pow(kMaxMatrixFreeDim, 1.0 / sites)))
           << " for " << sites << " sites";
        throw InvalidInput(os.str());
    }
    if (counterterm && !std::isfinite(*counterterm))
        throw InvalidInput("phi4: counterterm must be finite");
}

RMatrix ring_gradient_form(int n, double box_length)
{
    if (n < 1 || !(box_length > 0.0))
        throw InvalidInput("ring_gradient_form: need n >= 1 and a positive box length");
    const double dk = 2.0 * std::numbers::pi / box_length;
    const double dx = box_length / n;
    RMatrix G = RMatrix::Zero(n, n);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            double s = 0.0;
            for (int j = -((n - 1) / 2); j <= n / 2; ++j) {
                const double k = dk * j;
                s += k * k * std::cos(k * (x - y) * dx);
            }
            G(x, y) = s / n;
        }
    return G;
}

Phi4Hamiltonian::Phi4Hamiltonian(const Phi4Spec& spec) : spec_(spec)
{
    spec_.validate();
    const int D = spec_.D;
    dim_ = 1;
    for (int x = 0; x < spec_.sites; ++x) {
        stride_.push_back(dim_);
        dim_ *= D;
    }
    G_ = ring_gradient_form(spec_.sites, spec_.box_length);
    q_ = oscillator::operator_word(D, spec_.M, "Q");
    p_ = oscillator::operator_word(D, spec_.M, "P");
    q2_ = oscillator::operator_word(D, spec_.M, "QQ");
    q4_ = oscillator::operator_word(D, spec_.M, "QQQQ");
    const CMatrix p2 = oscillator::operator_word(D, spec_.M, "PP");
    const double dm2 = spec_.counterterm.value_or(0.0);
    const double dx = spec_.spacing();
    for (int x = 0; x < spec_.sites; ++x) {
        CMatrix loc = 0.5 * p2 + 0.5 * (spec_.m0 * spec_.m0 + dm2 + G_(x, x)) * q2_ + (spec_.g / dx) * q4_;
        loc = 0.5 * (loc + loc.adjoint()).eval();
        shift_ += loc(0, 0).real();
        locals_.push_back(std::move(loc));
    }
}

void Phi4Hamiltonian::add_site(const CMatrix& a, int site, Complex coeff, const CVector& in, CVector& out) const
{
    const long D = spec_.D;
    const long s = stride_[static_cast<std::size_t>(site)];
    const long block = s * D;
    for (long high = 0; high < dim_; high += block)
        for (long r = 0; r < D; ++r)
            for (long c = 0; c < D; ++c) {
                const Complex w = coeff * a(r, c);
                if (w == Complex{})
                    continue;
                const Complex* src = in.data() + high + c * s;
                Complex* dst = out.data() + high + r * s;
                for (long low = 0; low < s; ++low)
                    dst[low] += w * src[low];
            }
}

CVector Phi4Hamiltonian::apply_site(const CMatrix& a, int site, const CVector& in) const
{
    CVector out = CVector::Zero(dim_);
    add_site(a, site, 1.0, in, out);
    return out;
}

void Phi4Hamiltonian::apply(const CVector& in, CVector& out) const
{
    out = -shift_ * in;
    for (int x = 0; x < spec_.sites; ++x)
        add_site(locals_[static_cast<std::size_t>(x)], x, 1.0, in, out);
    for (int y = 1; y < spec_.sites; ++y) {
        bool any = false;
        for (int x = 0; x < y; ++x)
            any = any || G_(x, y) != 0.0;
        if (!any)
            continue;
        const CVector qy = apply_site(q_, y, in);
        for (int x = 0; x < y; ++x)
            if (G_(x, y) != 0.0)
                add_site(q_, x, G_(x, y), qy, out);
    }
}

krylov::LinearOperator Phi4Hamiltonian::op() const
{
    return {dim_, [this](const CVector& in, CVector& out) { apply(in, out); }};
}

CMatrix Phi4Hamiltonian::dense() const
{
    if (dim_ > kMaxDenseDim)
        throw InvalidInput("phi4: dense assembly limited to dimension " + std::to_string(kMaxDenseDim) +
                           ", got " + std::to_string(dim_));
    CMatrix h(dim_, dim_);
    CVector e = CVector::Zero(dim_);
    CVector col(dim_);
    for (long j = 0; j < dim_; ++j) {
        e(j) = 1.0;
        apply(e, col);
        h.col(j) = col;
        e(j) = 0.0;
    }
    return 0.5 * (h + h.adjoint());
}

GroundState ground_state_iterative(const Phi4Hamiltonian& h, double tol)
{
    CVector seed = CVector::Zero(h.dim());
    seed(0) = 1.0;
    krylov::LanczosOptions opts;
    opts.tol = tol;
    const auto ep = krylov::lowest_eigenpair(h.op(), seed, opts);
    GroundState gs;
    gs.E0 = ep.value;
    gs.vector = ep.vector;
    kernel::fix_phase(gs.vector);
    gs.residual = ep.residual;
    gs.iterations = ep.iterations;
    gs.residual_history = ep.residual_history;
    return gs;
}

double kurtosis_excess(const Phi4Hamiltonian& h, const CVector& v, int site)
{
    if (site < 0 || site >= h.spec().sites)
        throw InvalidInput("kurtosis_excess: site out of range");
    const double n = v.squaredNorm();
    const double m2 = v.dot(h.apply_site(h.phi2(), site, v)).real() / n;
    const double m4 = v.dot(h.apply_site(h.phi4(), site, v)).real() / n;
    return m4 - 3.0 * m2 * m2;
}

namespace {

/// e^{i(p Phi - q Pi)} on one site, through the spectra of the truncated Phi and Pi.
CMatrix weyl_unitary(const kernel::Spectrum& qs, const kernel::Spectrum& ps, double p, double q)
{
    const CVector eq = (kI * p * qs.values.cast<Complex>()).array().exp();
    const CVector ep = (-kI * q * ps.values.cast<Complex>()).array().exp();
    const CMatrix uq = qs.vectors * eq.asDiagonal() * qs.vectors.adjoint();
    const CMatrix up = ps.vectors * ep.asDiagonal() * ps.vectors.adjoint();
    return std::exp(Complex{0.0, 0.5 * p * q}) * up * uq;
}

} // namespace

KernelReport recentered_phi4_kernel(const Phi4Spec& spec, const std::vector<FieldConfig>& labels, double dt,
                                    double lambda, Evolution evolution)
{
    if (labels.empty())
        throw InvalidInput("recentered_phi4_kernel: no labels");
    if (!(lambda > 0.0))
        throw InvalidInput("recentered_phi4_kernel: Lambda must be positive");
    if (!std::isfinite(dt))
        throw InvalidInput("recentered_phi4_kernel: dt must be finite");
    const Phi4Hamiltonian h(spec);
    for (const auto& f : labels)
        if (f.pi.size() != spec.sites || f.phi.size() != spec.sites)
            throw InvalidInput("recentered_phi4_kernel: label size differs from the site count");

    KernelReport out;
    const GroundState gs = ground_state_iterative(h);
    out.E0 = gs.E0;
    out.residual = gs.residual;
    out.kurtosis_excess = kurtosis_excess(h, gs.vector, 0);

    const auto qs = kernel::spectral_decomposition(h.phi());
    const auto ps = kernel::spectral_decomposition(h.pi());
    const double root_dx = std::sqrt(spec.spacing());
    const auto J = static_cast<Eigen::Index>(labels.size());
    CMatrix psi(h.dim(), J);
    for (Eigen::Index j = 0; j < J; ++j) {
        CVector v = gs.vector;
        const auto& f = labels[static_cast<std::size_t>(j)];
        for (int x = 0; x < spec.sites; ++x)
            v = h.apply_site(weyl_unitary(qs, ps, root_dx * f.pi(x), root_dx * f.phi(x)), x, v);
        psi.col(j) = v;
    }

    if (evolution == Evolution::dense && h.dim() > kMaxDenseDim)
        throw InvalidInput("recentered_phi4_kernel: dense evolution needs dimension <= " +
                           std::to_string(kMaxDenseDim));
    out.dense_path = evolution == Evolution::dense || (evolution == Evolution::automatic && h.dim() <= kMaxDenseDim);
    if (out.dense_path) {
        const CMatrix hd = h.dense();
        const auto s = kernel::spectral_decomposition(hd);
        out.dense_E0 = s.values(0);
        const CMatrix c = s.vectors.adjoint() * psi;
        const CVector phase = (-kI * dt * (s.values.array() - gs.E0).cast<Complex>()).exp();
        out.kernel = c.adjoint() * phase.asDiagonal() * c;

        const auto rc = kernel::recenter(kernel::ground_normal_ordered(hd), lambda);
        out.recenter_overlap = std::abs(rc.vector.dot(gs.vector));
        out.degeneracy = rc.degeneracy;
        out.warning = rc.warning;
    } else {
        krylov::LinearOperator shifted{h.dim(), [&h, e0 = gs.E0](const CVector& in, CVector& o) {
                                           h.apply(in, o);
                                           o -= e0 * in;
                                       }};
        out.kernel.resize(J, J);
        for (Eigen::Index b = 0; b < J; ++b) {
            const CVector w = krylov::propagate(shifted, psi.col(b), dt);
            for (Eigen::Index a = 0; a < J; ++a)
                out.kernel(a, b) = psi.col(a).dot(w);
        }
    }
    return out;
}

MIndependence m_independence(Phi4Spec spec, double M1, double M2, const std::vector<FieldConfig>& labels,
                             double dt, double lambda)
{
    MIndependence out;
    spec.M = M1;
    out.first = recentered_phi4_kernel(spec, labels, dt, lambda);
    spec.M = M2;
    out.second = recentered_phi4_kernel(spec, labels, dt, lambda);
    out.deviation = (out.first.kernel - out.second.kernel).cwiseAbs().maxCoeff();
    return out;
}

} // namespace ulr::phi4
