#include "ulr/ultralocal.hpp"

#include <random>
#include <sstream>

namespace ulr::ultralocal {

double Density::operator()(double l) const
{
    if (coef == 0.0)
        return 0.0;
    const double a = std::abs(l);
    const double r = std::isinf(width) ? 0.0 : l / width;
    return coef * std::pow(a, alpha) * std::exp(-r * r);
}

quad::Rule symmetric_grid(const GridLevel& level)
{
    if (!(level.eps > 0.0) || !(level.eps < 1.0) || !(level.R > 1.0) || level.nodes_per_panel < 2)
        throw InvalidInput("symmetric_grid: need 0 < eps < 1 < R and at least 2 nodes per panel");
    std::vector<double> edges;
    for (double e = level.eps; e < 1.0; e *= 2.0)
        edges.push_back(e);
    edges.push_back(1.0);
    for (double e = 2.0; e < level.R; e += 1.0)
        edges.push_back(e);
    edges.push_back(level.R);
    const quad::Rule pos = quad::composite(edges, level.nodes_per_panel);
    quad::Rule r;
    for (std::size_t i = pos.nodes.size(); i-- > 0;) {
        r.nodes.push_back(-pos.nodes[i]);
        r.weights.push_back(pos.weights[i]);
    }
    r.nodes.insert(r.nodes.end(), pos.nodes.begin(), pos.nodes.end());
    r.weights.insert(r.weights.end(), pos.weights.begin(), pos.weights.end());
    return r;
}

const quad::Rule& LevyMeasure::fine_rule()
{
    static const quad::Rule rule = symmetric_grid(kFine);
    return rule;
}

double LevyMeasure::scale(int site) const
{
    if (site_scale.empty())
        return 1.0;
    return site_scale.at(static_cast<std::size_t>(site));
}

void LevyMeasure::validate(int sites) const
{
    for (const auto& [l, w] : point_masses)
        if (!std::isfinite(l) || !(w > 0.0) || !std::isfinite(w))
            throw InvalidInput("LevyMeasure: point masses need finite locations and positive finite weights");
    if (!(density.coef >= 0.0) || !std::isfinite(density.coef) || !std::isfinite(density.alpha) ||
        !(density.width > 0.0))
        throw InvalidInput("LevyMeasure: density needs coef >= 0, finite alpha and width > 0");
    if (!site_scale.empty()) {
        if (static_cast<int>(site_scale.size()) != sites)
            throw InvalidInput("LevyMeasure: site_scale length differs from the site count");
        for (double s : site_scale)
            if (!(s >= 0.0) || !std::isfinite(s))
                throw InvalidInput("LevyMeasure: site_scale entries must be nonnegative");
    }
}

UltralocalParams UltralocalParams::homogeneous(int sites, double a, double c, bool canonical, double b, double d)
{
    UltralocalParams p;
    p.canonical = canonical;
    p.a = RVector::Constant(sites, a);
    p.c = RVector::Constant(sites, c);
    p.b = RVector::Constant(sites, b);
    p.d = RVector::Constant(sites, d);
    return p;
}

bool UltralocalParams::is_homogeneous() const
{
    const auto flat = [](const RVector& v) { return v.size() == 0 || (v.array() == v(0)).all(); };
    const auto flat_scale = [](const std::vector<double>& s) {
        return s.empty() || std::all_of(s.begin(), s.end(), [&](double x) { return x == s.front(); });
    };
    return flat(a) && flat(c) && (!canonical || (flat(b) && flat(d))) && flat_scale(sigma.site_scale) &&
           (!canonical || flat_scale(rho.site_scale));
}

void UltralocalParams::validate_shapes(int sites) const
{
    const auto need = [sites](const RVector& v, const char* name) {
        if (v.size() != sites)
            throw InvalidInput(std::string("UltralocalParams: ") + name + " must have one entry per site");
        if (!v.allFinite())
            throw InvalidInput(std::string("UltralocalParams: ") + name + " must be finite");
    };
    need(a, "a");
    need(c, "c");
    if ((c.array() < 0.0).any())
        throw InvalidInput("UltralocalParams: c must be nonnegative");
    sigma.validate(sites);
    if (canonical) {
        need(b, "b");
        need(d, "d");
        if ((d.array() < 0.0).any())
            throw InvalidInput("UltralocalParams: d must be nonnegative");
        rho.validate(sites);
    }
}

double density_ends(const Density& d, const GridLevel& level, bool admissibility)
{
    if (d.zero())
        return 0.0;
    const double a = d.alpha;
    double sum = 0.0;
    // near zero the integrand is coef |l|^(alpha + extra) (1 + O(l^2))
    const double p0 = a + (admissibility ? 2.0 : 0.0) + 1.0;
    if (p0 > 0.0)
        sum += 2.0 * d.coef * std::pow(level.eps, p0) / p0;
    if (std::isinf(d.width) && a < -1.0) {
        if (!admissibility) {
            sum += 2.0 * d.coef * std::pow(level.R, a + 1.0) / (-a - 1.0);
        } else {
            // l^2/(1+l^2) = sum_k (-1)^k l^(-2k) for l > 1
            double tail = 0.0;
            for (int k = 0; k < 200; ++k) {
                const double t = std::pow(level.R, a + 1.0 - 2.0 * k) / (2.0 * k - a - 1.0);
                tail += (k % 2 ? -t : t);
                if (t < 1e-18 * std::abs(tail))
                    break;
            }
            sum += 2.0 * d.coef * tail;
        }
    }
    return sum;
}

MeasureCheck check_measure(const LevyMeasure& m)
{
    MeasureCheck out;
    double pm_adm = 0.0, pm_mass = 0.0;
    for (const auto& [l, w] : m.point_masses) {
        pm_adm += w * l * l / (1.0 + l * l);
        pm_mass += w;
    }
    const Density& rho = m.density;
    out.admissibility = refined_integral([&](double l) { return rho(l) * l * l / (1.0 + l * l); });
    out.total_mass = refined_integral([&](double l) { return rho(l); });
    out.admissibility.coarse += pm_adm + density_ends(rho, kCoarse, true);
    out.admissibility.fine += pm_adm + density_ends(rho, kFine, true);
    out.total_mass.coarse += pm_mass + density_ends(rho, kCoarse, false);
    out.total_mass.fine += pm_mass + density_ends(rho, kFine, false);
    out.admissibility.finite = levels_agree(out.admissibility.coarse, out.admissibility.fine);
    out.total_mass.finite = levels_agree(out.total_mass.coarse, out.total_mass.fine);
    out.total_mass_divergent = !out.total_mass.finite;
    return out;
}

namespace {

constexpr double kCdTol = 1e-12;

int site_count(const UltralocalParams& p)
{
    return static_cast<int>(p.a.size());
}

} // namespace

AdmissibilityReport admissibility_check(const UltralocalParams& params)
{
    params.validate_shapes(site_count(params));
    AdmissibilityReport r;
    const auto s = check_measure(params.sigma);
    r.sigma_integral = s.admissibility.fine;
    r.sigma_finite = s.admissibility.finite;
    r.sigma_total_mass_divergent = s.total_mass_divergent;
    if (!r.sigma_finite)
        r.failures.push_back("sigma: int l^2/(1+l^2) dsigma is not finite");
    r.c_min = params.c.size() ? params.c.minCoeff() : 0.0;
    if (params.canonical) {
        const auto q = check_measure(params.rho);
        r.rho_integral = q.admissibility.fine;
        r.rho_finite = q.admissibility.finite;
        r.rho_total_mass_divergent = q.total_mass_divergent;
        if (!r.rho_finite)
            r.failures.push_back("rho: int g^2/(1+g^2) drho is not finite");
        r.cd_min = params.c.cwiseProduct(params.d).minCoeff();
        if (r.cd_min < 1.0 - kCdTol)
            r.failures.push_back("c d >= 1 violated");
    } else if (r.c_min < 0.0) {
        r.failures.push_back("c must be nonnegative");
    }
    r.pass = r.failures.empty();
    return r;
}

Classification classify_representation(const UltralocalParams& params)
{
    params.validate_shapes(site_count(params));
    Classification out;
    if (!params.sigma.zero())
        out.reasons.push_back("sigma != 0");
    if (params.canonical) {
        if (!params.rho.zero())
            out.reasons.push_back("rho != 0");
        if ((params.c.cwiseProduct(params.d).array() > 1.0 + kCdTol).any())
            out.reasons.push_back("cd > 1");
    }
    out.reducible = !out.reasons.empty();
    return out;
}

namespace {

void require_admissible(const UltralocalParams& params)
{
    const auto r = admissibility_check(params);
    if (!r.sigma_finite)
        throw InvalidInput("ultralocal: sigma violates the finiteness condition int l^2/(1+l^2) dsigma < inf");
    if (!r.rho_finite)
        throw InvalidInput("ultralocal: rho violates the finiteness condition int g^2/(1+g^2) drho < inf");
    if (!r.pass)
        throw InvalidInput("ultralocal: " + r.failures.front());
}

/// int [e^{i l u} - 1 - i l u/(1+l^2)] dsigma with e^{ix} - 1 written via half angles.
Complex levy_term(const LevyMeasure& m, double u)
{
    if (u == 0.0 || m.zero())
        return 0.0;
    return m.integrate([u](double l) {
        const double x = l * u;
        const double h = std::sin(0.5 * x);
        return Complex{-2.0 * h * h, std::sin(x) - x / (1.0 + l * l)};
    });
}

Complex field_exponent(const RVector& pi, const UltralocalParams& p, const LatticeSpec& spec)
{
    const double w = spec.cell_volume();
    Complex e = 0.0;
    for (int x = 0; x < spec.site_count(); ++x) {
        e += w * Complex{-0.25 * p.c(x) * pi(x) * pi(x), p.a(x) * pi(x)};
        e += w * p.sigma.scale(x) * levy_term(p.sigma, pi(x));
    }
    return e;
}

Complex canonical_exponent(const FieldConfig& f, const UltralocalParams& p, const LatticeSpec& spec)
{
    const double w = spec.cell_volume();
    Complex e = field_exponent(f.pi, p, spec);
    for (int x = 0; x < spec.site_count(); ++x) {
        e += w * Complex{-0.25 * p.d(x) * f.phi(x) * f.phi(x), -p.b(x) * f.phi(x)};
        // e^{-i g phi} - 1 + i g phi/(1+g^2) is the sigma integrand at -phi.
        e += w * p.rho.scale(x) * levy_term(p.rho, -f.phi(x));
    }
    return e;
}

void check_sites(const UltralocalParams& p, const LatticeSpec& spec)
{
    if (site_count(p) != spec.site_count())
        throw InvalidInput("ultralocal: parameter arrays must have one entry per lattice site");
}

} // namespace

Complex char_functional_field(const RVector& pi, const UltralocalParams& params, const LatticeSpec& spec)
{
    check_sites(params, spec);
    if (pi.size() != spec.site_count())
        throw InvalidInput("char_functional_field: pi must have one entry per site");
    UltralocalParams single = params;
    single.canonical = false;
    require_admissible(single);
    return std::exp(field_exponent(pi, params, spec));
}

Complex char_functional_canonical(const FieldConfig& f, const UltralocalParams& params, const LatticeSpec& spec)
{
    check_sites(params, spec);
    lattice::validate(f, spec);
    if (!params.canonical)
        throw InvalidInput("char_functional_canonical: params are not canonical");
    require_admissible(params);
    return std::exp(canonical_exponent(f, params, spec));
}

CMatrix difference_gram_field(const std::vector<RVector>& configs, const UltralocalParams& params,
                              const LatticeSpec& spec)
{
    check_sites(params, spec);
    UltralocalParams single = params;
    single.canonical = false;
    require_admissible(single);
    const auto g = kernel::gram_matrix(
        [&](const RVector& pj, const RVector& pk) { return std::exp(field_exponent(pk - pj, params, spec)); },
        configs);
    return g.entries;
}

CMatrix difference_gram_canonical(const std::vector<FieldConfig>& configs, const UltralocalParams& params,
                                  const LatticeSpec& spec, bool weyl_twist)
{
    check_sites(params, spec);
    if (!params.canonical)
        throw InvalidInput("difference_gram_canonical: params are not canonical");
    require_admissible(params);
    const double w = spec.cell_volume();
    const auto g = kernel::gram_matrix(
        [&](const FieldConfig& fj, const FieldConfig& fk) {
            const FieldConfig diff{fk.pi - fj.pi, fk.phi - fj.phi};
            Complex e = canonical_exponent(diff, params, spec);
            if (weyl_twist)
                e += kI * 0.5 * w * (fj.phi.dot(fk.pi) - fj.pi.dot(fk.phi));
            return std::exp(e);
        },
        configs);
    return g.entries;
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

UltralocalParams superposed_params(double M, double Mt, int sites)
{
    if (!(M > 0.0) || !(Mt > 0.0))
        throw InvalidInput("superposed_params: M and Mt must be positive");
    return UltralocalParams::homogeneous(sites, 0.0, 1.0 / M, true, 0.0, M + Mt);
}

Superposition gaussian_superpose(double M, double Mt, const FieldConfig& f2, const FieldConfig& f1,
                                 const LatticeSpec& spec, std::size_t samples, std::uint64_t seed)
{
    if (!(M > 0.0) || !(Mt > 0.0))
        throw InvalidInput("gaussian_superpose: M and Mt must be positive");
    lattice::validate(f2, spec);
    lattice::validate(f1, spec);
    const double w = spec.cell_volume();
    const RVector dpi = f2.pi - f1.pi;
    const RVector dphi = f2.phi - f1.phi;

    Superposition out;
    const Complex e0{-0.25 * w * (dpi.squaredNorm() / M + M * dphi.squaredNorm()),
                     0.5 * w * (f2.phi.dot(f1.pi) - f2.pi.dot(f1.phi))};
    out.unshifted = std::exp(e0);
    out.factor = std::exp(-0.25 * Mt * w * dphi.squaredNorm());
    out.kernel = out.unshifted * out.factor;
    out.c = 1.0 / M;
    out.d = M + Mt;
    out.cd = out.c * out.d;

    out.samples = samples;
    if (samples == 0)
        return out;
    std::mt19937_64 gen(splitmix64(seed));
    std::normal_distribution<double> normal(0.0, std::sqrt(Mt / (2.0 * w)));
    double sr = 0.0, si = 0.0, sr2 = 0.0, si2 = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        double arg = 0.0;
        for (int x = 0; x < spec.site_count(); ++x)
            arg += w * normal(gen) * dphi(x);
        const double re = std::cos(arg), im = std::sin(arg);
        sr += re;
        si += im;
        sr2 += re * re;
        si2 += im * im;
    }
    const double n = static_cast<double>(samples);
    out.mc_mean = {sr / n, si / n};
    const double var_re = std::max(0.0, (sr2 / n - (sr / n) * (sr / n)) * n / std::max(1.0, n - 1.0));
    const double var_im = std::max(0.0, (si2 / n - (si / n) * (si / n)) * n / std::max(1.0, n - 1.0));
    out.mc_stderr_re = std::sqrt(var_re / n);
    out.mc_stderr_im = std::sqrt(var_im / n);
    out.mc_within_3se = std::abs(out.mc_mean.real() - out.factor) <= 3.0 * out.mc_stderr_re &&
                        std::abs(out.mc_mean.imag()) <= 3.0 * out.mc_stderr_im;
    return out;
}

void ModelFieldSpec::validate() const
{
    if (!(b_coef > 0.0) || !std::isfinite(b_coef))
        throw InvalidInput("ModelFieldSpec: b must be positive and finite");
    if (!(c_model.coef >= 0.0) || !(c_model.width > 0.0) || !std::isfinite(c_model.alpha))
        throw InvalidInput("ModelFieldSpec: c(l)^2 needs coef >= 0, finite alpha and width > 0");
}

double model_exponent_integral(const Density& c2, double u)
{
    if (u == 0.0 || c2.zero())
        return 0.0;
    const auto r = refined_integral([&](double l) {
        const double h = std::sin(0.5 * l * u);
        return 2.0 * h * h * c2(l);
    });
    if (!r.finite) {
        std::ostringstream os;
        os << "model_field_kernel: int [1 - cos(l u)] c(l)^2 dl does not converge under grid refinement (u = "
           << u << ", coarse " << r.coarse << ", fine " << r.fine << ")";
        throw NumericalError(os.str());
    }
    return r.fine;
}

namespace {

double unit_exponent(const RVector& pi2, const RVector& pi1, const LatticeSpec& spec, const Density& c2)
{
    if (pi2.size() != spec.site_count() || pi1.size() != spec.site_count())
        throw InvalidInput("model_field_kernel: configs must have one entry per site");
    double s = 0.0;
    for (int x = 0; x < spec.site_count(); ++x)
        s += spec.cell_volume() * model_exponent_integral(c2, pi2(x) - pi1(x));
    return s;
}

} // namespace

double model_field_kernel(const RVector& pi2, const RVector& pi1, const LatticeSpec& spec,
                          const ModelFieldSpec& model)
{
    model.validate();
    return std::exp(-model.b_coef * unit_exponent(pi2, pi1, spec, model.c_model));
}

double fit_b(const std::vector<std::pair<RVector, RVector>>& pairs, const std::vector<double>& kernel_values,
             const LatticeSpec& spec, const Density& c_model)
{
    if (pairs.size() != kernel_values.size() || pairs.empty())
        throw InvalidInput("fit_b: need one kernel value per pair");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (!(kernel_values[i] > 0.0))
            throw InvalidInput("fit_b: kernel values must be positive");
        const double e = unit_exponent(pairs[i].first, pairs[i].second, spec, c_model);
        num += -std::log(kernel_values[i]) * e;
        den += e * e;
    }
    if (den == 0.0)
        throw InvalidInput("fit_b: all pairs coincide, b is not identifiable");
    return num / den;
}

} // namespace ulr::ultralocal
