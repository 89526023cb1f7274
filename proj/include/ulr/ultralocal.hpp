#pragma once

// General ultralocal characteristic functionals on a lattice. Levy measures
// are point masses plus a density sampled on graded Gauss-Legendre grids;
// finiteness of an integral is judged by comparing two grid levels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ulr/kernel_core.hpp"
#include "ulr/lattice.hpp"
#include "ulr/quadrature.hpp"

namespace ulr::ultralocal {

using lattice::FieldConfig;
using lattice::LatticeSpec;

/// coef |l|^alpha exp(-(l/width)^2); width = inf drops the Gaussian factor.
struct Density {
    double coef = 0.0;
    double alpha = 0.0;
    double width = 1.0;

    bool zero() const { return coef == 0.0; }
    double operator()(double l) const;
};

/// Symmetric grid on [-R, -eps] u [eps, R]: geometric panels (ratio 2) from eps
/// to 1, unit panels from 1 to R.
struct GridLevel {
    double eps = 1e-8;
    double R = 40.0;
    int nodes_per_panel = 16;
};

inline constexpr GridLevel kCoarse{1e-8, 40.0, 16};
inline constexpr GridLevel kFine{1e-12, 80.0, 16};

quad::Rule symmetric_grid(const GridLevel& level);

/// Value of an integral at the two grid levels and the verdict of the ratio test.
struct RefinedIntegral {
    double coarse = 0.0;
    double fine = 0.0;
    bool finite = false;
};

inline constexpr double kRatioTol = 1e-6;

/// The ratio test: both levels finite and within `tol` of each other, relative.
inline bool levels_agree(double coarse, double fine, double tol = kRatioTol)
{
    if (fine == 0.0 && coarse == 0.0)
        return true;
    const double scale = std::max(std::abs(fine), std::numeric_limits<double>::min());
    return std::isfinite(fine) && std::isfinite(coarse) && std::abs(fine - coarse) <= tol * scale;
}

template <class F>
RefinedIntegral refined_integral(F&& f, double tol = kRatioTol)
{
    RefinedIntegral r;
    r.coarse = quad::integrate(symmetric_grid(kCoarse), f);
    r.fine = quad::integrate(symmetric_grid(kFine), f);
    r.finite = levels_agree(r.coarse, r.fine, tol);
    return r;
}

struct LevyMeasure {
    std::vector<std::pair<double, double>> point_masses; ///< (lambda_i, w_i), w_i > 0
    Density density;
    std::vector<double> site_scale; ///< empty: homogeneous

    bool zero() const { return point_masses.empty() && density.zero(); }
    double scale(int site) const;
    void validate(int sites) const;

    /// int f(l) dsigma(l) on the fine grid plus point masses (unscaled).
    template <class F>
    Complex integrate(F&& f) const
    {
        Complex s = 0.0;
        for (const auto& [l, w] : point_masses)
            s += w * Complex(f(l));
        if (!density.zero()) {
            const quad::Rule& r = fine_rule();
            for (std::size_t i = 0; i < r.nodes.size(); ++i)
                s += r.weights[i] * density(r.nodes[i]) * Complex(f(r.nodes[i]));
        }
        return s;
    }

    static const quad::Rule& fine_rule();
};

struct UltralocalParams {
    bool canonical = false;
    RVector a, b, c, d; ///< per site; b and d only used when canonical
    LevyMeasure sigma;
    LevyMeasure rho;

    /// Constant fields on `sites` sites.
    static UltralocalParams homogeneous(int sites, double a, double c, bool canonical = false, double b = 0.0,
                                        double d = 0.0);
    bool is_homogeneous() const;
    void validate_shapes(int sites) const;
};

/// Closed-form contributions of the power-law density outside a grid level:
/// |l| < eps, and |l| > R when the Gaussian factor is absent. The integrand is
/// l^2/(1+l^2) times the density when `admissibility` is set, else the density
/// alone. Each end is added only when it converges.
double density_ends(const Density& d, const GridLevel& level, bool admissibility);

struct MeasureCheck {
    RefinedIntegral admissibility; ///< int l^2/(1+l^2) dsigma
    RefinedIntegral total_mass;    ///< int dsigma
    bool total_mass_divergent = false;
};

MeasureCheck check_measure(const LevyMeasure& m);

struct AdmissibilityReport {
    double sigma_integral = 0.0;
    double rho_integral = 0.0;
    bool sigma_finite = true;
    bool rho_finite = true;
    bool sigma_total_mass_divergent = false;
    bool rho_total_mass_divergent = false;
    double cd_min = std::numeric_limits<double>::infinity();
    double c_min = std::numeric_limits<double>::infinity();
    bool pass = false;
    std::vector<std::string> failures;
};

AdmissibilityReport admissibility_check(const UltralocalParams& params);

struct Classification {
    bool reducible = false;
    std::vector<std::string> reasons; ///< "sigma != 0", "rho != 0", "cd > 1"
};

Classification classify_representation(const UltralocalParams& params);

/// exp(sum_x dx^d {i a pi - c pi^2/4 + s(x) int[e^{i l pi} - 1 - i l pi/(1+l^2)] dsigma}).
Complex char_functional_field(const RVector& pi, const UltralocalParams& params, const LatticeSpec& spec);

/// Adds -i b phi - d phi^2/4 + int[e^{-i g phi} - 1 + i g phi/(1+g^2)] drho. Rejects cd < 1.
Complex char_functional_canonical(const FieldConfig& f, const UltralocalParams& params, const LatticeSpec& spec);

/// C_jk = Phi(pi_k - pi_j).
CMatrix difference_gram_field(const std::vector<RVector>& configs, const UltralocalParams& params,
                              const LatticeSpec& spec);

/// C_jk = Phi(f_k - f_j), optionally times the Weyl phase
/// exp(i/2 dx^d sum(phi_j pi_k - pi_j phi_k)) so that C_jk = <eta|W(f_j)^dag W(f_k)|eta>.
CMatrix difference_gram_canonical(const std::vector<FieldConfig>& configs, const UltralocalParams& params,
                                  const LatticeSpec& spec, bool weyl_twist);

/// Gaussian superposition over a(x) of the a-shifted ultralocal overlap.
struct Superposition {
    Complex kernel = 0.0;     ///< closed form with M' = M + Mt
    Complex unshifted = 0.0;  ///< a = 0 overlap
    double factor = 0.0;      ///< exp(-Mt/4 dx^d sum (phi'' - phi')^2)
    double c = 0.0;
    double d = 0.0;
    double cd = 0.0;
    // Monte Carlo over a_x ~ N(0, Mt / (2 dx^d)); zero samples skips it.
    std::size_t samples = 0;
    Complex mc_mean = 0.0;
    double mc_stderr_re = 0.0;
    double mc_stderr_im = 0.0;
    bool mc_within_3se = true;
};

Superposition gaussian_superpose(double M, double Mt, const FieldConfig& f2, const FieldConfig& f1,
                                 const LatticeSpec& spec, std::size_t samples = 0, std::uint64_t seed = 0);

/// Canonical parameters c = 1/M, d = M + Mt of the superposed overlap.
UltralocalParams superposed_params(double M, double Mt, int sites);

/// Stateless 64-bit mixer used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

struct ModelFieldSpec {
    double b_coef = 1.0;
    Density c_model; ///< c(l)^2, even by construction
    void validate() const;
};

/// int [1 - cos(l u)] c(l)^2 dl; throws NumericalError when the grid levels disagree.
double model_exponent_integral(const Density& c2, double u);

/// exp(-b sum_x dx^d int [1 - cos(l (pi''(x) - pi'(x)))] c(l)^2 dl).
double model_field_kernel(const RVector& pi2, const RVector& pi1, const LatticeSpec& spec,
                          const ModelFieldSpec& model);

/// Least-squares slope of -log K against the b = 1 exponent over label pairs.
double fit_b(const std::vector<std::pair<RVector, RVector>>& pairs, const std::vector<double>& kernel_values,
             const LatticeSpec& spec, const Density& c_model);

} // namespace ulr::ultralocal
