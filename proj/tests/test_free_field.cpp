#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "ulr/free_field.hpp"

using namespace ulr;
using namespace ulr::free_field;

namespace {

std::vector<FieldConfig> random_labels(const LatticeSpec& spec, int count, double scale, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<FieldConfig> out;
    for (int i = 0; i < count; ++i) {
        FieldConfig f = lattice::zero_config(spec);
        for (int x = 0; x < spec.site_count(); ++x) {
            f.pi(x) = u(rng);
            f.phi(x) = u(rng);
        }
        out.push_back(f);
    }
    return out;
}

// Product of per-site oscillator overlaps in canonical variables sqrt(dx) (pi, phi).
Complex site_product_overlap(const FieldConfig& a, const FieldConfig& b, double M, double dx)
{
    const double r = std::sqrt(dx);
    Complex k = 1.0;
    for (Eigen::Index x = 0; x < a.pi.size(); ++x)
        k *= oracle::harmonic_weyl_kernel(r * a.pi(x), r * a.phi(x), r * b.pi(x), r * b.phi(x), M, 0.0);
    return k;
}

} // namespace

TEST_CASE("lattice mode functions")
{
    LatticeSpec spec(1, 8, 3.0);
    const RMatrix& h = spec.mode_functions();
    const RMatrix gram = spec.cell_volume() * h.transpose() * h;
    CHECK((gram - RMatrix::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-14);
    const RMatrix G = spec.gradient_form();
    for (int n = 0; n < 8; ++n)
        CHECK((G * h.col(n) - spec.modes()[static_cast<std::size_t>(n)].k2 * h.col(n)).norm() < 1e-12);
    CHECK((G - oracle::ring_laplacian(8, 3.0)).cwiseAbs().maxCoeff() < 1e-12);

    RVector f = RVector::LinSpaced(8, -1.0, 2.0);
    CHECK((spec.from_modes(spec.to_modes(f)) - f).norm() < 1e-13);

    CHECK(LatticeSpec(3, 2, 1.0).site_count() == 8);
    CHECK_THROWS_AS(LatticeSpec(2, 4, 1.0), InvalidInput);
    CHECK_THROWS_AS(LatticeSpec(1, 3, 1.0), InvalidInput);
    CHECK_THROWS_AS(LatticeSpec(3, 6, 1.0), InvalidInput);
}

TEST_CASE("mode frequency")
{
    LatticeSpec spec(1, 8, 2.0 * std::numbers::pi);
    bool found = false;
    for (const auto& md : spec.modes())
        if (std::abs(md.k2 - 1.0) < 1e-12) {
            CHECK(frequency(md.k2, std::sqrt(3.0)) == doctest::Approx(2.0).epsilon(1e-15));
            found = true;
        }
    CHECK(found);
    CHECK(truncated_hamiltonian(0, 1.0, 1.0, 20, spec).empty());
}

TEST_CASE("ultralocal overlap")
{
    LatticeSpec spec(1, 4, 2.0);
    auto labels = random_labels(spec, 5, 1.5, 7);
    for (const auto& a : labels) {
        CHECK(std::abs(ultralocal_overlap(a, a, 1.3, spec) - 1.0) < 1e-14);
        for (const auto& b : labels)
            CHECK(std::abs(ultralocal_overlap(a, b, 1.3, spec) - site_product_overlap(a, b, 1.3, spec.spacing())) <
                  1e-13);
    }

    // a spike of weight w in phi at one site
    const double w = 0.7, M = 2.0, dx = spec.spacing();
    FieldConfig z = lattice::zero_config(spec), s = z;
    s.phi(2) = w / dx;
    CHECK(std::abs(std::abs(ultralocal_overlap(s, z, M, spec)) - std::exp(-M * w * w / (4.0 * dx))) < 1e-15);

    // disjoint supports factorize
    FieldConfig a = z, b = z;
    a.phi(0) = 0.4;
    a.pi(3) = -0.9;
    FieldConfig a0 = z, a3 = z;
    a0.phi(0) = 0.4;
    a3.pi(3) = -0.9;
    b.phi(0) = -0.2;
    FieldConfig b0 = z;
    b0.phi(0) = -0.2;
    CHECK(std::abs(ultralocal_overlap(a, b, M, spec) -
                   ultralocal_overlap(a0, b0, M, spec) * ultralocal_overlap(a3, z, M, spec)) < 1e-15);
}

TEST_CASE("relativistic kernel against the site-space oracle")
{
    LatticeSpec spec(1, 8, 4.0);
    auto labels = random_labels(spec, 4, 1.0, 3);
    const FieldConfig z = lattice::zero_config(spec);
    CHECK(std::abs(relativistic_kernel(z, z, 2.0, 0.7, spec) - 1.0) < 1e-15);
    for (double dt : {0.0, 0.35, 1.2})
        for (const auto& a : labels) {
            CHECK(std::abs(std::abs(relativistic_kernel(a, a, 2.0, 0.0, spec)) - 1.0) < 1e-13);
            for (const auto& b : labels)
                CHECK(std::abs(relativistic_kernel(a, b, 2.0, dt, spec) -
                               oracle::relativistic_site_kernel(a.pi, a.phi, b.pi, b.phi, 2.0, dt, 4.0)) < 1e-12);
        }
}

TEST_CASE("massless field is rejected")
{
    LatticeSpec s1(1, 4, 2.0);
    LatticeSpec s3(3, 2, 2.0);
    const auto z1 = lattice::zero_config(s1);
    const auto z3 = lattice::zero_config(s3);
    try {
        relativistic_kernel(z1, z1, 0.0, 0.1, s1);
        FAIL("accepted m = 0 in one dimension");
    } catch (const InvalidInput& e) {
        CHECK(std::string(e.what()).find("one space dimension") != std::string::npos);
    }
    try {
        relativistic_kernel(z3, z3, 0.0, 0.1, s3);
        FAIL("accepted m = 0 in three dimensions");
    } catch (const InvalidInput& e) {
        CHECK(std::string(e.what()).find("zero frequency") != std::string::npos);
    }
    CHECK_THROWS_AS(truncated_hamiltonian(2, 0.0, 1.0, 20, s1), InvalidInput);
}

TEST_CASE("single-mode kernel after half a period")
{
    const double w = 3.0, c = 0.4;
    const Complex k = mode_kernel(w, 0.0, c, 0.0, c, std::numbers::pi / w);
    // z'' = z' = sqrt(w/2) c, rotated by e^{-i pi}
    CHECK(std::abs(k - std::exp(-w * c * c)) < 1e-15);
    CHECK(std::abs(k - oracle::harmonic_weyl_kernel(0.0, c, 0.0, c, w, std::numbers::pi / w)) < 1e-15);
}

TEST_CASE("squeezed vacuum against Hermite-function quadrature")
{
    for (auto [M, w] : {std::pair{1.0, 4.0}, {0.5, 3.0}, {2.0, 0.7}}) {
        const int D = 40;
        const CVector v = squeezed_vacuum(M, w, D);
        const auto coeff = oracle::simpson(
            [&](double x) {
                auto hf = oracle::hermite_functions(D - 1, M, x);
                Eigen::VectorXd r = Eigen::Map<Eigen::VectorXd>(hf.data(), D);
                return Eigen::VectorXd(r * oracle::hermite_functions(0, w, x)[0]);
            },
            -15.0, 15.0, 6000);
        CHECK((v.real() - coeff).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(v.imag().norm() == 0.0);
        CHECK(std::abs(v(0).real() - vacuum_overlap(M, w)) < 1e-15);
    }
}

TEST_CASE("recentered mode fiducial")
{
    const auto mo = mode_oscillator(4.0, 1.0, 40);
    CHECK(mo.rep.dim >= 40 + 20 * std::log(4.0));
    CHECK(std::abs(mo.rep.h(0, 0)) < 1e-14);
    const auto rc = recenter_mode(mo, 1.0);
    CHECK(rc.analytic_deviation < 1e-12);
    CHECK(rc.overlap_with_original == doctest::Approx(std::sqrt(0.8)).epsilon(1e-12));
    CHECK(rc.overlap_with_original == doctest::Approx(0.8944).epsilon(1e-4));
    CHECK(rc.quotient == doctest::Approx(1.0).epsilon(1e-12));

    const auto same = recenter_mode(mode_oscillator(1.5, 1.5, 20), 1.0);
    CHECK(std::abs(same.fiducial(0) - 1.0) < 1e-12);
    CHECK(std::abs(same.ground_shift) < 1e-12);
}

TEST_CASE("recentered kernel recovers the relativistic kernel")
{
    LatticeSpec spec(1, 4, 3.0);
    auto labels = random_labels(spec, 5, 0.8, 19);
    for (double M : {0.5, 1.0, 2.0})
        for (double dt : {0.0, 0.45}) {
            auto r = recentered_kernel(4, 1.5, M, 1.0, dt, labels, spec, 40);
            for (std::size_t a = 0; a < labels.size(); ++a)
                for (std::size_t b = 0; b < labels.size(); ++b)
                    CHECK(std::abs(r.kernel(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) -
                                   oracle::relativistic_site_kernel(labels[a].pi, labels[a].phi, labels[b].pi,
                                                                    labels[b].phi, 1.5, dt, 3.0)) < 1e-9);
            CHECK(r.full_deviation < 1e-9);
            CHECK(r.max_fiducial_deviation < 1e-12);
        }
}

TEST_CASE("no retained modes leaves the ultralocal overlap")
{
    LatticeSpec spec(1, 4, 3.0);
    auto labels = random_labels(spec, 3, 0.8, 4);
    auto r = recentered_kernel(0, 1.5, 1.2, 1.0, 0.3, labels, spec, 40);
    for (std::size_t a = 0; a < labels.size(); ++a)
        for (std::size_t b = 0; b < labels.size(); ++b)
            CHECK(std::abs(r.kernel(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) -
                           site_product_overlap(labels[a], labels[b], 1.2, spec.spacing())) < 1e-13);
}

TEST_CASE("per-mode signals against the squeezed-vacuum weights")
{
    for (auto [M, w, lambda, dt] : {std::tuple{1.0, 4.0, 1.0, 0.7}, {1.0, 2.0, 3.0, 0.2}, {0.6, 1.1, 0.5, 1.7}}) {
        const auto sig = mode_signal(mode_oscillator(w, M, 60), lambda, dt);
        const auto [mod, damp] = oracle::mode_signals(M, w, lambda, dt);
        CHECK(std::abs(sig.time_modulus - mod) < 1e-8);
        CHECK(std::abs(sig.damped - damp) < 1e-12);
    }
    const auto s = mode_signal(mode_oscillator(4.0, 1.0, 60), 1.0, 0.7);
    CHECK(s.time_modulus == doctest::Approx(0.92022).epsilon(1e-5));
}

TEST_CASE("incompatibility diagnostics")
{
    const std::vector<double> omegas(20, 4.0);
    const std::vector<int> Ns{1, 2, 5, 10, 20};
    auto zero = incompatibility_diagnostics(Ns, omegas, 1.0, 1.0, 0.0, 40);
    for (const auto& r : zero)
        CHECK(std::abs(r.time_kernel_modulus - 1.0) < 1e-13);

    auto rows = incompatibility_diagnostics(Ns, omegas, 1.0, 1.0, 0.7, 40);
    const auto [mod, damp] = oracle::mode_signals(1.0, 4.0, 1.0, 0.7);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].N == Ns[i]);
        CHECK(rows[i].time_kernel_modulus == doctest::Approx(std::pow(mod, Ns[i])).epsilon(1e-7));
        CHECK(rows[i].damped_overlap == doctest::Approx(std::pow(damp, Ns[i])).epsilon(1e-11));
        if (i > 0) {
            CHECK(rows[i].time_kernel_modulus < rows[i - 1].time_kernel_modulus);
            CHECK(rows[i].damped_overlap < rows[i - 1].damped_overlap);
        }
    }
    CHECK_THROWS_AS(incompatibility_diagnostics({30}, omegas, 1.0, 1.0, 0.7, 40), InvalidInput);
}

TEST_CASE("mass inequivalence profile")
{
    LatticeSpec spec(1, 8, 4.0);
    auto prof = mass_inequivalence_profile(1.0, 2.5, spec);
    REQUIRE(prof.size() == 8);
    double expect = 1.0;
    for (std::size_t n = 0; n < 8; ++n) {
        const double w1 = std::sqrt(spec.modes()[n].k2 + 1.0);
        const double w2 = std::sqrt(spec.modes()[n].k2 + 6.25);
        expect *= oracle::simpson(
            [&](double x) { return oracle::hermite_functions(0, w1, x)[0] * oracle::hermite_functions(0, w2, x)[0]; },
            -12.0, 12.0, 4000);
        CHECK(prof[n] == doctest::Approx(expect).epsilon(1e-10));
    }
}
