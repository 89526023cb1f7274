#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ulr/kernel_core.hpp"
#include "ulr/oscillator.hpp"

using namespace ulr;

namespace {

// Ordered-convention wavepacket for the Omega = 1 fiducial.
oracle::C wavepacket(double p, double q, double x)
{
    return std::exp(oracle::I * p * (x - q)) * std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * (x - q) * (x - q));
}

oracle::C wavepacket_overlap(double p2, double q2, double p1, double q1)
{
    return oracle::simpson([&](double x) { return std::conj(wavepacket(p2, q2, x)) * wavepacket(p1, q1, x); },
                           -20.0, 20.0, 4000);
}

CMatrix random_hermitian(int n, std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    CMatrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            a(i, j) = Complex(g(rng), g(rng));
    return 0.5 * (a + a.adjoint());
}

} // namespace

TEST_CASE("gram matrix of a single normalized label")
{
    auto g = kernel::gram_matrix([](int, int) { return Complex(1.0); }, std::vector<int>{0});
    CHECK(g.entries.rows() == 1);
    CHECK(g.entries(0, 0) == Complex(1.0));
}

TEST_CASE("two identical labels give a degenerate Gram matrix")
{
    auto g = kernel::gram_matrix(
        [](double a, double b) { return oscillator::overlap_analytic(0.0, a, 0.0, b, 1.0); },
        std::vector<double>{0.3, 0.3});
    CHECK(std::abs(g.entries(0, 1) - 1.0) < 1e-15);
    CHECK(std::abs(kernel::psd_check(g, 1e-12).min_eig) < 1e-14);
}

TEST_CASE("overlap kernel against wavepacket quadrature")
{
    using L = oscillator::Label;
    auto g = kernel::gram_matrix(
        [](const L& a, const L& b) { return oscillator::overlap_analytic(a.p, a.q, b.p, b.q, 1.0); },
        std::vector<L>{{0.0, 0.0}, {0.0, 1.0}});
    CHECK(std::abs(g.entries(0, 1) - std::exp(-0.25)) < 1e-12);
    CHECK(std::abs(g.entries(0, 1) - wavepacket_overlap(0.0, 0.0, 0.0, 1.0)) < 1e-10);
    CHECK(g.entries == g.entries.adjoint());
}

TEST_CASE("gram matrix is Hermitian bit for bit")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<oscillator::Label> labels;
    for (int i = 0; i < 12; ++i)
        labels.push_back({u(rng), u(rng)});
    auto g = kernel::gram_matrix(
        [](const oscillator::Label& a, const oscillator::Label& b) {
            return oscillator::overlap_analytic(a.p, a.q, b.p, b.q, 1.3);
        },
        labels);
    CHECK(g.entries == g.entries.adjoint());
}

TEST_CASE("gram matrix input errors")
{
    CHECK_THROWS_AS(kernel::gram_matrix([](int, int) { return Complex(1.0); }, std::vector<int>{}), InvalidInput);
    CHECK_THROWS_AS(kernel::gram_matrix([](int a, int b) { return Complex(a == b ? 1.0 : NAN); },
                                        std::vector<int>{0, 1}),
                    NumericalError);
}

TEST_CASE("psd_check")
{
    auto id = kernel::psd_check(CMatrix::Identity(4, 4), 1e-12);
    CHECK(id.pass);
    CHECK(id.min_eig == doctest::Approx(1.0).epsilon(1e-14));

    auto ones = kernel::psd_check(CMatrix::Ones(3, 3), 1e-12);
    CHECK(ones.pass);
    CHECK(std::abs(ones.min_eig) < 1e-14);

    CMatrix bad(2, 2);
    bad << 1.0, 1.5, 1.5, 1.0;
    auto r = kernel::psd_check(bad, 1e-9);
    CHECK_FALSE(r.pass);
    CHECK(r.min_eig == doctest::Approx(-0.5).epsilon(1e-14));
}

TEST_CASE("coherent overlap Gram matrices are PSD over random label sets")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int set = 0; set < 20; ++set) {
        std::vector<oscillator::Label> labels;
        for (int i = 0; i < 15; ++i)
            labels.push_back({u(rng), u(rng)});
        auto g = kernel::gram_matrix(
            [](const oscillator::Label& a, const oscillator::Label& b) {
                return oscillator::overlap_analytic(a.p, a.q, b.p, b.q, 0.8);
            },
            labels);
        CHECK(kernel::psd_check(g, 1e-9).pass);
    }
}

TEST_CASE("damped quotient values")
{
    CMatrix h = CMatrix::Zero(3, 3);
    h(1, 1) = 1.0;
    h(2, 2) = 2.0;
    const CMatrix basis = CMatrix::Identity(3, 3);

    CVector null = CVector::Zero(3);
    null(0) = 2.0;
    CVector eig = CVector::Zero(3);
    eig(2) = 1.0;
    CVector mix = CVector::Zero(3);
    mix(0) = mix(1) = 1.0 / std::sqrt(2.0);

    auto qs = kernel::quotient_set(h, basis, 1.0, {null, eig, mix});
    REQUIRE(qs.values.size() == 3);
    CHECK(qs.values[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(qs.values[1] == doctest::Approx(std::exp(-4.0)).epsilon(1e-13));
    // two-term spectral sum for the harmonic ladder
    CHECK(qs.values[2] == doctest::Approx((1.0 + std::exp(-1.0)) / 2.0).epsilon(1e-13));
    CHECK(qs.values[2] == doctest::Approx(0.6839).epsilon(1e-4));
    for (double v : qs.values) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("quotient values stay in [0,1] for random Hermitian H")
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    const CMatrix h = random_hermitian(6, rng);
    std::vector<CVector> trials;
    for (int i = 0; i < 20; ++i) {
        CVector t(6);
        for (int j = 0; j < 6; ++j)
            t(j) = Complex(g(rng), g(rng));
        trials.push_back(t);
    }
    auto qs = kernel::quotient_set(h, CMatrix::Identity(6, 6), 0.7, trials);
    for (double v : qs.values) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("recenter on a diagonal H with a unique null vector")
{
    CMatrix h = CMatrix::Zero(4, 4);
    h.diagonal() << 0.0, 1.0, 2.5, 4.0;
    auto r = kernel::recenter(h, 1.0);
    CHECK(std::abs(r.vector(0) - 1.0) < 1e-15);
    CHECK(r.vector.tail(3).norm() < 1e-15);
    CHECK(r.quotient_achieved == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.degeneracy == 1);
    CHECK(r.warning.empty());
}

TEST_CASE("recenter keeps the vacuum of a normal-ordered oscillator")
{
    auto rep = oscillator::build_oscillator_rep(30, 1.7, oscillator::HamiltonianSpec::harmonic(1.7));
    auto r = kernel::recenter(rep.h, 2.0);
    CHECK(std::abs(r.vector(0) - 1.0) < 1e-12);
}

TEST_CASE("recenter tie rules")
{
    // +-1 tie in H^2 goes to the smaller H eigenvalue
    CMatrix h = CMatrix::Zero(3, 3);
    h.diagonal() << 1.0, -1.0, 3.0;
    auto r = kernel::recenter(h, 1.0);
    CHECK(std::abs(std::abs(r.vector(1)) - 1.0) < 1e-14);
    CHECK(r.energy == doctest::Approx(-1.0));

    // exact degeneracy goes to the lowest basis index and warns
    CMatrix d = CMatrix::Zero(3, 3);
    d.diagonal() << 2.0, 0.0, 0.0;
    auto rd = kernel::recenter(d, 1.0);
    CHECK(rd.degeneracy == 2);
    CHECK_FALSE(rd.warning.empty());
    CHECK(std::abs(std::abs(rd.vector(1)) - 1.0) < 1e-14);
}

TEST_CASE("recentered vector does not depend on Lambda")
{
    std::mt19937_64 rng(9);
    const CMatrix h = kernel::ground_normal_ordered(random_hermitian(8, rng));
    auto a = kernel::recenter(h, 0.1);
    auto b = kernel::recenter(h, 100.0);
    CHECK((a.vector - b.vector).norm() < 1e-12);
    CHECK(a.quotient_achieved == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("recenter inside a span")
{
    CMatrix h = CMatrix::Zero(3, 3);
    h.diagonal() << 0.0, 1.0, 2.0;
    CMatrix span = CMatrix::Zero(3, 2);
    span(1, 0) = 1.0;
    span(2, 1) = 1.0;
    auto r = kernel::recenter(h, 1.0, span);
    CHECK(std::abs(std::abs(r.vector(1)) - 1.0) < 1e-14);
    CHECK(r.quotient_achieved == doctest::Approx(std::exp(-1.0)).epsilon(1e-13));
}

TEST_CASE("ground_normal_ordered makes H nonnegative with a null ground state")
{
    std::mt19937_64 rng(21);
    const CMatrix h = random_hermitian(7, rng);
    const CMatrix n = kernel::ground_normal_ordered(h);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(n);
    CHECK(std::abs(es.eigenvalues()(0)) < 1e-12);
    CHECK(es.eigenvalues()(0) > -1e-12);
    Eigen::SelfAdjointEigenSolver<CMatrix> e0(h);
    CHECK(std::abs((e0.eigenvalues().array() - e0.eigenvalues()(0)).matrix().norm() -
                   es.eigenvalues().norm()) < 1e-12);
}

TEST_CASE("normal_ordered about a reference vector")
{
    std::mt19937_64 rng(2);
    const CMatrix h = random_hermitian(5, rng);
    CVector ref = CVector::Zero(5);
    ref(2) = 1.0;
    const CMatrix n = kernel::normal_ordered(h, ref);
    CHECK(std::abs((ref.adjoint() * n * ref)(0)) < 1e-14);
}

TEST_CASE("fix_phase")
{
    CVector v(3);
    v << Complex(0.1, 0.0), Complex(0.0, -0.9), Complex(0.3, 0.3);
    v.normalize();
    CVector w = v * std::exp(Complex(0.0, 1.234));
    kernel::fix_phase(w);
    CHECK(std::abs(w(1).imag()) < 1e-15);
    CHECK(w(1).real() > 0.0);
    kernel::fix_phase(v);
    CHECK((v - w).norm() < 1e-14);
}

TEST_CASE("spectral decomposition rejects non-Hermitian input")
{
    CMatrix a = CMatrix::Zero(2, 2);
    a(0, 1) = 1.0;
    CHECK_THROWS_AS(kernel::spectral_decomposition(a), InvalidInput);
}

TEST_CASE("damping operator and normalized kernel")
{
    CMatrix h = CMatrix::Zero(2, 2);
    h.diagonal() << 0.0, 2.0;
    auto d = kernel::damping_operator(kernel::spectral_decomposition(h), 1.0);
    CHECK(std::abs(d(1, 1) - std::exp(-4.0)) < 1e-15);

    CMatrix k(2, 2);
    k << 4.0, 2.0, 2.0, 9.0;
    auto nk = kernel::normalize_diagonal(k);
    CHECK(std::abs(nk.entries(0, 1) - 1.0 / 3.0) < 1e-15);
    CHECK(nk.diagonal_factors(1) == doctest::Approx(9.0));
}
