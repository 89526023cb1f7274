#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ulr/free_field.hpp"
#include "ulr/krylov.hpp"
#include "ulr/phi4.hpp"

using namespace ulr;
using namespace ulr::phi4;

namespace {

Phi4Spec make(int sites, int D, double g, double M = 1.0, double m0 = 1.0, double L = 4.0)
{
    Phi4Spec s;
    s.sites = sites;
    s.D = D;
    s.g = g;
    s.M = M;
    s.m0 = m0;
    s.box_length = L;
    return s;
}

std::vector<FieldConfig> labels_for(int sites, int count, double scale, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<FieldConfig> out;
    for (int i = 0; i < count; ++i) {
        FieldConfig f{RVector(sites), RVector(sites)};
        for (int x = 0; x < sites; ++x) {
            f.pi(x) = u(rng);
            f.phi(x) = u(rng);
        }
        out.push_back(f);
    }
    return out;
}

CMatrix random_hermitian(int n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    CMatrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            a(i, j) = Complex(g(rng), g(rng));
    return 0.5 * (a + a.adjoint());
}

double lowest(const CMatrix& h)
{
    return Eigen::SelfAdjointEigenSolver<CMatrix>(h, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

} // namespace

TEST_CASE("ring gradient form")
{
    for (int n : {2, 4}) {
        const RMatrix g = ring_gradient_form(n, 3.0);
        CHECK((g - lattice::LatticeSpec(1, n, 3.0).gradient_form()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((g - oracle::ring_laplacian(n, 3.0)).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK((oracle::ring_laplacian(3, 2.0) - ring_gradient_form(3, 2.0)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(ring_gradient_form(1, 2.0).norm() == 0.0);
}

TEST_CASE("assembled Hamiltonian against Kronecker assembly")
{
    for (auto [sites, D] : {std::pair{1, 20}, {2, 10}, {3, 8}}) {
        const auto spec = make(sites, D, 0.2, 0.8, 1.1, 3.0);
        Phi4Hamiltonian h(spec);
        const CMatrix dense = h.dense();
        CHECK((dense - dense.adjoint()).cwiseAbs().maxCoeff() == 0.0);
        const CMatrix ref = oracle::phi4_dense(sites, D, 0.8, 1.1, 0.2, 3.0);
        CHECK((dense - ref).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(std::abs(dense(0, 0)) < 1e-13);
    }
}

TEST_CASE("matrix-free application")
{
    Phi4Hamiltonian h(make(3, 8, 0.3));
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    CVector v(h.dim());
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v(i) = Complex(g(rng), g(rng));
    CVector out;
    h.apply(v, out);
    CHECK((out - h.dense() * v).norm() < 1e-11 * v.norm());

    // site 1 has stride D
    const CVector s = h.apply_site(h.phi(), 1, v);
    const CMatrix Q = h.phi();
    for (long hi = 0; hi < 8; ++hi)
        for (long i = 0; i < 8; ++i)
            for (long j = 0; j < 8; ++j) {
                Complex acc = 0.0;
                for (long k = 0; k < 8; ++k)
                    acc += Q(j, k) * v(i + 8 * k + 64 * hi);
                CHECK(std::abs(s(i + 8 * j + 64 * hi) - acc) < 1e-13);
            }
}

TEST_CASE("free single site: harmonic ladder")
{
    Phi4Hamiltonian h(make(1, 60, 0.0, 1.0, 1.3));
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h.dense());
    for (int n = 0; n < 5; ++n)
        CHECK(std::abs(es.eigenvalues()(n + 1) - es.eigenvalues()(n) - 1.3) < 1e-10);
    // shifted by the normal-ordering constant <0|H|0> - omega/2
    const double e00 = 0.25 * (1.0 + 1.69);
    CHECK(std::abs(es.eigenvalues()(0) - (0.65 - e00)) < 1e-10);
    CHECK(h.normal_order_constant() == doctest::Approx(e00));
}

TEST_CASE("truncation convergence of the lowest level")
{
    const double e40 = lowest(Phi4Hamiltonian(make(1, 40, 0.1)).dense());
    const double e80 = lowest(Phi4Hamiltonian(make(1, 80, 0.1)).dense());
    CHECK(std::abs(e40 - e80) < 1e-8);
}

TEST_CASE("iterative ground state matches dense diagonalization")
{
    Phi4Hamiltonian h(make(2, 16, 0.2));
    const auto gs = ground_state_iterative(h);
    CHECK(std::abs(gs.E0 - lowest(oracle::phi4_dense(2, 16, 1.0, 1.0, 0.2, 4.0))) < 1e-10);
    CHECK(gs.residual < 1e-10);
    CHECK(!gs.residual_history.empty());
    CHECK(std::abs(gs.vector.norm() - 1.0) < 1e-12);
}

TEST_CASE("free ground state is the squeezed vacuum")
{
    Phi4Hamiltonian h(make(1, 60, 0.0, 1.0, 2.0));
    const auto gs = ground_state_iterative(h);
    const CVector sq = free_field::squeezed_vacuum(1.0, 2.0, 60);
    CHECK(std::abs(sq.dot(gs.vector)) > 1.0 - 1e-9);
}

TEST_CASE("kurtosis excess")
{
    Phi4Hamiltonian free(make(1, 50, 0.0, 1.0, 1.7));
    CHECK(std::abs(kurtosis_excess(free, ground_state_iterative(free).vector)) < 1e-10);

    const auto spec = make(1, 50, 0.2);
    Phi4Hamiltonian h(spec);
    const auto gs = ground_state_iterative(h);
    const double k = kurtosis_excess(h, gs.vector);
    CHECK(std::abs(k) > 1e-6);

    // moments from the Kronecker oracle's ground state
    Eigen::SelfAdjointEigenSolver<CMatrix> es(oracle::phi4_dense(1, 50, 1.0, 1.0, 0.2, 4.0));
    const CVector v = es.eigenvectors().col(0);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(56, 56);
    for (int n = 1; n < 56; ++n)
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    const Eigen::MatrixXd Q = (a + a.transpose()) / std::sqrt(2.0);
    const Eigen::MatrixXd Q2 = (Q * Q).topLeftCorner(50, 50);
    const Eigen::MatrixXd Q4 = (Q * Q * Q * Q).topLeftCorner(50, 50);
    const double m2 = v.dot(Q2.cast<Complex>() * v).real();
    const double m4 = v.dot(Q4.cast<Complex>() * v).real();
    CHECK(std::abs(k - (m4 - 3.0 * m2 * m2)) < 1e-10);
    CHECK(k < 0.0);
}

TEST_CASE("ground energy decreases as the coupling grows")
{
    // the subtracted <0|Phi^4|0> outgrows the ground-state quartic moment
    double prev = 1e300;
    for (double g : {0.0, 0.05, 0.1, 0.2, 0.4}) {
        const double e = ground_state_iterative(Phi4Hamiltonian(make(2, 14, g))).E0;
        CHECK(e < prev);
        prev = e;
    }
}

TEST_CASE("spec validation")
{
    CHECK_THROWS_AS(make(5, 10, 0.1).validate(), InvalidInput);
    CHECK_THROWS_AS(make(2, 10, -0.1).validate(), InvalidInput);
    CHECK_THROWS_AS(make(2, 4, 0.1).validate(), InvalidInput);
    try {
        make(4, 40, 0.1).validate();
        FAIL("oversized product space accepted");
    } catch (const InvalidInput& e) {
        CHECK(std::string(e.what()).find("D <=") != std::string::npos);
    }
    CHECK_THROWS_AS(Phi4Hamiltonian(make(3, 20, 0.1)).dense(), InvalidInput);
}

TEST_CASE("Lanczos routines on dense matrices")
{
    const CMatrix a = random_hermitian(60, 4);
    CVector seed = CVector::Zero(60);
    seed(0) = 1.0;
    const auto ep = krylov::lowest_eigenpair(krylov::from_dense(a), seed);
    CHECK(std::abs(ep.value - lowest(a)) < 1e-10);
    CHECK((a * ep.vector - ep.value * ep.vector).norm() < 1e-9);

    Eigen::SelfAdjointEigenSolver<CMatrix> es(a);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    CVector v(60);
    for (Eigen::Index i = 0; i < 60; ++i)
        v(i) = Complex(g(rng), g(rng));
    v.normalize();
    for (double t : {0.1, 1.0, 3.0}) {
        const CVector exact = es.eigenvectors() *
                              ((-kI * t * es.eigenvalues().cast<Complex>()).array().exp().matrix().asDiagonal() *
                               (es.eigenvectors().adjoint() * v));
        CHECK((krylov::propagate(krylov::from_dense(a), v, t) - exact).norm() < 1e-10);
    }

    krylov::LanczosOptions tight;
    tight.tol = 1e-14;
    tight.krylov_dim = 3;
    tight.max_restarts = 1;
    CHECK_THROWS_AS(krylov::lowest_eigenpair(krylov::from_dense(a), seed, tight), NumericalError);
}

TEST_CASE("recentered kernel basics")
{
    const auto spec = make(2, 14, 0.2);
    auto labels = labels_for(2, 3, 0.5, 2);
    labels.push_back(labels[0]);
    const auto r = recentered_phi4_kernel(spec, labels, 0.0);
    CHECK(std::abs(r.kernel(0, 3) - 1.0) < 1e-12);
    CHECK(r.dense_path);
    CHECK(std::abs(r.E0 - r.dense_E0) < 1e-10);
    CHECK(r.recenter_overlap > 1.0 - 1e-10);
    CHECK((r.kernel - r.kernel.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("free ring kernel matches the relativistic kernel")
{
    const auto spec = make(2, 30, 0.0, 1.0, 1.0, 4.0);
    const auto labels = labels_for(2, 4, 0.4, 6);
    const lattice::LatticeSpec lat(1, 2, 4.0);
    for (double dt : {0.0, 0.6}) {
        const auto r = recentered_phi4_kernel(spec, labels, dt);
        for (std::size_t a = 0; a < labels.size(); ++a)
            for (std::size_t b = 0; b < labels.size(); ++b) {
                const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
                CHECK(std::abs(r.kernel(ia, ib) -
                               free_field::relativistic_kernel(labels[a], labels[b], 1.0, dt, lat)) < 1e-9);
                CHECK(std::abs(r.kernel(ia, ib) - oracle::relativistic_site_kernel(labels[a].pi, labels[a].phi,
                                                                                   labels[b].pi, labels[b].phi, 1.0,
                                                                                   dt, 4.0)) < 1e-9);
            }
    }
}

TEST_CASE("Krylov and dense evolution agree")
{
    const auto spec = make(2, 14, 0.3);
    const auto labels = labels_for(2, 4, 0.5, 12);
    const auto d = recentered_phi4_kernel(spec, labels, 0.8, 1.0, Evolution::dense);
    const auto k = recentered_phi4_kernel(spec, labels, 0.8, 1.0, Evolution::krylov);
    CHECK(d.dense_path);
    CHECK_FALSE(k.dense_path);
    CHECK((d.kernel - k.kernel).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("fiducial width drops out of the recentered kernel")
{
    auto spec = make(2, 24, 0.2);
    const auto labels = labels_for(2, 4, 0.5, 31);
    const auto mi = m_independence(spec, 0.7, 1.6, labels, 0.5);
    CHECK(mi.deviation < 1e-6);
    CHECK(std::abs(mi.first.E0 - mi.second.E0) > 0.0);
}
