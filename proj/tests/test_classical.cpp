#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "ulr/classical.hpp"
#include "ulr/types.hpp"

using namespace ulr::classical;
constexpr double pi = std::numbers::pi;

TEST_CASE("harmonic orbit after half a period")
{
    auto tr = integrate_hamilton(harmonic(), {1.0, 0.0}, 0.0, pi, 1e-3);
    CHECK(tr.back().t == doctest::Approx(pi).epsilon(1e-15));
    CHECK(std::abs(tr.back().y.q + 1.0) < 1e-10);
    CHECK(std::abs(tr.back().y.p) < 1e-10);
}

TEST_CASE("free particle and constant Hamiltonian")
{
    auto fr = integrate_hamilton(free_particle(), {0.0, 1.0}, 0.0, 2.0, 0.01);
    CHECK(fr.back().y.q == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(fr.back().y.p == doctest::Approx(1.0).epsilon(1e-14));

    auto c = integrate_hamilton(constant(3.0), {0.4, -0.2}, 0.0, 5.0, 0.1);
    CHECK(c.back().y.q == 0.4);
    CHECK(c.back().y.p == -0.2);
}

TEST_CASE("RK4 error falls by about 16 when the step halves")
{
    const double w = 1.3;
    const auto [qe, pe] = oracle::harmonic_orbit(0.7, 0.2, w, 5.0);
    auto err = [&](double dt) {
        auto tr = integrate_hamilton(harmonic(w), {0.7, 0.2}, 0.0, 5.0, dt);
        return std::hypot(tr.back().y.q - qe, tr.back().y.p - pe);
    };
    const double ratio = err(0.02) / err(0.01);
    CHECK(ratio > 14.0);
    CHECK(ratio < 18.0);
}

TEST_CASE("identity reparametrization reproduces the standard run")
{
    auto h = harmonic();
    auto std_run = integrate_hamilton(h, {1.0, 0.0}, 0.0, 3.0, 1e-3);
    auto rep = integrate_reparam(h, [](double) { return 1.0; }, on_shell(h, {1.0, 0.0}), 3.0, 1e-3);
    CHECK(std::abs(rep.back().t - 3.0) < 1e-12);
    CHECK(std::abs(rep.back().q - std_run.back().y.q) < 1e-12);
    auto r = equivalence_report(std_run, rep, h);
    CHECK(r.max_dev < 1e-9);
    CHECK(r.compared > 100);
}

TEST_CASE("constant multiplier doubles the clock")
{
    auto h = harmonic();
    auto rep = integrate_reparam(h, [](double) { return 2.0; }, on_shell(h, {1.0, 0.0}), pi / 2, 1e-4);
    CHECK(rep.back().t == doctest::Approx(pi).epsilon(1e-12));
    CHECK(std::abs(rep.back().q + 1.0) < 1e-10);
}

TEST_CASE("s is conserved and the constraint holds")
{
    auto h = harmonic(0.9);
    auto y0 = on_shell(h, {0.3, 1.1});
    CHECK(y0.s == doctest::Approx(-h.value(0.3, 1.1)));
    auto rep = integrate_reparam(h, [](double t) { return 1.0 + 0.5 * std::sin(t); }, y0, 6.0, 1e-3);
    CHECK(rep.back().s == y0.s);
    for (const auto& p : rep)
        CHECK(std::abs(p.s + h.value(p.q, p.p)) < 1e-8);
}

TEST_CASE("oscillating multiplier against the analytic orbit")
{
    auto h = harmonic();
    auto lam = [](double tau) { return 1.0 + 0.5 * std::sin(tau); };
    auto std_run = integrate_hamilton(h, {1.0, 0.0}, 0.0, 10.0, 1e-3);
    auto rep = integrate_reparam_until(h, lam, on_shell(h, {1.0, 0.0}), 10.0, 1e-4);
    auto r = equivalence_report(std_run, rep, h);
    CHECK(r.max_dev < 1e-6);
    CHECK(r.constraint_drift < 1e-8);
    for (std::size_t i = 0; i < rep.size(); i += 997) {
        const auto [q, p] = oracle::harmonic_orbit(1.0, 0.0, 1.0, rep[i].t);
        CHECK(std::abs(rep[i].q - q) + std::abs(rep[i].p - p) < 1e-9);
    }
}

TEST_CASE("nonpositive multiplier is rejected")
{
    auto h = harmonic();
    CHECK_THROWS_AS(integrate_reparam(h, [](double) { return 0.0; }, on_shell(h, {1.0, 0.0}), 1.0, 1e-2),
                    ulr::InvalidInput);
    CHECK_THROWS_AS(integrate_reparam(h, [](double t) { return 1.0 - t; }, on_shell(h, {1.0, 0.0}), 2.0, 1e-2),
                    ulr::InvalidInput);
}

TEST_CASE("off-shell start is rejected")
{
    auto h = harmonic();
    auto y0 = on_shell(h, {1.0, 0.0});
    y0.s += 0.1;
    CHECK_THROWS_AS(integrate_reparam(h, [](double) { return 1.0; }, y0, 1.0, 1e-2), ulr::InvalidInput);
}

TEST_CASE("CSV output")
{
    auto h = harmonic();
    auto rep = integrate_reparam(h, [](double) { return 1.0; }, on_shell(h, {1.0, 0.0}), 0.1, 0.05);
    std::ostringstream os;
    write_csv(os, rep);
    const auto s = os.str();
    CHECK(s.rfind("tau,t,q,p,s\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == static_cast<long>(rep.size()) + 1);
}
