#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include <boost/math/tools/roots.hpp>

#include "contdyn/quantum.hpp"
#include "../support/oracles.hpp"

using namespace contdyn;
using namespace contdyn::quantum;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const Complex kI{0.0, 1.0};

ComplexGenerator constant_h(const ComplexMatrix& h) { return ComplexGenerator::constant(h); }

QuantumProblem problem(ComplexGenerator h, double tf, double hbar = 1.0) {
    QuantumProblem q;
    q.H = std::move(h);
    q.hbar = hbar;
    q.tf = tf;
    return q;
}

double phase_diff(Complex a, Complex b) { return std::abs(std::arg(a / b)); }

} // namespace

TEST_CASE("two-level Hamiltonians") {
    const auto zero_e = [](double) { return 0.0; };
    const auto h0 = two_level_hamiltonian({zero_e, zero_e, 1.0});
    const auto d0 = hamiltonian_det(TwoLevelEnergies{zero_e, zero_e, 1.0});
    for (double t : {0.0, 1.0, 5.0}) {
        CHECK(d0(t) == -1.0);
        CHECK(std::abs(det(h0(t)) - Complex{-1.0}) < 1e-15);
        CHECK(h0(t) == h0(t).adjoint());
    }

    const auto lin = [](double t) { return t; };
    const auto dl = hamiltonian_det(TwoLevelEnergies{lin, lin, 2.0});
    CHECK(dl(2.0) == 0.0);
    CHECK(dl(-2.0) == 0.0);
    CHECK(dl(1.0) < 0.0);

    const auto dc = hamiltonian_det(TwoLevelEnergies{[](double) { return 1.5; }, [](double) { return 0.5; }, 0.5});
    CHECK(dc(0.3) == doctest::Approx(0.5));
    CHECK(find_crossings(dc, uniform_grid(0.0, 10.0, 100)).empty());

    SUBCASE("driven form") {
        const double omega = 1.7, delta = 0.4;
        const auto eps = [omega](double t) { return std::cos(omega * t); };
        const auto hd = driven_two_level(eps, [delta](double) { return delta; });
        const auto dd = hamiltonian_det(DrivenTwoLevel{eps, [delta](double) { return delta; }});
        for (double t : {0.0, 0.4, 2.2}) {
            const double expect = -std::cos(omega * t) * std::cos(omega * t) - delta * delta;
            CHECK(dd(t) == doctest::Approx(expect).epsilon(1e-15));
            CHECK(det(hd(t)).real() == doctest::Approx(expect).epsilon(1e-14));
            CHECK(trace(hd(t)) == Complex{0.0});
        }
        CHECK(driven_two_level(zero_e, zero_e)(1.0) == ComplexMatrix::zero(2));
        CHECK(hamiltonian_det(DrivenTwoLevel{[](double) { return 3.0; }, [](double) { return 4.0; }})(0.0) == -25.0);
    }
}

TEST_CASE("schrodinger_problem") {
    SUBCASE("H = 0 keeps U = I") {
        const auto traj = evolve(schrodinger_problem(problem(ComplexGenerator::zero(2), 1.0)), 10);
        for (const auto& u : traj.states)
            CHECK(u == ComplexMatrix::identity(2));
    }
    SUBCASE("constant Hermitian H matches exp(-i H t / hbar)") {
        for (std::uint64_t seed = 1; seed <= 4; ++seed) {
            const ComplexMatrix h = oracle::random_hermitian(3, seed);
            const double hbar = 0.5 * static_cast<double>(seed);
            const auto traj = evolve(schrodinger_problem(problem(constant_h(h), 2.0, hbar)), 2000);
            for (std::size_t k = 0; k < traj.size(); k += 250) {
                const ComplexMatrix ref = matrix_exp(h * (-kI * traj.times[k] / hbar));
                CHECK(oracle::max_abs_diff(traj.states[k], ref) < 1e-8);
            }
        }
    }
    SUBCASE("mapping fields") {
        auto q = problem(constant_h(ComplexMatrix{{1.0, 0.0}, {0.0, -1.0}}), 1.0, 2.0);
        const auto p = schrodinger_problem(q);
        CHECK(p.A(0.0)(0, 0) == Complex{0.0, -0.5});
        CHECK(p.B(0.3) == ComplexMatrix::zero(2));
        CHECK(p.feedback.variant == FeedbackVariant::None);
        CHECK(p.M0 == ComplexMatrix::identity(2));
    }
    SUBCASE("validation") {
        auto q = problem(ComplexGenerator::zero(2), 1.0, 0.0);
        CHECK_THROWS_AS(q.validate(), ParameterError);
        q.hbar = 1.0;
        q.U0 = ComplexMatrix{{1.0, 0.1}, {0.0, 1.0}};
        CHECK_THROWS_AS(q.validate(), ParameterError);
        const double s = 1.0 / std::sqrt(2.0);
        q.U0 = ComplexMatrix{{s, s}, {Complex{0.0, s}, Complex{0.0, -s}}};
        CHECK_NOTHROW(q.validate());
        CHECK(schrodinger_problem(q).M0 == q.U0);
    }
}

TEST_CASE("exact_det_U") {
    const TimeGrid grid = uniform_grid(0.0, kTwoPi, 200);
    SUBCASE("traceless H gives det U = 1") {
        const auto h = driven_two_level([](double t) { return std::cos(t); }, [](double) { return 0.3; });
        for (Complex d : exact_det_U(h, 1.0, 0.0, grid))
            CHECK(std::abs(d - Complex{1.0}) < 1e-15);
    }
    SUBCASE("H = E I") {
        const double e = 0.8, hbar = 1.3;
        const auto d = exact_det_U(constant_h(ComplexMatrix::identity(2) * Complex{e}), hbar, 0.0, grid);
        for (std::size_t k = 0; k < grid.size(); ++k)
            CHECK(std::abs(d[k] - std::exp(-2.0 * kI * e * grid[k] / hbar)) < 1e-12);
    }
    SUBCASE("E1 + E2 = 2 cos t gives exp(-2 i sin t)") {
        const auto cosine = [](double t) { return std::cos(t); };
        const auto d = exact_det_U(two_level_hamiltonian({cosine, cosine, 0.7}), 1.0, 0.0, grid);
        for (std::size_t k = 0; k < grid.size(); ++k)
            CHECK(std::abs(d[k] - std::exp(-2.0 * kI * std::sin(grid[k]))) < 1e-11);
    }
    SUBCASE("non-Hermitian trace changes the modulus") {
        const auto d = exact_det_U(constant_h(ComplexMatrix{{Complex{0.0, -0.5}, 0.0}, {0.0, 0.0}}), 1.0, 0.0,
                                   uniform_grid(0.0, 1.0, 10));
        CHECK(std::abs(d.back()) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    }
}

TEST_CASE("integrated det U agrees with the exact phase") {
    const auto cosine = [](double t) { return std::cos(t); };
    for (double delta : {0.0, 0.5, 2.0}) {
        auto q = problem(two_level_hamiltonian({cosine, cosine, delta}), kTwoPi);
        const auto traj = evolve(schrodinger_problem(q), 2000);
        const auto exact = exact_det_U(q.H, 1.0, 0.0, traj.times);
        for (std::size_t k = 0; k < traj.size(); ++k) {
            CHECK(std::abs(std::abs(traj.dets[k]) - std::abs(exact[k])) < 1e-6);
            CHECK(phase_diff(traj.dets[k], exact[k]) < 1e-6);
        }
        CHECK(unitarity_check(traj).passes);
    }
}

TEST_CASE("unitarity_check") {
    SUBCASE("H = 0") {
        const auto r = unitarity_check(evolve(schrodinger_problem(problem(ComplexGenerator::zero(2), 1.0)), 5));
        CHECK(r.max_unitarity_defect == 0.0);
        CHECK(r.max_det_modulus_defect == 0.0);
        CHECK(r.passes);
        CHECK(r.unitarity_defect.size() == 6);
    }
    SUBCASE("driven two-level stays unitary") {
        auto q = problem(driven_two_level([](double t) { return std::cos(2.0 * t); }, [](double) { return 0.6; }), 5.0);
        const auto r = unitarity_check(evolve(schrodinger_problem(q), 2000));
        CHECK(r.passes);
        CHECK(r.max_unitarity_defect < 1e-8);
        CHECK(r.max_det_modulus_defect < 1e-8);
    }
    SUBCASE("defect converges at least at fourth order under step refinement") {
        const ComplexMatrix h = oracle::random_hermitian(2, 17, 1.0);
        std::vector<double> hs, defects;
        for (std::size_t steps : {40u, 80u, 160u, 320u}) {
            const auto traj = evolve(schrodinger_problem(problem(constant_h(h), 4.0)), steps);
            hs.push_back(4.0 / static_cast<double>(steps));
            defects.push_back(unitarity_check(traj).max_unitarity_defect);
        }
        // RK4 damps imaginary-axis modes by O(h^6) per step, so the global
        // defect falls like h^5; fourth order is the guaranteed floor.
        CHECK(oracle::loglog_slope(hs, defects) >= 3.7);
    }
    SUBCASE("non-Hermitian H fails the check") {
        const ComplexMatrix h{{Complex{0.0, -0.2}, 0.5}, {0.5, 0.0}};
        const auto r = unitarity_check(evolve(schrodinger_problem(problem(constant_h(h), 1.0)), 200));
        CHECK_FALSE(r.passes);
        CHECK(r.max_det_modulus_defect > 0.1);
    }
}

TEST_CASE("find_crossings") {
    const auto lin = [](double t) { return t; };
    const auto dl = hamiltonian_det(TwoLevelEnergies{lin, lin, 2.0});
    const auto c = find_crossings(dl, uniform_grid(0.0, 3.0, 30));
    REQUIRE(c.size() == 1);
    CHECK(std::abs(c[0] - 2.0) < 1e-9);

    SUBCASE("agree with an independent bisection on generic two-level energies") {
        const auto e1 = [](double t) { return 1.0 + std::sin(t); };
        const auto e2 = [](double t) { return 0.5 * t; };
        const double delta = 0.9;
        const auto dh = hamiltonian_det(TwoLevelEnergies{e1, e2, delta});
        const TimeGrid grid = uniform_grid(0.0, 12.0, 240);
        const auto found = find_crossings(dh, grid);
        std::vector<double> ref;
        const auto f = [&](double t) { return e1(t) * e2(t) - delta * delta; };
        for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
            if (f(grid[k]) * f(grid[k + 1]) < 0.0) {
                const auto bracket = boost::math::tools::bisect(
                    f, grid[k], grid[k + 1], boost::math::tools::eps_tolerance<double>(50));
                ref.push_back(0.5 * (bracket.first + bracket.second));
            }
        }
        REQUIRE(ref.size() >= 2);
        REQUIRE(found.size() == ref.size());
        for (std::size_t i = 0; i < ref.size(); ++i)
            CHECK(std::abs(found[i] - ref[i]) < 1e-9);
    }
    SUBCASE("symmetric crossings at +-2") {
        const auto both = find_crossings(dl, uniform_grid(-3.0, 3.0, 61));
        REQUIRE(both.size() == 2);
        CHECK(std::abs(both[0] + 2.0) < 1e-9);
        CHECK(std::abs(both[1] - 2.0) < 1e-9);
    }
    SUBCASE("no crossing for a gapped driven system") {
        const auto dd = hamiltonian_det(DrivenTwoLevel{[](double t) { return std::cos(t); }, [](double) { return 0.2; }});
        CHECK(find_crossings(dd, uniform_grid(0.0, 10.0, 100)).empty());
    }
}

TEST_CASE("hbar scaling leaves trajectories unchanged") {
    const double c = 7.0;
    const auto eps = [](double t) { return std::cos(1.3 * t); };
    const auto scaled_eps = [c, eps](double t) { return c * eps(t); };
    const auto traj1 = evolve(schrodinger_problem(problem(driven_two_level(eps, [](double) { return 0.4; }), 3.0, 1.0)), 500);
    const auto traj7 = evolve(schrodinger_problem(problem(driven_two_level(scaled_eps, [c](double) { return c * 0.4; }), 3.0, c)), 500);
    for (std::size_t k = 0; k < traj1.size(); ++k)
        CHECK(oracle::max_abs_diff(traj1.states[k], traj7.states[k]) < 1e-13);
}
