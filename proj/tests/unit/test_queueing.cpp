#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "streamcap/queueing.hpp"
#include "streamcap/rng.hpp"
#include "streamcap/sim.hpp"

#include "../support/power_iteration.hpp"

using namespace streamcap;

namespace {

// a = {0: 0.5, 1: 0.25, 2: 0.25}; with S=1, B=3 the balance equations solve by
// hand to q = (2/7, 2/7, 2/7, 1/7)
ArrivalPmf four_state() { return ArrivalPmf::from_probs({0.5, 0.25, 0.25}); }

// a = {0: 0.3, 1: 0.4, 3: 0.3}; z^2 - A(z) factors as -(z-1)(0.3z^2-0.7z-0.3),
// so the interior root is (0.7 - sqrt(0.85)) / 0.6
ArrivalPmf cubic_case() { return ArrivalPmf::from_probs({0.3, 0.4, 0.0, 0.3}); }

ArrivalPmf random_ergodic_pmf(Rng& rng, int& service_out) {
    while (true) {
        const int amax = 2 + static_cast<int>(rng.next_double() * 6.0);
        std::vector<double> p(static_cast<std::size_t>(amax) + 1);
        double total = 0.0;
        for (auto& v : p) {
            v = 0.02 + rng.next_double();
            total += v;
        }
        for (auto& v : p) v /= total;
        const auto pmf = ArrivalPmf::from_probs(p);
        for (int S = amax - 1; S >= 1; --S) {
            if (pmf.mean / S < 0.999 && S < amax) {
                service_out = S;
                return pmf;
            }
        }
    }
}

}  // namespace

TEST_CASE("arrival pmf validation and construction") {
    CHECK_THROWS_AS(ArrivalPmf{}.validate(), std::invalid_argument);
    CHECK_THROWS_AS(ArrivalPmf::from_probs({0.5, 0.4}), std::invalid_argument);
    CHECK_THROWS_AS(ArrivalPmf::from_probs({1.5, -0.5}), std::invalid_argument);

    const auto pmf = ArrivalPmf::from_probs({0.5, 0.25, 0.25, 0.0, 0.0});
    CHECK(pmf.max_arrivals() == 2);  // trailing zeros trimmed
    CHECK(pmf.mean == doctest::Approx(0.75));

    ArrivalPmf tampered = pmf;
    tampered.mean = 0.9;
    CHECK_THROWS_AS(tampered.validate(), std::invalid_argument);
}

TEST_CASE("ergodicity screening") {
    CHECK_NOTHROW(QueueModel{four_state(), 1, 0}.check_ergodic());
    // no mass below S
    CHECK_THROWS_AS((QueueModel{ArrivalPmf::from_probs({0.0, 0.5, 0.5}), 1, 0}.check_ergodic()),
                    std::invalid_argument);
    // arrivals never exceed S
    CHECK_THROWS_AS((QueueModel{four_state(), 2, 0}.check_ergodic()), std::invalid_argument);
    // utilization at 1
    CHECK_THROWS_AS((QueueModel{ArrivalPmf::from_probs({0.5, 0.0, 0.5}), 1, 0}.check_ergodic()),
                    std::invalid_argument);
}

TEST_CASE("root finding") {
    CHECK(find_roots(four_state(), 1).empty());

    const auto roots = find_roots(cubic_case(), 2);
    REQUIRE(roots.size() == 1);
    const double expected = (0.7 - std::sqrt(0.85)) / 0.6;
    CHECK(roots[0].real() == doctest::Approx(expected).epsilon(1e-10));
    CHECK(std::abs(roots[0].imag()) < 1e-10);

    // every returned root satisfies the defining polynomial
    const auto p = cubic_case();
    for (const auto& z : roots) {
        std::complex<double> az(0.0, 0.0);
        for (int k = p.max_arrivals(); k >= 0; --k) az = az * z + p.probs[k];
        CHECK(std::abs(std::pow(z, 2) - az) < 1e-9);
    }
}

TEST_CASE("root count over random ergodic pmfs") {
    Rng rng(1234);
    for (int trial = 0; trial < 60; ++trial) {
        int S = 1;
        const auto pmf = random_ergodic_pmf(rng, S);
        const auto roots = find_roots(pmf, S);
        CHECK(static_cast<int>(roots.size()) == S - 1);
        for (const auto& z : roots) CHECK(std::abs(z) < 1.0);
    }
}

TEST_CASE("infinite-buffer boundary probabilities") {
    SUBCASE("single unknown") {
        const auto sol = solve_infinite(four_state(), 1);
        REQUIRE(sol.boundary_probs.size() == 1);
        CHECK(sol.boundary_probs[0] == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(sol.n_one == doctest::Approx(0.25));
    }

    SUBCASE("two unknowns, cross-checked against a deep truncated chain") {
        const auto pmf = cubic_case();
        const auto sol = solve_infinite(pmf, 2);
        REQUIRE(sol.boundary_probs.size() == 2);

        const auto deep = oracle::power_iteration_steady_state(pmf.probs, 2, 4000);
        CHECK(sol.boundary_probs[0] == doctest::Approx(deep[0]).epsilon(1e-6));
        CHECK(sol.boundary_probs[1] == doctest::Approx(deep[1]).epsilon(1e-6));
    }

    SUBCASE("identity sum_{i<S} (S-i) q_i = S - E[A]") {
        Rng rng(77);
        for (int trial = 0; trial < 25; ++trial) {
            int S = 1;
            const auto pmf = random_ergodic_pmf(rng, S);
            const auto sol = solve_infinite(pmf, S);
            double lhs = 0.0;
            for (int i = 0; i < S; ++i)
                lhs += static_cast<double>(S - i) * sol.boundary_probs[i];
            CHECK(lhs == doctest::Approx(static_cast<double>(S) - pmf.mean).epsilon(1e-7));
        }
    }
}

TEST_CASE("transition matrix rows") {
    const auto tm = build_transition_matrix(four_state(), 1, 3);
    const auto row2 = tm.row(2);
    REQUIRE(row2.size() == 4);
    CHECK(row2[0] == 0.0);
    CHECK(row2[1] == doctest::Approx(0.5));
    CHECK(row2[2] == doctest::Approx(0.25));
    CHECK(row2[3] == doctest::Approx(0.25));

    // deterministic arrivals: rows i <= S concentrate on column S
    const auto det = build_transition_matrix(ArrivalPmf::from_probs({0.0, 0.0, 1.0}), 2, 6);
    for (int64_t i = 0; i <= 2; ++i) {
        const auto r = det.row(i);
        CHECK(r[2] == doctest::Approx(1.0));
    }

    // stochasticity
    for (int64_t i = 0; i <= 3; ++i) {
        double s = 0.0;
        for (double v : tm.row(i)) s += v;
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }

    CHECK_THROWS_WITH(build_transition_matrix(four_state(), 3, 3),
                      "buffer must exceed service batch");
}

TEST_CASE("finite-buffer steady state: hand-solved instance") {
    const auto dist = solve_finite(four_state(), 1, 3);
    REQUIRE(dist.probs.size() == 4);
    CHECK(dist.probs[0] == doctest::Approx(2.0 / 7.0).epsilon(1e-12));
    CHECK(dist.probs[1] == doctest::Approx(2.0 / 7.0).epsilon(1e-12));
    CHECK(dist.probs[2] == doctest::Approx(2.0 / 7.0).epsilon(1e-12));
    CHECK(dist.probs[3] == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
    CHECK(dist.served_mean == doctest::Approx(5.0 / 7.0).epsilon(1e-12));

    CHECK(outage_probability(dist, 1) == doctest::Approx(2.0 / 7.0).epsilon(1e-12));
    CHECK(drop_rate(dist, four_state()) == doctest::Approx(1.0 / 21.0).epsilon(1e-12));
}

TEST_CASE("finite-buffer steady state: locked and error cases") {
    const auto locked = solve_finite(ArrivalPmf::from_probs({0.0, 0.0, 1.0}), 2, 5);
    CHECK(locked.probs[2] == doctest::Approx(1.0));
    CHECK(outage_probability(locked, 2) == 0.0);
    CHECK(drop_rate(locked, ArrivalPmf::from_probs({0.0, 0.0, 1.0})) == 0.0);

    CHECK_THROWS_WITH(solve_finite(four_state(), 3, 3), "buffer must exceed service batch");
    CHECK_THROWS_WITH(solve_finite(ArrivalPmf::from_probs({1.0}), 1, 5),
                      "chain not irreducible");

    FiniteBufferDist dummy;
    dummy.probs = {1.0};
    dummy.served_mean = 0.0;
    CHECK_THROWS_WITH(drop_rate(dummy, ArrivalPmf::from_probs({1.0})),
                      "no arrivals; drop rate undefined");
}

TEST_CASE("finite solve matches the power-iteration oracle") {
    SUBCASE("hand instance") {
        const auto dist = solve_finite(four_state(), 1, 3);
        const auto pi = oracle::power_iteration_steady_state(four_state().probs, 1, 3);
        for (std::size_t i = 0; i < pi.size(); ++i)
            CHECK(std::abs(dist.probs[i] - pi[i]) < 1e-10);
    }

    SUBCASE("randomized chains") {
        Rng rng(99);
        for (int trial = 0; trial < 20; ++trial) {
            int S = 1;
            const auto pmf = random_ergodic_pmf(rng, S);
            const int64_t B = S + 2 + static_cast<int64_t>(rng.next_double() * 60.0);
            const auto dist = solve_finite(pmf, S, B);
            const auto pi = oracle::power_iteration_steady_state(pmf.probs, S, B);
            double err = 0.0;
            for (std::size_t i = 0; i < pi.size(); ++i)
                err = std::max(err, std::abs(dist.probs[i] - pi[i]));
            CHECK(err < 1e-8);
        }
    }
}

TEST_CASE("dual drop-rate forms agree") {
    // definitional 1 - beta_B/E[A] vs the boundary-probability closed form
    Rng rng(2024);
    for (int trial = 0; trial < 15; ++trial) {
        int S = 1;
        const auto pmf = random_ergodic_pmf(rng, S);
        const auto inf = solve_infinite(pmf, S);
        for (int64_t B : {S + 2, 4 * S + 8, 16 * S + 32}) {
            const auto dist = solve_finite(pmf, S, B);
            const double def = drop_rate(dist, pmf);
            double num = 0.0, den = 1.0;
            for (int i = 0; i < S; ++i) {
                const double w = 1.0 - static_cast<double>(i) / S;
                num += w * (dist.probs[static_cast<std::size_t>(i)] - inf.boundary_probs[i]);
                den -= w * inf.boundary_probs[i];
            }
            CHECK(std::abs(def - num / den) < 1e-6);
        }
    }
}

TEST_CASE("drop rate never increases with buffer size") {
    Rng rng(5150);
    for (int trial = 0; trial < 10; ++trial) {
        int S = 1;
        const auto pmf = random_ergodic_pmf(rng, S);
        double prev = 1.0;
        for (int64_t B = S + 2; B <= S + 66; B += 8) {
            const double d = drop_rate(solve_finite(pmf, S, B), pmf);
            CHECK(d <= prev + 1e-12);
            prev = d;
        }
    }
}

TEST_CASE("finite solve matches a seeded simulation in total variation") {
    const auto pmf = four_state();
    const auto dist = solve_finite(pmf, 1, 3);

    IidSource src(pmf, 31337);
    std::vector<double> emp(4, 0.0);
    int64_t q = 0;
    const int64_t frames = 1'000'000;
    for (int64_t t = 0; t < frames; ++t) {
        const int64_t played = std::min<int64_t>(q, 1);
        q -= played;
        q = std::min<int64_t>(3, q + src.next());
        emp[static_cast<std::size_t>(q)] += 1.0;
    }
    double tv = 0.0;
    for (std::size_t i = 0; i < 4; ++i)
        tv += std::abs(emp[i] / static_cast<double>(frames) - dist.probs[i]);
    CHECK(tv / 2.0 < 0.01);
}

TEST_CASE("fractional service refinement") {
    const auto pmf = four_state();

    SUBCASE("x = 0 coincides with the integer chain") {
        const auto frac = solve_finite_fractional(pmf, 1.0, 6);
        const auto fixed = solve_finite(pmf, 1, 6);
        for (std::size_t i = 0; i < fixed.probs.size(); ++i)
            CHECK(frac.dist.probs[i] == doctest::Approx(fixed.probs[i]).epsilon(1e-12));
        CHECK(frac.outage == doctest::Approx(outage_probability(fixed, 1)));
        CHECK(frac.drop == doctest::Approx(drop_rate(fixed, pmf)));
    }

    SUBCASE("outage grows and drop falls as the rate rises") {
        double prev_outage = -1.0, prev_drop = 2.0;
        for (double s : {1.0, 1.25, 1.5, 1.75, 1.99}) {
            const auto sol = solve_finite_fractional(pmf, s, 8);
            CHECK(sol.outage >= prev_outage - 1e-12);
            CHECK(sol.drop <= prev_drop + 1e-12);
            prev_outage = sol.outage;
            prev_drop = sol.drop;
        }
    }

    SUBCASE("mixed-service distribution sums to 1") {
        const auto sol = solve_finite_fractional(pmf, 1.4, 12);
        double total = 0.0;
        for (double p : sol.dist.probs) total += p;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
}
