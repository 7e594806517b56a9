#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "streamcap/allocation.hpp"
#include "streamcap/channel.hpp"
#include "streamcap/queueing.hpp"
#include "streamcap/rng.hpp"

using namespace streamcap;

namespace {

RatePmf atom(double rate_bps) { return RatePmf{{rate_bps}, {1.0}}; }

RatePmf two_point(double r1, double p1, double r2) { return RatePmf{{r1, r2}, {p1, 1.0 - p1}}; }

CellConfig small_cell(std::vector<CellUser> users, int K) {
    CellConfig cell;
    cell.users = std::move(users);
    cell.K = K;
    cell.buffer = 100;
    return cell;
}

double prob_at(const ArrivalPmf& a, std::size_t i) {
    return i < a.probs.size() ? a.probs[i] : 0.0;
}

}  // namespace

TEST_CASE("inverse-rate shares equalize the delivered data rate") {
    auto eq = dynamic_share({2e6, 2e6});
    CHECK(eq[0] == doctest::Approx(0.5));
    CHECK(eq[1] == doctest::Approx(0.5));

    auto sh = dynamic_share({100e3, 300e3});
    CHECK(sh[0] == doctest::Approx(0.75));
    CHECK(sh[1] == doctest::Approx(0.25));

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(50e3, 5e6);
    for (int t = 0; t < 10; ++t) {
        std::vector<double> rates(4);
        for (auto& r : rates) r = u(rng);
        auto y = dynamic_share(rates);
        double total = 0.0;
        for (double v : y) total += v;
        CHECK(total == doctest::Approx(1.0));
        for (std::size_t i = 1; i < rates.size(); ++i)
            CHECK(y[i] * rates[i] == doctest::Approx(y[0] * rates[0]));
    }

    CHECK_THROWS_WITH_AS(dynamic_share({1e6, 0.0}), "user in outage frame",
                         std::invalid_argument);
}

TEST_CASE("shared-capacity arrivals, exact enumeration") {
    const double r = 1e6;
    CellConfig cell = small_cell({{1, two_point(r, 0.5, 2 * r)},
                                  {2, two_point(r, 0.5, 2 * r)}}, 100);
    // sum of reciprocals is 2/r, 1.5/r or 1/r with probs 1/4, 1/2, 1/4;
    // packets = floor(K/d * dt/sigma) = 100, 133, 200
    ArrivalPmf a = equal_experience_arrivals(cell);
    CHECK(prob_at(a, 100) == doctest::Approx(0.25));
    CHECK(prob_at(a, 133) == doctest::Approx(0.5));
    CHECK(prob_at(a, 200) == doctest::Approx(0.25));
    double mass = 0.0;
    for (double p : a.probs) mass += p;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));

    CellConfig solo = small_cell({{1, atom(2e6)}}, 10);
    ArrivalPmf b = equal_experience_arrivals(solo);
    CHECK(prob_at(b, 40) == doctest::Approx(1.0));  // 10*2e6*0.01/5000
}

TEST_CASE("grid pass agrees with exact enumeration") {
    const double r = 1e6;
    CellConfig cell = small_cell({{1, two_point(r, 0.5, 2 * r)},
                                  {2, two_point(r, 0.5, 2 * r)}}, 100);
    ArrivalPmf exact = equal_experience_arrivals(cell);
    ReciprocalGridOptions grid;
    grid.exact_atom_cap = 1;  // force the convolution path
    ArrivalPmf approx = equal_experience_arrivals(cell, grid);
    CHECK(approx.mean == doctest::Approx(exact.mean).epsilon(0.01));
    double mass = 0.0;
    for (double p : approx.probs) mass += p;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
    // grid atoms may land one packet off the exact ones, not further
    for (std::size_t i = 0; i < approx.probs.size(); ++i) {
        if (approx.probs[i] < 1e-12) continue;
        double near = 0.0;
        for (int d = -1; d <= 1; ++d) {
            const auto j = static_cast<std::ptrdiff_t>(i) + d;
            if (j >= 0) near += prob_at(exact, static_cast<std::size_t>(j));
        }
        CHECK(near > 0.0);
    }

    ReciprocalGridOptions huge;
    huge.exact_atom_cap = 1;
    huge.bins = (1 << 22) + 64;
    CHECK_THROWS_WITH_AS(equal_experience_arrivals(cell, huge),
                         "grid overflow; use a coarser resolution (fewer bins)",
                         std::runtime_error);
}

TEST_CASE("shared-capacity arrival mean matches Monte Carlo") {
    std::mt19937_64 rng(3021);
    std::uniform_real_distribution<double> rate(200e3, 4e6);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    CellConfig cell = small_cell({}, 50);
    for (int id = 1; id <= 3; ++id) {
        double r1 = rate(rng), r2 = r1 * (1.3 + unit(rng)), r3 = r2 * (1.3 + unit(rng));
        double p1 = 0.2 + 0.4 * unit(rng), p2 = (1.0 - p1) * unit(rng);
        cell.users.push_back({id, RatePmf{{r1, r2, r3}, {p1, p2, 1.0 - p1 - p2}}});
    }
    ArrivalPmf a = equal_experience_arrivals(cell);

    double mc = 0.0;
    const int n_samples = 200000;
    for (int s = 0; s < n_samples; ++s) {
        double d = 0.0;
        for (const auto& u : cell.users) {
            double x = unit(rng), run = 0.0;
            std::size_t m = 0;
            for (; m + 1 < u.pmf.probs.size(); ++m) {
                run += u.pmf.probs[m];
                if (x < run) break;
            }
            d += 1.0 / u.pmf.support_bps[m];
        }
        mc += std::floor((cell.K / d) * cell.frame.frame_duration_s / cell.frame.packet_size_bits);
    }
    mc /= n_samples;
    CHECK(a.mean == doctest::Approx(mc).epsilon(0.01));
}

TEST_CASE("fixed-share arrivals floor the per-frame packet budget") {
    FrameParams f;
    ArrivalPmf a = static_share_arrivals(atom(2e6), 10, 0.35, f);
    CHECK(prob_at(a, 14) == doctest::Approx(1.0));

    ArrivalPmf b = static_share_arrivals(two_point(1e6, 0.3, 2e6), 10, 0.35, f);
    CHECK(prob_at(b, 7) == doctest::Approx(0.3));
    CHECK(prob_at(b, 14) == doctest::Approx(0.7));

    CHECK_THROWS_AS(static_share_arrivals(atom(1e6), 10, 0.0, f), std::invalid_argument);
}

TEST_CASE("minimum share formula") {
    CHECK(min_rate_share(0.0, 0.1, 100, atom(1e6)) == doctest::Approx(0.0));
    CHECK(min_rate_share(2e6, 0.03, 275, atom(1e6)) ==
          doctest::Approx(2e6 / (0.97 * 275.0 * 1e6)));
    // mean rate of a two-point pmf drives the share
    CHECK(min_rate_share(1e6, 0.0, 10, two_point(1e6, 0.5, 3e6)) ==
          doctest::Approx(1e6 / (10.0 * 2e6)));
}

TEST_CASE("admission keeps everyone while the frame has room") {
    // Y = U/(K*r) = 0.4 per user
    CellConfig cell = small_cell({{1, atom(0.25e6)}, {2, atom(0.25e6)}}, 10);
    AdmissionResult res = admission_control(cell, 1e6, 0.0);
    CHECK(res.admitted_ids == std::vector<int>{1, 2});
    CHECK(res.shares[0] == doctest::Approx(0.4));
    CHECK(res.leftover == doctest::Approx(0.2));
}

TEST_CASE("admission drops the most expensive users first") {
    // three users needing half the frame each: only two fit
    CellConfig cell = small_cell({{1, atom(0.2e6)}, {2, atom(0.2e6)}, {3, atom(0.2e6)}}, 10);
    AdmissionResult res = admission_control(cell, 1e6, 0.0);
    CHECK(res.admitted_ids == std::vector<int>{1, 2});
    CHECK(res.leftover == doctest::Approx(0.0));

    // mixed costs: cheap users win
    CellConfig mixed = small_cell({{1, atom(0.125e6)},   // y = 0.8
                                   {2, atom(0.5e6)},     // y = 0.2
                                   {3, atom(0.25e6)},    // y = 0.4
                                   {4, atom(0.4e6)}},    // y = 0.25
                                  10);
    AdmissionResult m = admission_control(mixed, 1e6, 0.0);
    CHECK(m.admitted_ids == std::vector<int>{2, 4, 3});
    CHECK(m.leftover == doctest::Approx(1.0 - 0.2 - 0.25 - 0.4));
}

TEST_CASE("admission count matches the brute-force optimum") {
    std::mt19937_64 rng(515);
    std::uniform_real_distribution<double> rate(0.15e6, 1.2e6);
    for (int trial = 0; trial < 8; ++trial) {
        CellConfig cell = small_cell({}, 10);
        std::vector<double> ys;
        for (int id = 1; id <= 6; ++id) {
            double r = rate(rng);
            cell.users.push_back({id, atom(r)});
            ys.push_back(1e6 / (10.0 * r));
        }
        AdmissionResult res = admission_control(cell, 1e6, 0.0);

        std::size_t best = 0;
        for (unsigned mask = 0; mask < 64; ++mask) {
            double tot = 0.0;
            std::size_t count = 0;
            for (int b = 0; b < 6; ++b)
                if (mask & (1u << b)) {
                    tot += ys[static_cast<std::size_t>(b)];
                    ++count;
                }
            if (tot <= 1.0 + 1e-12) best = std::max(best, count);
        }
        CHECK(res.admitted_ids.size() == best);
    }
}

TEST_CASE("resolution upgrades follow descending mean rate") {
    CellConfig cell = small_cell({{1, atom(4e6)}, {2, atom(2e6)}, {3, atom(1e6)}}, 10);
    MaxUsersResult all = max_users_max_resolution(cell, 1e6, 2e6, 0.0);
    CHECK(all.N == 3);
    CHECK(all.selected_ids == std::vector<int>{1, 2, 3});
    CHECK(all.plan.static_shares[0] == doctest::Approx(0.05));
    CHECK(all.plan.static_shares[1] == doctest::Approx(0.1));
    CHECK(all.plan.static_shares[2] == doctest::Approx(0.2));

    // a steep upgrade cost leaves room for the best user only
    MaxUsersResult one = max_users_max_resolution(cell, 1e6, 30e6, 0.0);
    CHECK(one.N == 1);
    CHECK(one.selected_ids == std::vector<int>{1});
    CHECK(one.plan.static_shares[0] == doctest::Approx(0.025 + 0.725));
    CHECK(one.plan.static_shares[1] == doctest::Approx(0.05));
    double total = 0.0;
    for (double y : one.plan.static_shares) total += y;
    CHECK(total <= 1.0 + 1e-9);
    CHECK(one.plan.leftover == doctest::Approx(1.0 - total));

    // zero upgrade cost upgrades everyone
    MaxUsersResult free_up = max_users_max_resolution(cell, 1e6, 1e6, 0.0);
    CHECK(free_up.N == 3);

    CellConfig crowded = small_cell({{1, atom(0.1e6)}, {2, atom(0.1e6)}}, 10);
    CHECK_THROWS_WITH_AS(max_users_max_resolution(crowded, 1e6, 2e6, 0.0),
                         "minimum shares exceed the frame; run admission control first",
                         std::invalid_argument);
}

TEST_CASE("upgrade count matches the brute-force optimum") {
    std::mt19937_64 rng(919);
    std::uniform_real_distribution<double> rate(0.8e6, 6e6);
    for (int trial = 0; trial < 8; ++trial) {
        CellConfig cell = small_cell({}, 10);
        std::vector<double> dys;
        double total_min = 0.0;
        for (int id = 1; id <= 4; ++id) {
            double r = rate(rng);
            cell.users.push_back({id, atom(r)});
            total_min += 1e6 / (10.0 * r);
            dys.push_back(7e6 / (10.0 * r));
        }
        if (total_min > 1.0) continue;
        MaxUsersResult res = max_users_max_resolution(cell, 1e6, 8e6, 0.0);

        std::size_t best = 0;
        for (unsigned mask = 0; mask < 16; ++mask) {
            double tot = 0.0;
            std::size_t count = 0;
            for (int b = 0; b < 4; ++b)
                if (mask & (1u << b)) {
                    tot += dys[static_cast<std::size_t>(b)];
                    ++count;
                }
            if (tot <= 1.0 - total_min + 1e-12) best = std::max(best, count);
        }
        CHECK(static_cast<std::size_t>(res.N) == best);
        double sum = 0.0;
        for (double y : res.plan.static_shares) sum += y;
        CHECK(sum <= 1.0 + 1e-9);
    }
}

TEST_CASE("inverse-sum expectation, exact and sampled") {
    const double r = 1e6;
    std::vector<RatePmf> users{two_point(r, 0.5, 2 * r), atom(r)};
    ExpectationOptions exact;
    exact.exact = true;
    const double want = 0.5 * (r / 2.0) + 0.5 * (r / 1.5);
    CHECK(mean_inverse_rate_sum(users, exact) == doctest::Approx(want));

    ExpectationOptions mc;
    mc.samples = 400000;
    CHECK(mean_inverse_rate_sum(users, mc) == doctest::Approx(want).epsilon(0.005));

    std::vector<RatePmf> bad{RatePmf{{0.0, 1e6}, {0.5, 0.5}}};
    CHECK_THROWS_AS(mean_inverse_rate_sum(bad, exact), std::invalid_argument);
}

TEST_CASE("symmetric two-class split halves the cell") {
    TwoClassConfig cfg;
    cfg.premium = {atom(1e6)};
    cfg.regular = {atom(1e6)};
    cfg.k_p = 1.0;
    ExpectationOptions exact;
    exact.exact = true;
    TwoClassSplit s = two_class_split(cfg, 10, exact);
    CHECK(s.c == doctest::Approx(1.0));
    CHECK(s.K_p == 5);
    CHECK(s.K_r == 5);
    CHECK(s.U_p == doctest::Approx(5e6));
    CHECK(s.U_r == doctest::Approx(5e6));
}

TEST_CASE("two-class split honors the premium rate factor") {
    TwoClassConfig cfg;
    cfg.premium = {atom(2e6)};
    cfg.regular = {atom(1e6)};
    cfg.k_p = 2.0;
    cfg.delta_p = 0.1;
    cfg.delta_r = 0.05;
    ExpectationOptions exact;
    exact.exact = true;
    TwoClassSplit s = two_class_split(cfg, 275, exact);
    CHECK(s.E1 == doctest::Approx(1e6));
    CHECK(s.E2 == doctest::Approx(2e6));
    const double c = 2.0 * (0.95 / 0.9) * 0.5;
    CHECK(s.c == doctest::Approx(c));
    CHECK(s.U_p == doctest::Approx(s.U_r * 2.0));
    CHECK(s.K_p + s.K_r == 275);
    CHECK(s.K_p == static_cast<int>(std::llround(c * 275.0 / (1.0 + c))));
    CHECK(s.U_r == doctest::Approx(0.95 * 275.0 * 1e6 / (1.0 + c)));
}
