#include "streamcap/playout.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace streamcap {

namespace {

constexpr double kSlack = 1e-12;  // exact-zero constraints still admit fp noise
constexpr int64_t kBufferProbeCap = 1 << 18;

struct Eval {
    double outage;
    double drop;
};

class Evaluator {
public:
    Evaluator(const ArrivalPmf& arrivals, int64_t buffer)
        : arrivals_(arrivals), buffer_(buffer) {}

    Eval at(int S) {
        auto it = cache_.find(S);
        if (it != cache_.end()) return it->second;
        const auto dist = solve_finite(arrivals_, S, buffer_);
        const Eval e{outage_probability(dist, S), drop_rate(dist, arrivals_)};
        cache_.emplace(S, e);
        return e;
    }

private:
    const ArrivalPmf& arrivals_;
    int64_t buffer_;
    std::map<int, Eval> cache_;
};

bool outage_ok(const Eval& e, const QoeConstraints& c) { return e.outage <= c.epsilon + kSlack; }
bool drop_ok(const Eval& e, const QoeConstraints& c) { return e.drop <= c.delta0 + kSlack; }
bool feasible(const Eval& e, const QoeConstraints& c) {
    return outage_ok(e, c) && drop_ok(e, c);
}

// violation size used to pick the "best attempt" attached to errors
double violation(const Eval& e, const QoeConstraints& c) {
    return std::max(0.0, e.outage - c.epsilon) + std::max(0.0, e.drop - c.delta0);
}

[[noreturn]] void throw_best(Evaluator& ev, const std::vector<int>& tried,
                             const QoeConstraints& c) {
    int best = tried.front();
    double best_v = violation(ev.at(best), c);
    for (int s : tried) {
        const double v = violation(ev.at(s), c);
        if (v < best_v) {
            best = s;
            best_v = v;
        }
    }
    const auto e = ev.at(best);
    throw UnsatisfiableError(best, e.outage, e.drop);
}

}  // namespace

PlayoutSolution max_playout_rate(const ArrivalPmf& arrivals, int64_t buffer,
                                 const FrameParams& frame,
                                 const QoeConstraints& constraints) {
    arrivals.validate();
    frame.validate();
    constraints.validate();
    if (buffer <= 1) throw std::invalid_argument("buffer must exceed 1");
    if (arrivals.mean <= 0.0) throw std::invalid_argument("arrivals must have positive mean");

    const int s_max = static_cast<int>(buffer - 1);
    Evaluator ev(arrivals, buffer);

    // pre-pass on a coarse grid; the fast path needs outage non-decreasing and
    // drop non-increasing in S
    std::vector<int> grid;
    const int points = std::min(s_max, 33);
    for (int k = 0; k < points; ++k) {
        const int s = 1 + static_cast<int>((static_cast<int64_t>(s_max - 1) * k) / std::max(1, points - 1));
        if (grid.empty() || grid.back() != s) grid.push_back(s);
    }
    bool monotone = true;
    for (std::size_t k = 1; k < grid.size() && monotone; ++k) {
        const auto a = ev.at(grid[k - 1]);
        const auto b = ev.at(grid[k]);
        if (b.outage < a.outage - 1e-12 || b.drop > a.drop + 1e-12) monotone = false;
    }

    int answer = -1;
    if (monotone && s_max > static_cast<int>(grid.size())) {
        if (!outage_ok(ev.at(1), constraints)) throw_best(ev, grid, constraints);
        int upper = 1;
        if (outage_ok(ev.at(s_max), constraints)) {
            upper = s_max;
        } else {
            int lo = 1, hi = s_max;  // outage ok at lo, not at hi
            while (hi - lo > 1) {
                const int mid = lo + (hi - lo) / 2;
                (outage_ok(ev.at(mid), constraints) ? lo : hi) = mid;
            }
            upper = lo;
        }
        if (!drop_ok(ev.at(upper), constraints)) {
            grid.push_back(upper);
            throw_best(ev, grid, constraints);
        }
        answer = upper;
    } else {
        for (int s = 1; s <= s_max; ++s)
            if (feasible(ev.at(s), constraints)) answer = s;
        if (answer < 0) {
            std::vector<int> all(static_cast<std::size_t>(s_max));
            for (int s = 1; s <= s_max; ++s) all[static_cast<std::size_t>(s - 1)] = s;
            throw_best(ev, all, constraints);
        }
    }

    // independent feasibility certificate
    const auto dist = solve_finite(arrivals, answer, buffer);
    PlayoutSolution sol;
    sol.S = answer;
    sol.U_bps = frame.rate_bps(answer);
    sol.achieved_outage = outage_probability(dist, answer);
    sol.achieved_drop = drop_rate(dist, arrivals);
    if (!feasible({sol.achieved_outage, sol.achieved_drop}, constraints))
        throw UnsatisfiableError(answer, sol.achieved_outage, sol.achieved_drop);
    return sol;
}

FractionalPlayoutSolution max_playout_rate_fine(const ArrivalPmf& arrivals,
                                                int64_t buffer, const FrameParams& frame,
                                                const QoeConstraints& constraints) {
    arrivals.validate();
    frame.validate();
    constraints.validate();
    if (buffer <= 1) throw std::invalid_argument("buffer must exceed 1");

    const int s_max = static_cast<int>(buffer - 1);
    Evaluator ev(arrivals, buffer);
    if (!outage_ok(ev.at(1), constraints))
        throw UnsatisfiableError(1, ev.at(1).outage, ev.at(1).drop);
    int S = 1;
    if (outage_ok(ev.at(s_max), constraints)) {
        S = s_max;
    } else {
        int lo = 1, hi = s_max;
        while (hi - lo > 1) {
            const int mid = lo + (hi - lo) / 2;
            (outage_ok(ev.at(mid), constraints) ? lo : hi) = mid;
        }
        S = lo;
    }

    FractionalSolution best = solve_finite_fractional(arrivals, static_cast<double>(S), buffer);
    if (S < s_max) {
        double lo = 0.0, hi = 1.0;  // outage ok at S+lo, violated at S+hi
        for (int it = 0; it < 16; ++it) {
            const double mid = 0.5 * (lo + hi);
            const auto sol = solve_finite_fractional(arrivals, S + mid, buffer);
            if (sol.outage <= constraints.epsilon + kSlack) {
                lo = mid;
                best = sol;
            } else {
                hi = mid;
            }
        }
    }
    if (best.drop > constraints.delta0 + kSlack)
        throw UnsatisfiableError(S, best.outage, best.drop);

    return {best.s_real, frame.rate_bps(best.s_real), best.outage, best.drop};
}

FractionalPlayoutSolution min_playout_rate_fine(const ArrivalPmf& arrivals,
                                                int64_t buffer, const FrameParams& frame,
                                                const QoeConstraints& constraints) {
    arrivals.validate();
    frame.validate();
    constraints.validate();
    if (buffer <= 1) throw std::invalid_argument("buffer must exceed 1");
    if (arrivals.mean <= 0.0) throw std::invalid_argument("arrivals must have positive mean");

    const int s_max = static_cast<int>(buffer - 1);
    const auto drop_at = [&](double s) {
        return solve_finite_fractional(arrivals, s, buffer);
    };

    // integer bracket around the drop threshold; drop is non-increasing in s
    int s = std::clamp(static_cast<int>(std::floor((1.0 - constraints.delta0) * arrivals.mean)),
                       1, s_max);
    FractionalSolution cur = drop_at(s);
    int lo_s, hi_s;
    if (cur.drop <= constraints.delta0 + kSlack) {
        while (s > 1) {
            const auto below = drop_at(s - 1);
            if (below.drop > constraints.delta0 + kSlack) break;
            --s;
            cur = below;
        }
        if (s == 1) {
            if (cur.outage > constraints.epsilon + kSlack)
                throw UnsatisfiableError(1, cur.outage, cur.drop);
            return {1.0, frame.rate_bps(1.0), cur.outage, cur.drop};
        }
        lo_s = s - 1;
        hi_s = s;
    } else {
        while (s < s_max && cur.drop > constraints.delta0 + kSlack) {
            ++s;
            cur = drop_at(s);
        }
        if (cur.drop > constraints.delta0 + kSlack)
            throw UnsatisfiableError(s, cur.outage, cur.drop);
        lo_s = s - 1;
        hi_s = s;
    }

    // fractional bisection in [lo_s, lo_s+1]: drop > delta0 at lo, <= at hi
    double lo = 0.0, hi = 1.0;
    FractionalSolution best = drop_at(static_cast<double>(hi_s));
    for (int it = 0; it < 16; ++it) {
        const double mid = 0.5 * (lo + hi);
        const auto sol = drop_at(lo_s + mid);
        if (sol.drop <= constraints.delta0 + kSlack) {
            hi = mid;
            best = sol;
        } else {
            lo = mid;
        }
    }
    if (best.outage > constraints.epsilon + kSlack)
        throw UnsatisfiableError(hi_s, best.outage, best.drop);
    return {best.s_real, frame.rate_bps(best.s_real), best.outage, best.drop};
}

int64_t min_buffer(double U_bps, const ArrivalPmf& arrivals, const FrameParams& frame,
                   const QoeConstraints& constraints) {
    arrivals.validate();
    frame.validate();
    constraints.validate();
    const int S = static_cast<int>(std::floor(frame.packets_per_frame(U_bps)));
    if (S < 1) throw std::invalid_argument("playout rate below one packet per frame");
    if (arrivals.mean <= 0.0) throw std::invalid_argument("arrivals must have positive mean");

    // asymptotic feasibility: drop has a positive floor when utilization >= 1,
    // outage a positive floor when < 1
    if (arrivals.mean >= static_cast<double>(S)) {
        const double delta_floor = 1.0 - static_cast<double>(S) / arrivals.mean;
        if (delta_floor > constraints.delta0 + kSlack)
            throw std::runtime_error("rate unsustainable");
    } else {
        try {
            const auto inf = solve_infinite(arrivals, S);
            double outage_inf = 0.0;
            for (double q : inf.boundary_probs) outage_inf += q;
            if (outage_inf > constraints.epsilon + kSlack)
                throw std::runtime_error("rate unsustainable");
        } catch (const std::invalid_argument&) {
            // ergodicity preconditions failed; fall through to the search
        }
    }

    const auto feasible_at = [&](int64_t B) {
        const auto dist = solve_finite(arrivals, S, B);
        return outage_probability(dist, S) <= constraints.epsilon + kSlack &&
               drop_rate(dist, arrivals) <= constraints.delta0 + kSlack;
    };

    int64_t hi = static_cast<int64_t>(S) + 1;
    int64_t lo = static_cast<int64_t>(S);  // infeasible sentinel (B must exceed S)
    while (!feasible_at(hi)) {
        lo = hi;
        hi *= 2;
        if (hi > kBufferProbeCap) throw std::runtime_error("rate unsustainable");
    }
    while (hi - lo > 1) {
        const int64_t mid = lo + (hi - lo) / 2;
        if (mid <= S) {
            lo = mid;
            continue;
        }
        (feasible_at(mid) ? hi : lo) = mid;
    }
    return hi;
}

int64_t buffer_from_seconds(double seconds, double U_bps, double packet_size_bits) {
    if (seconds <= 0 || U_bps <= 0 || packet_size_bits <= 0)
        throw std::invalid_argument("buffer_from_seconds: arguments must be positive");
    const auto B = static_cast<int64_t>(std::floor(U_bps * seconds / packet_size_bits));
    if (B <= 1) throw std::runtime_error("buffer too small");
    return B;
}

}  // namespace streamcap
