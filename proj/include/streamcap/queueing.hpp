#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace streamcap {

struct ArrivalPmf {
    std::vector<double> probs;  // probs[i] = P(A = i), trailing zeros trimmed
    double mean = 0.0;

    int max_arrivals() const { return static_cast<int>(probs.size()) - 1; }
    void validate() const;
    static ArrivalPmf from_probs(std::vector<double> probs);
};

struct QueueModel {
    ArrivalPmf arrivals;
    int service = 1;    // S packets/frame
    int64_t buffer = 0; // B packets, 0 = unbounded

    double utilization() const { return arrivals.mean / service; }
    // a_i > 0 for some i < S, P(A > S) > 0, rho < 1
    void check_ergodic() const;
};

struct InfiniteBufferBoundary {
    std::vector<double> boundary_probs;        // q_0..q_{S-1}
    std::vector<std::complex<double>> roots;   // the S-1 roots inside the unit disk
    double n_one = 0.0;                        // N(1) = S - E[A]
};

struct FiniteBufferDist {
    std::vector<double> probs;  // q_{0,B}..q_{B,B}
    double served_mean = 0.0;   // beta_B packets/frame
};

// Sparse view of the (B+1)x(B+1) chain transition matrix; rows materialize on
// demand so B ~ 10^4 stays cheap.
struct TransitionMatrix {
    ArrivalPmf arrivals;
    int service = 1;
    int64_t buffer = 0;

    // dense row i (length B+1)
    std::vector<double> row(int64_t i) const;
    std::vector<std::vector<double>> dense() const;
};

// Roots of z^S - A(z) strictly inside the unit disk (exactly S-1 for an
// ergodic model), multiplicities repeated.
std::vector<std::complex<double>> find_roots(const ArrivalPmf& arrivals, int service);

InfiniteBufferBoundary solve_infinite(const ArrivalPmf& arrivals, int service);

TransitionMatrix build_transition_matrix(const ArrivalPmf& arrivals, int service,
                                         int64_t buffer);

FiniteBufferDist solve_finite(const ArrivalPmf& arrivals, int service, int64_t buffer);

double outage_probability(const FiniteBufferDist& dist, int service);

double drop_rate(const FiniteBufferDist& dist, const ArrivalPmf& arrivals);

// Fractional service refinement: per frame the server drains S+1 packets with
// probability x and S with probability 1-x, which reproduces a constant bit
// rate of (S+x) packets/frame to Monte-Carlo accuracy while staying an exact
// finite Markov chain.
struct FractionalSolution {
    double s_real = 0.0;
    FiniteBufferDist dist;
    double outage = 0.0;
    double drop = 0.0;
};

FractionalSolution solve_finite_fractional(const ArrivalPmf& arrivals, double s_real,
                                           int64_t buffer);

}  // namespace streamcap
