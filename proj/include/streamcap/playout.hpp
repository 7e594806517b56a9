#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "streamcap/queueing.hpp"
#include "streamcap/types.hpp"

namespace streamcap {

struct PlayoutSolution {
    int S = 0;            // packets/frame
    double U_bps = 0.0;   // S * sigma / dt
    double achieved_outage = 0.0;
    double achieved_drop = 0.0;
};

struct FractionalPlayoutSolution {
    double s_real = 0.0;  // packets/frame on the fractional grid
    double U_bps = 0.0;
    double achieved_outage = 0.0;
    double achieved_drop = 0.0;
};

struct UnsatisfiableError : std::runtime_error {
    int best_S;
    double best_outage;
    double best_drop;
    UnsatisfiableError(int S, double outage, double drop)
        : std::runtime_error("constraints unsatisfiable"),
          best_S(S), best_outage(outage), best_drop(drop) {}
};

// Largest integer S in [1, B-1] whose finite-buffer solution meets both
// constraints. Scans exhaustively unless a pre-pass verifies the feasible set
// is an interval, in which case the edges are found by bisection.
PlayoutSolution max_playout_rate(const ArrivalPmf& arrivals, int64_t buffer,
                                 const FrameParams& frame,
                                 const QoeConstraints& constraints);

// Outage-saturating upper end of the feasible rate interval on the fractional
// service grid. This is the rate the constant-playout tables are built from.
FractionalPlayoutSolution max_playout_rate_fine(const ArrivalPmf& arrivals,
                                                int64_t buffer, const FrameParams& frame,
                                                const QoeConstraints& constraints);

// Drop-saturating lower end of the feasible rate interval: the smallest rate
// that still drains the buffer fast enough to keep the drop rate at delta0.
FractionalPlayoutSolution min_playout_rate_fine(const ArrivalPmf& arrivals,
                                                int64_t buffer, const FrameParams& frame,
                                                const QoeConstraints& constraints);

// Smallest B > S meeting both constraints at playout rate U (doubling then
// bisection; both metrics improve with B).
int64_t min_buffer(double U_bps, const ArrivalPmf& arrivals, const FrameParams& frame,
                   const QoeConstraints& constraints);

// B = floor(U * L / sigma)
int64_t buffer_from_seconds(double seconds, double U_bps, double packet_size_bits);

}  // namespace streamcap
