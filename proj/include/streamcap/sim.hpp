#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "streamcap/channel.hpp"
#include "streamcap/queueing.hpp"
#include "streamcap/rng.hpp"
#include "streamcap/types.hpp"

namespace streamcap {

// Per-frame packet arrivals; reset() rewinds to the sequence start so repeated
// probes share random numbers.
class ArrivalSource {
public:
    virtual ~ArrivalSource() = default;
    virtual int64_t next() = 0;
    virtual void reset() = 0;
};

class IidSource : public ArrivalSource {
public:
    IidSource(ArrivalPmf pmf, uint64_t seed);
    int64_t next() override;
    void reset() override;

private:
    std::vector<double> cdf_;
    uint64_t seed_;
    Rng rng_;
};

class TraceSource : public ArrivalSource {
public:
    explicit TraceSource(std::vector<int64_t> arrivals);
    int64_t next() override;  // wraps cyclically
    void reset() override;

private:
    std::vector<int64_t> arrivals_;
    std::size_t pos_ = 0;
};

struct AbrParams {
    int64_t b_min = 0;      // packets
    int64_t b_max = 0;
    double theta = 0.1;     // rate step fraction
    double u_init_bps = 0;
    double u_floor_bps = 0; // defaults to 1 packet/frame when 0
    double u_ceil_bps = 0;  // defaults to B/2 packets/frame when 0

    void validate(int64_t buffer) const;
};

struct RunStats {
    double outage = 0.0;
    double drop = 0.0;
    double mean_playout_bps = 0.0;
    double playout_var_mbps2 = 0.0;
    double qoe_mbps = 0.0;
    int64_t arrived = 0;
    int64_t played = 0;
    int64_t dropped = 0;
    int64_t final_occupancy = 0;
};

struct SimReport {
    int64_t frames = 0;
    int runs = 1;
    uint64_t seed = 0;
    double empirical_outage = 0.0;
    double empirical_drop = 0.0;
    double mean_playout_bps = 0.0;
    double playout_variance = 0.0;  // Mbps^2
    double qoe = 0.0;               // Mbps
    std::vector<RunStats> per_run;
};

// Constant-rate playout of s_real packets/frame (fractional part realised by
// a deterministic carry accumulator). Outage is measured at frame start.
RunStats simulate_constant(ArrivalSource& source, double s_real, int64_t buffer,
                           int64_t frames,
                           std::vector<double>* playout_series_bps = nullptr,
                           const FrameParams& frame = {});

RunStats simulate_abr(ArrivalSource& source, const AbrParams& params, int64_t buffer,
                      int64_t frames, const FrameParams& frame,
                      std::vector<double>* playout_series_bps = nullptr);

// mean(U) - eta*Var(U), computed in Mbps
double qoe_score(const std::vector<double>& playout_series_bps, double eta);

// A(t) = floor(K*Y*R(t)*dt/sigma) over a per-block rate trace
std::vector<int64_t> trace_playback_arrivals(const std::vector<double>& rates_bps,
                                             int K, double share,
                                             const FrameParams& frame);

// Replicated i.i.d. runs with per-run substream seeds
SimReport run_constant_iid(const ArrivalPmf& pmf, double s_real, int64_t buffer,
                           int64_t frames, int runs, uint64_t seed,
                           const FrameParams& frame = {});

SimReport run_abr_iid(const ArrivalPmf& pmf, const AbrParams& params, int64_t buffer,
                      int64_t frames, int runs, uint64_t seed,
                      const FrameParams& frame = {});

// Trial-and-error max sustainable rate on the simulator: bisects the playout
// rate until the empirical outage/drop sit at the constraint boundary.
double find_max_rate_by_simulation(const ArrivalPmf& pmf, int64_t buffer,
                                   const FrameParams& frame,
                                   const QoeConstraints& constraints, int64_t frames,
                                   uint64_t seed);

// Variable packet sizes (uniform in [0.8,1.2]*sigma), bit-accurate buffer of
// B*sigma bits; playout drains whole packets against a bit budget.
RunStats simulate_constant_varsize(const ArrivalPmf& packet_count_pmf, double U_bps,
                                   int64_t buffer_packets, int64_t frames,
                                   uint64_t seed, const FrameParams& frame);

}  // namespace streamcap
