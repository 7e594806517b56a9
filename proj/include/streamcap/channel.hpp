#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace streamcap {

struct McsTable {
    std::vector<double> thresholds_db;  // interval lower edges, strictly increasing
    std::vector<double> rates_bps;      // strictly increasing, same length

    std::size_t levels() const { return rates_bps.size(); }
    void validate() const;
};

struct RatePmf {
    std::vector<double> support_bps;  // strictly increasing
    std::vector<double> probs;

    void validate() const;
};

struct TraceRecord {
    int64_t timestamp_ms = 0;
    std::string user_id;
    double signal = 0.0;  // rssi_dbm or sinr_db depending on the trace column
    bool signal_is_sinr = true;
};

// Piecewise-linear signal mapping (e.g. RSSI dBm -> SINR dB); clamps outside
// the anchor range.
struct SignalMap {
    std::vector<double> x;  // strictly increasing
    std::vector<double> y;

    void validate() const;
    double operator()(double v) const;
    static SignalMap identity();
};

// r_j for the interval [g_j, g_{j+1}); below the table -> 0 (no service),
// at or above the top threshold -> the top rate.
double map_sinr_to_rate(double sinr_db, const McsTable& table);

RatePmf estimate_pmf(const std::vector<TraceRecord>& trace, const McsTable& table,
                     const SignalMap& rssi_to_sinr = SignalMap::identity());

double mean_rate(const RatePmf& pmf);

}  // namespace streamcap
