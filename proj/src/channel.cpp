#include "streamcap/channel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "streamcap/kernels.hpp"

namespace streamcap {

void McsTable::validate() const {
    if (thresholds_db.empty() || thresholds_db.size() != rates_bps.size())
        throw std::invalid_argument("mcs table: thresholds and rates must be non-empty and equal length");
    for (std::size_t i = 1; i < thresholds_db.size(); ++i) {
        if (thresholds_db[i] <= thresholds_db[i - 1])
            throw std::invalid_argument("mcs table: thresholds must be strictly increasing");
        if (rates_bps[i] <= rates_bps[i - 1])
            throw std::invalid_argument("mcs table: rates must be strictly increasing");
    }
}

void RatePmf::validate() const {
    if (support_bps.size() != probs.size() || support_bps.empty())
        throw std::invalid_argument("rate pmf: support and probs must be non-empty and equal length");
    double total = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] < 0) throw std::invalid_argument("rate pmf: negative probability");
        if (i > 0 && support_bps[i] <= support_bps[i - 1])
            throw std::invalid_argument("rate pmf: support must be strictly increasing");
        total += probs[i];
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("rate pmf: probabilities must sum to 1");
}

void SignalMap::validate() const {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("signal map: needs at least two anchor points");
    for (std::size_t i = 1; i < x.size(); ++i)
        if (x[i] <= x[i - 1])
            throw std::invalid_argument("signal map: x must be strictly increasing");
}

double SignalMap::operator()(double v) const {
    if (v <= x.front()) return y.front();
    if (v >= x.back()) return y.back();
    const auto it = std::upper_bound(x.begin(), x.end(), v);
    const std::size_t i = static_cast<std::size_t>(it - x.begin());
    const double t = (v - x[i - 1]) / (x[i] - x[i - 1]);
    return y[i - 1] + t * (y[i] - y[i - 1]);
}

SignalMap SignalMap::identity() {
    return SignalMap{{-1e9, 1e9}, {-1e9, 1e9}};
}

double map_sinr_to_rate(double sinr_db, const McsTable& table) {
    if (sinr_db < table.thresholds_db.front()) return 0.0;
    const auto it = std::upper_bound(table.thresholds_db.begin(),
                                     table.thresholds_db.end(), sinr_db);
    return table.rates_bps[static_cast<std::size_t>(it - table.thresholds_db.begin()) - 1];
}

RatePmf estimate_pmf(const std::vector<TraceRecord>& trace, const McsTable& table,
                     const SignalMap& rssi_to_sinr) {
    table.validate();
    if (trace.empty()) throw std::runtime_error("no samples");
    std::map<double, std::size_t> counts;
    for (const auto& rec : trace) {
        const double sinr = rec.signal_is_sinr ? rec.signal : rssi_to_sinr(rec.signal);
        counts[map_sinr_to_rate(sinr, table)]++;
    }
    RatePmf pmf;
    const double n = static_cast<double>(trace.size());
    for (const auto& [rate, count] : counts) {
        pmf.support_bps.push_back(rate);
        pmf.probs.push_back(static_cast<double>(count) / n);
    }
    pmf.validate();
    return pmf;
}

double mean_rate(const RatePmf& pmf) {
    pmf.validate();
    return kernels::dot(pmf.support_bps.data(), pmf.probs.data(), pmf.probs.size());
}

}  // namespace streamcap
