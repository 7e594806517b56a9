#include "streamcap/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "streamcap/kernels.hpp"
#include "streamcap/playout.hpp"

namespace streamcap {

namespace {

constexpr double kEta = 0.05;  // QoE variability penalty per Mbps^2

std::vector<double> cdf_of(const ArrivalPmf& pmf) {
    pmf.validate();
    std::vector<double> cdf(pmf.probs.size());
    double run = 0.0;
    for (std::size_t i = 0; i < pmf.probs.size(); ++i) {
        run += pmf.probs[i];
        cdf[i] = run;
    }
    cdf.back() = 1.0;
    return cdf;
}

void finish_stats(RunStats& st, int64_t frames, int64_t outage_frames, double mean_bps,
                  double var_mbps2) {
    st.outage = static_cast<double>(outage_frames) / static_cast<double>(frames);
    st.drop = st.arrived > 0
                  ? static_cast<double>(st.dropped) / static_cast<double>(st.arrived)
                  : 0.0;
    st.mean_playout_bps = mean_bps;
    st.playout_var_mbps2 = var_mbps2;
    st.qoe_mbps = mean_bps * 1e-6 - kEta * var_mbps2;
}

}  // namespace

IidSource::IidSource(ArrivalPmf pmf, uint64_t seed)
    : cdf_(cdf_of(pmf)), seed_(seed), rng_(seed) {}

int64_t IidSource::next() {
    const double u = rng_.next_double();
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<int64_t>(std::min<std::size_t>(
        static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1));
}

void IidSource::reset() { rng_ = Rng(seed_); }

TraceSource::TraceSource(std::vector<int64_t> arrivals) : arrivals_(std::move(arrivals)) {
    if (arrivals_.empty()) throw std::invalid_argument("empty trace");
}

int64_t TraceSource::next() {
    const int64_t a = arrivals_[pos_];
    pos_ = (pos_ + 1) % arrivals_.size();
    return a;
}

void TraceSource::reset() { pos_ = 0; }

void AbrParams::validate(int64_t buffer) const {
    if (!(0 < b_min && b_min < b_max && b_max < buffer))
        throw std::invalid_argument("abr thresholds must satisfy 0 < b_min < b_max < buffer");
    if (!(theta > 0.0 && theta < 1.0))
        throw std::invalid_argument("abr step fraction must lie in (0,1)");
    if (u_init_bps <= 0) throw std::invalid_argument("abr needs a positive initial rate");
    if (u_floor_bps < 0 || u_ceil_bps < 0)
        throw std::invalid_argument("abr rate bounds must be non-negative");
}

RunStats simulate_constant(ArrivalSource& source, double s_real, int64_t buffer,
                           int64_t frames, std::vector<double>* playout_series_bps,
                           const FrameParams& frame) {
    frame.validate();
    if (s_real <= 0) throw std::invalid_argument("playout rate must be positive");
    if (buffer <= 1) throw std::invalid_argument("buffer must exceed 1");
    if (frames < 1) throw std::invalid_argument("frames must be at least 1");

    const auto s_base = static_cast<int64_t>(std::floor(s_real));
    const double x = s_real - static_cast<double>(s_base);
    const double rate_bps = frame.rate_bps(s_real);
    if (playout_series_bps) playout_series_bps->assign(static_cast<std::size_t>(frames), rate_bps);

    RunStats st;
    int64_t q = 0, outage_frames = 0;
    double carry = 0.0;
    for (int64_t t = 0; t < frames; ++t) {
        carry += x;
        int64_t s = s_base;
        if (carry >= 1.0) {
            carry -= 1.0;
            s += 1;
        }
        if (q < s) ++outage_frames;
        const int64_t played = std::min(q, s);
        st.played += played;
        q -= played;
        const int64_t a = source.next();
        st.arrived += a;
        const int64_t admitted = std::min(a, buffer - q);
        st.dropped += a - admitted;
        q += admitted;
    }
    st.final_occupancy = q;
    finish_stats(st, frames, outage_frames, rate_bps, 0.0);
    return st;
}

RunStats simulate_abr(ArrivalSource& source, const AbrParams& params, int64_t buffer,
                      int64_t frames, const FrameParams& frame,
                      std::vector<double>* playout_series_bps) {
    frame.validate();
    params.validate(buffer);
    if (frames < 1) throw std::invalid_argument("frames must be at least 1");

    const double u_floor =
        params.u_floor_bps > 0 ? params.u_floor_bps : frame.rate_bps(1.0);
    const double u_ceil = params.u_ceil_bps > 0
                              ? params.u_ceil_bps
                              : frame.rate_bps(static_cast<double>(buffer) / 2.0);
    if (u_floor > u_ceil) throw std::invalid_argument("abr rate floor exceeds ceiling");

    if (playout_series_bps) {
        playout_series_bps->clear();
        playout_series_bps->reserve(static_cast<std::size_t>(frames));
    }

    RunStats st;
    int64_t q = 0, outage_frames = 0;
    double u = std::clamp(params.u_init_bps, u_floor, u_ceil);
    double mean_acc = 0.0, sq_acc = 0.0;  // running moments of the rate series, Mbps
    for (int64_t t = 0; t < frames; ++t) {
        const auto s = static_cast<int64_t>(std::floor(frame.packets_per_frame(u)));
        if (playout_series_bps) playout_series_bps->push_back(u);
        const double u_mbps = u * 1e-6;
        mean_acc += u_mbps;
        sq_acc += u_mbps * u_mbps;

        if (q < s) ++outage_frames;
        const int64_t played = std::min(q, s);
        st.played += played;
        q -= played;
        const int64_t a = source.next();
        st.arrived += a;
        const int64_t admitted = std::min(a, buffer - q);
        st.dropped += a - admitted;
        q += admitted;

        if (q < params.b_min)
            u *= (1.0 - params.theta);
        else if (q > params.b_max)
            u *= (1.0 + params.theta);
        u = std::clamp(u, u_floor, u_ceil);
    }
    st.final_occupancy = q;
    const double n = static_cast<double>(frames);
    const double mean_mbps = mean_acc / n;
    const double var = std::max(0.0, sq_acc / n - mean_mbps * mean_mbps);
    finish_stats(st, frames, outage_frames, mean_mbps * 1e6, var);
    return st;
}

double qoe_score(const std::vector<double>& playout_series_bps, double eta) {
    if (playout_series_bps.empty()) throw std::invalid_argument("no samples");
    const std::size_t n = playout_series_bps.size();
    const double mean_bps = kernels::sum(playout_series_bps.data(), n) / static_cast<double>(n);
    const double ss = kernels::sumsq_dev(playout_series_bps.data(), n, mean_bps);
    const double var_mbps2 = ss / static_cast<double>(n) * 1e-12;
    return mean_bps * 1e-6 - eta * var_mbps2;
}

std::vector<int64_t> trace_playback_arrivals(const std::vector<double>& rates_bps, int K,
                                             double share, const FrameParams& frame) {
    if (rates_bps.empty()) throw std::invalid_argument("empty trace");
    if (K <= 0 || share <= 0) throw std::invalid_argument("need positive blocks and share");
    frame.validate();
    std::vector<int64_t> arrivals;
    arrivals.reserve(rates_bps.size());
    for (double r : rates_bps) {
        const double bits = static_cast<double>(K) * share * r * frame.frame_duration_s;
        arrivals.push_back(static_cast<int64_t>(
            std::max(0.0, std::floor(bits / frame.packet_size_bits))));
    }
    return arrivals;
}

namespace {

template <typename RunOne>
SimReport replicate(int64_t frames, int runs, uint64_t seed, RunOne&& run_one) {
    if (runs < 1) throw std::invalid_argument("runs must be at least 1");
    SimReport rep;
    rep.frames = frames;
    rep.runs = runs;
    rep.seed = seed;
    rep.per_run.reserve(static_cast<std::size_t>(runs));
    for (int r = 0; r < runs; ++r)
        rep.per_run.push_back(run_one(substream_seed(seed, static_cast<uint64_t>(r))));
    for (const auto& st : rep.per_run) {
        rep.empirical_outage += st.outage;
        rep.empirical_drop += st.drop;
        rep.mean_playout_bps += st.mean_playout_bps;
        rep.playout_variance += st.playout_var_mbps2;
        rep.qoe += st.qoe_mbps;
    }
    const double n = static_cast<double>(runs);
    rep.empirical_outage /= n;
    rep.empirical_drop /= n;
    rep.mean_playout_bps /= n;
    rep.playout_variance /= n;
    rep.qoe /= n;
    return rep;
}

}  // namespace

SimReport run_constant_iid(const ArrivalPmf& pmf, double s_real, int64_t buffer,
                           int64_t frames, int runs, uint64_t seed,
                           const FrameParams& frame) {
    return replicate(frames, runs, seed, [&](uint64_t run_seed) {
        IidSource src(pmf, run_seed);
        return simulate_constant(src, s_real, buffer, frames, nullptr, frame);
    });
}

SimReport run_abr_iid(const ArrivalPmf& pmf, const AbrParams& params, int64_t buffer,
                      int64_t frames, int runs, uint64_t seed, const FrameParams& frame) {
    return replicate(frames, runs, seed, [&](uint64_t run_seed) {
        IidSource src(pmf, run_seed);
        return simulate_abr(src, params, buffer, frames, frame, nullptr);
    });
}

double find_max_rate_by_simulation(const ArrivalPmf& pmf, int64_t buffer,
                                   const FrameParams& frame,
                                   const QoeConstraints& constraints, int64_t frames,
                                   uint64_t seed) {
    constraints.validate();
    if (buffer <= 1) throw std::invalid_argument("buffer must exceed 1");
    IidSource src(pmf, seed);
    const auto eval = [&](double s) {
        src.reset();
        return simulate_constant(src, s, buffer, frames, nullptr, frame);
    };
    // outage grows with the rate while drop shrinks, so feasibility is an
    // interval in s; bisect the upper (outage) edge, then check drop there,
    // where it is smallest over the whole interval
    const auto outage_ok = [&](const RunStats& st) {
        return st.outage <= constraints.epsilon;
    };

    const auto lo_stats = eval(1.0);
    if (!outage_ok(lo_stats)) throw UnsatisfiableError(1, lo_stats.outage, lo_stats.drop);
    double lo = 1.0;
    double hi = static_cast<double>(buffer - 1);
    RunStats best = lo_stats;
    if (const auto hi_stats = eval(hi); outage_ok(hi_stats)) {
        lo = hi;
        best = hi_stats;
    } else {
        for (int it = 0; it < 24; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (const auto mid_stats = eval(mid); outage_ok(mid_stats)) {
                lo = mid;
                best = mid_stats;
            } else {
                hi = mid;
            }
        }
    }
    if (best.drop > constraints.delta0)
        throw UnsatisfiableError(static_cast<int>(lo), best.outage, best.drop);
    return frame.rate_bps(lo);
}

RunStats simulate_constant_varsize(const ArrivalPmf& packet_count_pmf, double U_bps,
                                   int64_t buffer_packets, int64_t frames, uint64_t seed,
                                   const FrameParams& frame) {
    frame.validate();
    if (U_bps <= 0) throw std::invalid_argument("playout rate must be positive");
    if (buffer_packets <= 1) throw std::invalid_argument("buffer must exceed 1");
    if (frames < 1) throw std::invalid_argument("frames must be at least 1");

    const auto cdf = cdf_of(packet_count_pmf);
    Rng rng(seed);
    const double sigma = frame.packet_size_bits;
    const double capacity_bits = static_cast<double>(buffer_packets) * sigma;
    const double budget_per_frame = U_bps * frame.frame_duration_s;

    std::deque<double> q;
    double buffered_bits = 0.0;
    RunStats st;
    int64_t outage_frames = 0;
    for (int64_t t = 0; t < frames; ++t) {
        if (buffered_bits < budget_per_frame) ++outage_frames;
        double budget = budget_per_frame;
        while (!q.empty() && q.front() <= budget) {
            budget -= q.front();
            buffered_bits -= q.front();
            q.pop_front();
            ++st.played;
        }
        const double u = rng.next_double();
        const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        const auto a = static_cast<int64_t>(std::min<std::size_t>(
            static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1));
        st.arrived += a;
        for (int64_t k = 0; k < a; ++k) {
            const double size = sigma * (0.8 + 0.4 * rng.next_double());
            if (buffered_bits + size <= capacity_bits) {
                q.push_back(size);
                buffered_bits += size;
            } else {
                ++st.dropped;
            }
        }
    }
    st.final_occupancy = static_cast<int64_t>(q.size());
    finish_stats(st, frames, outage_frames, U_bps, 0.0);
    return st;
}

}  // namespace streamcap
