#include "streamcap/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "streamcap/kernels.hpp"
#include "streamcap/rng.hpp"

namespace streamcap {

namespace {

// reciprocal-rate atoms of one user, zero rates clamped to the floor
struct RecipPmf {
    std::vector<double> values;  // 1/r, ascending in r so descending here
    std::vector<double> probs;
};

double derive_rate_floor(const std::vector<CellUser>& users, double requested) {
    if (requested > 0) return requested;
    double r1 = std::numeric_limits<double>::infinity();
    for (const auto& u : users)
        for (double r : u.pmf.support_bps)
            if (r > 0) r1 = std::min(r1, r);
    if (!std::isfinite(r1))
        throw std::invalid_argument("all rate atoms are zero; cannot allocate");
    return r1 / 10.0;
}

RecipPmf reciprocal_pmf(const RatePmf& pmf, double rate_floor) {
    RecipPmf out;
    out.values.reserve(pmf.support_bps.size());
    out.probs = pmf.probs;
    for (double r : pmf.support_bps) out.values.push_back(1.0 / std::max(r, rate_floor));
    return out;
}

ArrivalPmf arrivals_from_atoms(const std::map<int64_t, double>& atoms) {
    int64_t amax = 0;
    for (const auto& [a, p] : atoms)
        if (p > 0) amax = std::max(amax, a);
    std::vector<double> probs(static_cast<std::size_t>(amax) + 1, 0.0);
    for (const auto& [a, p] : atoms) probs[static_cast<std::size_t>(a)] += p;
    return ArrivalPmf::from_probs(probs);
}

int64_t packets_for_sum(double recip_sum, const CellConfig& cell) {
    const double C = static_cast<double>(cell.K) / recip_sum;
    const double a = std::floor(C * cell.frame.frame_duration_s / cell.frame.packet_size_bits);
    return std::max<int64_t>(0, static_cast<int64_t>(a));
}

}  // namespace

void CellConfig::validate() const {
    if (users.empty()) throw std::invalid_argument("cell has no users");
    if (K <= 0) throw std::invalid_argument("cell needs a positive block count");
    if (buffer <= 1) throw std::invalid_argument("buffer must exceed 1");
    frame.validate();
    for (const auto& u : users) u.pmf.validate();
}

void TwoClassConfig::validate() const {
    if (premium.empty() || regular.empty())
        throw std::invalid_argument("both classes must be non-empty");
    if (k_p <= 0) throw std::invalid_argument("premium rate factor must be positive");
    for (double d : {delta_p, delta_r, epsilon_p, epsilon_r})
        if (d < 0 || d >= 1) throw std::invalid_argument("loss targets must lie in [0,1)");
    for (const auto& p : premium) p.validate();
    for (const auto& r : regular) r.validate();
}

std::vector<double> dynamic_share(const std::vector<double>& rates_bps) {
    if (rates_bps.empty()) throw std::invalid_argument("no rates");
    double denom = 0.0;
    for (double r : rates_bps) {
        if (r <= 0) throw std::invalid_argument("user in outage frame");
        denom += 1.0 / r;
    }
    std::vector<double> shares(rates_bps.size());
    for (std::size_t i = 0; i < rates_bps.size(); ++i) shares[i] = (1.0 / rates_bps[i]) / denom;
    return shares;
}

ArrivalPmf equal_experience_arrivals(const CellConfig& cell,
                                     const ReciprocalGridOptions& opts) {
    cell.validate();
    if (opts.bins < 2) throw std::invalid_argument("grid needs at least two bins");
    const double floor_bps = derive_rate_floor(cell.users, opts.rate_floor_bps);

    std::vector<RecipPmf> recips;
    recips.reserve(cell.users.size());
    std::size_t atom_product = 1;
    bool exact_ok = true;
    for (const auto& u : cell.users) {
        recips.push_back(reciprocal_pmf(u.pmf, floor_bps));
        if (exact_ok) {
            const std::size_t m = u.pmf.support_bps.size();
            if (atom_product > opts.exact_atom_cap / m)
                exact_ok = false;
            else
                atom_product *= m;
        }
    }
    exact_ok = exact_ok && atom_product <= opts.exact_atom_cap;

    std::map<int64_t, double> atoms;
    if (exact_ok) {
        std::vector<std::size_t> idx(recips.size(), 0);
        while (true) {
            double sum = 0.0, prob = 1.0;
            for (std::size_t j = 0; j < recips.size(); ++j) {
                sum += recips[j].values[idx[j]];
                prob *= recips[j].probs[idx[j]];
            }
            if (prob > 0) atoms[packets_for_sum(sum, cell)] += prob;
            std::size_t j = 0;
            for (; j < idx.size(); ++j) {
                if (++idx[j] < recips[j].values.size()) break;
                idx[j] = 0;
            }
            if (j == idx.size()) break;
        }
        return arrivals_from_atoms(atoms);
    }

    double lo_total = 0.0, hi_total = 0.0;
    for (const auto& r : recips) {
        const auto [mn, mx] = std::minmax_element(r.values.begin(), r.values.end());
        lo_total += *mn;
        hi_total += *mx;
    }
    if (hi_total - lo_total < 1e-18 * hi_total) {
        atoms[packets_for_sum(lo_total, cell)] = 1.0;
        return arrivals_from_atoms(atoms);
    }

    const double h = (hi_total - lo_total) / static_cast<double>(opts.bins - 1);
    std::vector<double> acc{1.0};
    double offset = 0.0;
    for (const auto& r : recips) {
        const double base = *std::min_element(r.values.begin(), r.values.end());
        std::size_t width = 0;
        for (double v : r.values)
            width = std::max(width, static_cast<std::size_t>(std::llround((v - base) / h)));
        std::vector<double> hist(width + 1, 0.0);
        for (std::size_t m = 0; m < r.values.size(); ++m)
            hist[static_cast<std::size_t>(std::llround((r.values[m] - base) / h))] += r.probs[m];
        if (acc.size() + hist.size() - 1 > (1u << 22))
            throw std::runtime_error("grid overflow; use a coarser resolution (fewer bins)");
        std::vector<double> next(acc.size() + hist.size() - 1, 0.0);
        kernels::conv_full(acc.data(), acc.size(), hist.data(), hist.size(), next.data());
        acc = std::move(next);
        offset += base;
    }
    for (std::size_t k = 0; k < acc.size(); ++k)
        if (acc[k] > 0) atoms[packets_for_sum(offset + static_cast<double>(k) * h, cell)] += acc[k];
    return arrivals_from_atoms(atoms);
}

ArrivalPmf static_share_arrivals(const RatePmf& pmf, int K, double share,
                                 const FrameParams& frame) {
    pmf.validate();
    frame.validate();
    if (K <= 0 || share <= 0 || share > 1)
        throw std::invalid_argument("need positive blocks and a share in (0,1]");
    std::map<int64_t, double> atoms;
    for (std::size_t m = 0; m < pmf.support_bps.size(); ++m) {
        const double bits = static_cast<double>(K) * share * pmf.support_bps[m] *
                            frame.frame_duration_s;
        const auto a = static_cast<int64_t>(
            std::max(0.0, std::floor(bits / frame.packet_size_bits)));
        atoms[a] += pmf.probs[m];
    }
    return arrivals_from_atoms(atoms);
}

PlayoutSolution equal_experience_rate(const CellConfig& cell,
                                      const QoeConstraints& constraints,
                                      const ReciprocalGridOptions& opts) {
    const auto arrivals = equal_experience_arrivals(cell, opts);
    return max_playout_rate(arrivals, cell.buffer, cell.frame, constraints);
}

double min_rate_share(double U_min_bps, double delta0, int K, const RatePmf& pmf) {
    if (U_min_bps < 0) throw std::invalid_argument("minimum rate must be non-negative");
    if (delta0 < 0 || delta0 >= 1) throw std::invalid_argument("drop target must lie in [0,1)");
    if (K <= 0) throw std::invalid_argument("block count must be positive");
    const double er = mean_rate(pmf);
    if (er <= 0) throw std::invalid_argument("mean rate must be positive");
    return U_min_bps / ((1.0 - delta0) * static_cast<double>(K) * er);
}

AdmissionResult admission_control(const CellConfig& cell, double U_min_bps, double delta0) {
    cell.validate();
    struct Need {
        int id;
        double y;
    };
    std::vector<Need> needs;
    needs.reserve(cell.users.size());
    double total = 0.0;
    for (const auto& u : cell.users) {
        const double y = min_rate_share(U_min_bps, delta0, cell.K, u.pmf);
        needs.push_back({u.id, y});
        total += y;
    }

    AdmissionResult res;
    if (total <= 1.0 + 1e-12) {
        for (const auto& n : needs) {
            res.admitted_ids.push_back(n.id);
            res.shares.push_back(n.y);
        }
        res.leftover = std::max(0.0, 1.0 - total);
        return res;
    }

    std::stable_sort(needs.begin(), needs.end(), [](const Need& a, const Need& b) {
        if (a.y != b.y) return a.y < b.y;
        return a.id < b.id;
    });
    double used = 0.0;
    for (const auto& n : needs) {
        if (used + n.y > 1.0 + 1e-12) continue;
        used += n.y;
        res.admitted_ids.push_back(n.id);
        res.shares.push_back(n.y);
    }
    res.leftover = std::max(0.0, 1.0 - used);
    return res;
}

MaxUsersResult max_users_max_resolution(const CellConfig& cell, double U_min_bps,
                                        double U_max_bps, double delta0) {
    cell.validate();
    if (U_max_bps < U_min_bps)
        throw std::invalid_argument("maximum rate must be at least the minimum rate");

    struct Entry {
        int id;
        std::size_t pos;
        double mean;
        double y_min;
        double dy;
    };
    std::vector<Entry> entries;
    entries.reserve(cell.users.size());
    double total_min = 0.0;
    for (std::size_t i = 0; i < cell.users.size(); ++i) {
        const auto& u = cell.users[i];
        const double er = mean_rate(u.pmf);
        const double y = min_rate_share(U_min_bps, delta0, cell.K, u.pmf);
        const double dy = (U_max_bps - U_min_bps) /
                          ((1.0 - delta0) * static_cast<double>(cell.K) * er);
        entries.push_back({u.id, i, er, y, dy});
        total_min += y;
    }
    if (total_min > 1.0 + 1e-12)
        throw std::invalid_argument("minimum shares exceed the frame; run admission control first");

    MaxUsersResult res;
    res.plan.kind = PlanKind::Static;
    res.plan.static_shares.resize(cell.users.size());
    for (const auto& e : entries) res.plan.static_shares[e.pos] = e.y_min;

    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.mean != b.mean) return a.mean > b.mean;
        return a.id < b.id;
    });
    double leftover = 1.0 - total_min;
    for (const auto& e : entries) {
        if (e.dy > leftover + 1e-12) break;
        leftover -= e.dy;
        res.plan.static_shares[e.pos] = e.y_min + e.dy;
        res.selected_ids.push_back(e.id);
    }
    res.N = static_cast<int>(res.selected_ids.size());
    res.plan.leftover = std::max(0.0, leftover);
    return res;
}

double mean_inverse_rate_sum(const std::vector<RatePmf>& users,
                             const ExpectationOptions& opts) {
    if (users.empty()) throw std::invalid_argument("no users");
    for (const auto& u : users) {
        u.validate();
        for (double r : u.support_bps)
            if (r <= 0)
                throw std::invalid_argument("zero-rate atom; inverse-rate expectation undefined");
    }

    if (opts.exact) {
        std::size_t product = 1;
        for (const auto& u : users) {
            if (product > 10'000'000 / u.support_bps.size())
                throw std::invalid_argument("exact enumeration too large; use Monte Carlo");
            product *= u.support_bps.size();
        }
        std::vector<std::size_t> idx(users.size(), 0);
        double acc = 0.0;
        while (true) {
            double sum = 0.0, prob = 1.0;
            for (std::size_t j = 0; j < users.size(); ++j) {
                sum += 1.0 / users[j].support_bps[idx[j]];
                prob *= users[j].probs[idx[j]];
            }
            acc += prob / sum;
            std::size_t j = 0;
            for (; j < idx.size(); ++j) {
                if (++idx[j] < users[j].support_bps.size()) break;
                idx[j] = 0;
            }
            if (j == idx.size()) break;
        }
        return acc;
    }

    if (opts.samples == 0) throw std::invalid_argument("sample count must be positive");
    std::vector<std::vector<double>> cdfs(users.size());
    for (std::size_t j = 0; j < users.size(); ++j) {
        cdfs[j].resize(users[j].probs.size());
        double run = 0.0;
        for (std::size_t m = 0; m < users[j].probs.size(); ++m) {
            run += users[j].probs[m];
            cdfs[j][m] = run;
        }
        cdfs[j].back() = 1.0;
    }
    Rng rng(opts.seed);
    double acc = 0.0;
    for (std::size_t s = 0; s < opts.samples; ++s) {
        double sum = 0.0;
        for (std::size_t j = 0; j < users.size(); ++j) {
            const double u = rng.next_double();
            const auto it = std::lower_bound(cdfs[j].begin(), cdfs[j].end(), u);
            const auto m = static_cast<std::size_t>(
                std::min<std::ptrdiff_t>(std::distance(cdfs[j].begin(), it),
                                         static_cast<std::ptrdiff_t>(cdfs[j].size()) - 1));
            sum += 1.0 / users[j].support_bps[m];
        }
        acc += 1.0 / sum;
    }
    return acc / static_cast<double>(opts.samples);
}

TwoClassSplit two_class_split(const TwoClassConfig& cfg, int K,
                              const ExpectationOptions& opts) {
    cfg.validate();
    if (K <= 0) throw std::invalid_argument("block count must be positive");

    TwoClassSplit split;
    split.E1 = mean_inverse_rate_sum(cfg.regular, opts);
    split.E2 = mean_inverse_rate_sum(cfg.premium, opts);
    split.c = cfg.k_p * ((1.0 - cfg.delta_r) / (1.0 - cfg.delta_p)) * (split.E1 / split.E2);
    split.U_p = (1.0 - cfg.delta_p) * split.c * static_cast<double>(K) * split.E2 / (1.0 + split.c);
    split.U_r = (1.0 - cfg.delta_r) * static_cast<double>(K) * split.E1 / (1.0 + split.c);
    split.K_p = static_cast<int>(std::llround(split.c * static_cast<double>(K) / (1.0 + split.c)));
    split.K_p = std::clamp(split.K_p, 0, K);
    split.K_r = K - split.K_p;
    return split;
}

}  // namespace streamcap
