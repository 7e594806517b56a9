#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "streamcap/channel.hpp"
#include "streamcap/playout.hpp"
#include "streamcap/queueing.hpp"
#include "streamcap/types.hpp"

namespace streamcap {

struct CellUser {
    int id = 0;
    RatePmf pmf;
};

struct CellConfig {
    std::vector<CellUser> users;
    int K = 275;
    FrameParams frame;
    int64_t buffer = 4800;

    void validate() const;
};

enum class PlanKind { DynamicInverse, Static };

struct AllocationPlan {
    PlanKind kind = PlanKind::Static;
    std::vector<double> static_shares;  // Y_i per user, empty for dynamic plans
    double leftover = 0.0;
};

struct TwoClassConfig {
    std::vector<RatePmf> premium;
    std::vector<RatePmf> regular;
    double k_p = 1.0;      // U_p / U_r
    double delta_p = 0.0;
    double delta_r = 0.0;
    double epsilon_p = 0.0;  // simulation check targets, not split inputs
    double epsilon_r = 0.0;

    void validate() const;
};

struct TwoClassSplit {
    int K_p = 0;
    int K_r = 0;
    double c = 0.0;    // K_p/K_r before rounding
    double U_p = 0.0;
    double U_r = 0.0;
    double E1 = 0.0;   // E[1/sum_j 1/R_regular_j]
    double E2 = 0.0;   // E[1/sum_i 1/R_premium_i]
};

struct AdmissionResult {
    std::vector<int> admitted_ids;
    std::vector<double> shares;  // Y_{i,min} of the admitted users, same order
    double leftover = 0.0;
};

struct MaxUsersResult {
    int N = 0;                       // users upgraded to U_max
    std::vector<int> selected_ids;   // in upgrade order
    AllocationPlan plan;             // shares for every user in cell order
};

// Per-frame inverse-rate split: Y_i = (1/R_i)/sum_j(1/R_j); every user then
// receives the same data rate K*Y_i*R_i.
std::vector<double> dynamic_share(const std::vector<double>& rates_bps);

struct ReciprocalGridOptions {
    int bins = 1 << 14;          // grid resolution on the reciprocal-rate axis
    std::size_t exact_atom_cap = 4096;  // exact enumeration while the support stays small
    double rate_floor_bps = 0.0;        // 0 = derive r_1/10 from the rate supports
};

// Distribution of A = floor(C*dt/sigma) with C = K / sum_j(1/R_j).
ArrivalPmf equal_experience_arrivals(const CellConfig& cell,
                                     const ReciprocalGridOptions& opts = {});

// Distribution of A = floor(K*Y*R*dt/sigma) for a fixed frame share Y.
ArrivalPmf static_share_arrivals(const RatePmf& pmf, int K, double share,
                                 const FrameParams& frame);

PlayoutSolution equal_experience_rate(const CellConfig& cell,
                                      const QoeConstraints& constraints,
                                      const ReciprocalGridOptions& opts = {});

// Fluid minimum share, reserving the whole drop allowance:
// Y_min = U_min / ((1-delta0) * K * E[R]).
double min_rate_share(double U_min_bps, double delta0, int K, const RatePmf& pmf);

AdmissionResult admission_control(const CellConfig& cell, double U_min_bps,
                                  double delta0);

// Guarantee U_min to everyone, then upgrade users to U_max by descending mean
// rate while the leftover frame ratio lasts.
MaxUsersResult max_users_max_resolution(const CellConfig& cell, double U_min_bps,
                                        double U_max_bps, double delta0);

struct ExpectationOptions {
    bool exact = false;        // exact enumeration instead of Monte Carlo
    std::size_t samples = 1'000'000;
    uint64_t seed = 0x5eedcafe;
};

// E[1 / sum_j 1/R_j] over independent user rates.
double mean_inverse_rate_sum(const std::vector<RatePmf>& users,
                             const ExpectationOptions& opts = {});

TwoClassSplit two_class_split(const TwoClassConfig& cfg, int K,
                              const ExpectationOptions& opts = {});

}  // namespace streamcap
