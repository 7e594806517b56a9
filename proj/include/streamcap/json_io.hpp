#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "streamcap/allocation.hpp"
#include "streamcap/channel.hpp"
#include "streamcap/playout.hpp"
#include "streamcap/queueing.hpp"
#include "streamcap/sim.hpp"

namespace streamcap {

using json = nlohmann::json;

json to_json(const RatePmf& pmf);
RatePmf rate_pmf_from_json(const json& j);

json to_json(const ArrivalPmf& pmf);
ArrivalPmf arrival_pmf_from_json(const json& j);

json to_json(const McsTable& table);
McsTable mcs_table_from_json(const json& j);

SignalMap signal_map_from_json(const json& j);

// solver report: q, beta, outage, drop_rate, roots as re/im pairs
json solver_report_json(const FiniteBufferDist& dist, const ArrivalPmf& arrivals,
                        int service, const InfiniteBufferBoundary* boundary = nullptr);

json to_json(const PlayoutSolution& s);
json to_json(const FractionalPlayoutSolution& s);
json to_json(const SimReport& r);
json to_json(const TwoClassSplit& s);

// Scenario document shared by the CLI subcommands; see docs/formats.md.
struct Scenario {
    CellConfig cell;
    QoeConstraints constraints;
    std::string policy = "constant";  // constant | abr
    double u_init_bps = 0.0;          // abr
    double b_min_frac = 0.25, b_max_frac = 0.75, theta = 0.1;
    int64_t frames = 100'000;
    int runs = 1;
    uint64_t seed = 1;
};

Scenario scenario_from_json(const json& j, const std::string& base_dir);
Scenario load_scenario(const std::string& path);

json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const json& j);

std::vector<TraceRecord> load_trace_csv(const std::string& path);

}  // namespace streamcap
