#include "streamcap/json_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace streamcap {

namespace fs = std::filesystem;

json to_json(const RatePmf& pmf) {
    return json{{"support_bps", pmf.support_bps}, {"probs", pmf.probs}};
}

RatePmf rate_pmf_from_json(const json& j) {
    RatePmf pmf;
    pmf.support_bps = j.at("support_bps").get<std::vector<double>>();
    pmf.probs = j.at("probs").get<std::vector<double>>();
    pmf.validate();
    return pmf;
}

json to_json(const ArrivalPmf& pmf) {
    return json{{"probs", pmf.probs}, {"mean", pmf.mean}};
}

ArrivalPmf arrival_pmf_from_json(const json& j) {
    return ArrivalPmf::from_probs(j.at("probs").get<std::vector<double>>());
}

json to_json(const McsTable& table) {
    return json{{"thresholds_db", table.thresholds_db}, {"rates_bps", table.rates_bps}};
}

McsTable mcs_table_from_json(const json& j) {
    McsTable table;
    table.thresholds_db = j.at("thresholds_db").get<std::vector<double>>();
    table.rates_bps = j.at("rates_bps").get<std::vector<double>>();
    table.validate();
    return table;
}

SignalMap signal_map_from_json(const json& j) {
    SignalMap map;
    map.x = j.at("x").get<std::vector<double>>();
    map.y = j.at("y").get<std::vector<double>>();
    map.validate();
    return map;
}

json solver_report_json(const FiniteBufferDist& dist, const ArrivalPmf& arrivals,
                        int service, const InfiniteBufferBoundary* boundary) {
    json j{{"S", service},
           {"buffer", dist.probs.size() - 1},
           {"utilization", arrivals.mean / static_cast<double>(service)},
           {"q", dist.probs},
           {"beta", dist.served_mean},
           {"outage", outage_probability(dist, service)},
           {"drop_rate", drop_rate(dist, arrivals)}};
    if (boundary) {
        json roots = json::array();
        for (const auto& z : boundary->roots)
            roots.push_back(json{{"re", z.real()}, {"im", z.imag()}});
        j["roots"] = std::move(roots);
        j["boundary_probs"] = boundary->boundary_probs;
    }
    return j;
}

json to_json(const PlayoutSolution& s) {
    return json{{"S", s.S},
                {"U_bps", s.U_bps},
                {"outage", s.achieved_outage},
                {"drop", s.achieved_drop}};
}

json to_json(const FractionalPlayoutSolution& s) {
    return json{{"s_real", s.s_real},
                {"U_bps", s.U_bps},
                {"outage", s.achieved_outage},
                {"drop", s.achieved_drop}};
}

json to_json(const SimReport& r) {
    json per_run = json::array();
    for (const auto& st : r.per_run) {
        per_run.push_back(json{{"outage", st.outage},
                               {"drop_rate", st.drop},
                               {"mean_playout_bps", st.mean_playout_bps},
                               {"playout_var_mbps2", st.playout_var_mbps2},
                               {"qoe_mbps", st.qoe_mbps},
                               {"arrived", st.arrived},
                               {"played", st.played},
                               {"dropped", st.dropped},
                               {"final_occupancy", st.final_occupancy}});
    }
    return json{{"frames", r.frames},
                {"runs", r.runs},
                {"seed", r.seed},
                {"outage", r.empirical_outage},
                {"drop_rate", r.empirical_drop},
                {"mean_playout_bps", r.mean_playout_bps},
                {"playout_var_mbps2", r.playout_variance},
                {"qoe_mbps", r.qoe},
                {"per_run", per_run}};
}

json to_json(const TwoClassSplit& s) {
    return json{{"K_p", s.K_p}, {"K_r", s.K_r}, {"c", s.c},
                {"U_p_bps", s.U_p}, {"U_r_bps", s.U_r},
                {"E1", s.E1},       {"E2", s.E2}};
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    json j;
    in >> j;
    return j;
}

void save_json_file(const std::string& path, const json& j) {
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

namespace {

std::vector<CellUser> users_from_json(const json& arr, const std::string& base_dir) {
    std::vector<CellUser> users;
    for (const auto& uj : arr) {
        CellUser u;
        u.id = uj.at("id").get<int>();
        if (uj.contains("pmf")) {
            u.pmf = rate_pmf_from_json(uj.at("pmf"));
        } else if (uj.contains("pmf_file")) {
            const fs::path p = fs::path(base_dir) / uj.at("pmf_file").get<std::string>();
            u.pmf = rate_pmf_from_json(load_json_file(p.string()));
        } else {
            throw std::runtime_error("user entry needs a pmf or pmf_file");
        }
        users.push_back(std::move(u));
    }
    return users;
}

}  // namespace

Scenario scenario_from_json(const json& j, const std::string& base_dir) {
    Scenario sc;
    sc.cell.K = j.value("K", 275);
    sc.cell.frame.frame_duration_s = j.value("frame_ms", 10.0) / 1000.0;
    sc.cell.frame.packet_size_bits = j.value("packet_bits", 5000.0);
    sc.cell.buffer = j.value("buffer_packets", static_cast<int64_t>(4800));
    sc.constraints.epsilon = j.value("epsilon", 0.01);
    sc.constraints.delta0 = j.value("delta0", 0.03);

    if (j.contains("users_file")) {
        const fs::path p = fs::path(base_dir) / j.at("users_file").get<std::string>();
        json uj = load_json_file(p.string());
        const json& arr = uj.is_array() ? uj : uj.at("users");
        auto all = users_from_json(arr, p.parent_path().string());
        if (j.contains("user_ids")) {
            const auto wanted = j.at("user_ids").get<std::vector<int>>();
            for (int id : wanted) {
                bool found = false;
                for (auto& u : all)
                    if (u.id == id) {
                        sc.cell.users.push_back(u);
                        found = true;
                        break;
                    }
                if (!found)
                    throw std::runtime_error("user_ids entry not present in users_file");
            }
        } else {
            sc.cell.users = std::move(all);
        }
    }
    if (j.contains("users")) {
        auto extra = users_from_json(j.at("users"), base_dir);
        sc.cell.users.insert(sc.cell.users.end(), extra.begin(), extra.end());
    }

    sc.policy = j.value("policy", std::string("constant"));
    if (sc.policy != "constant" && sc.policy != "abr")
        throw std::runtime_error("policy must be constant or abr");
    sc.u_init_bps = j.value("u_init_bps", 0.0);
    sc.b_min_frac = j.value("b_min_frac", 0.25);
    sc.b_max_frac = j.value("b_max_frac", 0.75);
    sc.theta = j.value("theta", 0.1);
    sc.frames = j.value("frames", static_cast<int64_t>(100'000));
    sc.runs = j.value("runs", 1);
    sc.seed = j.value("seed", static_cast<uint64_t>(1));

    sc.cell.validate();
    sc.constraints.validate();
    return sc;
}

Scenario load_scenario(const std::string& path) {
    const json j = load_json_file(path);
    return scenario_from_json(j, fs::path(path).parent_path().string());
}

std::vector<TraceRecord> load_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::vector<TraceRecord> out;
    std::string line;
    std::size_t row = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line.back() == '\r') {
            if (!line.empty()) line.pop_back();
            if (line.empty()) continue;
        }
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cols.push_back(cell);
        if (!saw_header) {
            saw_header = true;
            if (!cols.empty() && cols[0] == "timestamp_ms") continue;  // header row
        }
        if (cols.size() < 3 || cols.size() > 4)
            throw std::runtime_error("malformed trace row " + std::to_string(row));
        TraceRecord rec;
        try {
            rec.timestamp_ms = std::stoll(cols[0]);
            rec.user_id = cols[1];
            rec.signal = std::stod(cols[2]);
        } catch (const std::exception&) {
            throw std::runtime_error("malformed trace row " + std::to_string(row));
        }
        if (cols.size() == 4) {
            if (cols[3] == "sinr")
                rec.signal_is_sinr = true;
            else if (cols[3] == "rssi")
                rec.signal_is_sinr = false;
            else
                throw std::runtime_error("malformed trace row " + std::to_string(row));
        }
        out.push_back(std::move(rec));
    }
    if (out.empty()) throw std::runtime_error("no samples");
    return out;
}

}  // namespace streamcap
