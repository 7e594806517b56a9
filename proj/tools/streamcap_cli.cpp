#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "streamcap/allocation.hpp"
#include "streamcap/channel.hpp"
#include "streamcap/json_io.hpp"
#include "streamcap/playout.hpp"
#include "streamcap/sim.hpp"

namespace fs = std::filesystem;
using streamcap::json;

namespace {

void emit(const json& j, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        streamcap::save_json_file(out_path, j);
        std::cerr << "wrote " << out_path << "\n";
    }
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void flatten(const json& j, const std::string& prefix,
             std::map<std::string, double>& out) {
    if (j.is_object()) {
        for (const auto& [key, val] : j.items())
            flatten(val, prefix.empty() ? key : prefix + "." + key, out);
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i)
            flatten(j[i], prefix + "." + std::to_string(i), out);
    } else if (j.is_number()) {
        out[prefix] = j.get<double>();
    }
}

void write_csv_flat(std::ostream& os, const json& j) {
    std::map<std::string, double> flat;
    flatten(j, "", flat);
    os << "field,value\n";
    for (const auto& [key, val] : flat)
        os << csv_escape(key) << "," << val << "\n";
}

void emit_formatted(const json& j, const std::string& out_path,
                    const std::string& format) {
    if (format == "json") {
        emit(j, out_path);
        return;
    }
    if (out_path.empty()) {
        write_csv_flat(std::cout, j);
    } else {
        const fs::path p(out_path);
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write " + out_path);
        write_csv_flat(out, j);
        std::cerr << "wrote " << out_path << "\n";
    }
}

int numeric_or_max(const std::string& s) {
    try {
        return std::stoi(s);
    } catch (const std::exception&) {
        return std::numeric_limits<int>::max();
    }
}

int cmd_ingest(const std::string& trace_path, const std::string& mcs_path,
               const std::string& map_path, const std::string& out_dir) {
    const auto trace = streamcap::load_trace_csv(trace_path);
    const auto table = streamcap::mcs_table_from_json(streamcap::load_json_file(mcs_path));
    streamcap::SignalMap map = streamcap::SignalMap::identity();
    if (!map_path.empty())
        map = streamcap::signal_map_from_json(streamcap::load_json_file(map_path));

    std::map<std::string, std::vector<streamcap::TraceRecord>> by_user;
    for (const auto& rec : trace) by_user[rec.user_id].push_back(rec);

    std::vector<std::string> ids;
    for (const auto& [id, recs] : by_user) ids.push_back(id);
    std::sort(ids.begin(), ids.end(), [](const std::string& a, const std::string& b) {
        const int na = numeric_or_max(a), nb = numeric_or_max(b);
        if (na != nb) return na < nb;
        return a < b;
    });

    if (!out_dir.empty()) fs::create_directories(out_dir);
    for (const auto& id : ids) {
        const auto pmf = streamcap::estimate_pmf(by_user[id], table, map);
        if (!out_dir.empty()) {
            const fs::path p = fs::path(out_dir) / ("user_" + id + ".json");
            streamcap::save_json_file(p.string(), streamcap::to_json(pmf));
        }
        std::cout << "user " << id << ": " << by_user[id].size()
                  << " samples, E[R] = " << streamcap::mean_rate(pmf) << " bps\n";
    }
    return 0;
}

int cmd_analyze(const streamcap::Scenario& sc, bool fine, const std::string& mode,
                double share_flag, const std::string& out_path,
                const std::string& format) {
    const double share =
        share_flag > 0 ? share_flag : 1.0 / static_cast<double>(sc.cell.users.size());
    json users = json::array();
    for (const auto& u : sc.cell.users) {
        std::cerr << "analyzing user " << u.id << "\n";
        const auto arrivals =
            streamcap::static_share_arrivals(u.pmf, sc.cell.K, share, sc.cell.frame);
        json entry{{"id", u.id},
                   {"share", share},
                   {"mean_rate_bps", streamcap::mean_rate(u.pmf)},
                   {"arrival_mean", arrivals.mean}};
        if (fine) {
            const auto sol = mode == "min"
                                 ? streamcap::min_playout_rate_fine(
                                       arrivals, sc.cell.buffer, sc.cell.frame, sc.constraints)
                                 : streamcap::max_playout_rate_fine(
                                       arrivals, sc.cell.buffer, sc.cell.frame, sc.constraints);
            entry["solution"] = streamcap::to_json(sol);
        } else {
            if (mode == "min")
                throw std::runtime_error("min mode requires --fine");
            const auto sol = streamcap::max_playout_rate(arrivals, sc.cell.buffer,
                                                         sc.cell.frame, sc.constraints);
            entry["solution"] = streamcap::to_json(sol);
        }
        users.push_back(std::move(entry));
    }
    const json report{{"epsilon", sc.constraints.epsilon},
                      {"delta0", sc.constraints.delta0},
                      {"K", sc.cell.K},
                      {"buffer_packets", sc.cell.buffer},
                      {"users", users}};
    emit_formatted(report, out_path, format);
    return 0;
}

int cmd_allocate(const streamcap::Scenario& sc, const json& raw,
                 const std::string& objective, double umin, double umax,
                 std::vector<int> premium_ids, double k_p, const std::string& out_path,
                 const std::string& format) {
    json report;
    if (objective == "equal") {
        const auto arrivals = streamcap::equal_experience_arrivals(sc.cell);
        const auto sol = streamcap::max_playout_rate(arrivals, sc.cell.buffer,
                                                     sc.cell.frame, sc.constraints);
        report = json{{"objective", "equal"},
                      {"arrival_mean", arrivals.mean},
                      {"solution", streamcap::to_json(sol)}};
    } else if (objective == "max-users") {
        if (umin <= 0) umin = raw.value("U_min_bps", 0.0);
        if (umax <= 0) umax = raw.value("U_max_bps", 0.0);
        if (umin <= 0 || umax <= 0)
            throw std::runtime_error("max-users needs --umin and --umax (or scenario fields)");
        const auto res = streamcap::max_users_max_resolution(sc.cell, umin, umax,
                                                             sc.constraints.delta0);
        report = json{{"objective", "max-users"},
                      {"U_min_bps", umin},
                      {"U_max_bps", umax},
                      {"N", res.N},
                      {"selected_ids", res.selected_ids},
                      {"shares", res.plan.static_shares},
                      {"leftover", res.plan.leftover}};
    } else if (objective == "two-class") {
        if (premium_ids.empty() && raw.contains("premium_ids"))
            premium_ids = raw.at("premium_ids").get<std::vector<int>>();
        if (premium_ids.empty())
            throw std::runtime_error("two-class needs --premium ids (or scenario field)");
        if (k_p <= 0) k_p = raw.value("k_p", 1.0);
        streamcap::TwoClassConfig cfg;
        cfg.k_p = k_p;
        cfg.delta_p = raw.value("delta_p", sc.constraints.delta0);
        cfg.delta_r = raw.value("delta_r", sc.constraints.delta0);
        cfg.epsilon_p = raw.value("epsilon_p", sc.constraints.epsilon);
        cfg.epsilon_r = raw.value("epsilon_r", sc.constraints.epsilon);
        for (const auto& u : sc.cell.users) {
            const bool prem =
                std::find(premium_ids.begin(), premium_ids.end(), u.id) != premium_ids.end();
            (prem ? cfg.premium : cfg.regular).push_back(u.pmf);
        }
        const auto split = streamcap::two_class_split(cfg, sc.cell.K);
        report = streamcap::to_json(split);
        report["objective"] = "two-class";
        report["k_p"] = k_p;
    } else {
        throw std::runtime_error("objective must be equal, max-users or two-class");
    }
    emit_formatted(report, out_path, format);
    return 0;
}

int cmd_simulate(const streamcap::Scenario& sc, const std::string& out_path) {
    const double share = 1.0 / static_cast<double>(sc.cell.users.size());
    json users = json::array();
    for (const auto& u : sc.cell.users) {
        std::cerr << "simulating user " << u.id << "\n";
        const auto arrivals =
            streamcap::static_share_arrivals(u.pmf, sc.cell.K, share, sc.cell.frame);
        double u_rate = sc.u_init_bps;
        if (u_rate <= 0) {
            const auto sol = streamcap::max_playout_rate_fine(arrivals, sc.cell.buffer,
                                                              sc.cell.frame, sc.constraints);
            u_rate = sol.U_bps;
        }
        json entry{{"id", u.id}, {"policy", sc.policy}, {"rate_bps", u_rate}};
        if (sc.policy == "constant") {
            const double s_real = sc.cell.frame.packets_per_frame(u_rate);
            entry["report"] = streamcap::to_json(streamcap::run_constant_iid(
                arrivals, s_real, sc.cell.buffer, sc.frames, sc.runs, sc.seed,
                sc.cell.frame));
        } else {
            streamcap::AbrParams params;
            params.b_min = static_cast<int64_t>(sc.b_min_frac * static_cast<double>(sc.cell.buffer));
            params.b_max = static_cast<int64_t>(sc.b_max_frac * static_cast<double>(sc.cell.buffer));
            params.theta = sc.theta;
            params.u_init_bps = u_rate;
            entry["report"] = streamcap::to_json(streamcap::run_abr_iid(
                arrivals, params, sc.cell.buffer, sc.frames, sc.runs, sc.seed,
                sc.cell.frame));
        }
        users.push_back(std::move(entry));
    }
    const json report{{"frames", sc.frames},
                      {"runs", sc.runs},
                      {"seed", sc.seed},
                      {"policy", sc.policy},
                      {"users", users}};
    emit(report, out_path);
    return 0;
}

int cmd_compare(const std::vector<std::string>& report_paths,
                const std::string& out_path) {
    if (report_paths.size() < 2) throw std::runtime_error("compare needs at least two reports");
    std::vector<std::map<std::string, double>> flats;
    for (const auto& p : report_paths) {
        std::map<std::string, double> flat;
        flatten(streamcap::load_json_file(p), "", flat);
        flats.push_back(std::move(flat));
    }
    for (std::size_t i = 1; i < flats.size(); ++i) {
        if (flats[i].size() != flats[0].size()) throw std::runtime_error("mismatched schemas");
        auto a = flats[0].begin();
        for (auto b = flats[i].begin(); b != flats[i].end(); ++a, ++b)
            if (a->first != b->first) throw std::runtime_error("mismatched schemas");
    }

    std::ostringstream csv;
    csv << "field";
    for (const auto& p : report_paths) csv << "," << csv_escape(fs::path(p).filename().string());
    if (report_paths.size() == 2) csv << ",delta";
    csv << "\n";
    double max_abs_delta = 0.0;
    for (const auto& [key, v0] : flats[0]) {
        csv << csv_escape(key);
        for (const auto& flat : flats) csv << "," << flat.at(key);
        if (flats.size() == 2) {
            const double d = flats[1].at(key) - v0;
            max_abs_delta = std::max(max_abs_delta, std::abs(d));
            csv << "," << d;
        }
        csv << "\n";
    }

    if (out_path.empty()) {
        std::cout << csv.str();
    } else {
        const fs::path p(out_path);
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write " + out_path);
        out << csv.str();
        std::cerr << "wrote " << out_path << "\n";
    }
    std::cerr << "compared " << report_paths.size() << " reports, " << flats[0].size()
              << " fields";
    if (flats.size() == 2) std::cerr << ", max |delta| = " << max_abs_delta;
    std::cerr << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"live-streaming capacity toolkit"};
    app.require_subcommand(1);

    std::string trace_path, mcs_path, map_path, out_path;
    std::string scenario_path, format = "json", objective = "equal", mode = "max";
    std::vector<std::string> report_paths;
    std::vector<int> premium_ids;
    double share = 0.0, umin = 0.0, umax = 0.0, k_p = 0.0;
    bool fine = false;
    int64_t frames_override = 0;
    int runs_override = 0;
    uint64_t seed_override = 0;
    bool seed_set = false;

    auto* ingest = app.add_subcommand("ingest", "trace CSV -> per-user rate PMFs");
    ingest->add_option("--trace", trace_path, "trace CSV")->required();
    ingest->add_option("--mcs", mcs_path, "MCS table JSON")->required();
    ingest->add_option("--map", map_path, "signal map JSON (RSSI -> SINR)");
    ingest->add_option("--out", out_path, "output directory for PMF files");

    auto* analyze = app.add_subcommand("analyze", "per-user playout rate analysis");
    analyze->add_option("--scenario", scenario_path, "scenario JSON")->required();
    analyze->add_flag("--fine", fine, "fractional packets-per-frame resolution");
    analyze->add_option("--mode", mode, "max (outage-bound) or min (drop-bound)")
        ->check(CLI::IsMember({"max", "min"}));
    analyze->add_option("--share", share, "frame share per user (default 1/n)");
    analyze->add_option("--out", out_path, "output file");
    analyze->add_option("--format", format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));

    auto* allocate = app.add_subcommand("allocate", "frame-share allocation plans");
    allocate->add_option("--scenario", scenario_path, "scenario JSON")->required();
    allocate->add_option("--objective", objective, "equal, max-users or two-class")
        ->check(CLI::IsMember({"equal", "max-users", "two-class"}));
    allocate->add_option("--umin", umin, "guaranteed rate, bits/s");
    allocate->add_option("--umax", umax, "upgraded rate, bits/s");
    allocate->add_option("--premium", premium_ids, "premium user ids")->delimiter(',');
    allocate->add_option("--kp", k_p, "premium/regular rate ratio");
    allocate->add_option("--out", out_path, "output file");
    allocate->add_option("--format", format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));

    auto* simulate = app.add_subcommand("simulate", "frame-level buffer simulation");
    simulate->add_option("--scenario", scenario_path, "scenario JSON")->required();
    simulate->add_option("--frames", frames_override, "frames per run");
    simulate->add_option("--runs", runs_override, "replication count");
    auto* seed_opt = simulate->add_option("--seed", seed_override, "RNG seed");
    simulate->add_option("--out", out_path, "output file");

    auto* compare = app.add_subcommand("compare", "side-by-side report comparison");
    compare->add_option("--reports", report_paths, "report JSON files")
        ->required()
        ->expected(-2);
    compare->add_option("--out", out_path, "output CSV file");

    CLI11_PARSE(app, argc, argv);
    seed_set = seed_opt->count() > 0;

    try {
        if (ingest->parsed()) return cmd_ingest(trace_path, mcs_path, map_path, out_path);
        if (compare->parsed()) return cmd_compare(report_paths, out_path);

        const json raw = streamcap::load_json_file(scenario_path);
        streamcap::Scenario sc = streamcap::scenario_from_json(
            raw, fs::path(scenario_path).parent_path().string());
        if (frames_override > 0) sc.frames = frames_override;
        if (runs_override > 0) sc.runs = runs_override;
        if (seed_set) sc.seed = seed_override;

        if (analyze->parsed())
            return cmd_analyze(sc, fine, mode, share, out_path, format);
        if (allocate->parsed())
            return cmd_allocate(sc, raw, objective, umin, umax, premium_ids, k_p,
                                out_path, format);
        if (simulate->parsed()) return cmd_simulate(sc, out_path);
    } catch (const std::exception& e) {
        std::cout << json{{"error", {{"message", e.what()}}}}.dump(2) << "\n";
        return 1;
    }
    return 0;
}
