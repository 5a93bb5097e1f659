#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rallykit/config.hpp"
#include "rallykit/estimator.hpp"
#include "rallykit/io.hpp"
#include "rallykit/motionlib.hpp"
#include "rallykit/planner.hpp"
#include "rallykit/simulator.hpp"

namespace fs = std::filesystem;
using namespace rallykit;

namespace {

GlobalConfig load_config(const std::string& path) {
    return path.empty() ? GlobalConfig() : GlobalConfig::load(path);
}

// --out flag, else an explicitly configured out_dir, else RALLYKIT_OUT,
// else the built-in default.
std::string effective_out(const GlobalConfig& cfg, const std::string& flag) {
    if (!flag.empty()) return flag;
    if (cfg.out_dir != "out") return cfg.out_dir;
    if (const char* env = std::getenv("RALLYKIT_OUT"); env && *env) return env;
    return cfg.out_dir;
}

void set_ablation(AblationConfig& a, const std::string& name) {
    if (name == "no-collision") {
        a.no_collision = true;
    } else if (name == "no-adaptive-noise") {
        a.no_adaptive_noise = true;
    } else if (name == "zero-init") {
        a.zero_init = true;
    } else {
        throw std::invalid_argument("unknown ablation: " + name);
    }
}

Eigen::Vector3d to_vec3(const std::vector<double>& v) {
    return {v[0], v[1], v[2]};
}

void write_batch(const BatchResult& br, std::uint64_t seed,
                 const std::string& out_dir, const std::string& suffix) {
    fs::create_directories(out_dir);
    write_lines(out_dir + "/report" + suffix + ".csv",
                report_csv(br.outcomes, br.report, seed));
    write_lines(out_dir + "/convergence" + suffix + ".csv",
                convergence_csv(br.report, seed));
    for (std::size_t i = 0; i < br.traces.size(); ++i) {
        char name[48];
        std::snprintf(name, sizeof(name), "/trace%s_%06zu.jsonl",
                      suffix.c_str(), i);
        write_lines(out_dir + name, br.traces[i]);
    }
}

void print_summary(const char* tag, const MetricsReport& r) {
    std::cout << tag << ": episodes " << r.n_episodes << " sr_det "
              << format_double(r.sr_det) << " sr_hit " << format_double(r.sr_hit)
              << " sr_return " << format_double(r.sr_return) << " e_predpos "
              << format_double(r.e_predpos) << "\n";
}

int cmd_simulate(const GlobalConfig& cfg, const std::string& out_dir) {
    const SimulationConfig sim = cfg.to_simulation();
    std::optional<MotionLibrary> lib;
    if (cfg.library_size > 0) {
        lib = synth_library(cfg.style, cfg.library_size, cfg.seed);
    }
    const BatchResult br = run_batch(sim, lib ? &*lib : nullptr);
    write_batch(br, sim.seed, out_dir, "");
    print_summary("simulate", br.report);
    return 0;
}

int cmd_ablate(const GlobalConfig& cfg, const std::string& out_dir,
               const std::vector<std::string>& which) {
    std::vector<std::string> names = which;
    if (names.empty()) {
        names = {"no-collision", "no-adaptive-noise", "zero-init"};
    }
    std::optional<MotionLibrary> lib;
    if (cfg.library_size > 0) {
        lib = synth_library(cfg.style, cfg.library_size, cfg.seed);
    }
    const MotionLibrary* lib_ptr = lib ? &*lib : nullptr;

    const BatchResult full = run_batch(cfg.to_simulation(), lib_ptr);
    write_batch(full, cfg.seed, out_dir, "_full");
    print_summary("full", full.report);
    for (const std::string& name : names) {
        GlobalConfig variant = cfg;
        variant.scenario.ablations = AblationConfig{};
        set_ablation(variant.scenario.ablations, name);
        const BatchResult br = run_batch(variant.to_simulation(), lib_ptr);
        write_batch(br, cfg.seed, out_dir, "_" + name);
        print_summary(name.c_str(), br.report);
    }
    return 0;
}

int cmd_filter_replay(const GlobalConfig& cfg, const std::string& input,
                      const std::string& out_dir) {
    const std::vector<Measurement> rows = read_measurements_jsonl(input);
    EstimatorParams params = cfg.estimator;
    params.p_init = EstimatorParams::default_p_init(cfg.p_init_pos,
                                                    cfg.p_init_vel);
    params.physics = cfg.physics;
    params.model = cfg.scenario.drag_model;
    AdaptiveEkf ekf(params);
    std::vector<std::string> out;
    out.reserve(rows.size());
    for (const Measurement& m : rows) {
        const UpdateResult res = ekf.update(m);
        const bool reinit = res.status == UpdateStatus::reinit_gap ||
                            res.status == UpdateStatus::reinit_return;
        out.push_back(estimate_jsonl_row(m.t, res.estimate, reinit));
    }
    fs::create_directories(out_dir);
    write_lines(out_dir + "/estimates.jsonl", out);
    std::cout << "filter-replay: " << rows.size() << " rows -> " << out_dir
              << "/estimates.jsonl\n";
    return 0;
}

int cmd_plan(const GlobalConfig& cfg, const std::vector<double>& p_hit,
             const std::vector<double>& v_in,
             const std::vector<double>& p_target) {
    PlannerParams pp = cfg.planner;
    const Eigen::Vector3d hit = to_vec3(p_hit);
    const Eigen::Vector3d target =
        p_target.empty() ? pp.p_target : to_vec3(p_target);
    const Eigen::Vector3d v_out =
        desired_outgoing_velocity(hit, target, pp.t_f, pp.k, pp.g_z);
    const StrikePlan plan = racket_plan(to_vec3(v_in), v_out, pp.e);
    std::cout << "{\"v_out\":" << format_vec3(plan.v_out)
              << ",\"n_hat\":" << format_vec3(plan.n_hat)
              << ",\"v_n\":" << format_double(plan.v_n)
              << ",\"racket_velocity\":" << format_vec3(plan.racket_velocity())
              << "}\n";
    return 0;
}

int cmd_matchlib_build(const GlobalConfig& cfg, const std::string& dir) {
    MotionLibrary lib = synth_library(cfg.style, cfg.library_size, cfg.seed);
    lib.revalidate(cfg.thresholds);
    std::size_t accepted = 0;
    for (const ClipVerdict& v : lib.quality()) accepted += v.accepted ? 1 : 0;
    fs::create_directories(dir);
    lib.save(dir);
    std::cout << "{\"seed\":" << cfg.seed << ",\"clips\":" << lib.size()
              << ",\"accepted\":" << accepted << ",\"dir\":\"" << dir
              << "\"}\n";
    return 0;
}

int cmd_matchlib_validate(const GlobalConfig& cfg, const std::string& dir) {
    MotionLibrary lib = MotionLibrary::load(dir);
    lib.revalidate(cfg.thresholds);
    std::size_t accepted = 0;
    for (std::size_t i = 0; i < lib.size(); ++i) {
        const ClipVerdict& v = lib.quality()[i];
        accepted += v.accepted ? 1 : 0;
        std::string reasons;
        for (const std::string& r : v.reasons) {
            if (!reasons.empty()) reasons += "\",\"";
            reasons += r;
        }
        std::cout << "{\"clip\":" << i << ",\"accepted\":"
                  << (v.accepted ? "1" : "0") << ",\"reasons\":["
                  << (reasons.empty() ? "" : "\"" + reasons + "\"") << "]}\n";
    }
    std::cout << "{\"clips\":" << lib.size() << ",\"accepted\":" << accepted
              << "}\n";
    return 0;
}

int cmd_matchlib_query(const GlobalConfig& cfg, const std::string& dir,
                       const std::vector<double>& p_hit,
                       const std::vector<double>& anchor, double eps,
                       std::uint64_t seed) {
    MotionLibrary lib = MotionLibrary::load(dir);
    const Eigen::Vector3d a =
        anchor.empty() ? cfg.match_anchor : to_vec3(anchor);
    const std::size_t idx = lib.match(to_vec3(p_hit), a, eps, seed);
    std::cout << "{\"seed\":" << seed << ",\"index\":" << idx
              << ",\"feature\":" << format_vec3(lib.feature(idx)) << "}\n";
    return 0;
}

struct EpisodeRow {
    std::vector<std::string> cells;
};

int cmd_report(const std::vector<std::string>& inputs,
               const std::string& out_dir) {
    std::string header;
    std::vector<EpisodeRow> rows;
    for (const std::string& path : inputs) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open report: " + path);
        std::string line;
        bool saw_header = false;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            if (!saw_header) {
                saw_header = true;
                if (header.empty()) {
                    header = line;
                } else if (header != line) {
                    throw std::runtime_error("mismatched report columns: " +
                                             path);
                }
                continue;
            }
            EpisodeRow row;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) row.cells.push_back(cell);
            if (row.cells.size() < 19) {
                throw std::runtime_error("short report row in " + path);
            }
            rows.push_back(std::move(row));
        }
    }
    if (header.empty()) throw std::runtime_error("no report header found");

    std::size_t n_det = 0, n_hit = 0, n_ret = 0, n_strike = 0, n_success = 0;
    double sum_e_p = 0, sum_e_v = 0, sum_e_o = 0;
    double sum_pos = 0, sum_vel = 0, sum_tau = 0;
    std::size_t n_pred = 0;
    for (const EpisodeRow& r : rows) {
        n_det += r.cells[1] == "1";
        n_hit += r.cells[2] == "1";
        n_ret += r.cells[3] == "1";
        if (r.cells[4] == "1") {
            ++n_strike;
            sum_e_p += std::stod(r.cells[5]);
            sum_e_v += std::stod(r.cells[6]);
            sum_e_o += std::stod(r.cells[7]);
            n_success += r.cells[8] == "1";
        }
        const std::size_t np = std::stoul(r.cells[10]);
        n_pred += np;
        sum_pos += static_cast<double>(np) * std::stod(r.cells[11]);
        sum_vel += static_cast<double>(np) * std::stod(r.cells[12]);
        sum_tau += static_cast<double>(np) * std::stod(r.cells[13]);
    }
    const double n_ep = static_cast<double>(rows.size());
    std::vector<std::string> out;
    out.push_back("# merged from " + std::to_string(inputs.size()) + " files");
    out.push_back(header);
    for (const EpisodeRow& r : rows) {
        std::string line = r.cells[0];
        for (std::size_t i = 1; i < r.cells.size(); ++i) line += "," + r.cells[i];
        out.push_back(line);
    }
    out.push_back("# summary");
    out.push_back("# n_episodes," + std::to_string(rows.size()));
    out.push_back("# sr_det," +
                  format_double(rows.empty() ? 0.0 : n_det / n_ep));
    out.push_back("# sr_hit," +
                  format_double(rows.empty() ? 0.0 : n_hit / n_ep));
    out.push_back("# sr_return," +
                  format_double(rows.empty() ? 0.0 : n_ret / n_ep));
    out.push_back("# n_strikes," + std::to_string(n_strike));
    const double n_s = static_cast<double>(n_strike);
    out.push_back("# sr," + format_double(n_strike ? n_success / n_s : 0.0));
    out.push_back("# mean_e_p," + format_double(n_strike ? sum_e_p / n_s : 0.0));
    out.push_back("# mean_e_v," + format_double(n_strike ? sum_e_v / n_s : 0.0));
    out.push_back("# mean_e_o," + format_double(n_strike ? sum_e_o / n_s : 0.0));
    out.push_back("# n_pred," + std::to_string(n_pred));
    const double n_p = static_cast<double>(n_pred);
    out.push_back("# e_predpos," + format_double(n_pred ? sum_pos / n_p : 0.0));
    out.push_back("# e_predvel," + format_double(n_pred ? sum_vel / n_p : 0.0));
    out.push_back("# e_predtau," + format_double(n_pred ? sum_tau / n_p : 0.0));
    fs::create_directories(out_dir);
    write_lines(out_dir + "/report_merged.csv", out);
    std::cout << "report: " << rows.size() << " episodes -> " << out_dir
              << "/report_merged.csv\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"synthetic table-tennis rally stack: simulate, ablate, "
                 "replay, plan, match"};
    app.require_subcommand(1);

    std::string config_path, out_flag;
    std::uint64_t seed = 0;
    int episodes = 0;
    std::vector<std::string> ablate_flags;
    std::string drag_model;
    bool traces = false;

    const auto add_common = [&](CLI::App* sub, bool sim_flags) {
        sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--out", out_flag, "output directory");
        if (sim_flags) {
            sub->add_option("--seed", seed, "master seed override");
            sub->add_option("--episodes", episodes, "episode count override")
                ->check(CLI::PositiveNumber);
            sub->add_option("--ablate", ablate_flags, "ablation switches")
                ->check(CLI::IsMember(
                    {"no-collision", "no-adaptive-noise", "zero-init"}));
            sub->add_option("--drag-model", drag_model, "flight drag model")
                ->check(CLI::IsMember({"quadratic", "linear"}));
            sub->add_flag("--traces", traces, "emit per-episode JSONL traces");
        }
    };

    CLI::App* sim = app.add_subcommand("simulate", "run one batch");
    add_common(sim, true);

    CLI::App* abl = app.add_subcommand(
        "ablate", "run the full loop plus each ablation variant");
    add_common(abl, true);

    CLI::App* replay = app.add_subcommand(
        "filter-replay", "measurement JSONL through the filter");
    std::string replay_input;
    replay->add_option("--input", replay_input, "measurement JSONL file")
        ->required();
    add_common(replay, false);

    CLI::App* plan = app.add_subcommand("plan", "one-shot strike plan");
    std::vector<double> plan_p_hit, plan_v_in, plan_p_target;
    plan->add_option("--p-hit", plan_p_hit, "contact point")
        ->expected(3)
        ->required();
    plan->add_option("--v-in", plan_v_in, "incoming ball velocity")
        ->expected(3)
        ->required();
    plan->add_option("--p-target", plan_p_target, "landing target")
        ->expected(3);
    plan->add_option("--config", config_path, "JSON config file");

    CLI::App* matchlib =
        app.add_subcommand("matchlib", "motion library tools");
    matchlib->require_subcommand(1);
    CLI::App* ml_build = matchlib->add_subcommand("build", "generate clips");
    std::string lib_dir;
    ml_build->add_option("--config", config_path, "JSON config file");
    ml_build->add_option("--out", out_flag, "output directory");
    ml_build->add_option("--seed", seed, "master seed override");
    ml_build->add_option("--count", episodes, "clip count override")
        ->check(CLI::PositiveNumber);
    CLI::App* ml_validate =
        matchlib->add_subcommand("validate", "re-validate a saved library");
    ml_validate->add_option("--lib", lib_dir, "library directory")->required();
    ml_validate->add_option("--config", config_path, "JSON config file");
    CLI::App* ml_query =
        matchlib->add_subcommand("query", "nearest clip for a hit target");
    std::vector<double> q_p_hit, q_anchor;
    double q_eps = -1.0;
    ml_query->add_option("--lib", lib_dir, "library directory")->required();
    ml_query->add_option("--p-hit", q_p_hit, "hit target")
        ->expected(3)
        ->required();
    ml_query->add_option("--anchor", q_anchor, "anchor position")->expected(3);
    ml_query->add_option("--eps", q_eps, "perturbation radius");
    ml_query->add_option("--seed", seed, "perturbation seed");
    ml_query->add_option("--config", config_path, "JSON config file");

    CLI::App* report =
        app.add_subcommand("report", "merge episode-row report CSVs");
    std::vector<std::string> report_inputs;
    report->add_option("inputs", report_inputs, "report CSV files")
        ->required();
    report->add_option("--out", out_flag, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        GlobalConfig cfg = load_config(config_path);
        if (sim->count("--seed") || abl->count("--seed") ||
            ml_build->count("--seed")) {
            cfg.seed = seed;
        }
        if (sim->count("--episodes") || abl->count("--episodes")) {
            cfg.scenario.n_episodes = episodes;
        }
        if (ml_build->count("--count")) cfg.library_size = episodes;
        if (!drag_model.empty()) {
            cfg.scenario.drag_model = drag_model == "linear"
                                          ? DragModel::linear
                                          : DragModel::quadratic;
        }
        if (traces) cfg.scenario.emit_traces = true;
        if (sim->parsed()) {
            for (const std::string& a : ablate_flags) {
                set_ablation(cfg.scenario.ablations, a);
            }
            return cmd_simulate(cfg, effective_out(cfg, out_flag));
        }
        if (abl->parsed()) {
            return cmd_ablate(cfg, effective_out(cfg, out_flag), ablate_flags);
        }
        if (replay->parsed()) {
            return cmd_filter_replay(cfg, replay_input,
                                     effective_out(cfg, out_flag));
        }
        if (plan->parsed()) {
            return cmd_plan(cfg, plan_p_hit, plan_v_in, plan_p_target);
        }
        if (matchlib->parsed()) {
            if (ml_build->parsed()) {
                const std::string dir = out_flag.empty()
                                            ? effective_out(cfg, "") + "/library"
                                            : out_flag;
                return cmd_matchlib_build(cfg, dir);
            }
            if (ml_validate->parsed()) return cmd_matchlib_validate(cfg, lib_dir);
            if (ml_query->parsed()) {
                const double eps = q_eps >= 0.0 ? q_eps : cfg.eps_scale;
                const std::uint64_t s =
                    ml_query->count("--seed") ? seed : cfg.seed;
                return cmd_matchlib_query(cfg, lib_dir, q_p_hit, q_anchor, eps,
                                          s);
            }
        }
        if (report->parsed()) {
            return cmd_report(report_inputs, effective_out(cfg, out_flag));
        }
        std::cerr << "no subcommand\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
