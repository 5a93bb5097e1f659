#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rallykit/config.hpp"
#include "rallykit/estimator.hpp"
#include "rallykit/io.hpp"
#include "rallykit/motionlib.hpp"
#include "rallykit/planner.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace rallykit;
using nlohmann::json;
using oracles::Vec3;

namespace {

std::string bin() {
    const char* b = std::getenv("RALLYKIT_BIN");
    REQUIRE(b != nullptr);
    return std::string("\"") + b + "\"";
}

int run_cmd(const std::string& cmd, const std::string& capture_dir) {
    const std::string full = cmd + " > \"" + capture_dir + "/stdout.txt\" 2> \"" +
                             capture_dir + "/stderr.txt\"";
    const int status = std::system(full.c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string captured(const std::string& capture_dir, const char* name) {
    return oracles::read_file(capture_dir + "/" + name);
}

std::vector<std::string> file_lines(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

// Last value of a "# key,value" comment in a report CSV.
double summary_value(const std::vector<std::string>& lines,
                     const std::string& key) {
    const std::string prefix = "# " + key + ",";
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
        if (it->rfind(prefix, 0) == 0) {
            return std::stod(it->substr(prefix.size()));
        }
    }
    REQUIRE(false);
    return 0.0;
}

}  // namespace

TEST_CASE("bare or misspelled invocations exit with usage errors") {
    oracles::TempDir tmp;
    CHECK(run_cmd(bin(), tmp.path()) == 2);
    CHECK(run_cmd(bin() + " frobnicate", tmp.path()) == 2);
    CHECK(run_cmd(bin() + " simulate --no-such-flag", tmp.path()) == 2);
    CHECK(run_cmd(bin() + " simulate --ablate warp-drive", tmp.path()) == 2);
    CHECK(run_cmd(bin() + " --help", tmp.path()) == 0);
}

TEST_CASE("simulate reruns byte-identically at a fixed seed") {
    oracles::TempDir tmp;
    const std::string args = " simulate --seed 7 --episodes 6 --out ";
    CHECK(run_cmd(bin() + args + "\"" + tmp.path() + "/d1\"", tmp.path()) == 0);
    CHECK(run_cmd(bin() + args + "\"" + tmp.path() + "/d2\"", tmp.path()) == 0);

    const std::string r1 = oracles::read_file(tmp.path() + "/d1/report.csv");
    const std::string r2 = oracles::read_file(tmp.path() + "/d2/report.csv");
    CHECK(r1 == r2);
    CHECK(oracles::read_file(tmp.path() + "/d1/convergence.csv") ==
          oracles::read_file(tmp.path() + "/d2/convergence.csv"));

    const std::vector<std::string> lines =
        file_lines(tmp.path() + "/d1/report.csv");
    REQUIRE(lines.size() > 2);
    CHECK(lines[0] == "# seed 7");
    CHECK(lines[1].rfind("episode,detected,hit,", 0) == 0);
    std::size_t data_rows = 0;
    for (const std::string& l : lines) {
        if (!l.empty() && l[0] != '#' && l.rfind("episode,", 0) != 0) {
            ++data_rows;
        }
    }
    CHECK(data_rows == 6);
    CHECK(captured(tmp.path(), "stdout.txt").rfind("simulate:", 0) == 0);
}

TEST_CASE("traces land next to the reports when requested") {
    oracles::TempDir tmp;
    const std::string out = tmp.path() + "/t";
    CHECK(run_cmd(bin() + " simulate --seed 3 --episodes 2 --traces --out \"" +
                      out + "\"",
                  tmp.path()) == 0);
    REQUIRE(fs::exists(out + "/trace_000000.jsonl"));
    REQUIRE(fs::exists(out + "/trace_000001.jsonl"));
    const std::vector<std::string> rows =
        file_lines(out + "/trace_000000.jsonl");
    REQUIRE_FALSE(rows.empty());
    CHECK(rows.front().find("\"event\":\"launch\"") != std::string::npos);
    CHECK(rows.back().find("\"event\":\"outcome\"") != std::string::npos);
}

TEST_CASE("ablate writes one report pair per variant") {
    oracles::TempDir tmp;
    const std::string out = tmp.path() + "/a";
    CHECK(run_cmd(bin() +
                      " ablate --seed 5 --episodes 4 --ablate no-collision "
                      "--out \"" +
                      out + "\"",
                  tmp.path()) == 0);
    CHECK(fs::exists(out + "/report_full.csv"));
    CHECK(fs::exists(out + "/convergence_full.csv"));
    CHECK(fs::exists(out + "/report_no-collision.csv"));
    CHECK(fs::exists(out + "/convergence_no-collision.csv"));
    CHECK_FALSE(fs::exists(out + "/report_zero-init.csv"));
    const std::string log = captured(tmp.path(), "stdout.txt");
    CHECK(log.find("full:") != std::string::npos);
    CHECK(log.find("no-collision:") != std::string::npos);
}

TEST_CASE("filter replay matches the library run row for row") {
    oracles::TempDir tmp;
    const std::string input = tmp.path() + "/meas.jsonl";
    const std::vector<Measurement> meas = {
        {Vec3(1.1, 0.05, 0.35), 0.0, 2.7},
        {Vec3(1.02, 0.05, 0.38), 1.0 / 60.0, 2.6},
        {Vec3(0.95, 0.04, 0.40), 2.0 / 60.0, 2.5}};
    std::vector<std::string> rows;
    for (const Measurement& m : meas) {
        json row;
        row["t"] = m.t;
        row["zx"] = m.z.x();
        row["zy"] = m.z.y();
        row["zz"] = m.z.z();
        row["d"] = m.d;
        rows.push_back(row.dump());
    }
    write_lines(input, rows);

    const std::string out = tmp.path() + "/f";
    CHECK(run_cmd(bin() + " filter-replay --input \"" + input + "\" --out \"" +
                      out + "\"",
                  tmp.path()) == 0);

    const GlobalConfig gc;
    EstimatorParams params = gc.estimator;
    params.p_init =
        EstimatorParams::default_p_init(gc.p_init_pos, gc.p_init_vel);
    params.physics = gc.physics;
    params.model = gc.scenario.drag_model;
    AdaptiveEkf ekf(params);
    std::vector<std::string> want;
    for (const Measurement& m : meas) {
        const UpdateResult res = ekf.update(m);
        const bool reinit = res.status == UpdateStatus::reinit_gap ||
                            res.status == UpdateStatus::reinit_return;
        want.push_back(estimate_jsonl_row(m.t, res.estimate, reinit));
    }

    const std::vector<std::string> got = file_lines(out + "/estimates.jsonl");
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == want[i]);
}

TEST_CASE("the one-shot plan prints the library's own answer") {
    oracles::TempDir tmp;
    CHECK(run_cmd(bin() + " plan --p-hit 0 0 0.6 --v-in -4 0.5 -1",
                  tmp.path()) == 0);
    const json out = json::parse(captured(tmp.path(), "stdout.txt"));

    const PlannerParams pp = GlobalConfig().planner;
    const Vec3 v_out = desired_outgoing_velocity(
        Vec3(0.0, 0.0, 0.6), pp.p_target, pp.t_f, pp.k, pp.g_z);
    const StrikePlan plan = racket_plan(Vec3(-4.0, 0.5, -1.0), v_out, pp.e);
    for (int c = 0; c < 3; ++c) {
        CHECK(std::abs(out.at("v_out")[c].get<double>() - plan.v_out[c])
              < 1e-6);
        CHECK(std::abs(out.at("n_hat")[c].get<double>() - plan.n_hat[c])
              < 1e-6);
    }
    CHECK(std::abs(out.at("v_n").get<double>() - plan.v_n) < 1e-6);
}

TEST_CASE("motion library tools build, validate, and query one store") {
    oracles::TempDir tmp;
    const std::string lib_dir = tmp.path() + "/lib";
    CHECK(run_cmd(bin() + " matchlib build --seed 3 --count 12 --out \"" +
                      lib_dir + "\"",
                  tmp.path()) == 0);
    CHECK(fs::exists(lib_dir + "/index.json"));
    const json built = json::parse(captured(tmp.path(), "stdout.txt"));
    CHECK(built.at("clips").get<int>() == 12);
    CHECK(built.at("accepted").get<int>() == 12);

    CHECK(run_cmd(bin() + " matchlib validate --lib \"" + lib_dir + "\"",
                  tmp.path()) == 0);
    const std::string log = captured(tmp.path(), "stdout.txt");
    CHECK(log.find("{\"clips\":12,\"accepted\":12}") != std::string::npos);

    CHECK(run_cmd(bin() + " matchlib query --lib \"" + lib_dir +
                      "\" --p-hit 0.3 -0.2 0.9 --eps 0 --seed 0",
                  tmp.path()) == 0);
    const json q = json::parse(captured(tmp.path(), "stdout.txt"));

    const MotionLibrary lib = synth_library(SwingStyle{}, 12, 3);
    const std::size_t want = lib.match(Vec3(0.3, -0.2, 0.9),
                                       GlobalConfig().match_anchor, 0.0,
                                       std::uint64_t{0});
    CHECK(q.at("index").get<std::size_t>() == want);
}

TEST_CASE("merged reports pool episodes and prediction-weighted means") {
    oracles::TempDir tmp;
    const std::string d1 = tmp.path() + "/d1";
    const std::string d2 = tmp.path() + "/d2";
    CHECK(run_cmd(bin() + " simulate --seed 11 --episodes 6 --out \"" + d1 +
                      "\"",
                  tmp.path()) == 0);
    CHECK(run_cmd(bin() + " simulate --seed 12 --episodes 6 --out \"" + d2 +
                      "\"",
                  tmp.path()) == 0);
    const std::string dm = tmp.path() + "/dm";
    CHECK(run_cmd(bin() + " report \"" + d1 + "/report.csv\" \"" + d2 +
                      "/report.csv\" --out \"" + dm + "\"",
                  tmp.path()) == 0);

    const std::vector<std::string> merged =
        file_lines(dm + "/report_merged.csv");
    CHECK(summary_value(merged, "n_episodes") == 12);

    const std::vector<std::string> l1 = file_lines(d1 + "/report.csv");
    const std::vector<std::string> l2 = file_lines(d2 + "/report.csv");
    const double n1 = summary_value(l1, "n_pred");
    const double n2 = summary_value(l2, "n_pred");
    CHECK(summary_value(merged, "n_pred") == n1 + n2);
    const double want_pos = (n1 * summary_value(l1, "e_predpos") +
                             n2 * summary_value(l2, "e_predpos")) /
                            (n1 + n2);
    CHECK(std::abs(summary_value(merged, "e_predpos") - want_pos) < 1e-6);

    std::size_t data_rows = 0;
    for (const std::string& l : merged) {
        if (!l.empty() && l[0] != '#' && l.rfind("episode,", 0) != 0) {
            ++data_rows;
        }
    }
    CHECK(data_rows == 12);
}

TEST_CASE("configuration errors exit distinctly and name the problem") {
    oracles::TempDir tmp;
    const std::string cfg = tmp.path() + "/bad.json";
    oracles::write_file(cfg, R"({"physics": {"c_v": 1.5}})");
    CHECK(run_cmd(bin() + " simulate --config \"" + cfg + "\"", tmp.path())
          == 2);
    const std::string err = captured(tmp.path(), "stderr.txt");
    CHECK(err.rfind("config error:", 0) == 0);
    CHECK(err.find("c_v") != std::string::npos);

    CHECK(run_cmd(bin() + " simulate --config \"" + tmp.path() +
                      "/absent.json\"",
                  tmp.path()) == 2);

    // Missing runtime inputs are operational failures, not usage errors.
    CHECK(run_cmd(bin() + " filter-replay --input \"" + tmp.path() +
                      "/absent.jsonl\"",
                  tmp.path()) == 1);
}

TEST_CASE("the output directory resolves flag, then config, then environment") {
    oracles::TempDir tmp;
    const std::string env_dir = tmp.path() + "/from_env";
    const std::string flag_dir = tmp.path() + "/from_flag";
    const std::string cfg_dir = tmp.path() + "/from_cfg";

    CHECK(run_cmd("RALLYKIT_OUT=\"" + env_dir + "\" " + bin() +
                      " simulate --seed 1 --episodes 2",
                  tmp.path()) == 0);
    CHECK(fs::exists(env_dir + "/report.csv"));

    CHECK(run_cmd("RALLYKIT_OUT=\"" + env_dir + "\" " + bin() +
                      " simulate --seed 1 --episodes 2 --out \"" + flag_dir +
                      "\"",
                  tmp.path()) == 0);
    CHECK(fs::exists(flag_dir + "/report.csv"));

    const std::string cfg = tmp.path() + "/cfg.json";
    oracles::write_file(cfg, "{\"out_dir\": \"" + cfg_dir + "\"}");
    CHECK(run_cmd("RALLYKIT_OUT=\"" + env_dir + "/unused\" " + bin() +
                      " simulate --seed 1 --episodes 2 --config \"" + cfg +
                      "\"",
                  tmp.path()) == 0);
    CHECK(fs::exists(cfg_dir + "/report.csv"));
    CHECK_FALSE(fs::exists(env_dir + "/unused"));
}

TEST_CASE("nothing is written outside the chosen output directory") {
    oracles::TempDir tmp;
    const std::string scratch = tmp.path() + "/scratch";
    const std::string out = tmp.path() + "/out";
    fs::create_directories(scratch);
    CHECK(run_cmd("cd \"" + scratch + "\" && " + bin() +
                      " simulate --seed 2 --episodes 2 --traces --out \"" +
                      out + "\"",
                  tmp.path()) == 0);
    CHECK(fs::exists(out + "/report.csv"));
    CHECK(fs::is_empty(scratch));
}
