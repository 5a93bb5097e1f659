#include "rallykit/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace rallykit {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string format_vec3(const Eigen::Vector3d& v) {
    return "[" + format_double(v.x()) + "," + format_double(v.y()) + "," +
           format_double(v.z()) + "]";
}

void write_lines(const std::string& path,
                 const std::vector<std::string>& lines) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    for (const std::string& line : lines) out << line << '\n';
}

std::vector<std::string> trajectory_jsonl(const Trajectory& traj) {
    std::vector<std::string> rows;
    rows.reserve(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const BallState& s = traj.states[i];
        rows.push_back("{\"t\":" + format_double(traj.t[i]) +
                       ",\"px\":" + format_double(s.p.x()) +
                       ",\"py\":" + format_double(s.p.y()) +
                       ",\"pz\":" + format_double(s.p.z()) +
                       ",\"vx\":" + format_double(s.v.x()) +
                       ",\"vy\":" + format_double(s.v.y()) +
                       ",\"vz\":" + format_double(s.v.z()) + ",\"bounced\":" +
                       (traj.bounced_at(i) ? "1" : "0") + "}");
    }
    return rows;
}

std::vector<Measurement> read_measurements_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open measurement file: " + path);
    std::vector<Measurement> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": " + e.what());
        }
        Measurement m;
        m.t = row.at("t").get<double>();
        m.z = {row.at("zx").get<double>(), row.at("zy").get<double>(),
               row.at("zz").get<double>()};
        m.d = row.at("d").get<double>();
        out.push_back(m);
    }
    return out;
}

std::string estimate_jsonl_row(double t, const BallState& estimate,
                               bool reinit) {
    return "{\"t\":" + format_double(t) +
           ",\"px\":" + format_double(estimate.p.x()) +
           ",\"py\":" + format_double(estimate.p.y()) +
           ",\"pz\":" + format_double(estimate.p.z()) +
           ",\"vx\":" + format_double(estimate.v.x()) +
           ",\"vy\":" + format_double(estimate.v.y()) +
           ",\"vz\":" + format_double(estimate.v.z()) +
           ",\"reinit\":" + (reinit ? "1" : "0") + "}";
}

}  // namespace rallykit
