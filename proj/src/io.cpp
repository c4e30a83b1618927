#include "kitecert/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace kitecert {

namespace {
using nlohmann::json;

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.push_back("");
    return out;
}

double parse_double(const std::string& s) {
    return std::stod(s);
}
}  // namespace

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << content;
}

void save_trajectory(const std::string& base_path, const TrajectoryRecord& rec,
                     double scenario_e0) {
    std::ostringstream csv;
    csv << "k,theta,phi,psi,est_theta,est_phi,est_psi,est_e0,est_v0,u,v0,thrust,height,solver_ok\n";
    for (std::size_t k = 0; k < rec.states.size(); ++k) {
        csv << k;
        for (int i = 0; i < 3; ++i) csv << ',' << fmt_double(rec.states[k][i]);
        for (int i = 0; i < 5; ++i) csv << ',' << fmt_double(rec.estimates[k][i]);
        if (k < rec.inputs.size()) {
            csv << ',' << fmt_double(rec.inputs[k]);
            csv << ',' << fmt_double(rec.wind_speed[k]);
            csv << ',' << fmt_double(rec.thrust_n[k]);
            csv << ',' << fmt_double(rec.height_m[k]);
            csv << ',' << int(rec.solver_ok[k]);
        } else {
            csv << ",," << fmt_double(rec.wind_speed[k]) << ",,"
                << fmt_double(rec.height_m[k]) << ',';
        }
        csv << '\n';
    }
    write_text_file(base_path + ".csv", csv.str());

    json meta;
    meta["scenario_id"] = rec.scenario_id;
    meta["controller_id"] = rec.controller_id;
    meta["n_sim"] = rec.n_sim;
    meta["u_prev0"] = rec.u_prev0;
    meta["faulted"] = rec.faulted;
    meta["fault_step"] = rec.fault_step;
    meta["scenario_e0"] = scenario_e0;
    write_text_file(base_path + ".meta.json", meta.dump(1) + "\n");
}

std::pair<TrajectoryRecord, double> load_trajectory(const std::string& base_path,
                                                    const KiteParams& kp) {
    const json meta = json::parse(read_text_file(base_path + ".meta.json"));
    TrajectoryRecord rec;
    rec.scenario_id = meta["scenario_id"];
    rec.controller_id = meta["controller_id"];
    rec.n_sim = meta["n_sim"];
    rec.u_prev0 = meta["u_prev0"];
    rec.faulted = meta["faulted"];
    rec.fault_step = meta["fault_step"];
    const double e0 = meta["scenario_e0"];

    std::istringstream csv(read_text_file(base_path + ".csv"));
    std::string line;
    std::getline(csv, line);  // header
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 14)
            throw std::runtime_error("load_trajectory: malformed row in " + base_path);
        rec.states.push_back({parse_double(f[1]), parse_double(f[2]), parse_double(f[3])});
        rec.estimates.push_back({parse_double(f[4]), parse_double(f[5]),
                                 parse_double(f[6]), parse_double(f[7]),
                                 parse_double(f[8])});
        if (!f[9].empty()) {
            rec.inputs.push_back(parse_double(f[9]));
            rec.wind_speed.push_back(parse_double(f[10]));
            rec.thrust_n.push_back(parse_double(f[11]));
            rec.height_m.push_back(parse_double(f[12]));
            rec.solver_ok.push_back(static_cast<std::uint8_t>(std::stoi(f[13])));
        } else {
            rec.wind_speed.push_back(parse_double(f[10]));
            rec.height_m.push_back(parse_double(f[12]));
        }
    }

    // The cached columns are redundant; verify them against the states.
    for (std::size_t k = 0; k < rec.states.size(); ++k) {
        const KiteState x{rec.states[k][0], rec.states[k][1], rec.states[k][2]};
        const double h = height(x, kp);
        if (std::abs(h - rec.height_m[k]) > 1e-9 * std::max(1.0, std::abs(h)))
            throw std::runtime_error("load_trajectory: cached height mismatch in " +
                                     base_path);
        if (k < rec.inputs.size()) {
            const double t = thrust(x, rec.wind_speed[k], rec.inputs[k], e0, kp);
            if (std::abs(t - rec.thrust_n[k]) > 1e-9 * std::max(1.0, std::abs(t)))
                throw std::runtime_error("load_trajectory: cached thrust mismatch in " +
                                         base_path);
        }
    }
    return {rec, e0};
}

void save_dataset(const std::string& base_path, const Dataset& ds) {
    std::ostringstream csv;
    csv << "theta,phi,psi,u_prev,u_target\n";
    for (const auto& p : ds.points) {
        csv << fmt_double(p.theta) << ',' << fmt_double(p.phi) << ','
            << fmt_double(p.psi) << ',' << fmt_double(p.u_prev) << ','
            << fmt_double(p.u_target) << '\n';
    }
    write_text_file(base_path + ".csv", csv.str());

    json meta;
    meta["kind"] = ds.kind;
    meta["eta"] = ds.eta;
    meta["seed"] = ds.seed;
    meta["solver_faults"] = ds.solver_faults;
    meta["points"] = ds.points.size();
    write_text_file(base_path + ".meta.json", meta.dump(1) + "\n");
}

Dataset load_dataset(const std::string& base_path) {
    Dataset ds;
    const json meta = json::parse(read_text_file(base_path + ".meta.json"));
    ds.kind = meta["kind"];
    ds.eta = meta["eta"];
    ds.seed = meta["seed"];
    ds.solver_faults = meta["solver_faults"];

    std::istringstream csv(read_text_file(base_path + ".csv"));
    std::string line;
    std::getline(csv, line);
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 5)
            throw std::runtime_error("load_dataset: malformed row in " + base_path);
        ds.points.push_back(DatasetPoint{parse_double(f[0]), parse_double(f[1]),
                                         parse_double(f[2]), parse_double(f[3]),
                                         parse_double(f[4])});
    }
    return ds;
}

TabularData to_tabular(const Dataset& ds) {
    TabularData t;
    t.n_in = 4;
    t.n_out = 1;
    t.x.reserve(ds.points.size() * 4);
    t.y.reserve(ds.points.size());
    for (const auto& p : ds.points) {
        t.x.push_back(p.theta);
        t.x.push_back(p.phi);
        t.x.push_back(p.psi);
        t.x.push_back(p.u_prev);
        t.y.push_back(p.u_target);
    }
    return t;
}

void save_scenarios_csv(const std::string& path, const std::vector<Scenario>& batch) {
    std::ostringstream csv;
    csv << "index,master_seed,theta0,phi0,psi0,e0,v_m,p_v0,u_prev0\n";
    for (const auto& sc : batch) {
        csv << sc.index << ',' << sc.master_seed << ',' << fmt_double(sc.x0.theta)
            << ',' << fmt_double(sc.x0.phi) << ',' << fmt_double(sc.x0.psi) << ','
            << fmt_double(sc.e0) << ',' << fmt_double(sc.v_m) << ','
            << fmt_double(sc.p_v0) << ',' << fmt_double(sc.u_prev0) << '\n';
    }
    write_text_file(path, csv.str());
}

namespace {

struct AxisMap {
    double x_min, x_max, y_min, y_max;
    static constexpr double kW = 720, kH = 420;
    static constexpr double kL = 70, kR = 20, kT = 40, kB = 50;

    double px(double x) const {
        return kL + (x - x_min) / (x_max - x_min) * (kW - kL - kR);
    }
    double py(double y) const {
        return kH - kB - (y - y_min) / (y_max - y_min) * (kH - kT - kB);
    }
};

std::string svg_header() {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"420\" "
           "viewBox=\"0 0 720 420\" font-family=\"sans-serif\" font-size=\"12\">\n"
           "<rect width=\"720\" height=\"420\" fill=\"white\"/>\n";
}

void svg_axes(std::ostringstream& s, const AxisMap& m, const std::string& title,
              const std::string& xlabel, const std::string& ylabel) {
    s << "<line x1=\"" << m.kL << "\" y1=\"" << (m.kH - m.kB) << "\" x2=\""
      << (m.kW - m.kR) << "\" y2=\"" << (m.kH - m.kB)
      << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << m.kL << "\" y1=\"" << m.kT << "\" x2=\"" << m.kL
      << "\" y2=\"" << (m.kH - m.kB) << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << (m.kW / 2) << "\" y=\"20\" text-anchor=\"middle\" "
         "font-size=\"14\">" << title << "</text>\n";
    s << "<text x=\"" << (m.kW / 2) << "\" y=\"" << (m.kH - 12)
      << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
    s << "<text x=\"16\" y=\"" << (m.kH / 2)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << (m.kH / 2)
      << ")\">" << ylabel << "</text>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = m.x_min + (m.x_max - m.x_min) * i / 4.0;
        const double yv = m.y_min + (m.y_max - m.y_min) * i / 4.0;
        char xb[32], yb[32];
        std::snprintf(xb, sizeof(xb), "%.4g", xv);
        std::snprintf(yb, sizeof(yb), "%.4g", yv);
        s << "<text x=\"" << m.px(xv) << "\" y=\"" << (m.kH - m.kB + 16)
          << "\" text-anchor=\"middle\">" << xb << "</text>\n";
        s << "<text x=\"" << (m.kL - 6) << "\" y=\"" << (m.py(yv) + 4)
          << "\" text-anchor=\"end\">" << yb << "</text>\n";
    }
}

}  // namespace

void svg_line_chart(const std::string& path, const std::string& title,
                    const std::string& xlabel, const std::string& ylabel,
                    const std::vector<PlotSeries>& series,
                    const std::vector<PlotHLine>& hlines) {
    AxisMap m{1e300, -1e300, 1e300, -1e300};
    for (const auto& s : series) {
        for (double x : s.xs) {
            m.x_min = std::min(m.x_min, x);
            m.x_max = std::max(m.x_max, x);
        }
        for (double y : s.ys) {
            m.y_min = std::min(m.y_min, y);
            m.y_max = std::max(m.y_max, y);
        }
    }
    for (const auto& h : hlines) {
        m.y_min = std::min(m.y_min, h.y);
        m.y_max = std::max(m.y_max, h.y);
    }
    if (m.x_min >= m.x_max) m.x_max = m.x_min + 1;
    if (m.y_min >= m.y_max) m.y_max = m.y_min + 1;
    const double pad = 0.05 * (m.y_max - m.y_min);
    m.y_min -= pad;
    m.y_max += pad;

    std::ostringstream s;
    s << svg_header();
    svg_axes(s, m, title, xlabel, ylabel);
    for (const auto& h : hlines) {
        s << "<line x1=\"" << m.px(m.x_min) << "\" y1=\"" << m.py(h.y) << "\" x2=\""
          << m.px(m.x_max) << "\" y2=\"" << m.py(h.y) << "\" stroke=\"" << h.color
          << "\" stroke-dasharray=\"6 3\"/>\n";
        if (!h.label.empty())
            s << "<text x=\"" << (m.px(m.x_max) - 4) << "\" y=\"" << (m.py(h.y) - 4)
              << "\" text-anchor=\"end\" fill=\"" << h.color << "\">" << h.label
              << "</text>\n";
    }
    int legend_y = 46;
    for (const auto& ser : series) {
        s << "<polyline fill=\"none\" stroke=\"" << ser.color << "\" points=\"";
        for (std::size_t i = 0; i < ser.xs.size(); ++i) {
            char b[48];
            std::snprintf(b, sizeof(b), "%.2f,%.2f ", m.px(ser.xs[i]), m.py(ser.ys[i]));
            s << b;
        }
        s << "\"/>\n";
        if (!ser.name.empty()) {
            s << "<rect x=\"" << (m.kW - 180) << "\" y=\"" << (legend_y - 9)
              << "\" width=\"12\" height=\"4\" fill=\"" << ser.color << "\"/>\n";
            s << "<text x=\"" << (m.kW - 162) << "\" y=\"" << legend_y << "\">"
              << ser.name << "</text>\n";
            legend_y += 16;
        }
    }
    s << "</svg>\n";
    write_text_file(path, s.str());
}

void svg_histogram(const std::string& path, const std::string& title,
                   const std::string& xlabel, const std::vector<double>& values,
                   int bins) {
    std::vector<double> finite;
    for (double v : values)
        if (std::isfinite(v)) finite.push_back(v);
    if (finite.empty()) finite.push_back(0.0);
    double lo = *std::min_element(finite.begin(), finite.end());
    double hi = *std::max_element(finite.begin(), finite.end());
    if (lo >= hi) hi = lo + 1;
    std::vector<int> counts(bins, 0);
    for (double v : finite) {
        int b = static_cast<int>((v - lo) / (hi - lo) * bins);
        b = std::clamp(b, 0, bins - 1);
        ++counts[b];
    }
    const int peak = *std::max_element(counts.begin(), counts.end());

    AxisMap m{lo, hi, 0.0, static_cast<double>(peak) * 1.05};
    std::ostringstream s;
    s << svg_header();
    svg_axes(s, m, title, xlabel, "count");
    for (int b = 0; b < bins; ++b) {
        const double x0 = lo + (hi - lo) * b / bins;
        const double x1 = lo + (hi - lo) * (b + 1) / bins;
        const double y = m.py(counts[b]);
        s << "<rect x=\"" << m.px(x0) << "\" y=\"" << y << "\" width=\""
          << (m.px(x1) - m.px(x0)) << "\" height=\"" << (m.py(0) - y)
          << "\" fill=\"#1f77b4\" stroke=\"white\"/>\n";
    }
    s << "</svg>\n";
    write_text_file(path, s.str());
}

}  // namespace kitecert
