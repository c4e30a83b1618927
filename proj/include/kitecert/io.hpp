#pragma once

#include <string>
#include <vector>

#include "kitecert/kite.hpp"
#include "kitecert/mlp.hpp"
#include "kitecert/msnmpc.hpp"
#include "kitecert/scenario.hpp"
#include "kitecert/simulate.hpp"

namespace kitecert {

// Shortest-exact formatting for doubles; identical input bits give identical
// text, which is what makes re-emitted CSV files byte-identical.
std::string fmt_double(double v);

// Trajectory persistence: columnar CSV plus a JSON sidecar (<base>.csv and
// <base>.meta.json) carrying scenario seed, controller id and the scenario
// parameters needed to recompute the cached columns.
void save_trajectory(const std::string& base_path, const TrajectoryRecord& rec,
                     double scenario_e0);
// Loads and verifies the cached height/thrust columns against the states.
std::pair<TrajectoryRecord, double> load_trajectory(const std::string& base_path,
                                                    const KiteParams& kp);

// Training-data persistence: CSV (theta, phi, psi, u_prev, u_target) plus a
// JSON sidecar with provenance (kind, eta, seed, solver faults).
void save_dataset(const std::string& base_path, const Dataset& ds);
Dataset load_dataset(const std::string& base_path);

TabularData to_tabular(const Dataset& ds);

// Headline audit table for a scenario batch; full sequences are regenerable
// from (master_seed, index).
void save_scenarios_csv(const std::string& path, const std::vector<Scenario>& batch);

// Minimal SVG emission.
struct PlotSeries {
    std::string name;
    std::vector<double> xs;
    std::vector<double> ys;
    std::string color = "#1f77b4";
};
struct PlotHLine {
    double y = 0.0;
    std::string label;
    std::string color = "#d62728";
};
void svg_line_chart(const std::string& path, const std::string& title,
                    const std::string& xlabel, const std::string& ylabel,
                    const std::vector<PlotSeries>& series,
                    const std::vector<PlotHLine>& hlines = {});
void svg_histogram(const std::string& path, const std::string& title,
                   const std::string& xlabel, const std::vector<double>& values,
                   int bins);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace kitecert
