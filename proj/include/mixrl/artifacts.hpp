#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mixrl/experiment.hpp"

namespace mixrl {

/// 17 significant digits; empty for NaN and infinities.
std::string csv_number(double v);

/// k, critic_loss, actor_obj, mvc_lhs, e_k, mvc_satisfied, inner_steps,
/// eval_return, mu_hat_0..n-1, K_hat_diag_0..n-1. Belief columns are empty
/// for methods without a belief.
std::string iteration_csv_header(int state_dim);
std::string iteration_csv_row(const IterationReport& r, int state_dim);
void write_iteration_csv(const std::filesystem::path& path, const std::vector<IterationReport>& reports,
                         int state_dim);

/// (k, eval_return) for rows with a finite evaluation.
std::vector<EvalPoint> read_eval_curve(const std::filesystem::path& iteration_csv);

/// t, station, y_ref, y, lateral_error, speed_error, heading_error, delta, ax.
void write_trajectory_csv(const std::filesystem::path& path, const std::vector<DlcSample>& samples);
std::vector<DlcSample> read_trajectory_csv(const std::filesystem::path& path);

/// Mean |lateral error| and mean |speed error| over the samples in order.
std::pair<double, double> tracking_errors(const std::vector<DlcSample>& samples);

void write_summary_csv(const std::filesystem::path& path, const RunSummary& s);

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
    std::vector<Series> series;
};

/// Static SVG line chart. Non-finite points (and non-positive ones on a log
/// axis) break the line.
std::string render_svg(const Chart& chart);
void write_text(const std::filesystem::path& path, const std::string& text);

/// fig4_convergence.svg from the learning curves; fig5_tracking.svg,
/// fig6_speed_error.svg and fig7_lateral_error.svg from lane-change drives.
std::vector<std::filesystem::path> write_figures(const std::filesystem::path& dir,
                                                 const std::vector<const RunResult*>& runs);

}  // namespace mixrl
