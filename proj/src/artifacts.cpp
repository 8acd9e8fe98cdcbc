#include "mixrl/artifacts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mixrl {

std::string csv_number(double v) {
    if (!std::isfinite(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string opt_number(const std::optional<double>& v) { return v ? csv_number(*v) : ""; }

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& path, std::vector<std::string>* header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::string line;
    std::vector<std::vector<std::string>> rows;
    if (std::getline(in, line) && header) *header = split_csv(line);
    while (std::getline(in, line)) {
        if (!line.empty()) rows.push_back(split_csv(line));
    }
    return rows;
}

double cell(const std::string& s) {
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    return std::stod(s);
}

}  // namespace

std::string iteration_csv_header(int n) {
    std::string h = "k,critic_loss,actor_obj,mvc_lhs,e_k,mvc_satisfied,inner_steps,eval_return";
    for (int i = 0; i < n; ++i) h += ",mu_hat_" + std::to_string(i);
    for (int i = 0; i < n; ++i) h += ",K_hat_diag_" + std::to_string(i);
    return h;
}

std::string iteration_csv_row(const IterationReport& r, int n) {
    std::string s = std::to_string(r.k);
    s += "," + csv_number(r.critic_loss);
    s += "," + csv_number(r.actor_obj);
    s += "," + csv_number(r.mvc_lhs);
    s += "," + opt_number(r.e_k);
    s += std::string(",") + (r.mvc_satisfied ? "1" : "0");
    s += "," + std::to_string(r.inner_steps);
    s += "," + opt_number(r.eval_return);
    for (int i = 0; i < n; ++i) s += "," + (r.mu_hat.size() == n ? csv_number(r.mu_hat[i]) : std::string());
    for (int i = 0; i < n; ++i) {
        s += "," + (r.K_hat_diag.size() == n ? csv_number(r.K_hat_diag[i]) : std::string());
    }
    return s;
}

void write_iteration_csv(const std::filesystem::path& path, const std::vector<IterationReport>& reports,
                         int n) {
    std::string text = iteration_csv_header(n) + "\n";
    for (const auto& r : reports) text += iteration_csv_row(r, n) + "\n";
    write_text(path, text);
}

std::vector<EvalPoint> read_eval_curve(const std::filesystem::path& path) {
    std::vector<std::string> header;
    const auto rows = read_rows(path, &header);
    const auto it = std::find(header.begin(), header.end(), "eval_return");
    if (it == header.end()) throw std::runtime_error("iteration CSV without eval_return");
    const auto col = static_cast<std::size_t>(it - header.begin());
    std::vector<EvalPoint> out;
    for (const auto& r : rows) {
        if (col < r.size() && !r[col].empty()) out.push_back({std::stol(r[0]), std::stod(r[col])});
    }
    return out;
}

void write_trajectory_csv(const std::filesystem::path& path, const std::vector<DlcSample>& samples) {
    std::string text = "t,station,y_ref,y,lateral_error,speed_error,heading_error,delta,ax\n";
    for (const auto& s : samples) {
        text += csv_number(s.t) + "," + csv_number(s.station) + "," + csv_number(s.y_ref) + "," +
                csv_number(s.y) + "," + csv_number(s.lateral_error) + "," + csv_number(s.speed_error) + "," +
                csv_number(s.heading_error) + "," + csv_number(s.delta) + "," + csv_number(s.ax) + "\n";
    }
    write_text(path, text);
}

std::vector<DlcSample> read_trajectory_csv(const std::filesystem::path& path) {
    std::vector<DlcSample> out;
    for (const auto& r : read_rows(path, nullptr)) {
        if (r.size() != 9) throw std::runtime_error("trajectory CSV row with wrong width");
        out.push_back({cell(r[0]), cell(r[1]), cell(r[2]), cell(r[3]), cell(r[4]), cell(r[5]), cell(r[6]),
                       cell(r[7]), cell(r[8])});
    }
    return out;
}

std::pair<double, double> tracking_errors(const std::vector<DlcSample>& samples) {
    if (samples.empty()) return {0.0, 0.0};
    double lat = 0.0;
    double spd = 0.0;
    for (const auto& s : samples) {
        lat += std::abs(s.lateral_error);
        spd += std::abs(s.speed_error);
    }
    const double n = static_cast<double>(samples.size());
    return {lat / n, spd / n};
}

void write_summary_csv(const std::filesystem::path& path, const RunSummary& s) {
    std::string t = "key,value\n";
    auto row = [&](const std::string& k, const std::string& v) { t += k + "," + v + "\n"; };
    row("id", s.id);
    row("algorithm", to_string(s.algorithm));
    row("env", to_string(s.env));
    row("iterations", std::to_string(s.iterations));
    row("final_eval_return", opt_number(s.final_eval_return));
    row("best_eval_return", opt_number(s.best_eval_return));
    row("iterations_to_threshold", s.iterations_to_threshold ? std::to_string(*s.iterations_to_threshold) : "");
    row("mvc_violations", std::to_string(s.mvc_violations));
    row("rollbacks", std::to_string(s.rollbacks));
    row("mean_abs_position_error", opt_number(s.mean_abs_position_error));
    row("mean_abs_speed_error", opt_number(s.mean_abs_speed_error));
    row("dlc_total_cost", opt_number(s.dlc_total_cost));
    row("dlc_diverged", s.dlc_diverged ? "1" : "0");
    row("gain_error", opt_number(s.gain_error));
    row("value_error", opt_number(s.value_error));
    row("policy_matches_oracle",
        s.policy_matches_oracle ? std::string(*s.policy_matches_oracle ? "1" : "0") : std::string());
    write_text(path, t);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// SVG

namespace {

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

std::string render_svg(const Chart& chart) {
    const double W = 720, H = 440, L = 80, R = 170, T = 40, B = 60;
    const double pw = W - L - R;
    const double ph = H - T - B;
    auto usable = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && (!chart.log_y || y > 0.0);
    };
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : chart.series) {
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!usable(s.x[i], s.y[i])) continue;
            const double y = chart.log_y ? std::log10(s.y[i]) : s.y[i];
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    }
    if (!std::isfinite(x0)) {
        x0 = 0;
        x1 = 1;
        y0 = 0;
        y1 = 1;
    }
    if (x1 <= x0) x1 = x0 + 1;
    if (y1 <= y0) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return T + ph - (y - y0) / (y1 - y0) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << num(L + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(chart.title) << "</text>\n";
    o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = x0 + (x1 - x0) * i / 5.0;
        const double yv = y0 + (y1 - y0) * i / 5.0;
        o << "<line x1=\"" << num(px(xv)) << "\" y1=\"" << num(T + ph) << "\" x2=\"" << num(px(xv))
          << "\" y2=\"" << num(T + ph + 5) << "\" stroke=\"#333\"/>\n";
        o << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(T + ph + 18) << "\" text-anchor=\"middle\">"
          << tick_label(xv) << "</text>\n";
        o << "<line x1=\"" << num(L - 5) << "\" y1=\"" << num(py(yv)) << "\" x2=\"" << num(L + pw) << "\" y2=\""
          << num(py(yv)) << "\" stroke=\"#ddd\"/>\n";
        o << "<text x=\"" << num(L - 8) << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">"
          << tick_label(chart.log_y ? std::pow(10.0, yv) : yv) << "</text>\n";
    }
    o << "<text x=\"" << num(L + pw / 2) << "\" y=\"" << num(H - 15) << "\" text-anchor=\"middle\">"
      << escape(chart.x_label) << "</text>\n";
    o << "<text x=\"18\" y=\"" << num(T + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << num(T + ph / 2) << ")\">" << escape(chart.y_label) << (chart.log_y ? " (log)" : "") << "</text>\n";

    for (std::size_t si = 0; si < chart.series.size(); ++si) {
        const auto& s = chart.series[si];
        const char* color = kPalette[si % (sizeof kPalette / sizeof kPalette[0])];
        std::string path;
        bool pen = false;
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!usable(s.x[i], s.y[i])) {
                pen = false;
                continue;
            }
            const double y = chart.log_y ? std::log10(s.y[i]) : s.y[i];
            path += (pen ? " L" : " M") + num(px(s.x[i])) + " " + num(py(y));
            pen = true;
        }
        if (!path.empty()) {
            o << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
        }
        const double ly = T + 14 + 18 * static_cast<double>(si);
        o << "<line x1=\"" << num(L + pw + 12) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(L + pw + 32)
          << "\" y2=\"" << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << num(L + pw + 38) << "\" y=\"" << num(ly + 4) << "\">" << escape(s.name)
          << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

std::vector<std::filesystem::path> write_figures(const std::filesystem::path& dir,
                                                 const std::vector<const RunResult*>& runs) {
    std::vector<std::filesystem::path> out;
    Chart conv{"Convergence", "iteration", "evaluation cost", true, {}};
    for (const RunResult* r : runs) {
        Series s{r->summary.id, {}, {}};
        for (const auto& p : r->curve) {
            s.x.push_back(static_cast<double>(p.k));
            s.y.push_back(p.value);
        }
        conv.series.push_back(std::move(s));
    }
    out.push_back(dir / "fig4_convergence.svg");
    write_text(out.back(), render_svg(conv));

    const bool any_dlc = std::any_of(runs.begin(), runs.end(), [](const RunResult* r) { return r->dlc.has_value(); });
    if (!any_dlc) return out;
    Chart track{"Double lane change", "station [m]", "lateral position [m]", false, {}};
    Chart speed{"Speed error", "time [s]", "speed error [m/s]", false, {}};
    Chart lateral{"Lateral error", "time [s]", "lateral error [m]", false, {}};
    bool ref_added = false;
    for (const RunResult* r : runs) {
        if (!r->dlc) continue;
        Series ref{"reference", {}, {}}, y{r->summary.id, {}, {}}, sp{r->summary.id, {}, {}},
            la{r->summary.id, {}, {}};
        for (const auto& s : r->dlc->samples) {
            ref.x.push_back(s.station);
            ref.y.push_back(s.y_ref);
            y.x.push_back(s.station);
            y.y.push_back(s.y);
            sp.x.push_back(s.t);
            sp.y.push_back(s.speed_error);
            la.x.push_back(s.t);
            la.y.push_back(s.lateral_error);
        }
        if (!ref_added) {
            track.series.push_back(std::move(ref));
            ref_added = true;
        }
        track.series.push_back(std::move(y));
        speed.series.push_back(std::move(sp));
        lateral.series.push_back(std::move(la));
    }
    out.push_back(dir / "fig5_tracking.svg");
    write_text(out.back(), render_svg(track));
    out.push_back(dir / "fig6_speed_error.svg");
    write_text(out.back(), render_svg(speed));
    out.push_back(dir / "fig7_lateral_error.svg");
    write_text(out.back(), render_svg(lateral));
    return out;
}

}  // namespace mixrl
