#include "mixrl/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mixrl {

const char* to_string(EnvKind kind) {
    switch (kind) {
        case EnvKind::lq: return "lq";
        case EnvKind::vehicle: return "vehicle";
        case EnvKind::tabular: return "tabular";
    }
    return "?";
}

EnvKind env_kind_from_string(const std::string& name) {
    if (name == "lq") return EnvKind::lq;
    if (name == "vehicle") return EnvKind::vehicle;
    if (name == "tabular") return EnvKind::tabular;
    throw std::invalid_argument("unknown environment '" + name + "'");
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    return out;
}

std::string fmt(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto t = trim(s);
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size()) {
        throw std::invalid_argument("expected a number, got '" + t + "'");
    }
    return v;
}

long long parse_int(const std::string& s) {
    long long v = 0;
    const auto t = trim(s);
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size()) {
        throw std::invalid_argument("expected an integer, got '" + t + "'");
    }
    return v;
}

std::uint64_t parse_u64(const std::string& s) {
    std::uint64_t v = 0;
    const auto t = trim(s);
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size()) {
        throw std::invalid_argument("expected an unsigned integer, got '" + t + "'");
    }
    return v;
}

bool parse_bool(const std::string& s) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw std::invalid_argument("expected true or false, got '" + s + "'");
}

std::string fmt_vec(const Vec& v) {
    std::string out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += fmt(v[i]);
    }
    return out;
}

Vec parse_vec(const std::string& s) {
    if (trim(s).empty()) return Vec();
    const auto parts = split(s, ',');
    Vec v(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) v[static_cast<Eigen::Index>(i)] = parse_double(parts[i]);
    return v;
}

// Rows separated by ';', entries by ','.
std::string fmt_mat(const Mat& m) {
    std::string out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (i) out += "; ";
        out += fmt_vec(m.row(i).transpose());
    }
    return out;
}

Mat parse_mat(const std::string& s) {
    if (trim(s).empty()) return Mat();
    const auto rows = split(s, ';');
    Mat m;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Vec r = parse_vec(rows[i]);
        if (i == 0) m.resize(static_cast<Eigen::Index>(rows.size()), r.size());
        if (r.size() != m.cols()) throw std::invalid_argument("ragged matrix rows");
        m.row(static_cast<Eigen::Index>(i)) = r.transpose();
    }
    return m;
}

std::string fmt_ints(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(v[i]);
    }
    return out;
}

std::vector<int> parse_ints(const std::string& s) {
    std::vector<int> out;
    if (trim(s).empty()) return out;
    for (const auto& p : split(s, ',')) out.push_back(static_cast<int>(parse_int(p)));
    return out;
}

std::string fmt_quadrature(const Quadrature& q) {
    if (q.kind == QuadratureKind::sigma_point) return "sigma_point";
    return "monte_carlo:" + std::to_string(q.samples);
}

Quadrature parse_quadrature(const std::string& s) {
    if (s == "sigma_point") return Quadrature::sigma_point();
    const std::string prefix = "monte_carlo:";
    if (s.rfind(prefix, 0) == 0) return Quadrature::monte_carlo(static_cast<int>(parse_int(s.substr(prefix.size()))));
    throw std::invalid_argument("quadrature must be sigma_point or monte_carlo:M");
}

struct Field {
    std::string section;
    std::string key;
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<bool(const ExperimentConfig&)> active;
};

using Active = std::function<bool(const ExperimentConfig&)>;

const Active always = [](const ExperimentConfig&) { return true; };

template <class Access>
Field make_double(std::string sec, std::string key, Access acc, Active active = always) {
    return {std::move(sec), std::move(key), [acc](const ExperimentConfig& c) { return fmt(acc(c)); },
            [acc](ExperimentConfig& c, const std::string& v) { acc(c) = parse_double(v); }, std::move(active)};
}

template <class Access>
Field make_int(std::string sec, std::string key, Access acc, Active active = always) {
    return {std::move(sec), std::move(key),
            [acc](const ExperimentConfig& c) { return std::to_string(acc(c)); },
            [acc](ExperimentConfig& c, const std::string& v) {
                using T = std::remove_reference_t<decltype(acc(c))>;
                if constexpr (std::is_same_v<T, std::uint64_t>) {
                    acc(c) = parse_u64(v);
                } else {
                    acc(c) = static_cast<T>(parse_int(v));
                }
            },
            std::move(active)};
}

template <class Access>
Field make_bool(std::string sec, std::string key, Access acc, Active active = always) {
    return {std::move(sec), std::move(key),
            [acc](const ExperimentConfig& c) { return std::string(acc(c) ? "true" : "false"); },
            [acc](ExperimentConfig& c, const std::string& v) { acc(c) = parse_bool(v); }, std::move(active)};
}

template <class Access>
Field make_vec(std::string sec, std::string key, Access acc, Active active = always) {
    return {std::move(sec), std::move(key), [acc](const ExperimentConfig& c) { return fmt_vec(acc(c)); },
            [acc](ExperimentConfig& c, const std::string& v) { acc(c) = parse_vec(v); }, std::move(active)};
}

template <class Access>
Field make_mat(std::string sec, std::string key, Access acc, Active active = always) {
    return {std::move(sec), std::move(key), [acc](const ExperimentConfig& c) { return fmt_mat(acc(c)); },
            [acc](ExperimentConfig& c, const std::string& v) { acc(c) = parse_mat(v); }, std::move(active)};
}

Active env_is(EnvKind kind) {
    return [kind](const ExperimentConfig& c) { return c.env == kind; };
}

void add_net(std::vector<Field>& f, const std::string& sec, NetSpec ExperimentConfig::*net,
             OptimizerConfig TrainerConfig::*opt) {
    auto n = [net](auto& c) -> auto& { return c.*net; };
    f.push_back({sec, "kind", [n](const ExperimentConfig& c) { return std::string(to_string(n(c).kind)); },
                 [n](ExperimentConfig& c, const std::string& v) { n(c).kind = fn_kind_from_string(v); }, always});
    f.push_back({sec, "hidden", [n](const ExperimentConfig& c) { return fmt_ints(n(c).hidden); },
                 [n](ExperimentConfig& c, const std::string& v) { n(c).hidden = parse_ints(v); }, always});
    f.push_back(make_vec(sec, "input_scale", [n](auto& c) -> auto& { return n(c).input_scale; }));
    f.push_back(make_double(sec, "output_scale", [n](auto& c) -> auto& { return n(c).output_scale; }));
    f.push_back(make_bool(sec, "squash", [n](auto& c) -> auto& { return n(c).squash; }));

    const std::string os = sec + ".optimizer";
    auto o = [opt](auto& c) -> auto& { return c.trainer.*opt; };
    f.push_back({os, "kind", [o](const ExperimentConfig& c) { return std::string(to_string(o(c).kind)); },
                 [o](ExperimentConfig& c, const std::string& v) { o(c).kind = optimizer_kind_from_string(v); },
                 always});
    f.push_back(make_double(os, "rate", [o](auto& c) -> auto& { return o(c).rate; }));
    f.push_back(make_double(os, "momentum", [o](auto& c) -> auto& { return o(c).momentum; }));
    f.push_back(make_double(os, "beta1", [o](auto& c) -> auto& { return o(c).beta1; }));
    f.push_back(make_double(os, "beta2", [o](auto& c) -> auto& { return o(c).beta2; }));
    f.push_back(make_double(os, "epsilon", [o](auto& c) -> auto& { return o(c).epsilon; }));
}

std::vector<Field> build_fields() {
    std::vector<Field> f;
    const std::string ex = "experiment";
    f.push_back({ex, "id", [](const ExperimentConfig& c) { return c.id; },
                 [](ExperimentConfig& c, const std::string& v) { c.id = v; }, always});
    f.push_back({ex, "env", [](const ExperimentConfig& c) { return std::string(to_string(c.env)); },
                 [](ExperimentConfig& c, const std::string& v) { c.env = env_kind_from_string(v); }, always});
    f.push_back({ex, "output_dir", [](const ExperimentConfig& c) { return c.output_dir; },
                 [](ExperimentConfig& c, const std::string& v) { c.output_dir = v; }, always});
    f.push_back(make_bool(ex, "strict", [](auto& c) -> auto& { return c.strict; }));

    const std::string lq = "env.lq";
    const Active is_lq = env_is(EnvKind::lq);
    f.push_back(make_int(lq, "state_dim", [](auto& c) -> auto& { return c.lq.state_dim; }, is_lq));
    f.push_back(make_int(lq, "action_dim", [](auto& c) -> auto& { return c.lq.action_dim; }, is_lq));
    f.push_back(make_int(lq, "generator_seed", [](auto& c) -> auto& { return c.lq.generator_seed; }, is_lq));
    f.push_back(make_double(lq, "a_norm", [](auto& c) -> auto& { return c.lq.a_norm; }, is_lq));
    f.push_back(make_double(lq, "q_weight", [](auto& c) -> auto& { return c.lq.q_weight; }, is_lq));
    f.push_back(make_double(lq, "r_weight", [](auto& c) -> auto& { return c.lq.r_weight; }, is_lq));
    f.push_back(make_vec(lq, "noise_mean", [](auto& c) -> auto& { return c.lq.noise_mean; }, is_lq));
    f.push_back(make_double(lq, "noise_std", [](auto& c) -> auto& { return c.lq.noise_std; }, is_lq));
    f.push_back(make_double(lq, "action_limit", [](auto& c) -> auto& { return c.lq.action_limit; }, is_lq));
    f.push_back(make_double(lq, "init_std", [](auto& c) -> auto& { return c.lq.init_std; }, is_lq));

    const std::string ve = "env.vehicle";
    const Active is_veh = env_is(EnvKind::vehicle);
    auto vd = [&](const char* key, double VehicleParams::*m) {
        f.push_back(make_double(ve, key, [m](auto& c) -> auto& { return c.vehicle.*m; }, is_veh));
    };
    vd("mass", &VehicleParams::mass);
    vd("a", &VehicleParams::a);
    vd("b", &VehicleParams::b);
    vd("iz", &VehicleParams::iz);
    vd("cf", &VehicleParams::cf);
    vd("cr", &VehicleParams::cr);
    vd("friction", &VehicleParams::friction);
    vd("v_desired", &VehicleParams::v_desired);
    vd("dt", &VehicleParams::dt);
    vd("fdis_mean", &VehicleParams::fdis_mean);
    vd("fdis_var", &VehicleParams::fdis_var);
    vd("gravity", &VehicleParams::gravity);
    vd("delta_max", &VehicleParams::delta_max);
    vd("ax_min", &VehicleParams::ax_min);
    vd("ax_max", &VehicleParams::ax_max);
    f.push_back(make_vec(ve, "init_std", [](auto& c) -> auto& { return c.vehicle.init_std; }, is_veh));

    const std::string pa = "env.path";
    auto pd = [&](const char* key, double DlcGeometry::*m) {
        f.push_back(make_double(pa, key, [m](auto& c) -> auto& { return c.path.*m; }, is_veh));
    };
    pd("lane_offset", &DlcGeometry::lane_offset);
    pd("straight_in", &DlcGeometry::straight_in);
    pd("ramp", &DlcGeometry::ramp);
    pd("hold", &DlcGeometry::hold);
    pd("ramp_back", &DlcGeometry::ramp_back);
    pd("straight_out", &DlcGeometry::straight_out);

    const std::string ta = "env.tabular";
    const Active is_tab = env_is(EnvKind::tabular);
    f.push_back(make_int(ta, "states", [](auto& c) -> auto& { return c.tabular.states; }, is_tab));
    f.push_back(make_int(ta, "actions", [](auto& c) -> auto& { return c.tabular.actions; }, is_tab));
    f.push_back(make_int(ta, "generator_seed", [](auto& c) -> auto& { return c.tabular.generator_seed; }, is_tab));
    f.push_back(make_double(ta, "tolerance", [](auto& c) -> auto& { return c.tabular.tolerance; }, is_tab));
    f.push_back(make_int(ta, "max_iterations", [](auto& c) -> auto& { return c.tabular.max_iterations; }, is_tab));

    const std::string tr = "trainer";
    f.push_back({tr, "algorithm", [](const ExperimentConfig& c) { return std::string(to_string(c.trainer.algorithm)); },
                 [](ExperimentConfig& c, const std::string& v) { c.trainer.algorithm = algorithm_from_string(v); },
                 always});
    f.push_back(make_double(tr, "gamma", [](auto& c) -> auto& { return c.trainer.gamma; }));
    f.push_back({tr, "ibe_case",
                 [](const ExperimentConfig& c) {
                     return std::string(c.trainer.ibe_case == IbeCase::known_covariance ? "case1" : "case2");
                 },
                 [](ExperimentConfig& c, const std::string& v) {
                     if (v == "case1") {
                         c.trainer.ibe_case = IbeCase::known_covariance;
                     } else if (v == "case2") {
                         c.trainer.ibe_case = IbeCase::unknown_covariance;
                     } else {
                         throw std::invalid_argument("ibe_case must be case1 or case2");
                     }
                 },
                 always});
    f.push_back({tr, "case2_precision",
                 [](const ExperimentConfig& c) { return std::string(to_string(c.trainer.case2_precision)); },
                 [](ExperimentConfig& c, const std::string& v) {
                     c.trainer.case2_precision = case2_precision_from_string(v);
                 },
                 always});
    f.push_back(make_vec(tr, "prior_mu", [](auto& c) -> auto& { return c.trainer.prior_mu; }));
    f.push_back(make_mat(tr, "prior_K", [](auto& c) -> auto& { return c.trainer.prior_K; }));
    f.push_back({tr, "known_K",
                 [](const ExperimentConfig& c) {
                     return c.trainer.known_K ? fmt_mat(*c.trainer.known_K) : std::string("none");
                 },
                 [](ExperimentConfig& c, const std::string& v) {
                     if (v == "none") {
                         c.trainer.known_K.reset();
                     } else {
                         c.trainer.known_K = parse_mat(v);
                     }
                 },
                 always});
    f.push_back({tr, "quadrature", [](const ExperimentConfig& c) { return fmt_quadrature(c.trainer.quadrature); },
                 [](ExperimentConfig& c, const std::string& v) { c.trainer.quadrature = parse_quadrature(v); },
                 always});
    f.push_back(make_int(tr, "batch_size", [](auto& c) -> auto& { return c.trainer.batch_size; }));
    f.push_back(make_int(tr, "steps_per_iter", [](auto& c) -> auto& { return c.trainer.steps_per_iter; }));
    f.push_back(make_int(tr, "episode_length", [](auto& c) -> auto& { return c.trainer.episode_length; }));
    f.push_back(make_int(tr, "replay_capacity", [](auto& c) -> auto& { return c.trainer.replay_capacity; }));
    f.push_back(make_double(tr, "explore_start", [](auto& c) -> auto& { return c.trainer.explore_start; }));
    f.push_back(make_double(tr, "explore_end", [](auto& c) -> auto& { return c.trainer.explore_end; }));
    f.push_back(make_int(tr, "critic_steps", [](auto& c) -> auto& { return c.trainer.critic_steps; }));
    f.push_back(make_int(tr, "warm_start_steps", [](auto& c) -> auto& { return c.trainer.warm_start_steps; }));
    f.push_back(make_int(tr, "probe_states", [](auto& c) -> auto& { return c.trainer.probe_states; }));
    f.push_back(make_int(tr, "j_max", [](auto& c) -> auto& { return c.trainer.j_max; }));
    f.push_back({tr, "mvc_mode",
                 [](const ExperimentConfig& c) {
                     return std::string(c.trainer.mvc_mode == MvcMode::averaged ? "averaged" : "per_state");
                 },
                 [](ExperimentConfig& c, const std::string& v) {
                     if (v == "averaged") {
                         c.trainer.mvc_mode = MvcMode::averaged;
                     } else if (v == "per_state") {
                         c.trainer.mvc_mode = MvcMode::per_state;
                     } else {
                         throw std::invalid_argument("mvc_mode must be averaged or per_state");
                     }
                 },
                 always});
    f.push_back(make_int(tr, "iterations", [](auto& c) -> auto& { return c.trainer.iterations; }));
    f.push_back(make_double(tr, "rate_decay", [](auto& c) -> auto& { return c.trainer.rate_decay; }));
    f.push_back(make_double(tr, "blow_up", [](auto& c) -> auto& { return c.trainer.blow_up; }));
    f.push_back(make_int(tr, "seed", [](auto& c) -> auto& { return c.trainer.seed; }));

    add_net(f, "critic", &ExperimentConfig::critic, &TrainerConfig::critic_opt);
    add_net(f, "actor", &ExperimentConfig::actor, &TrainerConfig::actor_opt);

    const std::string ev = "eval";
    f.push_back(make_int(ev, "every", [](auto& c) -> auto& { return c.eval.every; }));
    f.push_back(make_int(ev, "states", [](auto& c) -> auto& { return c.eval.states; }));
    f.push_back(make_int(ev, "horizon", [](auto& c) -> auto& { return c.eval.horizon; }));
    f.push_back(make_int(ev, "seed", [](auto& c) -> auto& { return c.eval.seed; }));
    f.push_back(make_int(ev, "dlc_seed", [](auto& c) -> auto& { return c.eval.dlc_seed; }));
    f.push_back(make_double(ev, "actor_average", [](auto& c) -> auto& { return c.eval.actor_average; }));
    return f;
}

const std::vector<Field>& fields() {
    static const std::vector<Field> f = build_fields();
    return f;
}

}  // namespace

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("config: " + what); };
    if (id.empty()) fail("experiment.id must not be empty");
    if (eval.every < 0 || eval.states < 1 || eval.horizon < 1) fail("eval settings out of range");
    if (!(eval.actor_average >= 0.0 && eval.actor_average < 1.0)) fail("eval.actor_average must be in [0,1)");
    switch (env) {
        case EnvKind::lq:
            if (lq.state_dim < 1 || lq.action_dim < 1) fail("env.lq dimensions must be >= 1");
            if (lq.noise_mean.size() != lq.state_dim) fail("env.lq.noise_mean length must equal state_dim");
            if (!(lq.a_norm > 0.0) || !(lq.q_weight > 0.0) || !(lq.r_weight > 0.0)) {
                fail("env.lq a_norm, q_weight and r_weight must be positive");
            }
            if (!(lq.noise_std >= 0.0) || !(lq.action_limit > 0.0) || !(lq.init_std >= 0.0)) {
                fail("env.lq noise_std, action_limit or init_std out of range");
            }
            break;
        case EnvKind::vehicle:
            vehicle.validate();
            path.validate();
            break;
        case EnvKind::tabular:
            if (tabular.states < 1 || tabular.actions < 1) fail("env.tabular sizes must be >= 1");
            if (!(tabular.tolerance > 0.0) || tabular.max_iterations < 1) fail("env.tabular stopping rule");
            if (trainer.algorithm != Algorithm::exact_pi) fail("the tabular environment needs algorithm exact_pi");
            if (!(trainer.gamma > 0.0 && trainer.gamma < 1.0)) fail("gamma must be in (0,1)");
            return;
    }
    if (trainer.algorithm == Algorithm::exact_pi) fail("exact_pi needs the tabular environment");
    for (const NetSpec* n : {&critic, &actor}) {
        for (int h : n->hidden) {
            if (h < 1) fail("hidden layer widths must be >= 1");
        }
    }
}

ExperimentConfig parse_config(const std::string& text) {
    const auto& table = fields();
    std::map<std::pair<std::string, std::string>, const Field*> index;
    std::set<std::string> sections;
    for (const auto& fd : table) {
        index[{fd.section, fd.key}] = &fd;
        sections.insert(fd.section);
    }
    ExperimentConfig c;
    std::set<std::pair<std::string, std::string>> seen;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        auto fail = [&](const std::string& what) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + what);
        };
        if (line.front() == '[') {
            if (line.back() != ']') fail("unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!sections.count(section)) fail("unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected key = value");
        if (section.empty()) fail("key outside of a section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = index.find({section, key});
        if (it == index.end()) fail("unknown key '" + key + "' in [" + section + "]");
        if (!seen.insert({section, key}).second) fail("duplicate key '" + key + "'");
        try {
            it->second->set(c, value);
        } catch (const std::invalid_argument& e) {
            fail(section + "." + key + ": " + e.what());
        }
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& config) {
    std::string out;
    std::string section;
    for (const auto& fd : fields()) {
        if (!fd.active(config)) continue;
        if (fd.section != section) {
            if (!section.empty()) out += "\n";
            section = fd.section;
            out += "[" + section + "]\n";
        }
        out += fd.key + " = " + fd.get(config) + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Presets

namespace {

ExperimentConfig lq_preset() {
    ExperimentConfig c;
    c.id = "lq";
    c.env = EnvKind::lq;
    const int n = c.lq.state_dim;
    const Mat K = c.lq.noise_std * c.lq.noise_std * Mat::Identity(n, n);
    TrainerConfig& t = c.trainer;
    t.algorithm = Algorithm::mixed;
    t.gamma = 0.9;
    t.ibe_case = IbeCase::known_covariance;
    t.prior_mu = 3.0 * c.lq.noise_mean;
    t.prior_K = 0.05 * 0.05 * Mat::Identity(n, n);
    t.known_K = K;
    t.critic_opt.kind = OptimizerKind::sgd;
    t.critic_opt.rate = 0.05;
    t.actor_opt.kind = OptimizerKind::sgd;
    t.actor_opt.rate = 0.1;
    t.batch_size = 256;
    t.steps_per_iter = 200;
    t.episode_length = 50;
    t.explore_start = 0.002;
    t.explore_end = 0.0;
    t.warm_start_steps = 2000;
    t.probe_states = 256;
    t.iterations = 5000;
    t.seed = 1;
    c.critic.kind = FnKind::quadratic;
    c.actor.kind = FnKind::linear;
    c.eval.every = 100;
    c.eval.states = 32;
    c.eval.horizon = 100;
    return c;
}

ExperimentConfig vehicle_preset(Algorithm algorithm) {
    ExperimentConfig c;
    c.env = EnvKind::vehicle;
    c.id = std::string("vehicle_") + to_string(algorithm);
    VehicleParams& v = c.vehicle;
    v.init_std = (Vec(5) << 0.3, 0.3, 0.5, 0.1, 0.5).finished();
    const double scale = v.dt / v.mass;
    TrainerConfig& t = c.trainer;
    t.algorithm = algorithm;
    t.gamma = 0.99;
    t.ibe_case = IbeCase::unknown_covariance;
    t.prior_mu = Vec::Zero(5);
    t.prior_mu[0] = 150.0 * scale;
    t.prior_K = Mat::Zero(5, 5);
    t.prior_K(0, 0) = std::pow(4.0 * scale, 2);
    for (int i = 1; i < 5; ++i) t.prior_K(i, i) = 1e-20;
    t.critic_opt.kind = OptimizerKind::adam;
    t.critic_opt.rate = 1e-3;
    t.actor_opt.kind = OptimizerKind::adam;
    t.actor_opt.rate = 2e-4;
    t.batch_size = 64;
    t.steps_per_iter = 10;
    t.critic_steps = 2;
    t.episode_length = 400;
    t.replay_capacity = 20000;
    t.blow_up = 50.0;
    t.explore_start = 0.1;
    t.explore_end = 0.01;
    t.probe_states = 32;
    t.iterations = 20000;
    t.rate_decay = 0.1;
    t.seed = 1;

    const Vec state_scale = v.init_std.cwiseInverse();
    c.critic.kind = FnKind::mlp;
    c.critic.hidden = {64, 64};
    c.critic.output_scale = 100.0;
    if (algorithm == Algorithm::data_driven) {
        Vec s(7);
        s << state_scale, 1.0 / v.delta_max, 2.0 / (v.ax_max - v.ax_min);
        c.critic.input_scale = s;
    } else {
        c.critic.input_scale = state_scale;
    }
    c.actor.kind = FnKind::mlp;
    c.actor.hidden = {64, 64};
    c.actor.input_scale = state_scale;
    c.actor.squash = true;
    c.eval.every = 500;
    c.eval.states = 32;
    c.eval.horizon = 400;
    return c;
}

ExperimentConfig tabular_preset() {
    ExperimentConfig c;
    c.id = "tabular";
    c.env = EnvKind::tabular;
    c.trainer.algorithm = Algorithm::exact_pi;
    c.trainer.gamma = 0.9;
    c.trainer.prior_mu = Vec();
    c.trainer.prior_K = Mat();
    return c;
}

}  // namespace

ExperimentConfig preset(const std::string& name) {
    ExperimentConfig c;
    if (name == "lq") {
        c = lq_preset();
    } else if (name == "tabular") {
        c = tabular_preset();
    } else if (name == "vehicle_mixed") {
        c = vehicle_preset(Algorithm::mixed);
    } else if (name == "vehicle_model_driven") {
        c = vehicle_preset(Algorithm::model_driven);
    } else if (name == "vehicle_data_driven") {
        c = vehicle_preset(Algorithm::data_driven);
    } else {
        throw std::invalid_argument("unknown preset '" + name + "'");
    }
    c.validate();
    return c;
}

std::vector<std::string> preset_names() {
    return {"lq", "tabular", "vehicle_mixed", "vehicle_model_driven", "vehicle_data_driven"};
}

}  // namespace mixrl
