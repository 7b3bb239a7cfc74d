#pragma once

// Run configuration: a sectioned key/value document (INI), JSON as alternate. Every
// output carries a canonical echo of the resolved configuration, and an output CSV can be
// fed back as a config.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "spinvalve/criticals.hpp"
#include "spinvalve/errors.hpp"
#include "spinvalve/simulator.hpp"

namespace spinvalve {

struct ScanConfig {
    double phi_min = 0.0;
    double phi_max = pi;
    std::size_t phi_steps = 1001;
    double g_min = 0.01;
    double g_max = 2.0;
    std::size_t g_steps = 200;
    double lambda_min = 0.01;
    double lambda_max = 2.0;
    std::size_t lambda_steps = 200;
    std::vector<double> lambda_set{0.5, 1.0, 1.5};
    site_index n_min = -40;
    site_index n_max = 40;
    std::optional<double> texture_omega;  ///< localized-mode energy for textures; default Omega(g, lambda)
};

struct SimConfig {
    std::optional<double> s0;  ///< default 0.01 sqrt(g/gamma)
    double s_p = 0.002;
    site_index n0 = -150;
    std::optional<Window> window;  ///< default planned from the packet
    double dt = 0.01;
    std::optional<double> t_final;  ///< default planned from the packet
    std::optional<site_index> n_cut;
    int branch = 1;
    std::string operating_point;  ///< critical-point kind, "splitting", or empty for `omega`
    std::optional<double> omega;
    double record_interval = 1.0;
};

struct OutputConfig {
    std::string dir = "out";
    std::string format = "csv";
};

struct RunConfig {
    SystemParams system;
    std::string epsilon_rule;  ///< "", "aligned", "anti-aligned" or "reciprocal", plus offset
    double epsilon_offset = 0.0;
    ScanConfig scan;
    SimConfig sim;
    OutputConfig output;

    void validate() const;
};

// ---------------------------------------------------------------------------
// Value parsing

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

inline std::optional<double> parse_plain_number(std::string_view s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const char* first = s.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

/// A number, a fraction "1/3", or an angle written with pi: "pi", "-pi/2", "3*pi/4", "7pi/4", "0.25*pi".
inline double parse_real(std::string_view text, const std::string& key) {
    const std::string s = lower(trim(text));
    if (auto v = parse_plain_number(s)) return *v;
    if (const std::size_t slash = s.find('/'); slash != std::string::npos && s.find("pi") == std::string::npos) {
        const auto num = parse_plain_number(trim(s.substr(0, slash)));
        const auto den = parse_plain_number(trim(s.substr(slash + 1)));
        if (num && den && *den != 0.0) return *num / *den;
        throw ValidationError("cannot parse '" + std::string(text) + "' for " + key);
    }
    const std::size_t at = s.find("pi");
    if (at != std::string::npos) {
        std::string head = trim(s.substr(0, at));
        std::string tail = trim(s.substr(at + 2));
        if (!head.empty() && head.back() == '*') head = trim(head.substr(0, head.size() - 1));
        double factor = 1.0;
        if (head == "-") {
            factor = -1.0;
        } else if (!head.empty() && head != "+") {
            const auto f = parse_plain_number(head);
            if (!f) throw ValidationError("cannot parse '" + std::string(text) + "' for " + key);
            factor = *f;
        }
        double divisor = 1.0;
        if (!tail.empty()) {
            if (tail.front() != '/') throw ValidationError("cannot parse '" + std::string(text) + "' for " + key);
            const auto d = parse_plain_number(trim(tail.substr(1)));
            if (!d || *d == 0.0) throw ValidationError("cannot parse '" + std::string(text) + "' for " + key);
            divisor = *d;
        }
        return factor * pi / divisor;
    }
    throw ValidationError("expected a number for " + key + ", got '" + std::string(text) + "'");
}

inline long long parse_integer(std::string_view text, const std::string& key) {
    const std::string s = trim(text);
    long long v = 0;
    const char* first = s.data();
    if (!s.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        throw ValidationError("expected an integer for " + key + ", got '" + std::string(text) + "'");
    return v;
}

inline std::size_t parse_count(std::string_view text, const std::string& key) {
    const long long v = parse_integer(text, key);
    if (v < 1) throw ValidationError(key + " must be at least 1");
    return static_cast<std::size_t>(v);
}

inline bool is_auto(std::string_view text) { return lower(trim(text)) == "auto"; }

inline std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

inline std::string fmt_real(double v) { return fmt::format("{:.17g}", v); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Flat key map <-> RunConfig

using ConfigEntries = std::map<std::string, std::string>;  ///< "section.key" -> raw text

inline void apply_entry(RunConfig& cfg, const std::string& full_key, const std::string& value) {
    using namespace detail;
    const std::string& k = full_key;
    auto real = [&] { return parse_real(value, k); };

    if (k == "system.alpha") cfg.system.alpha = real();
    else if (k == "system.gamma") cfg.system.gamma = real();
    else if (k == "system.lambda") cfg.system.lambda = real();
    else if (k == "system.g") cfg.system.g = real();
    else if (k == "system.epsilon") {
        const std::string v = lower(trim(value));
        cfg.epsilon_rule.clear();
        cfg.epsilon_offset = 0.0;
        for (const char* rule : {"anti-aligned", "aligned", "reciprocal"}) {
            if (v.rfind(rule, 0) == 0) {
                cfg.epsilon_rule = rule;
                const std::string rest = trim(v.substr(std::string(rule).size()));
                if (!rest.empty()) {
                    if (rest.front() != '+' && rest.front() != '-')
                        throw ValidationError("epsilon offset must start with + or -, got '" + value + "'");
                    const double mag = parse_real(rest.substr(1), k);
                    cfg.epsilon_offset = rest.front() == '-' ? -mag : mag;
                }
                break;
            }
        }
        if (cfg.epsilon_rule.empty()) cfg.system.epsilon = real();
    }
    else if (k == "spin.a") cfg.system.a = real();
    else if (k == "spin.b") cfg.system.b = real();
    else if (k == "scan.phi_min") cfg.scan.phi_min = real();
    else if (k == "scan.phi_max") cfg.scan.phi_max = real();
    else if (k == "scan.phi_steps") cfg.scan.phi_steps = parse_count(value, k);
    else if (k == "scan.g_min") cfg.scan.g_min = real();
    else if (k == "scan.g_max") cfg.scan.g_max = real();
    else if (k == "scan.g_steps") cfg.scan.g_steps = parse_count(value, k);
    else if (k == "scan.lambda_min") cfg.scan.lambda_min = real();
    else if (k == "scan.lambda_max") cfg.scan.lambda_max = real();
    else if (k == "scan.lambda_steps") cfg.scan.lambda_steps = parse_count(value, k);
    else if (k == "scan.lambda_set") {
        cfg.scan.lambda_set.clear();
        for (const std::string& item : split_list(value)) cfg.scan.lambda_set.push_back(parse_real(item, k));
    }
    else if (k == "scan.n_min") cfg.scan.n_min = parse_integer(value, k);
    else if (k == "scan.n_max") cfg.scan.n_max = parse_integer(value, k);
    else if (k == "scan.texture_omega") {
        if (is_auto(value)) cfg.scan.texture_omega.reset();
        else cfg.scan.texture_omega = real();
    }
    else if (k == "sim.s0") {
        if (is_auto(value)) cfg.sim.s0.reset();
        else cfg.sim.s0 = real();
    }
    else if (k == "sim.s_p") cfg.sim.s_p = real();
    else if (k == "sim.n0") cfg.sim.n0 = parse_integer(value, k);
    else if (k == "sim.window") {
        if (is_auto(value)) {
            cfg.sim.window.reset();
        } else {
            const auto parts = split_list(value);
            if (parts.size() != 2) throw ValidationError("sim.window needs 'auto' or two site indices");
            cfg.sim.window = Window{parse_integer(parts[0], k), parse_integer(parts[1], k)};
        }
    }
    else if (k == "sim.dt") cfg.sim.dt = real();
    else if (k == "sim.t_final") {
        if (is_auto(value)) cfg.sim.t_final.reset();
        else cfg.sim.t_final = real();
    }
    else if (k == "sim.n_cut") {
        if (is_auto(value)) cfg.sim.n_cut.reset();
        else cfg.sim.n_cut = parse_integer(value, k);
    }
    else if (k == "sim.branch") cfg.sim.branch = static_cast<int>(parse_integer(value, k));
    else if (k == "sim.operating_point") cfg.sim.operating_point = lower(trim(value));
    else if (k == "sim.omega") {
        if (is_auto(value)) cfg.sim.omega.reset();
        else cfg.sim.omega = real();
    }
    else if (k == "sim.record_interval") cfg.sim.record_interval = real();
    else if (k == "output.dir") cfg.output.dir = trim(value);
    else if (k == "output.format") cfg.output.format = lower(trim(value));
    else throw ValidationError("unknown config key '" + k + "'");
}

/// Fills epsilon from its rule (aligned: a - pi/2, anti-aligned: a + pi/2,
/// reciprocal: arctan(tan a sin b)), plus any offset.
inline void resolve_epsilon(RunConfig& cfg) {
    if (cfg.epsilon_rule.empty()) return;
    double base = 0.0;
    if (cfg.epsilon_rule == "aligned") base = aligned_epsilon(cfg.system.a, -1);
    else if (cfg.epsilon_rule == "anti-aligned") base = aligned_epsilon(cfg.system.a, 1);
    else base = reciprocal_epsilon(cfg.system.a, cfg.system.b);
    cfg.system.epsilon = wrap_angle(base + cfg.epsilon_offset);
}

inline bool is_named_operating_point(const std::string& op) {
    if (op == "splitting") return true;
    try {
        (void)parse_kind(op);
        return true;
    } catch (const ValidationError&) {
        return false;
    }
}

inline void RunConfig::validate() const {
    system.validate();
    detail::require(scan.phi_min >= 0.0 && scan.phi_max <= pi + 1e-12 && scan.phi_min <= scan.phi_max,
                    "phi scan must lie within [0, pi]");
    detail::require(scan.g_min > 0.0 && scan.g_min <= scan.g_max, "g scan range must be positive and ordered");
    detail::require(scan.lambda_min > 0.0 && scan.lambda_min <= scan.lambda_max,
                    "lambda scan range must be positive and ordered");
    for (double l : scan.lambda_set) detail::require(l > 0.0, "lambda_set entries must be positive");
    detail::require(scan.n_min <= scan.n_max, "texture site range must be ordered");
    if (sim.s0) detail::require(*sim.s0 >= 0.0, "sim.s0 must be non-negative");
    detail::require(sim.s_p > 0.0, "sim.s_p must be positive");
    detail::require(sim.dt > 0.0 && sim.dt <= 0.02, "sim.dt must lie in (0, 0.02]");
    if (sim.t_final) detail::require(*sim.t_final > 0.0, "sim.t_final must be positive");
    if (sim.n_cut) detail::require(*sim.n_cut >= 0, "sim.n_cut must be non-negative");
    if (sim.window) sim.window->validate();
    detail::require_branch(sim.branch);
    detail::require(sim.record_interval > 0.0, "sim.record_interval must be positive");
    if (!sim.operating_point.empty() && !is_named_operating_point(sim.operating_point))
        throw ValidationError("unknown sim.operating_point '" + sim.operating_point + "'");
    detail::require(output.format == "csv" || output.format == "json", "output.format must be csv or json");
}

/// Canonical INI text of every field; loading it yields the same RunConfig.
inline std::string to_ini(const RunConfig& cfg) {
    using detail::fmt_real;
    std::string out;
    auto line = [&](std::string_view key, const std::string& value) { out += fmt::format("{} = {}\n", key, value); };
    auto opt_real = [](const std::optional<double>& v) { return v ? fmt_real(*v) : std::string("auto"); };

    out += "[system]\n";
    line("alpha", fmt_real(cfg.system.alpha));
    line("gamma", fmt_real(cfg.system.gamma));
    line("lambda", fmt_real(cfg.system.lambda));
    line("g", fmt_real(cfg.system.g));
    line("epsilon", fmt_real(cfg.system.epsilon));
    out += "[spin]\n";
    line("a", fmt_real(cfg.system.a));
    line("b", fmt_real(cfg.system.b));
    out += "[scan]\n";
    line("phi_min", fmt_real(cfg.scan.phi_min));
    line("phi_max", fmt_real(cfg.scan.phi_max));
    line("phi_steps", std::to_string(cfg.scan.phi_steps));
    line("g_min", fmt_real(cfg.scan.g_min));
    line("g_max", fmt_real(cfg.scan.g_max));
    line("g_steps", std::to_string(cfg.scan.g_steps));
    line("lambda_min", fmt_real(cfg.scan.lambda_min));
    line("lambda_max", fmt_real(cfg.scan.lambda_max));
    line("lambda_steps", std::to_string(cfg.scan.lambda_steps));
    std::string set;
    for (double l : cfg.scan.lambda_set) set += (set.empty() ? "" : " ") + fmt_real(l);
    line("lambda_set", set);
    line("n_min", std::to_string(cfg.scan.n_min));
    line("n_max", std::to_string(cfg.scan.n_max));
    line("texture_omega", opt_real(cfg.scan.texture_omega));
    out += "[sim]\n";
    line("s0", opt_real(cfg.sim.s0));
    line("s_p", fmt_real(cfg.sim.s_p));
    line("n0", std::to_string(cfg.sim.n0));
    line("window", cfg.sim.window ? fmt::format("{} {}", cfg.sim.window->n_min, cfg.sim.window->n_max) : "auto");
    line("dt", fmt_real(cfg.sim.dt));
    line("t_final", opt_real(cfg.sim.t_final));
    line("n_cut", cfg.sim.n_cut ? std::to_string(*cfg.sim.n_cut) : "auto");
    line("branch", std::to_string(cfg.sim.branch));
    if (!cfg.sim.operating_point.empty()) line("operating_point", cfg.sim.operating_point);
    line("omega", opt_real(cfg.sim.omega));
    line("record_interval", fmt_real(cfg.sim.record_interval));
    out += "[output]\n";
    line("dir", cfg.output.dir);
    line("format", cfg.output.format);
    return out;
}

// ---------------------------------------------------------------------------
// Loading

inline constexpr std::string_view echo_begin = "# --- config ---";
inline constexpr std::string_view echo_end = "# --- end config ---";

/// Pulls the echoed INI block out of an output file, or returns the text unchanged.
inline std::string strip_echo(const std::string& text) {
    const std::size_t b = text.find(echo_begin);
    if (b == std::string::npos) return text;
    const std::size_t e = text.find(echo_end, b);
    if (e == std::string::npos) throw ValidationError("config echo is missing its end marker");
    std::istringstream in(text.substr(b + echo_begin.size(), e - b - echo_begin.size()));
    std::string out;
    for (std::string line; std::getline(in, line);) {
        if (line.rfind("# ", 0) == 0) out += line.substr(2) + "\n";
        else if (line == "#") out += "\n";
    }
    return out;
}

/// Drops trailing "; ..." or "# ..." comments that follow whitespace.
inline std::string strip_inline_comments(const std::string& text) {
    std::istringstream lines(text);
    std::string out;
    for (std::string line; std::getline(lines, line);) {
        for (std::size_t i = 1; i < line.size(); ++i) {
            if ((line[i] == ';' || line[i] == '#') && std::isspace(static_cast<unsigned char>(line[i - 1]))) {
                line.resize(i);
                break;
            }
        }
        out += line + "\n";
    }
    return out;
}

inline ConfigEntries entries_from_ini(const std::string& text) {
    boost::property_tree::ptree tree;
    std::istringstream in(strip_inline_comments(text));
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ValidationError(std::string("malformed config: ") + e.what());
    }
    ConfigEntries out;
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ValidationError("config key '" + section + "' must sit inside a [section]");
        for (const auto& [key, value] : body) out[section + "." + key] = value.data();
    }
    return out;
}

inline ConfigEntries entries_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("malformed JSON config: ") + e.what());
    }
    if (!doc.is_object()) throw ValidationError("JSON config must be an object of sections");
    ConfigEntries out;
    for (const auto& [section, body] : doc.items()) {
        if (!body.is_object()) throw ValidationError("JSON config section '" + section + "' must be an object");
        for (const auto& [key, value] : body.items()) {
            std::string raw;
            if (value.is_string()) {
                raw = value.get<std::string>();
            } else if (value.is_number_integer()) {
                raw = std::to_string(value.get<long long>());
            } else if (value.is_number()) {
                raw = detail::fmt_real(value.get<double>());
            } else if (value.is_array()) {
                for (const auto& item : value)
                    raw += (raw.empty() ? "" : " ") + (item.is_string() ? item.get<std::string>()
                                                                         : detail::fmt_real(item.get<double>()));
            } else {
                throw ValidationError("unsupported JSON value for " + section + "." + key);
            }
            out[section + "." + key] = raw;
        }
    }
    return out;
}

/// Layers entries over `base`, resolves epsilon and validates.
inline RunConfig apply_entries(RunConfig cfg, const ConfigEntries& entries) {
    for (const auto& [k, v] : entries) apply_entry(cfg, k, v);
    // the angles a, b may appear after epsilon in the map
    resolve_epsilon(cfg);
    cfg.validate();
    return cfg;
}

inline RunConfig parse_config(const std::string& text, RunConfig base = {}) {
    const std::string body = strip_echo(text);
    const std::string t = detail::trim(body);
    if (!t.empty() && t.front() == '{') {
        // a JSON output document carries its echo under "config"
        const nlohmann::json doc = nlohmann::json::parse(t, nullptr, false);
        if (doc.is_object() && doc.contains("config") && doc["config"].is_string())
            return apply_entries(std::move(base), entries_from_ini(doc["config"].get<std::string>()));
    }
    const ConfigEntries entries = (!t.empty() && t.front() == '{') ? entries_from_json(t) : entries_from_ini(body);
    return apply_entries(std::move(base), entries);
}

inline RunConfig load_config(const std::string& path, RunConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), std::move(base));
}

}  // namespace spinvalve
