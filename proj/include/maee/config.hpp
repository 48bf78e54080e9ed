#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "maee/baselines.hpp"
#include "maee/channel.hpp"
#include "maee/motor.hpp"

namespace maee {

/// Parsed value of one `key = value` line: scalar, string, or a homogeneous
/// array of either.
using ConfigValue =
    std::variant<double, bool, std::string, std::vector<double>, std::vector<std::string>>;

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        else if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

inline ConfigValue parse_scalar(const std::string& tok, const std::string& where) {
    if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"')
        return tok.substr(1, tok.size() - 2);
    if (tok == "true") return true;
    if (tok == "false") return false;
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad value '" + tok + "' at " + where);
    }
}

inline ConfigValue parse_value(const std::string& raw, const std::string& where) {
    const std::string v = trim(raw);
    if (v.empty()) throw std::invalid_argument("config: empty value at " + where);
    if (v.front() == '[') {
        if (v.back() != ']') throw std::invalid_argument("config: unterminated array at " + where);
        std::vector<double> nums;
        std::vector<std::string> strs;
        std::string body = v.substr(1, v.size() - 2);
        std::string tok;
        std::stringstream ss(body);
        while (std::getline(ss, tok, ',')) {
            tok = trim(tok);
            if (tok.empty()) continue;
            const ConfigValue sv = parse_scalar(tok, where);
            if (std::holds_alternative<double>(sv)) nums.push_back(std::get<double>(sv));
            else if (std::holds_alternative<std::string>(sv)) strs.push_back(std::get<std::string>(sv));
            else throw std::invalid_argument("config: bool arrays unsupported at " + where);
        }
        if (!nums.empty() && !strs.empty())
            throw std::invalid_argument("config: mixed array at " + where);
        if (!strs.empty()) return strs;
        return nums;
    }
    return parse_scalar(v, where);
}

} // namespace detail

/// `[section]` tables of `key = value` lines; `#` comments; flat storage
/// keyed as "section.key".
struct ConfigFile {
    std::map<std::string, ConfigValue> values;

    [[nodiscard]] bool has(const std::string& key) const { return values.count(key) != 0; }

    [[nodiscard]] double number(const std::string& key, double fallback) const {
        const auto it = values.find(key);
        if (it == values.end()) return fallback;
        if (const double* v = std::get_if<double>(&it->second)) return *v;
        throw std::invalid_argument("config: '" + key + "' must be a number");
    }
    [[nodiscard]] std::string text(const std::string& key, const std::string& fallback) const {
        const auto it = values.find(key);
        if (it == values.end()) return fallback;
        if (const std::string* v = std::get_if<std::string>(&it->second)) return *v;
        throw std::invalid_argument("config: '" + key + "' must be a string");
    }
    [[nodiscard]] std::vector<double> numbers(const std::string& key) const {
        const auto it = values.find(key);
        if (it == values.end()) return {};
        if (const auto* v = std::get_if<std::vector<double>>(&it->second)) return *v;
        throw std::invalid_argument("config: '" + key + "' must be a number array");
    }
    [[nodiscard]] std::vector<std::string> texts(const std::string& key) const {
        const auto it = values.find(key);
        if (it == values.end()) return {};
        if (const auto* v = std::get_if<std::vector<std::string>>(&it->second)) return *v;
        throw std::invalid_argument("config: '" + key + "' must be a string array");
    }
};

inline ConfigFile parse_config(const std::string& text) {
    ConfigFile cfg;
    std::stringstream ss(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        line = detail::trim(detail::strip_comment(line));
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config: bad section header at " + where);
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key = value at " + where);
        const std::string key = detail::trim(line.substr(0, eq));
        if (key.empty()) throw std::invalid_argument("config: empty key at " + where);
        const std::string full = section.empty() ? key : section + "." + key;
        cfg.values[full] = detail::parse_value(line.substr(eq + 1), where);
    }
    return cfg;
}

inline ConfigFile load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

enum class SweepAxis {
    ArrayLengthOverLambda,
    NumPaths,
    CoherenceTime,
    NumAntennas,
    PMaxDbm,
};

inline const char* to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::ArrayLengthOverLambda: return "array_length_over_lambda";
        case SweepAxis::NumPaths: return "num_paths";
        case SweepAxis::CoherenceTime: return "coherence_time";
        case SweepAxis::NumAntennas: return "num_antennas";
        case SweepAxis::PMaxDbm: return "p_max_dbm";
    }
    return "?";
}

inline SweepAxis sweep_axis_from_string(const std::string& name) {
    if (name == "array_length_over_lambda") return SweepAxis::ArrayLengthOverLambda;
    if (name == "num_paths") return SweepAxis::NumPaths;
    if (name == "coherence_time") return SweepAxis::CoherenceTime;
    if (name == "num_antennas") return SweepAxis::NumAntennas;
    if (name == "p_max_dbm") return SweepAxis::PMaxDbm;
    throw std::invalid_argument("unknown sweep axis: " + name);
}

struct ExperimentConfig {
    Scenario scenario;
    MotorParams motor = MotorParams::am2224();
    std::vector<Scheme> schemes{Scheme::Proposed};
    SweepAxis axis = SweepAxis::ArrayLengthOverLambda;
    std::vector<double> sweep_values{6.0};
    int realizations = 100;
    std::uint64_t master_seed = 1;
    int threads = 1;
    double grid_step_multiplier = 1.0; // candidate spacing = multiplier * d_s
    std::string out_path;
    std::string format = "csv";
};

/// Returns the scenario at one sweep point.
inline Scenario apply_sweep(const Scenario& base, SweepAxis axis, double value) {
    Scenario s = base;
    switch (axis) {
        case SweepAxis::ArrayLengthOverLambda: s.array_length = value * s.wavelength; break;
        case SweepAxis::NumPaths: s.num_paths = static_cast<int>(std::lround(value)); break;
        case SweepAxis::CoherenceTime: s.coherence_time = value; break;
        case SweepAxis::NumAntennas: s.num_antennas = static_cast<int>(std::lround(value)); break;
        case SweepAxis::PMaxDbm: s.p_max = dbm_to_watt(value); break;
    }
    return s;
}

inline void validate(const ExperimentConfig& cfg) {
    if (cfg.realizations < 1)
        throw std::invalid_argument("experiment: realizations must be >= 1");
    if (cfg.sweep_values.empty())
        throw std::invalid_argument("experiment: sweep.values must be non-empty");
    for (std::size_t i = 1; i < cfg.sweep_values.size(); ++i)
        if (cfg.sweep_values[i] < cfg.sweep_values[i - 1])
            throw std::invalid_argument("experiment: sweep.values must be sorted ascending");
    if (cfg.schemes.empty())
        throw std::invalid_argument("experiment: run.schemes must be non-empty");
    if (cfg.threads < 1) throw std::invalid_argument("experiment: run.threads must be >= 1");
    if (!(cfg.grid_step_multiplier > 0.0))
        throw std::invalid_argument("experiment: run.grid_step_multiplier must be > 0");
    if (cfg.format != "csv" && cfg.format != "json")
        throw std::invalid_argument("experiment: run.format must be csv or json");
    validate(cfg.motor);
    for (double v : cfg.sweep_values) {
        try {
            validate(apply_sweep(cfg.scenario, cfg.axis, v));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("experiment: sweep value " + std::to_string(v) +
                                        " yields an invalid scenario: " + e.what());
        }
    }
}

/// Builds an ExperimentConfig from a parsed file. dBm/dB keys are converted
/// to linear units here; linear-unit keys are also accepted.
inline ExperimentConfig experiment_from_config(const ConfigFile& cfg) {
    ExperimentConfig e;
    Scenario& s = e.scenario;
    s.wavelength = cfg.number("scenario.wavelength", s.wavelength);
    if (cfg.has("scenario.array_length_over_lambda"))
        s.array_length = cfg.number("scenario.array_length_over_lambda", 6.0) * s.wavelength;
    else
        s.array_length = cfg.number("scenario.array_length", s.array_length);
    s.num_antennas = static_cast<int>(cfg.number("scenario.num_antennas", s.num_antennas));
    s.num_users = static_cast<int>(cfg.number("scenario.num_users", s.num_users));
    s.num_paths = static_cast<int>(cfg.number("scenario.num_paths", s.num_paths));
    s.pathloss_exponent = cfg.number("scenario.pathloss_exponent", s.pathloss_exponent);
    if (cfg.has("scenario.ref_pathloss_db"))
        s.ref_pathloss = db_to_linear(cfg.number("scenario.ref_pathloss_db", -40.0));
    else
        s.ref_pathloss = cfg.number("scenario.ref_pathloss", s.ref_pathloss);
    s.user_distance_min = cfg.number("scenario.user_distance_min", s.user_distance_min);
    s.user_distance_max = cfg.number("scenario.user_distance_max", s.user_distance_max);
    if (cfg.has("scenario.noise_power_dbm"))
        s.noise_power = dbm_to_watt(cfg.number("scenario.noise_power_dbm", -80.0));
    else
        s.noise_power = cfg.number("scenario.noise_power", s.noise_power);
    if (cfg.has("scenario.p_max_dbm"))
        s.p_max = dbm_to_watt(cfg.number("scenario.p_max_dbm", 30.0));
    else
        s.p_max = cfg.number("scenario.p_max", s.p_max);
    if (cfg.has("scenario.p_static_dbm"))
        s.p_static = dbm_to_watt(cfg.number("scenario.p_static_dbm", 30.0));
    else
        s.p_static = cfg.number("scenario.p_static", s.p_static);
    s.coherence_time = cfg.number("scenario.coherence_time", s.coherence_time);
    s.d_min = cfg.number("scenario.d_min", s.wavelength / 2.0);
    s.d_th = cfg.number("scenario.d_th", s.d_min);

    MotorParams& m = e.motor;
    m.rotor_teeth = static_cast<int>(cfg.number("motor.rotor_teeth", m.rotor_teeth));
    m.flux = cfg.number("motor.flux", m.flux);
    m.voltage = cfg.number("motor.voltage", m.voltage);
    m.resistance = cfg.number("motor.resistance", m.resistance);
    m.inductance = cfg.number("motor.inductance", m.inductance);
    m.lead_radius = cfg.number("motor.lead_radius", m.lead_radius);
    m.step_angle = cfg.number("motor.step_angle", m.step_angle);
    m.omega_max = cfg.number("motor.omega_max", m.omega_max);

    e.axis = sweep_axis_from_string(cfg.text("sweep.axis", to_string(e.axis)));
    if (cfg.has("sweep.values")) e.sweep_values = cfg.numbers("sweep.values");

    if (cfg.has("run.schemes")) {
        e.schemes.clear();
        for (const std::string& name : cfg.texts("run.schemes"))
            e.schemes.push_back(scheme_from_string(name));
    }
    e.realizations = static_cast<int>(cfg.number("run.realizations", e.realizations));
    e.master_seed = static_cast<std::uint64_t>(cfg.number("run.seed", 1.0));
    e.threads = static_cast<int>(cfg.number("run.threads", e.threads));
    e.grid_step_multiplier = cfg.number("run.grid_step_multiplier", e.grid_step_multiplier);
    e.out_path = cfg.text("run.out", e.out_path);
    e.format = cfg.text("run.format", e.format);
    validate(e);
    return e;
}

inline ExperimentConfig load_experiment(const std::string& path) {
    return experiment_from_config(load_config(path));
}

} // namespace maee
