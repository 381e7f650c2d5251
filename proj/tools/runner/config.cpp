#include "config.hpp"

#include "deadcore/error.hpp"
#include "deadcore/io.hpp"

#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace deadcore::runner {

namespace {

constexpr std::pair<Mode, std::string_view> kModes[] = {
    {Mode::Solve, "solve"},         {Mode::SolveLocal, "solve-local"}, {Mode::Exponent, "exponent"},
    {Mode::Blowup, "blowup"},       {Mode::Compare, "compare"},        {Mode::Liouville, "liouville"},
    {Mode::SLimit, "slimit"},       {Mode::Validate, "validate"},
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) {
        throw std::invalid_argument("trailing characters");
    }
    return d;
}

int to_int(const std::string& v) {
    std::size_t used = 0;
    const long long d = std::stoll(v, &used);
    if (used != v.size()) {
        throw std::invalid_argument("trailing characters");
    }
    return static_cast<int>(d);
}

bool to_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no") {
        return false;
    }
    throw std::invalid_argument("expected true or false");
}

std::vector<double> to_list(const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(to_double(trim(item)));
    }
    if (out.empty()) {
        throw std::invalid_argument("empty list");
    }
    return out;
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t k = 0; k < v.size(); ++k) {
        out += (k ? "," : "") + format_double(v[k]);
    }
    return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"mode", [](ExperimentConfig& c, const std::string& v) { c.mode = parse_mode(v);
             c.mode_explicit = true; }},
        {"s", [](ExperimentConfig& c, const std::string& v) { c.s = to_double(v); }},
        {"gamma", [](ExperimentConfig& c, const std::string& v) { c.gamma = to_double(v); }},
        {"reaction", [](ExperimentConfig& c, const std::string& v) { c.reaction = v; }},
        {"epsilon", [](ExperimentConfig& c, const std::string& v) { c.epsilon = to_double(v); }},
        {"a", [](ExperimentConfig& c, const std::string& v) { c.a = to_double(v); }},
        {"R", [](ExperimentConfig& c, const std::string& v) { c.R = to_double(v); }},
        {"h", [](ExperimentConfig& c, const std::string& v) { c.h = to_double(v); }},
        {"shape", [](ExperimentConfig& c, const std::string& v) { c.shape = v; }},
        {"amplitude", [](ExperimentConfig& c, const std::string& v) { c.amplitude = to_double(v); }},
        {"boundary_left", [](ExperimentConfig& c, const std::string& v) { c.boundary_left = to_double(v); }},
        {"boundary_right", [](ExperimentConfig& c, const std::string& v) { c.boundary_right = to_double(v); }},
        {"residual_tol", [](ExperimentConfig& c, const std::string& v) { c.residual_tol = to_double(v); }},
        {"max_iters", [](ExperimentConfig& c, const std::string& v) { c.max_iters = to_int(v); }},
        {"x0", [](ExperimentConfig& c, const std::string& v) { c.x0 = to_double(v); }},
        {"r_min", [](ExperimentConfig& c, const std::string& v) { c.r_min = to_double(v); }},
        {"r_max", [](ExperimentConfig& c, const std::string& v) { c.r_max = to_double(v); }},
        {"radii", [](ExperimentConfig& c, const std::string& v) { c.radii = to_int(v); }},
        {"nu", [](ExperimentConfig& c, const std::string& v) { c.nu = to_int(v); }},
        {"calibrate", [](ExperimentConfig& c, const std::string& v) { c.calibrate = to_bool(v); }},
        {"amplitude_lo", [](ExperimentConfig& c, const std::string& v) { c.amplitude_lo = to_double(v); }},
        {"amplitude_hi", [](ExperimentConfig& c, const std::string& v) { c.amplitude_hi = to_double(v); }},
        {"blowup_radii", [](ExperimentConfig& c, const std::string& v) { c.blowup_radii = to_list(v); }},
        {"probe_radii", [](ExperimentConfig& c, const std::string& v) { c.probe_radii = to_list(v); }},
        {"s_list", [](ExperimentConfig& c, const std::string& v) { c.s_list = to_list(v); }},
        {"pairs", [](ExperimentConfig& c, const std::string& v) { c.pairs = to_int(v); }},
        {"seed", [](ExperimentConfig& c, const std::string& v) { c.seed = std::stoull(v); }},
        {"out", [](ExperimentConfig& c, const std::string& v) { c.out = v; }},
    };
    return table;
}

} // namespace

std::string_view to_string(Mode mode) noexcept {
    for (const auto& [m, name] : kModes) {
        if (m == mode) {
            return name;
        }
    }
    return "solve";
}

Mode parse_mode(std::string_view name) {
    for (const auto& [m, text] : kModes) {
        if (text == name) {
            return m;
        }
    }
    fail(ErrorCode::InvalidArgument, "unknown mode '" + std::string(name) + "'");
}

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::set<std::string> seen;
    std::string raw;
    int line = 0;
    auto bad = [&](const std::string& what) { fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what); };
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty()) {
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            bad("expected 'key = value', got '" + text + "'");
        }
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty() || value.empty()) {
            bad("empty key or value");
        }
        const auto it = setters().find(key);
        if (it == setters().end()) {
            bad("unknown key '" + key + "'");
        }
        if (!seen.insert(key).second) {
            bad("duplicate key '" + key + "'");
        }
        try {
            it->second(cfg, value);
        } catch (const Error& e) {
            bad(e.what());
        } catch (const std::exception&) {
            bad("invalid value '" + value + "' for key '" + key + "'");
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::ParseError, "cannot read config '" + path.string() + "'");
    return parse_config(in);
}

std::map<std::string, std::string> describe(const ExperimentConfig& c) {
    return {
        {"mode", std::string(to_string(c.mode))},
        {"s", format_double(c.s)},
        {"gamma", format_double(c.gamma)},
        {"reaction", c.reaction},
        {"epsilon", format_double(c.epsilon)},
        {"a", format_double(c.a)},
        {"R", format_double(c.R)},
        {"h", format_double(c.h)},
        {"shape", c.shape},
        {"amplitude", format_double(c.amplitude)},
        {"boundary_left", format_double(c.boundary_left)},
        {"boundary_right", format_double(c.boundary_right)},
        {"residual_tol", format_double(c.residual_tol)},
        {"max_iters", std::to_string(c.max_iters)},
        {"x0", format_double(c.x0)},
        {"r_min", format_double(c.r_min)},
        {"r_max", format_double(c.r_max)},
        {"radii", std::to_string(c.radii)},
        {"nu", std::to_string(c.nu)},
        {"calibrate", c.calibrate ? "true" : "false"},
        {"amplitude_lo", format_double(c.amplitude_lo)},
        {"amplitude_hi", format_double(c.amplitude_hi)},
        {"blowup_radii", join(c.blowup_radii)},
        {"probe_radii", join(c.probe_radii)},
        {"s_list", join(c.s_list)},
        {"pairs", std::to_string(c.pairs)},
        {"seed", std::to_string(c.seed)},
        {"out", c.out.string()},
    };
}

} // namespace deadcore::runner
