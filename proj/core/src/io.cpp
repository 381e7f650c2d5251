#include "deadcore/io.hpp"

#include "deadcore/error.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace deadcore {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void parse_fail(int line, const std::string& what) {
    fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

double parse_number(const std::string& text, int line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        parse_fail(line, "not a number: '" + text + "'");
    }
    if (used != text.size()) {
        parse_fail(line, "trailing characters in '" + text + "'");
    }
    return v;
}

GridSpec parse_grid_comment(const std::string& body, int line) {
    // a:<a>,R:<R>,h:<h>
    GridSpec spec;
    int seen = 0;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            parse_fail(line, "grid entry without ':' in '" + item + "'");
        }
        const std::string key = trim(item.substr(0, colon));
        const double value = parse_number(trim(item.substr(colon + 1)), line);
        if (key == "a") {
            spec.a = value;
        } else if (key == "R") {
            spec.R = value;
        } else if (key == "h") {
            spec.h = value;
        } else {
            parse_fail(line, "unknown grid key '" + key + "'");
        }
        ++seen;
    }
    if (seen != 3) {
        parse_fail(line, "grid comment needs a, R and h");
    }
    return spec;
}

} // namespace

void write_grid_function_csv(const GridFunction& u, std::ostream& out) {
    const Grid& grid = *u.grid;
    out << "# grid=a:" << format_double(grid.a()) << ",R:" << format_double(grid.R()) << ",h:"
        << format_double(grid.h()) << '\n';
    out << "# tail=" << u.tail.encode() << '\n';
    out << "x,u\n";
    for (std::size_t i = 0; i < u.size(); ++i) {
        out << format_double(grid.x(i)) << ',' << format_double(u.values[i]) << '\n';
    }
}

GridFunction read_grid_function_csv(std::istream& in) {
    std::optional<GridSpec> spec;
    TailModel tail;
    std::vector<double> xs, values;
    std::vector<int> lines;
    bool header = false;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string text = trim(raw);
        if (text.empty()) {
            continue;
        }
        if (text[0] == '#') {
            const std::string body = trim(text.substr(1));
            if (body.rfind("grid=", 0) == 0) {
                spec = parse_grid_comment(body.substr(5), line);
            } else if (body.rfind("tail=", 0) == 0) {
                try {
                    tail = TailModel::decode(body.substr(5));
                } catch (const Error& e) {
                    parse_fail(line, e.what());
                }
            }
            continue;
        }
        if (!header) {
            if (text != "x,u") {
                parse_fail(line, "expected header 'x,u'");
            }
            header = true;
            continue;
        }
        const auto comma = text.find(',');
        if (comma == std::string::npos) {
            parse_fail(line, "expected two columns");
        }
        xs.push_back(parse_number(trim(text.substr(0, comma)), line));
        lines.push_back(line);
        values.push_back(parse_number(trim(text.substr(comma + 1)), line));
    }
    if (!spec) {
        parse_fail(line, "missing '# grid=' comment");
    }
    GridPtr grid;
    try {
        grid = make_grid(*spec);
    } catch (const Error& e) {
        fail(ErrorCode::ParseError, std::string("invalid grid in CSV: ") + e.what());
    }
    if (values.size() != grid->size()) {
        fail(ErrorCode::ParseError, "CSV has " + std::to_string(values.size()) + " rows, grid has " +
                                        std::to_string(grid->size()) + " nodes");
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (std::abs(xs[i] - grid->x(i)) > 1e-9 * grid->h()) {
            parse_fail(lines[i], "x = " + format_double(xs[i]) + " is not grid node " + format_double(grid->x(i)));
        }
    }
    return GridFunction(grid, std::move(values), tail);
}

void write_solve_sidecar(const SolveReport& report, const RunMetadata& meta, std::ostream& out) {
    out << "s=" << (meta.s ? format_double(*meta.s) : std::string("local")) << '\n';
    out << "gamma=" << format_double(meta.gamma) << '\n';
    out << "mode=" << to_string(meta.mode) << '\n';
    out << "residual=" << format_double(report.residual_inf) << '\n';
    out << "iterations=" << report.iterations << '\n';
    out << "energy=" << format_double(report.energy) << '\n';
    out << "converged=" << (report.converged ? "true" : "false") << '\n';
    out << "threads=" << report.threads << '\n';
    out << "seed=" << meta.seed << '\n';
    if (report.free_boundary) {
        out << "free_boundary=" << format_double(*report.free_boundary) << '\n';
    }
    for (const auto& [key, value] : meta.extra) {
        out << key << '=' << value << '\n';
    }
}

std::map<std::string, std::string> read_sidecar(std::istream& in) {
    std::map<std::string, std::string> out;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string text = trim(raw);
        if (text.empty() || text[0] == '#') {
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            parse_fail(line, "expected key=value");
        }
        out[trim(text.substr(0, eq))] = trim(text.substr(eq + 1));
    }
    return out;
}

void write_exponent_csv(const std::vector<ExponentRow>& rows, std::ostream& out) {
    out << "s,gamma,x0,slope,target,relative_gap,r2\n";
    for (const auto& r : rows) {
        out << format_double(r.s) << ',' << format_double(r.gamma) << ',' << format_double(r.x0) << ','
            << format_double(r.fit.slope) << ',' << format_double(r.fit.target) << ','
            << format_double(r.fit.relative_gap) << ',' << format_double(r.fit.r_squared) << '\n';
    }
}

void write_branching_csv(const std::vector<BranchingCandidate>& candidates, std::ostream& out) {
    out << "x0,u,du,d2u\n";
    for (const auto& c : candidates) {
        out << format_double(c.x0) << ',' << format_double(c.u) << ',' << format_double(c.du) << ','
            << format_double(c.d2u) << '\n';
    }
}

void write_slimit_csv(const std::vector<SLimitRow>& rows, std::ostream& out) {
    out << "s,distance,slope\n";
    for (const auto& r : rows) {
        out << format_double(r.s) << ',' << format_double(r.distance) << ',' << format_double(r.slope) << '\n';
    }
}

} // namespace deadcore
