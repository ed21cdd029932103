#include "zeronoise/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>

#include "zeronoise/errors.hpp"
#include "zeronoise/maps.hpp"
#include "zeronoise/numeric.hpp"

namespace zn {

namespace {

std::string trim(std::string_view s) {
    const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw config_error("line " + std::to_string(line) + ": " + msg);
}

double parse_number(int line, const std::string& key, const std::string& value) {
    double out = 0.0;
    const char* first = value.data();
    const char* last = first + value.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) {
        fail(line, "key '" + key + "' expects a number, got '" + value + "'");
    }
    return out;
}

long long parse_integer(int line, const std::string& key, const std::string& value) {
    long long out = 0;
    const char* first = value.data();
    const char* last = first + value.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) {
        fail(line, "key '" + key + "' expects an integer, got '" + value + "'");
    }
    return out;
}

std::uint64_t parse_seed(int line, const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    const char* first = value.data();
    const char* last = first + value.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) {
        fail(line, "key '" + key + "' expects an unsigned integer, got '" + value + "'");
    }
    return out;
}

std::vector<std::string> parse_array_items(int line, const std::string& key,
                                           const std::string& value) {
    if (value.size() < 2 || value.front() != '[' || value.back() != ']') {
        fail(line, "key '" + key + "' expects a bracketed array, got '" + value + "'");
    }
    const std::string inner = trim(std::string_view(value).substr(1, value.size() - 2));
    std::vector<std::string> items;
    if (inner.empty()) return items;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = inner.find(',', start);
        const std::string item =
            trim(std::string_view(inner).substr(start, comma - start));
        if (item.empty()) fail(line, "key '" + key + "' has an empty array entry");
        items.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return items;
}

enum class Section { None, Map, Kernel, Grid, Solver, Sweep, Output };

Section section_from_name(int line, const std::string& name) {
    if (name == "map") return Section::Map;
    if (name == "kernel") return Section::Kernel;
    if (name == "grid") return Section::Grid;
    if (name == "solver") return Section::Solver;
    if (name == "sweep") return Section::Sweep;
    if (name == "output") return Section::Output;
    fail(line, "unknown section [" + name + "]");
}

std::string join_ints(const std::vector<int>& v) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ", ";
        os << v[i];
    }
    os << ']';
    return os.str();
}

std::string join_doubles(const std::vector<double>& v) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ", ";
        os << format_double(v[i]);
    }
    os << ']';
    return os.str();
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig config;
    Section section = Section::None;
    std::set<std::string> seen;
    int epsilon_list_line = 0;
    int seeds_line = 0;

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') fail(line_no, "unterminated section header");
            section = section_from_name(line_no, trim(std::string_view(line).substr(
                                                     1, line.size() - 2)));
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            fail(line_no, "expected 'key = value', got '" + line + "'");
        }
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) fail(line_no, "empty key");
        if (value.empty()) fail(line_no, "key '" + key + "' has no value");
        if (section == Section::None) {
            fail(line_no, "key '" + key + "' appears before any section");
        }

        const std::string tag = std::to_string(static_cast<int>(section)) + "." + key;
        if (!seen.insert(tag).second) fail(line_no, "duplicate key '" + key + "'");

        switch (section) {
            case Section::Map: {
                if (key == "name") {
                    config.map_name = value;
                } else {
                    config.map_params[key] = parse_number(line_no, key, value);
                }
                break;
            }
            case Section::Kernel: {
                if (key == "epsilon") {
                    const double e = parse_number(line_no, key, value);
                    if (!(e > 0.0)) fail(line_no, "kernel epsilon must be positive");
                    config.kernel_epsilon = e;
                } else if (key == "shape") {
                    if (value == "ball") {
                        config.kernel_shape = KernelShape::Ball;
                    } else if (value == "cube") {
                        config.kernel_shape = KernelShape::Cube;
                    } else {
                        fail(line_no, "key 'shape' expects ball or cube, got '" + value +
                                          "'");
                    }
                } else if (key == "policy") {
                    if (value == "wrap") {
                        config.kernel_policy = BoundaryPolicy::Wrap;
                    } else if (value == "reject") {
                        config.kernel_policy = BoundaryPolicy::Reject;
                    } else {
                        fail(line_no, "key 'policy' expects wrap or reject, got '" +
                                          value + "'");
                    }
                } else if (key == "mask") {
                    for (const auto& item : parse_array_items(line_no, key, value)) {
                        const long long v = parse_integer(line_no, key, item);
                        if (v != 0 && v != 1) {
                            fail(line_no, "mask entries must be 0 or 1");
                        }
                        config.kernel_mask.push_back(static_cast<std::uint8_t>(v));
                    }
                    if (config.kernel_mask.empty()) {
                        fail(line_no, "mask must not be empty");
                    }
                } else {
                    fail(line_no, "unknown key '" + key + "' in section [kernel]");
                }
                break;
            }
            case Section::Grid: {
                if (key == "cells") {
                    std::vector<std::string> items;
                    if (!value.empty() && value.front() == '[') {
                        items = parse_array_items(line_no, key, value);
                    } else {
                        items.push_back(value);
                    }
                    for (const auto& item : items) {
                        const long long c = parse_integer(line_no, key, item);
                        if (c < 1) fail(line_no, "grid cells must be at least 1");
                        config.grid_cells.push_back(static_cast<int>(c));
                    }
                    if (config.grid_cells.empty()) {
                        fail(line_no, "cells must not be empty");
                    }
                } else {
                    fail(line_no, "unknown key '" + key + "' in section [grid]");
                }
                break;
            }
            case Section::Solver: {
                if (key == "tol") {
                    config.tol = parse_number(line_no, key, value);
                    if (!(config.tol > 0.0)) fail(line_no, "tol must be positive");
                } else if (key == "max_iters") {
                    config.max_iters = parse_integer(line_no, key, value);
                    if (config.max_iters < 1) fail(line_no, "max_iters must be positive");
                } else if (key == "samples_per_cell") {
                    const long long v = parse_integer(line_no, key, value);
                    if (v < 1) fail(line_no, "samples_per_cell must be positive");
                    config.samples_per_cell = static_cast<int>(v);
                } else if (key == "orbit_steps") {
                    config.orbit_steps = parse_integer(line_no, key, value);
                    if (config.orbit_steps < 1) {
                        fail(line_no, "orbit_steps must be positive");
                    }
                } else if (key == "burn_in") {
                    config.burn_in = parse_integer(line_no, key, value);
                    if (config.burn_in < 0) fail(line_no, "burn_in must be nonnegative");
                } else if (key == "lyapunov_steps") {
                    config.lyapunov_steps = parse_integer(line_no, key, value);
                    if (config.lyapunov_steps < 1) {
                        fail(line_no, "lyapunov_steps must be positive");
                    }
                } else if (key == "renorm_period") {
                    config.renorm_period = parse_integer(line_no, key, value);
                    if (config.renorm_period < 1) {
                        fail(line_no, "renorm_period must be positive");
                    }
                } else if (key == "domination_samples") {
                    config.domination_samples = parse_integer(line_no, key, value);
                    if (config.domination_samples < 1) {
                        fail(line_no, "domination_samples must be positive");
                    }
                } else if (key == "basin_starts") {
                    config.basin_starts = parse_integer(line_no, key, value);
                    if (config.basin_starts < 1) {
                        fail(line_no, "basin_starts must be positive");
                    }
                } else if (key == "basin_iters") {
                    config.basin_iters = parse_integer(line_no, key, value);
                    if (config.basin_iters < 1) {
                        fail(line_no, "basin_iters must be positive");
                    }
                } else if (key == "basin_tol") {
                    config.basin_tol = parse_number(line_no, key, value);
                    if (!(config.basin_tol > 0.0)) {
                        fail(line_no, "basin_tol must be positive");
                    }
                } else if (key == "degenerate_tol") {
                    config.degenerate_tol = parse_number(line_no, key, value);
                    if (!(config.degenerate_tol > 0.0)) {
                        fail(line_no, "degenerate_tol must be positive");
                    }
                } else if (key == "x0") {
                    std::vector<double> coords;
                    for (const auto& item : parse_array_items(line_no, key, value)) {
                        coords.push_back(parse_number(line_no, key, item));
                    }
                    if (coords.empty()) fail(line_no, "x0 must not be empty");
                    config.x0 = std::move(coords);
                } else {
                    fail(line_no, "unknown key '" + key + "' in section [solver]");
                }
                break;
            }
            case Section::Sweep: {
                if (key == "epsilon_list") {
                    epsilon_list_line = line_no;
                    for (const auto& item : parse_array_items(line_no, key, value)) {
                        config.epsilon_list.push_back(parse_number(line_no, key, item));
                    }
                } else if (key == "seeds") {
                    seeds_line = line_no;
                    config.seeds.clear();
                    for (const auto& item : parse_array_items(line_no, key, value)) {
                        config.seeds.push_back(parse_seed(line_no, key, item));
                    }
                } else if (key == "proxy_refine") {
                    const long long v = parse_integer(line_no, key, value);
                    if (v < 1) fail(line_no, "proxy_refine must be positive");
                    config.proxy_refine = static_cast<int>(v);
                } else {
                    fail(line_no, "unknown key '" + key + "' in section [sweep]");
                }
                break;
            }
            case Section::Output: {
                if (key == "dir") {
                    config.output_dir = value;
                } else {
                    fail(line_no, "unknown key '" + key + "' in section [output]");
                }
                break;
            }
            case Section::None:
                break;
        }
    }

    if (config.map_name.empty()) {
        throw config_error("config defines no [map] name");
    }
    // Validates the name and parameter set against the catalog.
    (void)build_catalog_map(config.map_name, config.map_params);

    for (std::size_t i = 0; i < config.epsilon_list.size(); ++i) {
        if (!(config.epsilon_list[i] > 0.0)) {
            fail(epsilon_list_line, "epsilon_list entries must be positive");
        }
        if (i > 0 && !(config.epsilon_list[i] < config.epsilon_list[i - 1])) {
            fail(epsilon_list_line, "epsilon_list not decreasing");
        }
    }
    if (config.seeds.empty()) {
        fail(seeds_line, "seeds must be nonempty");
    }
    return config;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string canonical_config(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "[map]\n";
    os << "name = " << c.map_name << "\n";
    for (const auto& [key, value] : c.map_params) {
        os << key << " = " << format_double(value) << "\n";
    }
    os << "\n[kernel]\n";
    if (c.kernel_epsilon) os << "epsilon = " << format_double(*c.kernel_epsilon) << "\n";
    os << "shape = " << to_string(c.kernel_shape) << "\n";
    if (c.kernel_policy) os << "policy = " << to_string(*c.kernel_policy) << "\n";
    if (!c.kernel_mask.empty()) {
        os << "mask = [";
        for (std::size_t i = 0; i < c.kernel_mask.size(); ++i) {
            if (i) os << ", ";
            os << static_cast<int>(c.kernel_mask[i]);
        }
        os << "]\n";
    }
    os << "\n[grid]\n";
    if (!c.grid_cells.empty()) os << "cells = " << join_ints(c.grid_cells) << "\n";
    os << "\n[solver]\n";
    os << "tol = " << format_double(c.tol) << "\n";
    os << "max_iters = " << c.max_iters << "\n";
    os << "samples_per_cell = " << c.samples_per_cell << "\n";
    os << "orbit_steps = " << c.orbit_steps << "\n";
    os << "burn_in = " << c.burn_in << "\n";
    os << "lyapunov_steps = " << c.lyapunov_steps << "\n";
    os << "renorm_period = " << c.renorm_period << "\n";
    os << "domination_samples = " << c.domination_samples << "\n";
    os << "basin_starts = " << c.basin_starts << "\n";
    os << "basin_iters = " << c.basin_iters << "\n";
    os << "basin_tol = " << format_double(c.basin_tol) << "\n";
    os << "degenerate_tol = " << format_double(c.degenerate_tol) << "\n";
    if (c.x0) os << "x0 = " << join_doubles(*c.x0) << "\n";
    os << "\n[sweep]\n";
    if (!c.epsilon_list.empty()) {
        os << "epsilon_list = " << join_doubles(c.epsilon_list) << "\n";
    }
    os << "seeds = [";
    for (std::size_t i = 0; i < c.seeds.size(); ++i) {
        if (i) os << ", ";
        os << c.seeds[i];
    }
    os << "]\n";
    os << "proxy_refine = " << c.proxy_refine << "\n";
    os << "\n[output]\n";
    os << "dir = " << c.output_dir << "\n";
    return os.str();
}

std::uint64_t config_hash(const ExperimentConfig& config) {
    return fnv1a64(canonical_config(config));
}

NoiseKernel make_kernel(const ExperimentConfig& config, const DomainDescriptor& domain,
                        double epsilon) {
    NoiseKernel kernel;
    kernel.epsilon = epsilon;
    kernel.shape = config.kernel_shape;
    kernel.coordinate_mask = config.kernel_mask;
    if (config.kernel_policy) {
        kernel.boundary_policy = *config.kernel_policy;
    } else {
        const bool all_periodic =
            std::all_of(domain.periodic.begin(), domain.periodic.end(),
                        [](bool p) { return p; });
        kernel.boundary_policy =
            all_periodic ? BoundaryPolicy::Wrap : BoundaryPolicy::Reject;
    }
    return kernel;
}

}  // namespace zn
