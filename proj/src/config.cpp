#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cludl/errors.hpp"
#include "cludl/experiment.hpp"

namespace cludl {

namespace {

// Minimal TOML-style grammar: [section] headers, key = value lines, '#'
// comments, scalar values (quoted string, bool, number) and flat arrays.

struct Value {
    enum class Type { Str, Num, Bool } type = Type::Num;
    std::string str;
    double num = 0.0;
    bool boolean = false;
    std::vector<Value> array;
    bool is_array = false;
};

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        else if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

Value parse_scalar(const std::string& raw, int line_no) {
    const std::string s = trim(raw);
    if (s.empty()) throw ConfigError("empty value on line " + std::to_string(line_no));
    Value v;
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"')
            throw ConfigError("unterminated string on line " + std::to_string(line_no));
        v.type = Value::Type::Str;
        v.str = s.substr(1, s.size() - 2);
        return v;
    }
    if (s == "true" || s == "false") {
        v.type = Value::Type::Bool;
        v.boolean = s == "true";
        return v;
    }
    try {
        std::size_t used = 0;
        v.num = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
        throw ConfigError("cannot parse value '" + s + "' on line " +
                          std::to_string(line_no));
    }
    v.type = Value::Type::Num;
    return v;
}

Value parse_value(const std::string& raw, int line_no) {
    const std::string s = trim(raw);
    if (!s.empty() && s.front() == '[') {
        if (s.back() != ']')
            throw ConfigError("unterminated array on line " + std::to_string(line_no));
        Value v;
        v.is_array = true;
        std::string inner = s.substr(1, s.size() - 2);
        std::string item;
        bool quoted = false;
        for (char ch : inner) {
            if (ch == '"') quoted = !quoted;
            if (ch == ',' && !quoted) {
                if (!trim(item).empty()) v.array.push_back(parse_scalar(item, line_no));
                item.clear();
            } else {
                item += ch;
            }
        }
        if (!trim(item).empty()) v.array.push_back(parse_scalar(item, line_no));
        return v;
    }
    return parse_scalar(s, line_no);
}

std::map<std::string, Value> parse_table(const std::string& text) {
    std::map<std::string, Value> table;
    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("malformed section header on line " +
                                  std::to_string(line_no));
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("empty section name on line " + std::to_string(line_no));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key = value on line " + std::to_string(line_no));
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw ConfigError("empty key on line " + std::to_string(line_no));
        const std::string full = section.empty() ? key : section + "." + key;
        if (table.count(full))
            throw ConfigError("duplicate key '" + full + "' on line " +
                              std::to_string(line_no));
        table[full] = parse_value(line.substr(eq + 1), line_no);
    }
    return table;
}

double want_num(const Value& v, const std::string& key) {
    if (v.is_array || v.type != Value::Type::Num)
        throw ConfigError("key '" + key + "' must be a number");
    return v.num;
}

int want_int(const Value& v, const std::string& key) {
    const double d = want_num(v, key);
    const int i = static_cast<int>(d);
    if (static_cast<double>(i) != d)
        throw ConfigError("key '" + key + "' must be an integer");
    return i;
}

std::string want_str(const Value& v, const std::string& key) {
    if (v.is_array || v.type != Value::Type::Str)
        throw ConfigError("key '" + key + "' must be a quoted string");
    return v.str;
}

bool want_bool(const Value& v, const std::string& key) {
    if (v.is_array || v.type != Value::Type::Bool)
        throw ConfigError("key '" + key + "' must be true or false");
    return v.boolean;
}

} // namespace

void apply_config_text(ExperimentSpec& spec, const std::string& text) {
    const auto table = parse_table(text);
    for (const auto& [key, value] : table) {
        if (key == "scenario.H") spec.scenario.H = want_int(value, key);
        else if (key == "scenario.n") spec.scenario.n = want_int(value, key);
        else if (key == "scenario.h") spec.scenario.h = want_int(value, key);
        else if (key == "scenario.rho") spec.scenario.rho = want_num(value, key);
        else if (key == "scenario.sigma_eps") spec.scenario.sigma_eps = want_num(value, key);
        else if (key == "scenario.amplitude") spec.scenario.amplitude = want_num(value, key);
        else if (key == "scenario.signed_weights") spec.scenario.signed_weights = want_bool(value, key);
        else if (key == "scenario.seed") spec.scenario.seed = static_cast<std::uint64_t>(want_num(value, key));
        else if (key == "methods") {
            if (!value.is_array) throw ConfigError("methods must be an array");
            spec.methods.clear();
            for (const auto& item : value.array)
                spec.methods.push_back(want_str(item, key));
        } else if (key == "C_grid") {
            if (!value.is_array) throw ConfigError("C_grid must be an array");
            spec.c_grid.clear();
            for (const auto& item : value.array)
                spec.c_grid.push_back(want_int(item, key));
        } else if (key == "alpha") spec.alpha = want_num(value, key);
        else if (key == "gamma") spec.gamma = want_num(value, key);
        else if (key == "bootstraps") spec.bootstraps = want_int(value, key);
        else if (key == "subsample_fraction") spec.subsample_fraction = want_num(value, key);
        else if (key == "n_seeds") spec.n_seeds = want_int(value, key);
        else if (key == "output_dir") spec.output_dir = want_str(value, key);
        else if (key == "workers") spec.workers = want_int(value, key);
        else if (key == "keep_pvalues") spec.keep_pvalues = want_bool(value, key);
        else if (key == "backend.backend") spec.backend.backend = parse_backend(want_str(value, key));
        else if (key == "backend.adjustment_a") spec.backend.adjustment_a = want_num(value, key);
        else if (key == "backend.lambda_main") spec.backend.lambda_main = want_num(value, key);
        else if (key == "backend.lambda_nodewise") spec.backend.lambda_nodewise = want_num(value, key);
        else if (key == "sweep.parameter") {
            if (!spec.sweep.has_value()) spec.sweep.emplace();
            spec.sweep->parameter = want_str(value, key);
        } else if (key == "sweep.values") {
            if (!value.is_array) throw ConfigError("sweep.values must be an array");
            if (!spec.sweep.has_value()) spec.sweep.emplace();
            spec.sweep->values.clear();
            for (const auto& item : value.array)
                spec.sweep->values.push_back(want_num(item, key));
        } else {
            throw ConfigError("unknown configuration key: " + key);
        }
    }
}

ExperimentSpec parse_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    ExperimentSpec spec;
    apply_config_text(spec, buffer.str());
    return spec;
}

} // namespace cludl
