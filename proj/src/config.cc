#include "smidge/config.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "smidge/error.h"

namespace smidge {

namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) {
        --e;
    }
    return s.substr(b, e - b);
}

uint64_t parse_uint(const std::string& key, const std::string& value,
                    uint64_t max) {
    if (value.empty()) throw ConfigError(key + ": empty value");
    for (const char c : value) {
        if (c < '0' || c > '9') {
            throw ConfigError(key + ": expected a nonnegative integer, got '" +
                              value + "'");
        }
    }
    errno = 0;
    const uint64_t v = std::strtoull(value.c_str(), nullptr, 10);
    if (errno != 0 || v > max) {
        throw ConfigError(key + ": value " + value + " out of range");
    }
    return v;
}

double parse_double(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0') {
        throw ConfigError(key + ": expected a number, got '" + value + "'");
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void PipelineConfig::validate() const {
    if (window.size < 1) throw ConfigError("window.size must be >= 1");
    if (min_count < 1) throw ConfigError("min_count must be >= 1");
    weighting.validate();
    svd.validate();
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
    if (key == "window.size") {
        const uint64_t v = parse_uint(key, value, UINT32_MAX);
        if (v < 1) throw ConfigError("window.size must be >= 1");
        window.size = static_cast<uint32_t>(v);
    } else if (key == "min_count") {
        const uint64_t v = parse_uint(key, value, UINT32_MAX);
        if (v < 1) throw ConfigError("min_count must be >= 1");
        min_count = static_cast<uint32_t>(v);
    } else if (key == "weighting.mode") {
        weighting.mode = weighting_mode_from_string(value);
    } else if (key == "weighting.lambda") {
        const double v = parse_double(key, value);
        weighting.lambda = v;
        weighting.validate();
    } else if (key == "weighting.alpha") {
        const double v = parse_double(key, value);
        weighting.alpha = v;
        weighting.validate();
    } else if (key == "svd.k") {
        const uint64_t v = parse_uint(key, value, UINT32_MAX);
        if (v < 1) throw ConfigError("svd.k must be >= 1");
        svd.k = static_cast<uint32_t>(v);
    } else if (key == "svd.oversampling") {
        svd.oversampling =
            static_cast<uint32_t>(parse_uint(key, value, UINT32_MAX));
    } else if (key == "svd.power_iterations") {
        svd.power_iterations =
            static_cast<uint32_t>(parse_uint(key, value, 1000));
    } else if (key == "svd.seed") {
        svd.seed = parse_uint(key, value, UINT64_MAX);
    } else if (key == "svd.sigma_power") {
        svd.sigma_power = parse_double(key, value);
        svd.validate();
    } else if (key == "lowercase") {
        lowercase = parse_bool(key, value);
    } else if (key == "threads") {
        threads = static_cast<uint32_t>(parse_uint(key, value, UINT32_MAX));
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

std::string PipelineConfig::serialize() const {
    std::ostringstream out;
    out << "window.size = " << window.size << '\n';
    out << "min_count = " << min_count << '\n';
    out << "weighting.mode = " << to_string(weighting.mode) << '\n';
    out << "weighting.lambda = " << format_double(weighting.lambda) << '\n';
    out << "weighting.alpha = " << format_double(weighting.alpha) << '\n';
    out << "svd.k = " << svd.k << '\n';
    out << "svd.oversampling = " << svd.oversampling << '\n';
    out << "svd.power_iterations = " << svd.power_iterations << '\n';
    out << "svd.seed = " << svd.seed << '\n';
    out << "svd.sigma_power = " << format_double(svd.sigma_power) << '\n';
    out << "lowercase = " << (lowercase ? "true" : "false") << '\n';
    out << "threads = " << threads << '\n';
    return out.str();
}

std::string PipelineConfig::serialize_commented(
    const std::string& prefix) const {
    std::istringstream in(serialize());
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) out << prefix << line << '\n';
    return out.str();
}

PipelineConfig parse_config(std::istream& in, const std::string& origin) {
    PipelineConfig config;
    std::string line;
    uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + " line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        try {
            config.set(key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(origin + " line " + std::to_string(line_no) +
                              ": " + e.what());
        }
    }
    config.validate();
    return config;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file: " + path);
    return parse_config(in, path);
}

}  // namespace smidge
