// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tape/errors.hpp"
#include "tape/pipeline.hpp"

namespace tape {

inline const char* policy_name(Policy p) {
    switch (p) {
        case Policy::None: return "none";
        case Policy::Tape: return "tape";
        case Policy::AttentionBaseline: return "attention-baseline";
    }
    return "?";
}

inline Policy parse_policy(std::string_view s) {
    if (s == "none") return Policy::None;
    if (s == "tape") return Policy::Tape;
    if (s == "attention-baseline") return Policy::AttentionBaseline;
    throw ConfigError("policy must be one of none|tape|attention-baseline, got '" +
                      std::string(s) + "'");
}

inline const char* schedule_name(BudgetSchedule::Shape s) {
    switch (s) {
        case BudgetSchedule::Shape::Constant: return "constant";
        case BudgetSchedule::Shape::HighToLow: return "high-to-low";
        case BudgetSchedule::Shape::LowToHigh: return "low-to-high";
    }
    return "?";
}

inline BudgetSchedule::Shape parse_schedule(std::string_view s) {
    if (s == "constant") return BudgetSchedule::Shape::Constant;
    if (s == "high-to-low") return BudgetSchedule::Shape::HighToLow;
    if (s == "low-to-high") return BudgetSchedule::Shape::LowToHigh;
    throw ConfigError("schedule must be one of constant|high-to-low|low-to-high, got '" +
                      std::string(s) + "'");
}

namespace detail {

inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& key, std::string_view s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ConfigError(key + " expects a real number, got '" + std::string(s) + "'");
    }
    return v;
}

inline long long parse_int(const std::string& key, std::string_view s) {
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ConfigError(key + " expects an integer, got '" + std::string(s) + "'");
    }
    return v;
}

inline std::vector<int> parse_int_list(const std::string& key, std::string_view s) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const std::size_t comma = std::min(s.find(',', pos), s.size());
        out.push_back(static_cast<int>(parse_int(key, s.substr(pos, comma - pos))));
        pos = comma + 1;
        if (comma == s.size()) break;
    }
    return out;
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace detail

// Applies one key=value pair. Unknown keys are errors, not warnings.
inline void apply_config_key(PipelineConfig& cfg, const std::string& key,
                             const std::string& value) {
    using detail::parse_double;
    using detail::parse_int;
    if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "frames") cfg.shape.frames = static_cast<int>(parse_int(key, value));
    else if (key == "height") cfg.shape.height = static_cast<int>(parse_int(key, value));
    else if (key == "width") cfg.shape.width = static_cast<int>(parse_int(key, value));
    else if (key == "dim") cfg.dim = static_cast<int>(parse_int(key, value));
    else if (key == "dff") cfg.dff = static_cast<int>(parse_int(key, value));
    else if (key == "heads") cfg.heads = static_cast<int>(parse_int(key, value));
    else if (key == "layers") cfg.layers = static_cast<int>(parse_int(key, value));
    else if (key == "timesteps") cfg.timesteps = static_cast<int>(parse_int(key, value));
    else if (key == "policy") cfg.policy = parse_policy(value);
    else if (key == "rho") cfg.rho = parse_double(key, value);
    else if (key == "delta") cfg.delta = parse_double(key, value);
    else if (key == "alpha") cfg.alpha = parse_double(key, value);
    else if (key == "segments") cfg.segments = static_cast<int>(parse_int(key, value));
    else if (key == "schedule") cfg.schedule = parse_schedule(value);
    else if (key == "reselect-every") cfg.reselect_every = static_cast<int>(parse_int(key, value));
    else if (key == "first-select-layer")
        cfg.first_select_layer = static_cast<int>(parse_int(key, value));
    else if (key == "baseline-layers") cfg.baseline_layers = detail::parse_int_list(key, value);
    else if (key == "gamma") cfg.gamma = parse_double(key, value);
    else throw ConfigError("unknown config key '" + key + "'");
}

// Flat key=value text, one pair per line, '#' starts a comment.
inline void apply_config_text(PipelineConfig& cfg, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = detail::trim(line);
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line is not key=value: '" + stripped + "'");
        }
        apply_config_key(cfg, detail::trim(stripped.substr(0, eq)),
                         detail::trim(stripped.substr(eq + 1)));
    }
}

inline void apply_config_file(PipelineConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    apply_config_text(cfg, buf.str());
}

// Serializes in a fixed key order; parsing the output reproduces the config.
inline std::string serialize_config(const PipelineConfig& cfg) {
    std::ostringstream out;
    out << "seed=" << cfg.seed << '\n';
    out << "frames=" << cfg.shape.frames << '\n';
    out << "height=" << cfg.shape.height << '\n';
    out << "width=" << cfg.shape.width << '\n';
    out << "dim=" << cfg.dim << '\n';
    out << "dff=" << cfg.dff << '\n';
    out << "heads=" << cfg.heads << '\n';
    out << "layers=" << cfg.layers << '\n';
    out << "timesteps=" << cfg.timesteps << '\n';
    out << "policy=" << policy_name(cfg.policy) << '\n';
    out << "rho=" << detail::format_double(cfg.rho) << '\n';
    out << "delta=" << detail::format_double(cfg.delta) << '\n';
    out << "alpha=" << detail::format_double(cfg.alpha) << '\n';
    out << "segments=" << cfg.segments << '\n';
    out << "schedule=" << schedule_name(cfg.schedule) << '\n';
    out << "reselect-every=" << cfg.reselect_every << '\n';
    out << "first-select-layer=" << cfg.first_select_layer << '\n';
    out << "baseline-layers=";
    for (std::size_t i = 0; i < cfg.baseline_layers.size(); ++i) {
        if (i) out << ',';
        out << cfg.baseline_layers[i];
    }
    out << '\n';
    out << "gamma=" << detail::format_double(cfg.gamma) << '\n';
    return out.str();
}

}  // namespace tape
