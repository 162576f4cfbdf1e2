#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vfpen/errors.hpp"
#include "vfpen/experiments.hpp"
#include "vfpen/report.hpp"
#include "vfpen/scenario.hpp"
#include "vfpen/selectors.hpp"

namespace vfpen {

struct RunConfig {
    std::vector<std::string> scenarios;
    std::vector<SelectorSpec> selectors;
    std::size_t replications = 100;
    std::uint64_t seed = 0;
    unsigned threads = 0;  // 0 = auto
    std::string output;    // empty = stdout
    OutputFormat format = OutputFormat::csv;
};

namespace detail {

inline std::vector<std::string> split_csv(std::string_view text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::string_view piece =
            text.substr(start, comma == std::string_view::npos ? comma : comma - start);
        if (!piece.empty()) parts.emplace_back(piece);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return parts;
}

inline bool parse_uint(std::string_view text, std::uint64_t& out) {
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc{} && ptr == end;
}

inline bool consume_prefix(std::string_view& text, std::string_view prefix) {
    if (text.substr(0, prefix.size()) == prefix) {
        text.remove_prefix(prefix.size());
        return true;
    }
    return false;
}

}  // namespace detail

// Selector shorthand: `mal`, `mal*`, `<V>fcv`, `loo`, `pen<V>f`, `penloo`,
// `epenid`; suffix `+` applies overpen = 5/4; suffix `@c=<x>` overrides the
// penalty constant. `pen<V>f` is the fold-based penalty of the benchmark
// roster; `penloo` uses the closed form, which coincides with it at V = n.
// `corr<V>fcv`/`corrloo`, `cpen<V>f` (closed form at finite V) and `oracle`
// are accepted for the remaining methods.
inline SelectorSpec parse_selector_token(std::string_view token) {
    SelectorSpec spec;
    spec.label = std::string(token);
    std::string_view rest = token;

    // trailing @c=<x> and/or @ov=<x>
    auto take_suffix = [&](std::string_view key, double& out) {
        const std::size_t pos = rest.rfind(key);
        if (pos == std::string_view::npos) return;
        const std::string value(rest.substr(pos + key.size()));
        try {
            std::size_t used = 0;
            out = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
            throw config_error("bad selector suffix in: " + std::string(token));
        }
        rest = rest.substr(0, pos);
    };
    double c_override = std::numeric_limits<double>::quiet_NaN();
    double ov_override = std::numeric_limits<double>::quiet_NaN();
    take_suffix("@c=", c_override);
    take_suffix("@ov=", ov_override);
    if (!rest.empty() && rest.back() == '+') {
        spec.overpen = 1.25;
        rest = rest.substr(0, rest.size() - 1);
    }
    if (!std::isnan(ov_override)) spec.overpen = ov_override;
    spec.c = c_override;

    auto fold_count = [&](std::string_view digits) {
        std::uint64_t v = 0;
        if (!detail::parse_uint(digits, v) || v < 2) {
            throw config_error("bad fold count in selector: " + std::string(token));
        }
        return static_cast<int>(v);
    };

    if (rest == "mal") {
        spec.method = Method::mallows;
        spec.v = -1;
    } else if (rest == "mal*") {
        spec.method = Method::mallows_star;
        spec.v = -1;
    } else if (rest == "epenid") {
        spec.method = Method::ideal_expected_penalty;
        spec.v = -1;
    } else if (rest == "oracle") {
        spec.method = Method::path_oracle;
        spec.v = -1;
    } else if (rest == "loo") {
        spec.method = Method::vfcv;
        spec.v = 0;
    } else if (rest == "penloo") {
        spec.method = Method::pen_vf_closed;
        spec.v = 0;
    } else if (rest == "corrloo") {
        spec.method = Method::corrected_vfcv;
        spec.v = 0;
    } else if (detail::consume_prefix(rest, "cpen") && rest.size() > 1 && rest.back() == 'f') {
        spec.method = Method::pen_vf_closed;
        spec.v = fold_count(rest.substr(0, rest.size() - 1));
    } else if (detail::consume_prefix(rest, "pen") && rest.size() > 1 && rest.back() == 'f') {
        spec.method = Method::pen_vf_general;
        spec.v = fold_count(rest.substr(0, rest.size() - 1));
    } else if (detail::consume_prefix(rest, "corr") && rest.size() > 3 &&
               rest.substr(rest.size() - 3) == "fcv") {
        spec.method = Method::corrected_vfcv;
        spec.v = fold_count(rest.substr(0, rest.size() - 3));
    } else if (rest.size() > 3 && rest.substr(rest.size() - 3) == "fcv") {
        spec.method = Method::vfcv;
        spec.v = fold_count(rest.substr(0, rest.size() - 3));
    } else {
        throw config_error("unknown selector: " + std::string(token));
    }
    return spec;
}

namespace detail {

struct RawConfig {
    std::vector<std::string> scenarios, selectors;
    std::string replications, seed, threads, output, format;
};

inline void apply_key(RawConfig& raw, const std::string& key, const std::string& value,
                      const std::string& where) {
    if (key == "scenario") {
        for (auto& s : split_csv(value)) raw.scenarios.push_back(std::move(s));
    } else if (key == "selectors") {
        for (auto& s : split_csv(value)) raw.selectors.push_back(std::move(s));
    } else if (key == "N") {
        raw.replications = value;
    } else if (key == "seed") {
        raw.seed = value;
    } else if (key == "threads") {
        raw.threads = value;
    } else if (key == "output") {
        raw.output = value;
    } else if (key == "format") {
        raw.format = value;
    } else {
        throw config_error("unknown " + where + ": " + key);
    }
}

inline RawConfig read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot read config file: " + path);
    RawConfig raw;
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const std::size_t last = line.find_last_not_of(" \t\r");
        const std::string trimmed = line.substr(first, last - first + 1);
        const std::size_t eq = trimmed.find('=');
        if (eq == std::string::npos) throw config_error("config line is not key=value: " + trimmed);
        apply_key(raw, trimmed.substr(0, eq), trimmed.substr(eq + 1), "config key");
    }
    return raw;
}

}  // namespace detail

// Parses `run --scenario ... --selectors ... [--N --seed --threads --output
// --format --config FILE]`. Flag values override file values; unknown flags
// and config keys are rejected with the offending name.
inline RunConfig parse_config(std::span<const std::string> args) {
    if (args.empty() || args[0] != "run") {
        throw config_error(args.empty() ? "missing command (expected: run)"
                                        : "unknown command: " + args[0]);
    }
    detail::RawConfig flags;
    std::string config_path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        std::string_view arg = args[i];
        if (!detail::consume_prefix(arg, "--")) {
            throw config_error("unexpected argument: " + args[i]);
        }
        std::string key, value;
        const std::size_t eq = arg.find('=');
        if (eq != std::string_view::npos) {
            key = std::string(arg.substr(0, eq));
            value = std::string(arg.substr(eq + 1));
        } else {
            key = std::string(arg);
            if (i + 1 >= args.size()) throw config_error("flag --" + key + " needs a value");
            value = args[++i];
        }
        if (key == "config") {
            config_path = value;
        } else {
            detail::apply_key(flags, key, value, "flag --" + key);
        }
    }

    detail::RawConfig merged;
    if (!config_path.empty()) merged = detail::read_config_file(config_path);
    if (!flags.scenarios.empty()) merged.scenarios = flags.scenarios;
    if (!flags.selectors.empty()) merged.selectors = flags.selectors;
    if (!flags.replications.empty()) merged.replications = flags.replications;
    if (!flags.seed.empty()) merged.seed = flags.seed;
    if (!flags.threads.empty()) merged.threads = flags.threads;
    if (!flags.output.empty()) merged.output = flags.output;
    if (!flags.format.empty()) merged.format = flags.format;

    RunConfig cfg;
    for (const auto& name : merged.scenarios) {
        scenario_by_name(name);  // reject unknown names here
        cfg.scenarios.push_back(name);
    }
    if (cfg.scenarios.empty()) throw config_error("no scenario requested");
    for (const auto& token : merged.selectors) cfg.selectors.push_back(parse_selector_token(token));
    if (!merged.replications.empty()) {
        std::uint64_t n = 0;
        if (!detail::parse_uint(merged.replications, n) || n < 1) {
            throw config_error("bad N: " + merged.replications);
        }
        cfg.replications = static_cast<std::size_t>(n);
    }
    if (!merged.seed.empty()) {
        if (!detail::parse_uint(merged.seed, cfg.seed)) throw config_error("bad seed: " + merged.seed);
    }
    if (!merged.threads.empty()) {
        if (merged.threads == "auto") {
            cfg.threads = 0;
        } else {
            std::uint64_t t = 0;
            if (!detail::parse_uint(merged.threads, t)) {
                throw config_error("bad threads: " + merged.threads);
            }
            cfg.threads = static_cast<unsigned>(t);
        }
    }
    if (!merged.output.empty()) cfg.output = merged.output;
    if (!merged.format.empty()) cfg.format = output_format_from_name(merged.format);
    return cfg;
}

// Env fallback for the worker count when --threads is absent.
inline unsigned threads_from_env(unsigned configured) {
    if (configured != 0) return configured;
    if (const char* env = std::getenv("VFOLD_THREADS")) {
        std::uint64_t t = 0;
        if (detail::parse_uint(env, t) && t > 0) return static_cast<unsigned>(t);
    }
    return 0;
}

inline void write_file_atomically(const std::string& path, const std::string& text) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot open for writing: " + tmp.string());
        out << text;
        if (!out.flush()) throw io_error("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw io_error("rename failed: " + target.string() + " (" + ec.message() + ")");
}

// Runs every requested benchmark; returns 0 iff all completed. Errors are
// reported per scenario on `log`, and completed tables are still emitted.
inline int run_batch(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
    std::vector<BenchmarkTable> tables;
    std::vector<std::string> failures;
    const unsigned threads = threads_from_env(cfg.threads);
    for (const auto& name : cfg.scenarios) {
        const RegressionScenario& sc = scenario_by_name(name);
        log << "scenario " << name << ": n=" << sc.n << ", " << cfg.selectors.size()
            << " selectors, N=" << cfg.replications << ", seed=" << cfg.seed << " ... " << std::flush;
        try {
            tables.push_back(benchmark(sc, cfg.selectors, cfg.replications, cfg.seed, threads));
            log << "done\n";
        } catch (const std::exception& ex) {
            log << "failed: " << ex.what() << "\n";
            failures.push_back(name + ": " + ex.what());
        }
    }
    const std::string text = emit_tables(tables, cfg.format);
    if (cfg.output.empty()) {
        out << text;
    } else {
        write_file_atomically(cfg.output, text);
        log << "wrote " << cfg.output << "\n";
    }
    if (!failures.empty()) {
        log << failures.size() << " scenario(s) failed:\n";
        for (const auto& f : failures) log << "  " << f << "\n";
        return 1;
    }
    return 0;
}

}  // namespace vfpen
