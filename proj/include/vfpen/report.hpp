#pragma once

#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "vfpen/errors.hpp"
#include "vfpen/experiments.hpp"
#include "vfpen/selectors.hpp"

namespace vfpen {

enum class OutputFormat { csv, markdown, json };

inline OutputFormat output_format_from_name(const std::string& name) {
    if (name == "csv") return OutputFormat::csv;
    if (name == "markdown") return OutputFormat::markdown;
    if (name == "json") return OutputFormat::json;
    throw config_error("unknown output format: " + name);
}

namespace detail {

inline std::string fmt(const char* spec, double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, x);
    return buf;
}

inline std::string full(double x) { return fmt("%.17g", x); }
inline std::string short4(double x) { return fmt("%.4g", x); }

inline bool has_fold_count(Method m) {
    return m == Method::vfcv || m == Method::corrected_vfcv || m == Method::pen_vf_general ||
           m == Method::pen_vf_closed;
}

inline bool has_pen_constant(Method m) {
    return m == Method::pen_vf_general || m == Method::pen_vf_closed;
}

}  // namespace detail

inline const char* method_name(Method m) {
    switch (m) {
        case Method::vfcv: return "vfcv";
        case Method::corrected_vfcv: return "corrected_vfcv";
        case Method::pen_vf_general: return "pen_vf_general";
        case Method::pen_vf_closed: return "pen_vf_closed";
        case Method::mallows: return "mallows";
        case Method::mallows_star: return "mallows_star";
        case Method::ideal_expected_penalty: return "ideal_expected_penalty";
        case Method::path_oracle: return "path_oracle";
    }
    return "?";
}

inline Method method_from_name(const std::string& name) {
    for (Method m : {Method::vfcv, Method::corrected_vfcv, Method::pen_vf_general, Method::pen_vf_closed,
                     Method::mallows, Method::mallows_star, Method::ideal_expected_penalty,
                     Method::path_oracle}) {
        if (name == method_name(m)) return m;
    }
    throw config_error("unknown method: " + name);
}

// Machine token in the CLI selector grammar (e.g. "pen10f+", "mal*", "loo").
inline std::string selector_token(const SelectorSpec& spec) {
    if (!spec.label.empty()) return spec.label;
    std::string base;
    switch (spec.method) {
        case Method::vfcv: base = spec.v == 0 ? "loo" : std::to_string(spec.v) + "fcv"; break;
        case Method::corrected_vfcv:
            base = spec.v == 0 ? "corrloo" : "corr" + std::to_string(spec.v) + "fcv";
            break;
        case Method::pen_vf_general:
            base = "pen" + std::to_string(spec.v) + "f";
            break;
        case Method::pen_vf_closed:
            base = spec.v == 0 ? "penloo" : "cpen" + std::to_string(spec.v) + "f";
            break;
        case Method::mallows: base = "mal"; break;
        case Method::mallows_star: base = "mal*"; break;
        case Method::ideal_expected_penalty: base = "epenid"; break;
        case Method::path_oracle: base = "oracle"; break;
    }
    if (spec.overpen == 1.25) {
        base += "+";
    } else if (spec.overpen != 1.0) {
        base += "@ov=" + detail::fmt("%g", spec.overpen);
    }
    if (!std::isnan(spec.c) && detail::has_pen_constant(spec.method) && spec.v > 0 &&
        spec.c != static_cast<double>(spec.v - 1)) {
        base += "@c=" + detail::fmt("%g", spec.c);
    }
    return base;
}

// Human-facing row label in the style of the benchmark tables.
inline std::string selector_display(const SelectorSpec& spec) {
    std::string base;
    switch (spec.method) {
        case Method::vfcv: base = spec.v == 0 ? "LOO" : std::to_string(spec.v) + "-FCV"; break;
        case Method::corrected_vfcv:
            base = spec.v == 0 ? "corrLOO" : "corr" + std::to_string(spec.v) + "-FCV";
            break;
        case Method::pen_vf_general:
            base = "pen" + std::to_string(spec.v) + "-F";
            break;
        case Method::pen_vf_closed:
            base = spec.v == 0 ? "penLoo" : "cpen" + std::to_string(spec.v) + "-F";
            break;
        case Method::mallows: base = "Mal"; break;
        case Method::mallows_star: base = "Mal*"; break;
        case Method::ideal_expected_penalty: base = "E[penid]"; break;
        case Method::path_oracle: base = "path-oracle"; break;
    }
    if (spec.overpen == 1.25) {
        base += "+";
    } else if (spec.overpen != 1.0) {
        base += " (ov " + detail::fmt("%g", spec.overpen) + ")";
    }
    return base;
}

inline std::string emit_csv(std::span<const BenchmarkTable> tables) {
    std::string out =
        "scenario,selector,V,C,overpen,C_or,se_or,C_path_or,se_path_or,C_prime_or,N,drops\n";
    for (const auto& table : tables) {
        for (const auto& row : table.rows) {
            const auto& spec = row.spec;
            out += table.scenario + ',' + selector_token(spec) + ',';
            if (!detail::has_fold_count(spec.method)) {
                out += '-';
            } else if (spec.v == 0) {
                out += 'n';
            } else {
                out += std::to_string(spec.v);
            }
            out += ',';
            out += std::isnan(spec.c) ? "-" : detail::full(spec.c);
            out += ',' + detail::full(spec.overpen);
            out += ',' + detail::full(row.c_or) + ',' + detail::full(row.se_or);
            out += ',' + detail::full(row.c_path_or) + ',' + detail::full(row.se_path_or);
            out += ',' + detail::full(row.c_prime_or);
            out += ',' + std::to_string(table.replications) + ',' + std::to_string(row.drops) + '\n';
        }
    }
    return out;
}

inline std::string emit_markdown(std::span<const BenchmarkTable> tables) {
    std::string out;
    for (const auto& table : tables) {
        out += "## " + table.scenario + " (n=" + std::to_string(table.n) + ", " +
               collection_kind_name(table.collection_kind) + " collection, N=" +
               std::to_string(table.replications) + ", seed=" + std::to_string(table.seed) + ")\n\n";
        out += "| selector | C_or | C_path-or | C'_or | drops |\n";
        out += "|---|---|---|---|---|\n";
        for (const auto& row : table.rows) {
            out += "| " + selector_display(row.spec) + " | " + detail::short4(row.c_or) + " ± " +
                   detail::short4(row.se_or) + " | " + detail::short4(row.c_path_or) + " ± " +
                   detail::short4(row.se_path_or) + " | " + detail::short4(row.c_prime_or) + " | " +
                   std::to_string(row.drops) + " |\n";
        }
        out += "\n";
    }
    return out;
}

inline std::string emit_json(std::span<const BenchmarkTable> tables) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& table : tables) {
        nlohmann::json jt;
        jt["scenario"] = table.scenario;
        jt["n"] = table.n;
        jt["collection"] = collection_kind_name(table.collection_kind);
        jt["N"] = table.replications;
        jt["seed"] = table.seed;
        jt["rows"] = nlohmann::json::array();
        for (const auto& row : table.rows) {
            nlohmann::json jr;
            jr["selector"] = selector_token(row.spec);
            jr["method"] = method_name(row.spec.method);
            if (detail::has_fold_count(row.spec.method)) {
                jr["v"] = row.spec.v;
            } else {
                jr["v"] = nullptr;
            }
            if (std::isnan(row.spec.c)) {
                jr["c"] = nullptr;
            } else {
                jr["c"] = row.spec.c;
            }
            jr["overpen"] = row.spec.overpen;
            jr["c_or"] = row.c_or;
            jr["se_or"] = row.se_or;
            jr["c_path_or"] = row.c_path_or;
            jr["se_path_or"] = row.se_path_or;
            jr["c_prime_or"] = row.c_prime_or;
            jr["drops"] = row.drops;
            jt["rows"].push_back(std::move(jr));
        }
        arr.push_back(std::move(jt));
    }
    return arr.dump(2) + "\n";
}

inline std::string emit_tables(std::span<const BenchmarkTable> tables, OutputFormat format) {
    switch (format) {
        case OutputFormat::csv: return emit_csv(tables);
        case OutputFormat::markdown: return emit_markdown(tables);
        case OutputFormat::json: return emit_json(tables);
    }
    throw config_error("unknown output format");
}

inline std::string emit_table(const BenchmarkTable& table, OutputFormat format) {
    return emit_tables(std::span<const BenchmarkTable>(&table, 1), format);
}

// Inverse of emit_json; reproduces the BenchmarkTable fields exactly.
inline std::vector<BenchmarkTable> parse_benchmark_json(const std::string& text) {
    nlohmann::json arr = nlohmann::json::parse(text);
    std::vector<BenchmarkTable> tables;
    for (const auto& jt : arr) {
        BenchmarkTable table;
        table.scenario = jt.at("scenario").get<std::string>();
        table.n = jt.at("n").get<std::size_t>();
        table.collection_kind = collection_kind_from_name(jt.at("collection").get<std::string>());
        table.replications = jt.at("N").get<std::size_t>();
        table.seed = jt.at("seed").get<std::uint64_t>();
        for (const auto& jr : jt.at("rows")) {
            BenchmarkRow row;
            row.spec.label = jr.at("selector").get<std::string>();
            row.spec.method = method_from_name(jr.at("method").get<std::string>());
            row.spec.v = jr.at("v").is_null() ? -1 : jr.at("v").get<int>();
            row.spec.c = jr.at("c").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                              : jr.at("c").get<double>();
            row.spec.overpen = jr.at("overpen").get<double>();
            row.c_or = jr.at("c_or").get<double>();
            row.se_or = jr.at("se_or").get<double>();
            row.c_path_or = jr.at("c_path_or").get<double>();
            row.se_path_or = jr.at("se_path_or").get<double>();
            row.c_prime_or = jr.at("c_prime_or").get<double>();
            row.drops = jr.at("drops").get<std::uint64_t>();
            table.rows.push_back(std::move(row));
        }
        tables.push_back(std::move(table));
    }
    return tables;
}

}  // namespace vfpen
