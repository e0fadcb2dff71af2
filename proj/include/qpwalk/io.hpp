#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qpwalk/environment.hpp"
#include "qpwalk/rotation.hpp"

// Serialization of environments and run configurations, plus the artifact
// writers. Artifact identity is the canonical config JSON: same canonical
// text, same bytes out, regardless of thread count or output directory.

namespace qpwalk {

using nlohmann::json;

inline constexpr const char* kConfigSchema = "qpwalk-config-v1";

// shortest text that parses back to the same double
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt_int(std::int64_t v) { return std::to_string(v); }

// ---- Environment spec ----
// {"alpha": {"float": r} or {"quotients": [a1, ...]}, "cos": [...], "sin": [...]}
// Quotients denote the rotation number whose expansion starts with them and
// continues with ones; both keys present means the quotients are the source
// of truth and the float is informative.

inline json env_to_json(const Environment& e) {
    json alpha;
    if (e.alpha.exact()) alpha["quotients"] = e.alpha.quotients;
    alpha["float"] = e.alpha.value;
    return json{{"alpha", alpha}, {"cos", e.f.cosc}, {"sin", e.f.sinc}};
}

inline AlphaSpec alpha_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("alpha spec: expected an object");
    if (j.contains("quotients")) {
        std::vector<std::int64_t> qs = j.at("quotients").get<std::vector<std::int64_t>>();
        return liouville_like(qs).alpha;
    }
    if (j.contains("float")) {
        AlphaSpec s;
        s.value = j.at("float").get<double>();
        return s;
    }
    throw std::invalid_argument("alpha spec: need \"float\" or \"quotients\"");
}

inline Environment env_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("environment spec: expected an object");
    TrigPolynomial f;
    if (j.contains("cos")) f.cosc = j.at("cos").get<std::vector<double>>();
    if (j.contains("sin")) f.sinc = j.at("sin").get<std::vector<double>>();
    for (double c : f.cosc)
        if (!std::isfinite(c)) throw std::invalid_argument("environment spec: non-finite coefficient");
    for (double c : f.sinc)
        if (!std::isfinite(c)) throw std::invalid_argument("environment spec: non-finite coefficient");
    return Environment::make(std::move(f), alpha_from_json(j.at("alpha")));
}

inline Environment load_environment_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("environment file not readable: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& ex) {
        throw std::invalid_argument("environment file " + path + ": " + ex.what());
    }
    return env_from_json(j);
}

// Named rotation presets; anything else must parse as a number in (0, 1).
inline AlphaSpec alpha_preset(const std::string& name) {
    if (name == "golden") {
        AlphaSpec s;
        s.value = golden_alpha();
        return s;
    }
    if (name == "silver") {
        AlphaSpec s;
        s.value = silver_alpha();
        return s;
    }
    if (name == "liouville-demo") return liouville_like({1, 10, 100, 1000}).alpha;
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(name, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("unknown alpha preset: " + name);
    }
    if (used != name.size()) throw std::invalid_argument("unknown alpha preset: " + name);
    AlphaSpec s;
    s.value = v;
    return s;
}

// ---- Run configuration ----

inline std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

struct ExperimentConfig {
    std::string command;
    json env;     // environment spec
    json params;  // command parameters, seed and ensemble size included
    std::string out_dir = ".";

    // Identity excludes the output directory and any execution knobs the
    // caller keeps out of params, so reruns elsewhere produce equal bytes.
    json canonical() const {
        return json{{"schema", kConfigSchema}, {"command", command}, {"env", env}, {"params", params}};
    }
    std::string canonical_text() const { return canonical().dump(); }
    std::uint64_t hash() const { return fnv1a64(canonical_text()); }
    std::string hash_hex() const {
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash()));
        return buf;
    }

    json to_json() const {
        json j = canonical();
        j["out"] = out_dir;
        return j;
    }
    static ExperimentConfig from_json(const json& j) {
        if (!j.is_object() || j.value("schema", "") != kConfigSchema)
            throw std::invalid_argument("config: missing or unknown schema");
        ExperimentConfig c;
        c.command = j.at("command").get<std::string>();
        c.env = j.at("env");
        c.params = j.at("params");
        c.out_dir = j.value("out", ".");
        return c;
    }
};

// ---- Artifact writers ----

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> cells) {
        if (cells.size() != columns.size())
            throw std::invalid_argument("csv row width does not match the header");
        rows.push_back(std::move(cells));
    }
};

inline std::string render_csv(const ExperimentConfig& cfg, const CsvTable& t) {
    std::ostringstream out;
    out << "# " << kConfigSchema << " hash=" << cfg.hash_hex() << " config=" << cfg.canonical_text()
        << "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        out << (i ? "," : "") << t.columns[i];
    out << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
    return out.str();
}

inline std::filesystem::path write_text_artifact(const ExperimentConfig& cfg,
                                                 const std::string& name,
                                                 const std::string& text) {
    std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    std::filesystem::path path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open artifact for writing: " + path.string());
    out << text;
    out.close();
    if (!out) throw std::runtime_error("failed writing artifact: " + path.string());
    return path;
}

inline std::filesystem::path write_csv_artifact(const ExperimentConfig& cfg,
                                                const std::string& name, const CsvTable& t) {
    return write_text_artifact(cfg, name, render_csv(cfg, t));
}

inline std::filesystem::path write_json_artifact(const ExperimentConfig& cfg,
                                                 const std::string& name, const json& data) {
    json doc{{"schema", kConfigSchema},
             {"hash", cfg.hash_hex()},
             {"config", cfg.canonical()},
             {"data", data}};
    return write_text_artifact(cfg, name, doc.dump(2) + "\n");
}

}  // namespace qpwalk
