#include "streamgmm/config.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace streamgmm {

namespace {

using nlohmann::json;

void require_keys(const json& obj, std::initializer_list<const char*> allowed,
                  const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed) {
            if (key == a) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ConfigError("config: unknown key '" + key + "' in " + where);
        }
    }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) {
        try {
            out = obj.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
        }
    }
}

void read_optional_int(const json& obj, const char* key, std::optional<int>& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (v.is_null()) {
        out.reset();
    } else if (v.is_number_integer()) {
        out = v.get<int>();
    } else {
        throw ConfigError(std::string("config: '") + key + "' must be an integer or null");
    }
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: not valid JSON: ") + e.what());
    }
    if (!root.is_object()) {
        throw ConfigError("config: top level must be an object");
    }
    require_keys(root,
                 {"k_per_chunk", "auto_compress_trigger", "em", "merge", "compression",
                  "anomaly", "stream"},
                 "top level");

    RunConfig cfg;
    read_field(root, "k_per_chunk", cfg.k_per_chunk);
    read_optional_int(root, "auto_compress_trigger", cfg.auto_compress_trigger);

    if (root.contains("em")) {
        const json& em = root.at("em");
        require_keys(em, {"max_iter", "tol", "epsilon_scale", "cov_floor"}, "em");
        read_field(em, "max_iter", cfg.em.max_iter);
        read_field(em, "tol", cfg.em.tol);
        read_field(em, "epsilon_scale", cfg.em.epsilon_scale);
        read_field(em, "cov_floor", cfg.em.cov_floor);
    }
    if (root.contains("merge")) {
        const json& m = root.at("merge");
        require_keys(m,
                     {"large_chunk_de1_pct", "large_chunk_de2_pct", "small_chunk_de1_pct",
                      "small_cluster_cutoff", "candidate_count"},
                     "merge");
        read_field(m, "large_chunk_de1_pct", cfg.merge.large_chunk_de1_pct);
        read_field(m, "large_chunk_de2_pct", cfg.merge.large_chunk_de2_pct);
        read_field(m, "small_chunk_de1_pct", cfg.merge.small_chunk_de1_pct);
        read_field(m, "small_cluster_cutoff", cfg.merge.small_cluster_cutoff);
        read_field(m, "candidate_count", cfg.merge.candidate_count);
    }
    if (root.contains("compression")) {
        const json& c = root.at("compression");
        require_keys(c, {"initial_de1_pct", "initial_de2_pct", "step_pct", "max_pct", "target_k"},
                     "compression");
        read_field(c, "initial_de1_pct", cfg.compression.initial_de1_pct);
        read_field(c, "initial_de2_pct", cfg.compression.initial_de2_pct);
        read_field(c, "step_pct", cfg.compression.step_pct);
        read_field(c, "max_pct", cfg.compression.max_pct);
        read_optional_int(c, "target_k", cfg.compression.target_k);
    }
    if (root.contains("anomaly")) {
        const json& a = root.at("anomaly");
        require_keys(a, {"flag_threshold", "store_threshold"}, "anomaly");
        read_field(a, "flag_threshold", cfg.anomaly.flag_threshold);
        read_field(a, "store_threshold", cfg.anomaly.store_threshold);
    }
    if (root.contains("stream")) {
        const json& s = root.at("stream");
        require_keys(s, {"chunk_size", "rng_seed", "augmentation_copies"}, "stream");
        read_field(s, "chunk_size", cfg.stream.chunk_size);
        read_field(s, "rng_seed", cfg.stream.rng_seed);
        read_field(s, "augmentation_copies", cfg.stream.augmentation_copies);
    }

    validate(cfg);
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str());
}

std::string run_config_to_json(const RunConfig& c) {
    json root;
    root["k_per_chunk"] = c.k_per_chunk;
    root["auto_compress_trigger"] =
        c.auto_compress_trigger ? json(*c.auto_compress_trigger) : json(nullptr);
    root["em"] = {{"max_iter", c.em.max_iter},
                  {"tol", c.em.tol},
                  {"epsilon_scale", c.em.epsilon_scale},
                  {"cov_floor", c.em.cov_floor}};
    root["merge"] = {{"large_chunk_de1_pct", c.merge.large_chunk_de1_pct},
                     {"large_chunk_de2_pct", c.merge.large_chunk_de2_pct},
                     {"small_chunk_de1_pct", c.merge.small_chunk_de1_pct},
                     {"small_cluster_cutoff", c.merge.small_cluster_cutoff},
                     {"candidate_count", c.merge.candidate_count}};
    root["compression"] = {{"initial_de1_pct", c.compression.initial_de1_pct},
                           {"initial_de2_pct", c.compression.initial_de2_pct},
                           {"step_pct", c.compression.step_pct},
                           {"max_pct", c.compression.max_pct},
                           {"target_k", c.compression.target_k
                                            ? json(*c.compression.target_k)
                                            : json(nullptr)}};
    root["anomaly"] = {{"flag_threshold", c.anomaly.flag_threshold},
                       {"store_threshold", c.anomaly.store_threshold}};
    root["stream"] = {{"chunk_size", c.stream.chunk_size},
                      {"rng_seed", c.stream.rng_seed},
                      {"augmentation_copies", c.stream.augmentation_copies}};
    return root.dump();
}

void validate(const RunConfig& c) {
    auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
    if (c.k_per_chunk < 1) fail("k_per_chunk must be >= 1");
    if (c.auto_compress_trigger && *c.auto_compress_trigger < 1) {
        fail("auto_compress_trigger must be >= 1");
    }
    if (c.em.max_iter < 1) fail("em.max_iter must be >= 1");
    if (!(c.em.tol > 0.0)) fail("em.tol must be > 0");
    if (!(c.em.epsilon_scale >= 0.0)) fail("em.epsilon_scale must be >= 0");
    if (!(c.em.cov_floor > 0.0)) fail("em.cov_floor must be > 0");
    if (!std::isfinite(c.merge.large_chunk_de1_pct) ||
        !std::isfinite(c.merge.large_chunk_de2_pct) ||
        !std::isfinite(c.merge.small_chunk_de1_pct)) {
        fail("merge thresholds must be finite");
    }
    if (c.merge.candidate_count < 1) fail("merge.candidate_count must be >= 1");
    if (!(c.compression.step_pct > 0.0)) fail("compression.step_pct must be > 0");
    if (!(c.compression.max_pct >= 0.0)) fail("compression.max_pct must be >= 0");
    if (c.compression.target_k && *c.compression.target_k < 1) {
        fail("compression.target_k must be >= 1");
    }
    if (!(c.anomaly.flag_threshold > 0.0)) fail("anomaly.flag_threshold must be > 0");
    if (!(c.anomaly.store_threshold > 0.0)) fail("anomaly.store_threshold must be > 0");
    if (c.anomaly.store_threshold > c.anomaly.flag_threshold) {
        fail("anomaly.store_threshold must not exceed flag_threshold");
    }
    if (c.stream.chunk_size < 1) fail("stream.chunk_size must be >= 1");
    if (c.stream.augmentation_copies < 0) fail("stream.augmentation_copies must be >= 0");
}

}  // namespace streamgmm
