#include "topseg/config.hpp"

#include <cctype>
#include <fstream>
#include <map>

namespace topseg {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
        ++b;
    }
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
        --e;
    }
    return std::string(s.substr(b, e - b));
}

using Sections = std::map<std::string, std::map<std::string, std::string>>;

Sections parse_ini(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path.string());
    }
    Sections sections;
    std::string section;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') {
            continue;
        }
        if (t.front() == '[') {
            if (t.back() != ']' || t.size() < 3) {
                throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                                  ": malformed section header");
            }
            section = trim(t.substr(1, t.size() - 2));
            sections[section];
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": expected key = value");
        }
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": empty key");
        }
        if (section.empty()) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": key outside any [section]");
        }
        if (!sections[section].emplace(key, value).second) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": duplicate key " + key);
        }
    }
    return sections;
}

std::size_t to_size(const std::string& value, const std::string& what) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(value, &pos);
        if (pos != value.size() || v < 0) {
            throw std::invalid_argument(value);
        }
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw ConfigError(what + " expects a non-negative integer, got \"" + value + "\"");
    }
}

double to_double(const std::string& value, const std::string& what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) {
            throw std::invalid_argument(value);
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError(what + " expects a number, got \"" + value + "\"");
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
    std::filesystem::path p(value);
    return p.is_absolute() ? p : base / p;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open file: " + path.string());
    }
    std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    while (!all.empty() && (all.back() == '\n' || all.back() == '\r')) {
        all.pop_back();
    }
    return all;
}

} // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
    Sections sections = parse_ini(path);
    std::filesystem::path base = path.parent_path();
    RunConfig cfg;
    bool overlap_given = false;

    for (auto& [section, entries] : sections) {
        for (auto& [key, value] : entries) {
            const std::string what = section + "." + key;
            if (section == "provider") {
                if (key == "endpoint") {
                    cfg.provider.endpoint = value;
                } else if (key == "model") {
                    cfg.provider.model = value;
                } else if (key == "auth_env") {
                    cfg.provider.auth_env = value;
                } else if (key == "timeout") {
                    cfg.provider.timeout_seconds = to_double(value, what);
                } else if (key == "retries") {
                    cfg.provider.retries = to_size(value, what);
                } else if (key == "backoff") {
                    cfg.provider.backoff_seconds = to_double(value, what);
                } else if (key == "max_concurrent") {
                    cfg.provider.max_concurrent = to_size(value, what);
                } else {
                    throw ConfigError("unknown key " + what);
                }
            } else if (section == "window") {
                if (key == "budget") {
                    cfg.segmenter.window.budget = to_size(value, what);
                } else if (key == "max_segment_tokens") {
                    cfg.segmenter.window.max_segment_tokens = to_size(value, what);
                } else if (key == "overlap") {
                    cfg.segmenter.window.overlap = to_size(value, what);
                    overlap_given = true;
                } else {
                    throw ConfigError("unknown key " + what);
                }
            } else if (section == "segmenter") {
                if (key == "min_words") {
                    cfg.segmenter.min_segment_words = to_size(value, what);
                } else if (key == "max_words") {
                    cfg.segmenter.max_segment_words = to_size(value, what);
                } else if (key == "max_recursion_depth") {
                    cfg.segmenter.max_recursion_depth = to_size(value, what);
                } else if (key == "punctuation_ratio_limit") {
                    cfg.segmenter.punctuation_ratio_limit = to_double(value, what);
                } else if (key == "few_shot") {
                    cfg.segmenter.few_shot = load_few_shot(resolve(base, value).string());
                } else if (key == "recursive_few_shot") {
                    cfg.segmenter.recursive_few_shot = load_few_shot(resolve(base, value).string());
                } else if (key == "system_prompt_file") {
                    cfg.segmenter.system_prompt = read_text_file(resolve(base, value));
                } else if (key == "fallback_split_stride") {
                    cfg.segmenter.fallback_split_stride = to_size(value, what);
                } else if (key == "max_validation_passes") {
                    cfg.segmenter.max_validation_passes = to_size(value, what);
                } else if (key == "max_output_tokens") {
                    cfg.segmenter.max_output_tokens = to_size(value, what);
                } else if (key == "runaway_min_run") {
                    cfg.segmenter.runaway.min_run = to_size(value, what);
                } else if (key == "runaway_max_step") {
                    cfg.segmenter.runaway.max_step = to_size(value, what);
                } else {
                    throw ConfigError("unknown key " + what);
                }
            } else if (section == "embeddings") {
                if (key == "source") {
                    if (value != "file" && value != "remote") {
                        throw ConfigError(what + " must be \"file\" or \"remote\"");
                    }
                    cfg.embeddings_source = value;
                } else if (key == "path") {
                    cfg.embeddings_path = resolve(base, value).string();
                } else if (key == "endpoint") {
                    cfg.embeddings_remote.endpoint = value;
                } else if (key == "auth_env") {
                    cfg.embeddings_remote.auth_env = value;
                } else if (key == "timeout") {
                    cfg.embeddings_remote.timeout_seconds = to_double(value, what);
                } else if (key == "retries") {
                    cfg.embeddings_remote.retries = to_size(value, what);
                } else if (key == "backoff") {
                    cfg.embeddings_remote.backoff_seconds = to_double(value, what);
                } else {
                    throw ConfigError("unknown key " + what);
                }
            } else if (section == "baselines") {
                if (key == "split_k") {
                    cfg.split_k = to_size(value, what);
                } else if (key == "trough_threshold") {
                    cfg.trough_threshold = to_double(value, what);
                } else if (key == "similarity_window") {
                    cfg.similarity.window = to_size(value, what);
                } else if (key == "weight_ratio") {
                    cfg.similarity.weight_ratio = to_double(value, what);
                } else if (key == "graph_edge_threshold") {
                    cfg.graph.edge_threshold = to_double(value, what);
                } else if (key == "graph_max_distance") {
                    cfg.graph.max_distance = to_size(value, what);
                } else if (key == "graph_prune_ratio") {
                    cfg.graph.prune_ratio = to_double(value, what);
                } else {
                    throw ConfigError("unknown key " + what);
                }
            } else if (section == "metrics") {
                if (key == "n") {
                    cfg.match_n = to_size(value, what);
                } else if (key == "k") {
                    cfg.probe_k = to_size(value, what);
                } else {
                    throw ConfigError("unknown key " + what);
                }
            } else {
                throw ConfigError("unknown section [" + section + "] in " + path.string());
            }
        }
    }

    if (!overlap_given) {
        cfg.segmenter.window = cfg.segmenter.window.derived();
    }
    return cfg;
}

} // namespace topseg
