#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "topseg/baselines.hpp"
#include "topseg/embeddings.hpp"
#include "topseg/gateway.hpp"
#include "topseg/segmenter.hpp"

namespace topseg {

// Everything a run needs, merged from the config file; CLI flags override
// individual fields and secrets only ever come from environment variables.
struct RunConfig {
    SegmenterConfig segmenter;
    ProviderConfig provider;

    std::string embeddings_source; // "file", "remote" or empty
    std::string embeddings_path;
    EmbeddingEndpointConfig embeddings_remote;

    std::size_t split_k = 5;
    double trough_threshold = 0.3;
    SimilarityOptions similarity;
    GraphOptions graph;

    std::size_t match_n = 2;
    std::optional<std::size_t> probe_k;
};

// Plain sectioned key=value text format; '#' and ';' start comments. Unknown
// sections or keys are rejected so typos cannot silently change a run.
// Relative few-shot and system-prompt paths resolve against the config file's
// directory.
RunConfig load_run_config(const std::filesystem::path& path);

} // namespace topseg
