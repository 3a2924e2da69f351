#include "topseg/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <set>

#include <json.hpp>

namespace topseg {

using json = nlohmann::json;

std::string_view role_name(Role role) {
    switch (role) {
    case Role::system:
        return "system";
    case Role::user:
        return "user";
    case Role::assistant:
        return "assistant";
    }
    return "user";
}

std::string ChatRequest::flattened() const {
    std::string out = system;
    for (const ChatMessage& m : messages) {
        if (!out.empty()) {
            out += '\n';
        }
        out += m.content;
    }
    return out;
}

void ProviderConfig::validate() const {
    if (endpoint.empty()) {
        throw ConfigError("provider endpoint must not be empty");
    }
    if (timeout_seconds <= 0) {
        throw ConfigError("provider timeout must be positive");
    }
}

std::vector<MockChatProvider::Rule> MockChatProvider::load_rules(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open mock script: " + path);
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& ex) {
        throw ParseError("mock script " + path + ": " + ex.what());
    }
    if (!doc.is_array()) {
        throw SchemaViolationError("mock script must be a JSON array of rules");
    }
    std::vector<Rule> rules;
    for (const auto& item : doc) {
        if (!item.is_object() || !item.contains("match") || !item.contains("reply")) {
            throw SchemaViolationError("mock rule requires \"match\" and \"reply\" fields");
        }
        rules.push_back({item.at("match").get<std::string>(), item.at("reply").get<std::string>()});
    }
    return rules;
}

std::string MockChatProvider::complete(const ChatRequest& request) {
    std::string flat = request.flattened();
    for (const Rule& rule : rules_) {
        if (rule.match == "*" || flat.find(rule.match) != std::string::npos) {
            std::lock_guard<std::mutex> lock(mutex_);
            transcript_.emplace_back(flat, rule.reply);
            return rule.reply;
        }
    }
    throw TransportError("mock provider: no rule matches request");
}

std::vector<std::pair<std::string, std::string>> MockChatProvider::transcript() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return transcript_;
}

namespace {

std::vector<unsigned long long> extract_integers(std::string_view raw) {
    std::vector<unsigned long long> out;
    std::size_t i = 0;
    const std::size_t n = raw.size();
    while (i < n) {
        if (std::isdigit(static_cast<unsigned char>(raw[i]))) {
            unsigned long long value = 0;
            bool overflow = false;
            while (i < n && std::isdigit(static_cast<unsigned char>(raw[i]))) {
                if (value > (std::numeric_limits<unsigned long long>::max() - 9) / 10) {
                    overflow = true;
                } else {
                    value = value * 10 + static_cast<unsigned long long>(raw[i] - '0');
                }
                ++i;
            }
            out.push_back(overflow ? std::numeric_limits<unsigned long long>::max() : value);
        } else {
            ++i;
        }
    }
    return out;
}

std::string lowercase_trimmed(std::string_view raw) {
    std::size_t b = 0;
    std::size_t e = raw.size();
    while (b < e && std::isspace(static_cast<unsigned char>(raw[b]))) {
        ++b;
    }
    while (e > b && std::isspace(static_cast<unsigned char>(raw[e - 1]))) {
        --e;
    }
    std::string out;
    out.reserve(e - b);
    for (std::size_t i = b; i < e; ++i) {
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(raw[i]))));
    }
    return out;
}

bool is_explicit_empty(std::string_view raw) {
    std::string t = lowercase_trimmed(raw);
    while (!t.empty() && (t.back() == '.' || t.back() == ']')) {
        t.pop_back();
    }
    while (!t.empty() && t.front() == '[') {
        t.erase(t.begin());
    }
    return t.empty() || t == "none" || t == "no boundaries";
}

// Strict form: optional brackets around a comma/whitespace separated list.
bool matches_strict_list(std::string_view raw) {
    enum { before, in_number, after_number } state = before;
    for (char c : raw) {
        unsigned char u = static_cast<unsigned char>(c);
        if (std::isspace(u) || c == '[' || c == ']') {
            if (state == in_number) {
                state = after_number;
            }
            continue;
        }
        if (std::isdigit(u)) {
            if (state == after_number) {
                return false; // two numbers without a separator
            }
            state = in_number;
            continue;
        }
        if (c == ',' || c == ';') {
            if (state == before) {
                return false;
            }
            state = before;
            continue;
        }
        return false;
    }
    return true;
}

} // namespace

bool detect_runaway(std::span<const unsigned long long> raw_indices, std::size_t max_index,
                    const RunawayConfig& cfg) {
    bool out_of_range = false;
    for (unsigned long long v : raw_indices) {
        if (v < 1 || v > max_index) {
            out_of_range = true;
            break;
        }
    }
    if (!out_of_range || raw_indices.size() < std::max<std::size_t>(cfg.min_run, 2)) {
        return false;
    }
    // Longest constant-step run ending at the final element.
    std::size_t n = raw_indices.size();
    long long step = static_cast<long long>(raw_indices[n - 1]) - static_cast<long long>(raw_indices[n - 2]);
    if (step < 1 || step > static_cast<long long>(cfg.max_step)) {
        return false;
    }
    std::size_t run = 2;
    for (std::size_t i = n - 2; i > 0; --i) {
        long long d = static_cast<long long>(raw_indices[i]) - static_cast<long long>(raw_indices[i - 1]);
        if (d != step) {
            break;
        }
        ++run;
    }
    return run >= cfg.min_run;
}

IndexListResult parse_index_list(std::string_view raw, std::size_t max_index,
                                 const RunawayConfig& runaway, bool strict) {
    if (max_index < 1) {
        throw RangeError("parse_index_list requires max_index >= 1");
    }
    IndexListResult result;
    result.raw = std::string(raw);
    if (strict && !is_explicit_empty(raw) && !matches_strict_list(raw)) {
        throw MalformedResponseError("reply is not a plain integer list: " + result.raw);
    }
    std::vector<unsigned long long> extracted = extract_integers(raw);
    if (extracted.empty()) {
        if (is_explicit_empty(raw)) {
            return result; // explicit "no boundaries"
        }
        throw NoIndicesError("no integers in reply: " + result.raw);
    }
    result.runaway_detected = detect_runaway(extracted, max_index, runaway);
    std::set<std::size_t> seen;
    for (unsigned long long v : extracted) {
        if (v < 1 || v > max_index) {
            ++result.dropped_out_of_range;
        } else if (!seen.insert(static_cast<std::size_t>(v)).second) {
            ++result.dropped_duplicates;
        }
    }
    result.indices.assign(seen.begin(), seen.end());
    return result;
}

SingleIndexResult parse_single_index(std::string_view raw, std::size_t max_index) {
    if (max_index < 1) {
        throw RangeError("parse_single_index requires max_index >= 1");
    }
    std::vector<unsigned long long> extracted = extract_integers(raw);
    SingleIndexResult result;
    bool found = false;
    for (unsigned long long v : extracted) {
        if (!found && v >= 1 && v <= max_index) {
            result.index = static_cast<std::size_t>(v);
            found = true;
        } else if (!found) {
            ++result.skipped;
        } else {
            ++result.extra;
        }
    }
    if (!found) {
        throw NoValidIndexError("no integer in 1.." + std::to_string(max_index) +
                                " in reply: " + std::string(raw));
    }
    return result;
}

std::string format_index_list(std::span<const std::size_t> indices) {
    std::string out;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += std::to_string(indices[i]);
    }
    return out;
}

} // namespace topseg
