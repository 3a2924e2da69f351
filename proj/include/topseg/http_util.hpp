#pragma once

#include <string>

namespace topseg {

struct ParsedUrl {
    std::string base; // scheme://host[:port]
    std::string path; // leading slash
};

ParsedUrl parse_url(const std::string& url);

} // namespace topseg
