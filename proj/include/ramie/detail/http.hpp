#pragma once

#include <cstdlib>
#include <string>

#include <httplib.h>

#include "ramie/core.hpp"

namespace ramie::detail {

struct SplitUrl {
    std::string base;  // scheme://host[:port]
    std::string path;  // /path, "/" when absent
};

inline SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("URL must include a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

inline std::string api_key_from_env(const std::string& env_var) {
    if (env_var.empty()) return "";
    const char* value = std::getenv(env_var.c_str());
    return value ? value : "";
}

}  // namespace ramie::detail
