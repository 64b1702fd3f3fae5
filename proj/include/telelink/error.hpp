#pragma once

#include <stdexcept>
#include <string>

namespace telelink {

// Invalid configuration input (scenario file, link parameters). Carries the
// path of the offending field where known, e.g. "streams[3].budget_mbps".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& message)
        : std::runtime_error(path.empty() ? message : path + ": " + message),
          path_(std::move(path)) {}

    const std::string& path() const { return path_; }

private:
    std::string path_;
};

}  // namespace telelink
