#pragma once

#include <stdexcept>
#include <string>

namespace ftl {

/// Requested evaluation has no implementation for the given law or density.
class UnsupportedError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Numerical integration did not reach the requested tolerance.
class ToleranceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A run hit its configured event cap before reaching the horizon.
class HorizonExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration. `path` names the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& what)
        : std::runtime_error(path.empty() ? what : path + ": " + what), path_(std::move(path))
    {
    }

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

} // namespace ftl
