#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace diffusim {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Bad or out-of-range configuration value; carries the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Numerical failure at run time (singular system, degenerate draw, ...).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace diffusim
