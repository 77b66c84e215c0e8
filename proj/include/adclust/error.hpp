#pragma once

#include <stdexcept>
#include <string>

namespace adclust {

/// Bad input: malformed files, out-of-range parameters, missing labels.
class validation_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input was well formed but the computation cannot proceed on it.
class degenerate_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string stage_message(const std::string& stage, const std::string& what) {
    return stage + ": " + what;
}

}  // namespace adclust
