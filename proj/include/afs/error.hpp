#pragma once

#include <stdexcept>
#include <string>

namespace afs {

// Invalid configuration or flag values (CLI exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Problems with input files: datasets, checkpoints, weights CSVs (CLI exit code 3).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace afs
