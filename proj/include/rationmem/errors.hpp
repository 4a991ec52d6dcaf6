#pragma once

#include <stdexcept>
#include <string>

namespace rationmem {

// Invalid or inconsistent input data (corpus files, knowledge bases,
// supervision annotations). Maps to exit code 2 in the CLI.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Training diverged or produced non-finite values. Maps to exit code 3.
class TrainingError : public std::runtime_error {
public:
    explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rationmem
