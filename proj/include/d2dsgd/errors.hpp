#pragma once

#include <stdexcept>
#include <string>

namespace d2dsgd {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TopologyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScheduleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PartitionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace d2dsgd
