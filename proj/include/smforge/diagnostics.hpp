#pragma once

#include <string>
#include <vector>

namespace smforge {

/// Pipeline warning, printed as `WARN <step> <component> <message>`.
struct Warning {
  std::string step;
  std::string component;
  std::string message;

  std::string to_string() const {
    return "WARN " + (step.empty() ? std::string("-") : step) + " " +
           (component.empty() ? std::string("-") : component) + " " + message;
  }

  friend bool operator==(const Warning&, const Warning&) = default;
};

using WarningLog = std::vector<Warning>;

}  // namespace smforge
