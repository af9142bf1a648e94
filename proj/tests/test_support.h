#pragma once

#include <string>

#include "critbus/case_model.h"
#include "critbus/stress.h"

namespace testing {

inline std::string data_path(const std::string &name) { return std::string(CRITBUS_DATA_DIR) + "/" + name; }

inline const critbus::Case &five_bus() {
  static const critbus::Case c = critbus::load_case_file(data_path("five_bus.case"));
  return c;
}

inline const std::vector<critbus::Contingency> &contingency_set() {
  static const auto list = critbus::load_contingency_file(five_bus(), data_path("critical_contingencies.txt"));
  return list;
}

inline double voltage_at(const critbus::Case &c, const critbus::VoltageState &v, int bus_id) {
  return v.magnitude(static_cast<Eigen::Index>(c.bus_index(bus_id)));
}

}  // namespace testing
