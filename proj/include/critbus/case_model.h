#pragma once

#include <complex>
#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace critbus {

enum class BusKind { slack, generator, load };

std::string_view to_string(BusKind kind);

/// One network node. All electrical quantities are per-unit on the case MVA base.
struct Bus {
  int id = 0;
  BusKind kind = BusKind::load;
  double v_setpoint = 1.0;  ///< used for slack and generator buses
  double p_gen = 0.0;
  double q_gen = 0.0;  ///< ignored at voltage-controlled buses
  double p_load = 0.0;
  double q_load = 0.0;

  bool operator==(const Bus &) const = default;
};

/// Series impedance with symmetric line charging (pi model).
struct Branch {
  std::string id;
  int from_bus = 0;
  int to_bus = 0;
  double r = 0.0;
  double x = 0.0;
  double b_half = 0.0;

  std::complex<double> series_admittance() const { return 1.0 / std::complex<double>(r, x); }

  bool operator==(const Branch &) const = default;
};

/// Branch ids taken out of service.
using OutageSet = std::set<std::string>;

class CaseError : public std::runtime_error {
 public:
  enum class Kind {
    malformed,
    duplicate_bus,
    unknown_bus,
    duplicate_branch,
    self_loop,
    zero_impedance,
    missing_slack,
    multiple_slack,
    bad_value,
    unknown_outage,
  };

  CaseError(Kind kind, const std::string &what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/**
 * Validated network description.
 *
 * Construction checks every structural invariant (single slack, unique ids,
 * known endpoints, nonzero series impedance) so downstream code can index
 * without re-validating. Immutable afterwards.
 */
class Case {
 public:
  Case(double base_mva, std::vector<Bus> buses, std::vector<Branch> branches);

  double base_mva() const { return base_mva_; }
  const std::vector<Bus> &buses() const { return buses_; }
  const std::vector<Branch> &branches() const { return branches_; }
  std::size_t bus_count() const { return buses_.size(); }

  /// Ordinal of a bus id in buses(); throws CaseError(unknown_bus).
  std::size_t bus_index(int bus_id) const;
  bool has_bus(int bus_id) const;
  std::size_t slack_index() const { return slack_index_; }

  /// Ordinal of a branch id; throws CaseError(unknown_outage).
  std::size_t branch_index(const std::string &branch_id) const;
  /// Branch connecting two buses in either orientation, or nullptr.
  const Branch *branch_between(int bus_a, int bus_b) const;

  std::vector<int> load_bus_ids() const;

  /// Throws CaseError(unknown_outage) for an id that is not a branch of this case.
  void check_outages(const OutageSet &outages) const;
  bool in_service(const Branch &branch, const OutageSet &outages) const {
    return !outages.contains(branch.id);
  }

  bool operator==(const Case &other) const {
    return base_mva_ == other.base_mva_ && buses_ == other.buses_ && branches_ == other.branches_;
  }

 private:
  double base_mva_;
  std::vector<Bus> buses_;
  std::vector<Branch> branches_;
  std::size_t slack_index_ = 0;
};

/// Parses the line-oriented case format (sections BASE_MVA, BUS, BRANCH).
Case parse_case(std::string_view text);
Case load_case_file(const std::string &path);
/// Writes the same format back; numbers use shortest round-trip decimal form.
std::string serialize_case(const Case &c);

using AdmittanceMatrix = Eigen::MatrixXcd;

/// Bus admittance matrix over in-service branches, including half line charging.
AdmittanceMatrix build_ybus(const Case &c, const OutageSet &outages = {});

struct Connectivity {
  bool connected = true;
  /// Bus-id components, each sorted; the slack component first.
  std::vector<std::vector<int>> components;
};

Connectivity check_connectivity(const Case &c, const OutageSet &outages = {});

}  // namespace critbus
