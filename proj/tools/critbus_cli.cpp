// critbus: critical load-bus ranking from the command line.
//
// Exit codes: 0 success, 1 input error, 2 base case insolvable, 3 internal error.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>

#include <CLI11.hpp>

#include "critbus/case_model.h"
#include "critbus/fuzzy.h"
#include "critbus/indices.h"
#include "critbus/powerflow.h"
#include "critbus/ranking.h"
#include "critbus/report.h"
#include "critbus/stress.h"

namespace {

constexpr int kExitInput = 1;
constexpr int kExitBaseInsolvable = 2;
constexpr int kExitInternal = 3;

struct CommonArgs {
  std::string case_path;
  double tol = 1e-6;
  int max_iter = 30;
  bool verbose = false;
};

struct RampArgs {
  double coarse_step = 0.05;
  double refinement_step = 0.005;
  bool flat_ramp = false;
  bool constant_pf = false;
};

void add_common(CLI::App *cmd, CommonArgs &args) {
  cmd->add_option("-c,--case", args.case_path, "case file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--tol", args.tol, "power-flow mismatch tolerance (pu)")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", args.max_iter, "Newton-Raphson iteration cap")->check(CLI::Range(1, 10000));
  cmd->add_flag("-v,--verbose", args.verbose, "print Newton-Raphson iteration traces");
}

void add_ramp(CLI::App *cmd, RampArgs &args) {
  cmd->add_option("--coarse-step", args.coarse_step, "reactive ramp step (pu)")->check(CLI::PositiveNumber);
  cmd->add_option("--refinement-step", args.refinement_step, "bisection resolution (pu)")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--flat-ramp", args.flat_ramp, "flat-start every ramp point instead of warm-starting");
  cmd->add_flag("--constant-pf", args.constant_pf, "ramp P with Q at the base power factor");
}

critbus::PowerFlowOptions pf_options(const CommonArgs &args) {
  critbus::PowerFlowOptions o;
  o.tol = args.tol;
  o.max_iter = args.max_iter;
  if (args.verbose) o.trace = &std::cerr;
  return o;
}

critbus::RampOptions ramp_options(const CommonArgs &common, const RampArgs &args) {
  critbus::RampOptions o;
  o.coarse_step = args.coarse_step;
  o.refinement_step = args.refinement_step;
  o.warm_start = !args.flat_ramp;
  o.constant_power_factor = args.constant_pf;
  o.powerflow = pf_options(common);
  return o;
}

critbus::Contingency contingency_from(const critbus::Case &c, const std::string &label) {
  if (label.empty() || label == "base") return critbus::base_contingency();
  return critbus::parse_contingency(c, label);
}

void print_state(const critbus::Case &c, const critbus::OutageSet &outages, const critbus::VoltageState &v,
                 std::ostream &out) {
  out << "  Bus     V (pu)   angle (deg)\n";
  for (std::size_t i = 0; i < c.bus_count(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out << "  " << std::left << std::setw(5) << c.buses()[i].id << std::right << std::fixed << std::setprecision(4)
        << std::setw(8) << v.magnitude(k) << std::setw(13) << v.angle(k) * 180.0 / std::numbers::pi << '\n';
  }
  const auto flows = critbus::line_flows(c, outages, v);
  const auto records = critbus::line_indices(c, outages, v, flows);
  out << "  Line    send->recv     P_send     Q_send     P_recv     Q_recv      LF      FVSI\n";
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const auto &f = flows[i];
    out << "  " << std::left << std::setw(7) << f.branch_id << std::right << std::setw(4) << f.sending_bus << " -> "
        << std::left << std::setw(4) << f.receiving_bus << std::right << std::setw(10) << f.p_send << std::setw(11)
        << f.q_send << std::setw(11) << f.p_recv << std::setw(11) << f.q_recv << std::setw(8) << records[i].lf;
    if (records[i].fvsi) {
      out << std::setw(10) << *records[i].fvsi;
    } else {
      out << std::setw(10) << "-";
    }
    out << '\n';
  }
  out << std::defaultfloat;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Rank load buses by proximity to voltage collapse"};
  app.require_subcommand(1);

  CommonArgs common;
  RampArgs ramp;

  auto *solve_cmd = app.add_subcommand("solve", "run one Newton-Raphson power flow");
  add_common(solve_cmd, common);
  std::string solve_outage;
  solve_cmd->add_option("--outage", solve_outage, "outaged lines, e.g. \"1-2,2-3\"");
  std::vector<std::string> load_adds;
  solve_cmd->add_option("--add-load", load_adds, "extra load BUS:DP:DQ (pu), repeatable");

  auto *stress_cmd = app.add_subcommand("stress", "find the critical reactive load of one bus");
  add_common(stress_cmd, common);
  add_ramp(stress_cmd, ramp);
  int stress_bus = 0;
  stress_cmd->add_option("-b,--bus", stress_bus, "load bus to stress")->required();
  std::string stress_outage;
  stress_cmd->add_option("--outage", stress_outage, "outaged lines, e.g. \"1-2,2-3\"");

  auto *rank_cmd = app.add_subcommand("rank", "rank load buses under each contingency");
  add_common(rank_cmd, common);
  add_ramp(rank_cmd, ramp);
  std::string contingency_path, fuzzy_path, output_path, format_name = "human", lf_formula = "max_transfer";
  std::vector<int> rank_buses;
  bool serial = false;
  rank_cmd->add_option("-k,--contingencies", contingency_path, "contingency list file (default: intact network)")
      ->check(CLI::ExistingFile);
  rank_cmd->add_option("-f,--fuzzy-config", fuzzy_path, "fuzzy configuration file (default: built-in)")
      ->check(CLI::ExistingFile);
  rank_cmd->add_option("--buses", rank_buses, "load buses to stress (default: all load buses)");
  rank_cmd->add_option("--format", format_name, "human, csv or json")
      ->check(CLI::IsMember({"human", "csv", "json"}));
  rank_cmd->add_option("-o,--output", output_path, "write the report here instead of stdout");
  rank_cmd->add_option("--lf-formula", lf_formula, "max_transfer, receiving_voltage or exact_bound")
      ->check(CLI::IsMember({"max_transfer", "receiving_voltage", "exact_bound"}));
  rank_cmd->add_flag("--serial", serial, "evaluate scenarios on one thread");

  auto *screen_cmd = app.add_subcommand("screen", "rank single and double line outages by base-load LF");
  add_common(screen_cmd, common);
  int max_order = 2;
  std::size_t top = 0;
  screen_cmd->add_option("--max-order", max_order, "1 = single outages only, 2 = also doubles")
      ->check(CLI::Range(1, 2));
  screen_cmd->add_option("--top", top, "print only the first N entries");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    const critbus::Case network = critbus::load_case_file(common.case_path);

    if (*solve_cmd) {
      const auto con = contingency_from(network, solve_outage);
      critbus::LoadOverrides overrides;
      for (const auto &spec : load_adds) {
        int bus = 0;
        double dp = 0.0, dq = 0.0;
        char sep1 = 0, sep2 = 0;
        std::istringstream in(spec);
        in.imbue(std::locale::classic());
        if (!(in >> bus >> sep1 >> dp >> sep2 >> dq) || sep1 != ':' || sep2 != ':') {
          std::cerr << "error: --add-load expects BUS:DP:DQ, got " << spec << '\n';
          return kExitInput;
        }
        overrides[bus] = {dp, dq};
      }
      if (!critbus::check_connectivity(network, con.branches).connected) {
        std::cerr << "error: outage " << con.label << " islands the network\n";
        return kExitInput;
      }
      const auto outcome = critbus::solve(network, con.branches, overrides, pf_options(common));
      if (const auto *d = std::get_if<critbus::Diverged>(&outcome)) {
        std::cout << "diverged (" << critbus::to_string(d->reason) << ") after " << d->iterations
                  << " iterations, last max mismatch " << d->last_mismatch << '\n';
        return kExitBaseInsolvable;
      }
      const auto &sol = std::get<critbus::PowerFlowSolution>(outcome);
      std::cout << "converged in " << sol.iterations << " iterations, max mismatch " << sol.max_mismatch << '\n';
      print_state(network, con.branches, sol.voltage, std::cout);
      return 0;
    }

    if (*stress_cmd) {
      const auto con = contingency_from(network, stress_outage);
      const auto result = critbus::find_critical_load(network, con, stress_bus, ramp_options(common, ramp));
      std::cout << "bus " << stress_bus << " under " << con.label << ": critical reactive load " << result.q_critical
                << " pu (increment " << result.delta_q << " pu)\n";
      print_state(network, con.branches, result.solution.voltage, std::cout);
      const auto severity = critbus::fuzzy::criticality_index(network, result, critbus::fuzzy::FuzzyConfig::defaults());
      std::cout << "  sum SI_VP " << severity.sum_si_vp << "  sum SI_LF " << severity.sum_si_lf << "  CI "
                << severity.ci << '\n';
      return 0;
    }

    if (*rank_cmd) {
      critbus::ReportContext ctx;
      ctx.case_source = common.case_path;
      ctx.contingency_source = contingency_path;
      ctx.options.ramp = ramp_options(common, ramp);
      ctx.options.lf_formula = critbus::parse_lf_formula(lf_formula);
      ctx.config = fuzzy_path.empty() ? critbus::fuzzy::FuzzyConfig::defaults()
                                      : critbus::fuzzy::load_config_file(fuzzy_path);
      const auto contingencies = contingency_path.empty()
                                     ? std::vector<critbus::Contingency>{}
                                     : critbus::load_contingency_file(network, contingency_path);
      const auto buses = rank_cmd->count("--buses") > 0 ? rank_buses : network.load_bus_ids();
      const auto run = critbus::run_ranking(network, contingencies, buses, ctx.options, ctx.config,
                                            serial ? critbus::Execution::serial : critbus::Execution::parallel);
      const auto format = critbus::parse_report_format(format_name);
      if (output_path.empty()) {
        critbus::emit_report(run, ctx, format, std::cout);
      } else {
        try {
          critbus::emit_report_file(run, ctx, format, output_path);
        } catch (const std::runtime_error &e) {
          std::cerr << "error: " << e.what() << '\n';
          return kExitInput;
        }
      }
      return 0;
    }

    if (*screen_cmd) {
      auto ranked = critbus::screen_contingencies(network, max_order, pf_options(common));
      if (top > 0 && ranked.size() > top) ranked.resize(top);
      std::cout << "  Outage        max LF   worst line\n";
      for (const auto &e : ranked) {
        std::cout << "  " << std::left << std::setw(12) << e.contingency.label << std::right << std::fixed
                  << std::setprecision(4) << std::setw(8) << e.max_lf << "   " << e.worst_branch << '\n';
      }
      return 0;
    }
  } catch (const critbus::CaseError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const critbus::fuzzy::ConfigError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const critbus::BaseInsolvable &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBaseInsolvable;
  } catch (const critbus::StressError &e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.kind()) {
      case critbus::StressError::Kind::base_insolvable:
        return kExitBaseInsolvable;
      case critbus::StressError::Kind::islanded:
      case critbus::StressError::Kind::not_load_bus:
        return kExitInput;
      case critbus::StressError::Kind::no_collapse:
        return kExitInternal;
    }
  } catch (const std::exception &e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
