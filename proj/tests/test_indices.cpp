#include <doctest.h>

#include <cmath>
#include <complex>

#include "critbus/indices.h"
#include "critbus/stress.h"
#include "test_support.h"

using namespace critbus;
using testing::five_bus;

namespace {

Branch line(double r, double x) { return Branch{"a", 1, 2, r, x, 0.0}; }

BranchFlow flow_of(double p, double q) {
  BranchFlow f;
  f.branch_id = "a";
  f.sending_bus = 1;
  f.receiving_bus = 2;
  f.p_recv = p;
  f.q_recv = q;
  return f;
}

}  // namespace

TEST_CASE("no real power delivered scores zero") {
  CHECK(lf_index(flow_of(0.0, 0.0), line(0.02, 0.06), 1.0) == 0.0);
  CHECK(lf_index(flow_of(0.0, 0.3), line(0.02, 0.06), 1.0) == 0.0);
  CHECK(lf_index(flow_of(-0.1, 0.1), line(0.02, 0.06), 1.0) == 0.0);
}

TEST_CASE("two-bus line loaded at maximum transfer scores one") {
  // unity power factor load with |Y_R| = |Y_L|, circuit solved directly
  for (auto [r, x, vs] : {std::tuple{0.02, 0.06, 1.0}, std::tuple{0.08, 0.24, 1.06}, std::tuple{0.3, 0.1, 0.95}}) {
    const Branch br = line(r, x);
    const std::complex<double> yl = br.series_admittance();
    const double gr = std::abs(yl);
    const std::complex<double> vr = vs * yl / (yl + gr);
    const double pr = std::norm(vr) * gr;
    CHECK(lf_index(flow_of(pr, 0.0), br, vs) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(lf_index(flow_of(pr, 0.0), br, vs, 1.0, LfFormula::exact_bound) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("exact bound is reached at any load power factor") {
  const Branch br = line(0.06, 0.18);
  const std::complex<double> yl = br.series_admittance();
  for (double pf_angle : {-0.4, 0.2, 0.6}) {
    const std::complex<double> yr = std::polar(std::abs(yl), -pf_angle);
    const std::complex<double> vr = yl / (yl + yr);
    const std::complex<double> s = vr * std::conj(yr * vr);
    CHECK(std::atan2(s.imag(), s.real()) == doctest::Approx(pf_angle));
    CHECK(lf_index(flow_of(s.real(), s.imag()), br, 1.0, 1.0, LfFormula::exact_bound) ==
          doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("doubling delivered power doubles LF") {
  const Branch br = line(0.04, 0.12);
  for (auto formula : {LfFormula::max_transfer, LfFormula::receiving_voltage, LfFormula::exact_bound}) {
    const double a = lf_index(flow_of(0.3, 0.1), br, 0.97, 0.93, formula);
    const double b = lf_index(flow_of(0.6, 0.2), br, 0.97, 0.93, formula);
    CHECK(b == doctest::Approx(2.0 * a).epsilon(1e-14));
  }
}

TEST_CASE("formula names round trip") {
  for (auto f : {LfFormula::max_transfer, LfFormula::receiving_voltage, LfFormula::exact_bound}) {
    CHECK(parse_lf_formula(to_string(f)) == f);
  }
  CHECK_THROWS_AS(parse_lf_formula("eq5"), std::invalid_argument);
}

TEST_CASE("fvsi") {
  CHECK(*fvsi(line(0.02, 0.06), 0.0, 1.0) == 0.0);
  const double x = 0.2;
  CHECK(*fvsi(line(0.0, x), 1.0 / (4.0 * x), 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_FALSE(fvsi(line(0.1, 0.0), 0.1, 1.0).has_value());
  double last = -1.0;
  for (int k = 0; k <= 100; ++k) {
    const double v = *fvsi(line(0.08, 0.24), 0.01 * k, 0.98);
    CHECK(v >= 0.0);
    CHECK(v > last);
    last = v;
  }
}

TEST_CASE("bus fvsi is the largest line value") {
  std::vector<LineIndexRecord> recs(3);
  recs[0].fvsi = 0.2;
  recs[1].fvsi = std::nullopt;
  recs[2].fvsi = 0.7;
  CHECK(bus_fvsi(recs) == 0.7);
  CHECK(bus_fvsi({}) == 0.0);

  const Case c = parse_case("BASE_MVA 100\nBUS\n1 slack 1 0 0 0 0\n2 load 1 0 0 0 0\nBRANCH\na 1 2 0.01 0.1 0\n");
  const auto sol = std::get<PowerFlowSolution>(PowerFlowProblem(c).solve({}));
  const auto r = line_indices(c, {}, sol.voltage, line_flows(c, {}, sol.voltage));
  CHECK(std::abs(bus_fvsi(r)) < 1e-9);
}

TEST_CASE("line records skip outaged branches and keep case order") {
  const auto con = parse_contingency(five_bus(), "1-2,3-4");
  const auto sol = std::get<PowerFlowSolution>(PowerFlowProblem(five_bus(), con.branches).solve({}));
  const auto flows = line_flows(five_bus(), con.branches, sol.voltage);
  const auto recs = line_indices(five_bus(), con.branches, sol.voltage, flows);
  REQUIRE(recs.size() == 5);
  CHECK(recs[0].branch_id == "1-3");
  CHECK(recs[4].branch_id == "4-5");
  for (const auto &r : recs) {
    CHECK(r.lf >= 0.0);
    CHECK(r.theta < 0.0);
  }
}

TEST_CASE("exact-bound LF stays near or below one at every critical state") {
  for (const auto &con : testing::contingency_set()) {
    for (int bus : {3, 4, 5}) {
      const auto r = find_critical_load(five_bus(), con, bus);
      for (const auto &rec :
           line_indices(five_bus(), con.branches, r.solution.voltage, r.flows, LfFormula::exact_bound)) {
        INFO(con.label << " bus " << bus << " line " << rec.branch_id);
        CHECK(rec.lf < 1.01);
      }
    }
  }
}
