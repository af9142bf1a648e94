// Serial vs OpenMP scenario evaluation over the 12-contingency, 3-bus fan-out.

#include <benchmark/benchmark.h>

#include "critbus/case_model.h"
#include "critbus/fuzzy.h"
#include "critbus/ranking.h"
#include "critbus/stress.h"

namespace {

struct Fixture {
  critbus::Case network = critbus::load_case_file(CRITBUS_DATA_DIR "/five_bus.case");
  std::vector<critbus::Scenario> scenarios;
  critbus::RankingOptions options;
  critbus::fuzzy::FuzzyConfig config = critbus::fuzzy::FuzzyConfig::defaults();

  Fixture() {
    const auto cons = critbus::load_contingency_file(network, CRITBUS_DATA_DIR "/critical_contingencies.txt");
    scenarios = critbus::enumerate_scenarios(network, cons, network.load_bus_ids()).scenarios;
  }
};

const Fixture &fixture() {
  static const Fixture f;
  return f;
}

void BM_ScenariosSerial(benchmark::State &state) {
  const auto &f = fixture();
  for (auto _ : state) {
    auto r = critbus::evaluate_scenarios_serial(f.network, f.scenarios, f.options, f.config);
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.scenarios.size()));
}

void BM_ScenariosParallel(benchmark::State &state) {
  const auto &f = fixture();
  for (auto _ : state) {
    auto r = critbus::evaluate_scenarios_parallel(f.network, f.scenarios, f.options, f.config);
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.scenarios.size()));
}

void BM_SinglePowerFlow(benchmark::State &state) {
  const auto &f = fixture();
  const critbus::PowerFlowProblem problem(f.network);
  for (auto _ : state) {
    auto r = problem.solve({});
    benchmark::DoNotOptimize(&r);
  }
}

}  // namespace

BENCHMARK(BM_ScenariosSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ScenariosParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SinglePowerFlow)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
