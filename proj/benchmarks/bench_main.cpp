#include <cmath>

#include <benchmark/benchmark.h>

#include "dsstab/certificates.hpp"
#include "dsstab/closed_loop.hpp"

using namespace dsstab;

namespace {

ModalVector state(std::size_t n) {
  Eigen::VectorXd c(static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < c.size(); ++j) c[j] = 1.0 / (1.0 + j);
  return ModalVector(c);
}

void BM_HeatClosedLoop(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto g = GridFunction::sample(2 * n + 129, [](double z) { return 3.0 * std::sin(kPi * z); });
  const SpectralDiffusionModel m(g, n, 0.2);
  const ModalVector x0 = state(n);
  for (auto _ : st) benchmark::DoNotOptimize(heat_closed_loop_solve(m, x0, 5.0, 0.01));
}
BENCHMARK(BM_HeatClosedLoop)->Arg(16)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_AdmissibilityEstimate(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const SpectralDiffusionModel m(GridFunction::constant(2 * n + 129, 0.0), n, 0.0);
  for (auto _ : st) benchmark::DoNotOptimize(estimate_admissibility_M(m, 1.0, 2.0));
}
BENCHMARK(BM_AdmissibilityEstimate)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_TransportClosedLoop(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const TransportModel m(GridFunction::constant(n, 1.0), GridFunction::constant(n, 1.0), 0.5, 0.05);
  const auto x0 = GridFunction::sample(n, [](double z) { return 1.0 - z; });
  for (auto _ : st) benchmark::DoNotOptimize(transport_closed_loop_solve(m, x0, 2.0, 0.25, {1.0, false}));
}
BENCHMARK(BM_TransportClosedLoop)->Arg(513)->Arg(1025)->Arg(2049)->Unit(benchmark::kMillisecond);

void BM_GainSearch(benchmark::State& st) {
  HypothesisConstants h;
  h.M = std::sqrt(0.5);
  h.delta = 5.9e7;
  for (auto _ : st) benchmark::DoNotOptimize(search_rho1(h, CertificatePath::direct));
}
BENCHMARK(BM_GainSearch);

}  // namespace
BENCHMARK_MAIN();
