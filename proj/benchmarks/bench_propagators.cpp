#include <benchmark/benchmark.h>

#include <numbers>

#include "phi4lab/propagators.hpp"

using namespace phi4lab;

namespace
{

ModelOperators corpus_model(int j, int n)
{
	const auto basis = enumerate_basis(ModeGrid(0.2, 10.0 * std::numbers::pi, j), n);
	const CouplingFunction g({{1.0, Profile::bump(0.0, 2.5 * std::numbers::pi), Profile::bump(0.0, 0.8)}});
	return {basis, g, 1.0};
}

void BM_UnitaryExponential(benchmark::State& state)
{
	const auto m = corpus_model(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
	const DenseMatrix h = m.shifted_hamiltonian(0.1);
	for(auto _ : state)
		benchmark::DoNotOptimize(unitary_exponential(h, 1e-2));
	state.counters["dim"] = static_cast<double>(m.dimension());
}
BENCHMARK(BM_UnitaryExponential)->Args({1, 2})->Args({2, 3})->Args({2, 4});

void BM_ReferencePropagator(benchmark::State& state)
{
	const auto m = corpus_model(2, 3);
	const TimeGrid grid(1.0, 1.0, 1.0 / static_cast<double>(state.range(0)));
	for(auto _ : state)
		benchmark::DoNotOptimize(reference_propagator(m, grid, 1.0, -1.0));
	state.SetItemsProcessed(state.iterations() * grid.steps());
}
BENCHMARK(BM_ReferencePropagator)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_SlicedYosida(benchmark::State& state)
{
	const auto m = corpus_model(1, 2);
	const TimeGrid window(1.0, 1.0, 1e-2);
	for(auto _ : state)
		benchmark::DoNotOptimize(sliced_propagator(m, window, 64, state.range(0), 1.0, -1.0));
}
BENCHMARK(BM_SlicedYosida)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_SMatrix(benchmark::State& state)
{
	const auto m = corpus_model(2, 3);
	const TimeGrid grid(1.0, 1.0, 1e-2);
	for(auto _ : state)
		benchmark::DoNotOptimize(s_matrix(m, grid));
}
BENCHMARK(BM_SMatrix)->Unit(benchmark::kMillisecond);

} // namespace
