#include <benchmark/benchmark.h>

#include <numbers>

#include "phi4lab/hamiltonians.hpp"

using namespace phi4lab;

namespace
{

const double box = 10.0 * std::numbers::pi;

CouplingFunction bump_coupling()
{
	return CouplingFunction({{1.0, Profile::bump(0.0, box / 4), Profile::bump(0.0, 0.8)}});
}

void BM_EnumerateBasis(benchmark::State& state)
{
	const ModeGrid grid(0.2, box, static_cast<int>(state.range(0)));
	for(auto _ : state)
		benchmark::DoNotOptimize(enumerate_basis(grid, static_cast<int>(state.range(1))));
	state.counters["dim"] = static_cast<double>(basis_dimension(grid.mode_count(), static_cast<int>(state.range(1))));
}
BENCHMARK(BM_EnumerateBasis)->Args({1, 2})->Args({2, 3})->Args({2, 4})->Args({3, 4});

void BM_BuildKernel(benchmark::State& state)
{
	const ModeGrid grid(0.2, box, static_cast<int>(state.range(0)));
	const auto g = bump_coupling();
	for(auto _ : state)
		benchmark::DoNotOptimize(build_kernel(g, grid, 0.1));
}
BENCHMARK(BM_BuildKernel)->Arg(1)->Arg(2)->Arg(3);

void BM_AssembleInteraction(benchmark::State& state)
{
	const auto basis = enumerate_basis(ModeGrid(0.2, box, static_cast<int>(state.range(0))),
	                                   static_cast<int>(state.range(1)));
	const auto w = build_kernel(bump_coupling(), basis->grid(), 0.1);
	for(auto _ : state)
		benchmark::DoNotOptimize(assemble_interaction(basis, w));
	state.counters["dim"] = static_cast<double>(basis->dimension());
}
BENCHMARK(BM_AssembleInteraction)->Args({1, 2})->Args({2, 3})->Args({2, 4})->Unit(benchmark::kMillisecond);

void BM_InteractionAtTime(benchmark::State& state)
{
	// per-term matrices are cached, so this is a weighted sum
	const auto basis = enumerate_basis(ModeGrid(0.2, box, 2), 3);
	const ModelOperators m(basis, bump_coupling(), 1.0);
	double t = -0.5;
	for(auto _ : state)
	{
		benchmark::DoNotOptimize(m.shifted_hamiltonian(t));
		t += 1e-6;
	}
}
BENCHMARK(BM_InteractionAtTime);

void BM_BumpFourier(benchmark::State& state)
{
	const double kappa = static_cast<double>(state.range(0));
	for(auto _ : state)
		benchmark::DoNotOptimize(bump_fourier(kappa));
}
BENCHMARK(BM_BumpFourier)->Arg(0)->Arg(20)->Arg(300);

} // namespace
