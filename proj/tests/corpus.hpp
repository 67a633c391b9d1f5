#pragma once

// Reference corpus shared by unit and acceptance tests: m = 0.2, L = 10 pi, c = 0.2,
// window [-1, 1], three couplings, J in {1, 2}, N_max in {2, 3}.

#include <numbers>
#include <string>
#include <vector>

#include "phi4lab/propagators.hpp"

namespace corpus
{

inline constexpr double mass = 0.2;
inline constexpr double box = 10.0 * std::numbers::pi;
inline constexpr double shift_c = 0.2;
inline constexpr double t1 = 1.0;
inline constexpr double t2 = 1.0;

struct NamedCoupling
{
	std::string name;
	phi4lab::CouplingFunction g;
	/// Times inside the temporal support away from bump edges.
	std::vector<double> interior_times;
};

inline phi4lab::SeparableTerm term(double a, phi4lab::Profile x, phi4lab::Profile t)
{
	return {a, x, t};
}

inline std::vector<NamedCoupling> couplings()
{
	using phi4lab::Profile;
	using phi4lab::CouplingFunction;
	return {
		{"bump", CouplingFunction({term(1.0, Profile::bump(0.0, box / 4), Profile::bump(0.0, 0.8))}), {-0.4, 0.0, 0.3}},
		{"gaussian", CouplingFunction({term(1.0, Profile::gaussian(0.0, box / 14), Profile::bump(0.2, 0.6))}),
		 {0.0, 0.2, 0.5}},
		{"mixed",
		 CouplingFunction({term(1.0, Profile::bump(-box / 8, box / 8), Profile::bump(-0.4, 0.4)),
		                   term(-0.5, Profile::gaussian(box / 10, box / 16), Profile::bump(0.4, 0.45))}),
		 {-0.4, 0.2, 0.4}},
	};
}

struct Truncation
{
	int j;
	int n;
};

inline std::vector<Truncation> truncations()
{
	return {{1, 2}, {1, 3}, {2, 2}, {2, 3}};
}

inline phi4lab::BasisPtr basis(int j, int n)
{
	return phi4lab::enumerate_basis(phi4lab::ModeGrid(mass, box, j), n);
}

inline phi4lab::ModelOperators model(const phi4lab::BasisPtr& b, const phi4lab::CouplingFunction& g, double dt = 1e-2)
{
	const phi4lab::TimeGrid grid(t1, t2, dt);
	return phi4lab::ModelOperators::with_estimated_shift(b, g, shift_c, grid.nodes(std::max(1L, grid.steps() / 400)));
}

} // namespace corpus
