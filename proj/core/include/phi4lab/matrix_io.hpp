#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "phi4lab/coupling.hpp"

namespace phi4lab
{

/// Text matrix format:
///   # phi4lab-matrix dimension=<n> basis_hash=<hex> hermitian=<0|1>
/// followed by n lines of n "re im" pairs, each printed with 17 significant digits.
struct MatrixFile
{
	std::size_t dimension = 0;
	std::uint64_t basis_hash = 0;
	bool hermitian = false;
	DenseMatrix matrix;
};

std::string format_matrix(const DenseMatrix& m, std::uint64_t basis_hash, bool hermitian);
MatrixFile parse_matrix(const std::string& text, const std::string& origin = "<matrix>");

void write_matrix(const std::filesystem::path& path, const DenseMatrix& m, std::uint64_t basis_hash, bool hermitian);
MatrixFile read_matrix(const std::filesystem::path& path);

/// One "j1 j2 j3 j4 re im" line per index tuple, after a header with J, L, mass and t.
std::string format_kernel(const KernelW& w);
void write_kernel(const std::filesystem::path& path, const KernelW& w);

/// One line per basis state: index, particle number, occupations n_{-J} .. n_J.
std::string format_basis(const FockBasis& basis);

/// Writes through a temporary file in the same directory and renames, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

} // namespace phi4lab
