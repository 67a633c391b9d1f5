#include "phi4lab/matrix_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "phi4lab/errors.hpp"

namespace phi4lab
{

namespace
{

void append_double(std::string& out, double v)
{
	char buf[40];
	const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
	out.append(buf, static_cast<std::size_t>(n));
}

std::string hex(std::uint64_t v)
{
	char buf[20];
	std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
	return buf;
}

std::string slurp(const std::filesystem::path& path)
{
	std::ifstream in(path, std::ios::binary);
	if(!in)
		throw DomainError(path.string() + ": cannot read");
	std::ostringstream os;
	os << in.rdbuf();
	return os.str();
}

} // namespace

std::string format_matrix(const DenseMatrix& m, std::uint64_t basis_hash, bool hermitian)
{
	if(m.rows() != m.cols())
		throw DomainError("only square matrices are dumped");
	std::string out = "# phi4lab-matrix dimension=" + std::to_string(m.rows()) + " basis_hash=" + hex(basis_hash)
	                  + " hermitian=" + (hermitian ? "1" : "0") + "\n";
	out.reserve(out.size() + static_cast<std::size_t>(m.size()) * 50);
	for(Eigen::Index i = 0; i < m.rows(); ++i)
	{
		for(Eigen::Index j = 0; j < m.cols(); ++j)
		{
			if(j > 0)
				out += ' ';
			append_double(out, m(i, j).real());
			out += ' ';
			append_double(out, m(i, j).imag());
		}
		out += '\n';
	}
	return out;
}

MatrixFile parse_matrix(const std::string& text, const std::string& origin)
{
	const auto eol = text.find('\n');
	const std::string header = text.substr(0, eol);
	MatrixFile f;
	unsigned long long dim = 0;
	unsigned long long hash = 0;
	int herm = 0;
	if(std::sscanf(header.c_str(), "# phi4lab-matrix dimension=%llu basis_hash=%llx hermitian=%d", &dim, &hash, &herm)
	   != 3)
		throw DomainError(origin + ":1: malformed matrix header");
	f.dimension = dim;
	f.basis_hash = hash;
	f.hermitian = herm != 0;
	const auto n = static_cast<Eigen::Index>(dim);
	f.matrix.resize(n, n);

	const char* p = text.data() + (eol == std::string::npos ? text.size() : eol + 1);
	const char* end = text.data() + text.size();
	auto next = [&](double& v) {
		while(p < end && (*p == ' ' || *p == '\n' || *p == '\r' || *p == '\t'))
			++p;
		const auto r = std::from_chars(p, end, v);
		if(r.ec != std::errc())
			throw DomainError(origin + ": malformed matrix entry");
		p = r.ptr;
	};
	for(Eigen::Index i = 0; i < n; ++i)
		for(Eigen::Index j = 0; j < n; ++j)
		{
			double re = 0.0;
			double im = 0.0;
			next(re);
			next(im);
			f.matrix(i, j) = {re, im};
		}
	while(p < end && (*p == ' ' || *p == '\n' || *p == '\r' || *p == '\t'))
		++p;
	if(p != end)
		throw DomainError(origin + ": trailing data after matrix");
	return f;
}

void write_matrix(const std::filesystem::path& path, const DenseMatrix& m, std::uint64_t basis_hash, bool hermitian)
{
	write_file_atomic(path, format_matrix(m, basis_hash, hermitian));
}

MatrixFile read_matrix(const std::filesystem::path& path)
{
	return parse_matrix(slurp(path), path.string());
}

std::string format_kernel(const KernelW& w)
{
	const ModeGrid& g = w.grid();
	const int cut = g.cutoff();
	std::string out = "# phi4lab-kernel mode_cutoff=" + std::to_string(cut) + " box_length=";
	append_double(out, g.box_length());
	out += " mass=";
	append_double(out, g.mass());
	out += " t=";
	append_double(out, w.time());
	out += "\n";
	for(int a = -cut; a <= cut; ++a)
		for(int b = -cut; b <= cut; ++b)
			for(int c = -cut; c <= cut; ++c)
				for(int d = -cut; d <= cut; ++d)
				{
					const cplx v = w(a, b, c, d);
					out += std::to_string(a) + ' ' + std::to_string(b) + ' ' + std::to_string(c) + ' ' + std::to_string(d)
					       + ' ';
					append_double(out, v.real());
					out += ' ';
					append_double(out, v.imag());
					out += '\n';
				}
	return out;
}

void write_kernel(const std::filesystem::path& path, const KernelW& w)
{
	write_file_atomic(path, format_kernel(w));
}

std::string format_basis(const FockBasis& basis)
{
	const ModeGrid& g = basis.grid();
	std::string out = "# phi4lab-basis dimension=" + std::to_string(basis.dimension())
	                  + " basis_hash=" + hex(basis.hash()) + " modes=";
	for(int j = -g.cutoff(); j <= g.cutoff(); ++j)
		out += (j == -g.cutoff() ? "" : ",") + std::to_string(j);
	out += "\n";
	for(std::size_t s = 0; s < basis.dimension(); ++s)
	{
		out += std::to_string(s) + ' ' + std::to_string(basis.particle_number(s));
		for(const int n : basis.occupation(s))
			out += ' ' + std::to_string(n);
		out += '\n';
	}
	return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content)
{
	auto tmp = path;
	tmp += ".tmp";
	{
		std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
		if(!out)
			throw ResourceLimitError(tmp.string() + ": cannot open for writing");
		out.write(content.data(), static_cast<std::streamsize>(content.size()));
		out.close();
		if(!out)
			throw ResourceLimitError(tmp.string() + ": write failed");
	}
	std::error_code ec;
	std::filesystem::rename(tmp, path, ec);
	if(ec)
		throw ResourceLimitError(path.string() + ": rename failed: " + ec.message());
}

} // namespace phi4lab
