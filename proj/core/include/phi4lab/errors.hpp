#pragma once

#include <stdexcept>
#include <string>

namespace phi4lab
{

/// Base for every error raised by the library. `exit_code()` is the status the
/// command line runner returns when the error escapes an experiment.
class Error : public std::runtime_error
{
public:
	explicit Error(const std::string& what) : std::runtime_error(what) { }
	[[nodiscard]] virtual int exit_code() const noexcept { return 4; }
};

/// Precondition violated by a caller (bad mode index, r <= 1, s > t, ...).
class DomainError : public Error
{
public:
	using Error::Error;
	[[nodiscard]] int exit_code() const noexcept override { return 2; }
};

class ConfigError : public Error
{
public:
	using Error::Error;
	[[nodiscard]] int exit_code() const noexcept override { return 2; }
};

class ResourceLimitError : public Error
{
public:
	using Error::Error;
	[[nodiscard]] int exit_code() const noexcept override { return 3; }
};

class NumericalError : public Error
{
public:
	using Error::Error;
};

class QuadratureError : public NumericalError
{
public:
	using NumericalError::NumericalError;
};

class EigensolverError : public NumericalError
{
public:
	using NumericalError::NumericalError;
};

/// Raised when two couplings that must have disjoint time supports overlap.
class SupportOverlapError : public DomainError
{
public:
	using DomainError::DomainError;
};

} // namespace phi4lab
