#pragma once
#include <stdexcept>
#include <string>
#include <vector>

namespace solar {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error
{
public:
    DimensionMismatch(const std::string& where, long expected, long got)
        : Error(where + ": dimension mismatch (expected " + std::to_string(expected)
                + ", got " + std::to_string(got) + ")")
    {}
};

class InvalidPenalty : public Error
{
public:
    using Error::Error;
};

class GroupError : public Error
{
public:
    using Error::Error;
};

/// The generator is not invariant under the penalty's reflection group, so the
/// least-squares reduction does not apply.
class InvarianceRefusal : public Error
{
public:
    using Error::Error;
};

/// The dual fit sits on the boundary of the generator's mean domain; the primal
/// minimum is not attained.
class BoundarySolution : public Error
{
public:
    BoundarySolution(std::vector<long> coords, const std::string& msg)
        : Error(msg), coords_(std::move(coords))
    {}

    const std::vector<long>& coordinates() const noexcept { return coords_; }

private:
    std::vector<long> coords_;
};

} // namespace solar
