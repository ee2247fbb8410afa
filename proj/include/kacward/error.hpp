#ifndef KACWARD_ERROR_HPP
#define KACWARD_ERROR_HPP

#include <stdexcept>
#include <string>

namespace kacward {

enum class ErrorKind {
    invalid_argument,
    invalid_edge,
    invalid_graph,
    invalid_isoradial,
    coupling_undefined,
    missing_weight,
    cap_exceeded,
    refused,          // no convergence certificate for a series
    not_applicable,
    parse,
    singular_operator,
    branch_ambiguity,
};

/// Numerical failures (as opposed to violated preconditions).
constexpr bool is_numerical(ErrorKind kind)
{
    return kind == ErrorKind::singular_operator || kind == ErrorKind::branch_ambiguity;
}

class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace kacward

#endif // KACWARD_ERROR_HPP
