#pragma once

#include <stdexcept>
#include <string>

namespace kroncov {

// Base class for all library errors. `code()` is a stable identifier used by
// the CLI to map failures onto exit codes and JSON error objects.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

// Numerical errors (CLI exit code 3).

class NotPositiveDefinite : public Error {
public:
    explicit NotPositiveDefinite(double min_eigenvalue, const std::string& context = "")
        : Error("not_positive_definite",
                "matrix is not positive definite (min eigenvalue " +
                    std::to_string(min_eigenvalue) + ")" +
                    (context.empty() ? "" : " in " + context)),
          min_eigenvalue_(min_eigenvalue) {}
    double min_eigenvalue() const { return min_eigenvalue_; }

private:
    double min_eigenvalue_;
};

class DimensionOverflow : public Error {
public:
    explicit DimensionOverflow(const std::string& what) : Error("dimension_overflow", what) {}
};

class RhoOutOfRange : public Error {
public:
    explicit RhoOutOfRange(double rho)
        : Error("rho_out_of_range", "correlation " + std::to_string(rho) + " not in (-1, 1)") {}
};

class SingularWeight : public Error {
public:
    explicit SingularWeight(const std::string& what) : Error("singular_weight", what) {}
};

class SingularHessian : public Error {
public:
    explicit SingularHessian(const std::string& what) : Error("singular_hessian", what) {}
};

class SingularS : public Error {
public:
    explicit SingularS(const std::string& what) : Error("singular_s", what) {}
};

class SingularVariance : public Error {
public:
    explicit SingularVariance(const std::string& what) : Error("singular_variance", what) {}
};

class SingularSampleCov : public Error {
public:
    explicit SingularSampleCov(const std::string& what) : Error("singular_sample_cov", what) {}
};

class DegenerateDirection : public Error {
public:
    explicit DegenerateDirection(const std::string& what) : Error("degenerate_direction", what) {}
};

class WindowTooShort : public Error {
public:
    explicit WindowTooShort(const std::string& what) : Error("window_too_short", what) {}
};

class MaxIterationsExceeded : public Error {
public:
    explicit MaxIterationsExceeded(const std::string& what)
        : Error("max_iterations_exceeded", what) {}
};

// Data errors (CLI exit code 2).

class ParseError : public Error {
public:
    ParseError(std::size_t row, std::size_t col, const std::string& what)
        : Error("parse_error",
                "row " + std::to_string(row) + ", column " + std::to_string(col) + ": " + what),
          row_(row), col_(col) {}
    std::size_t row() const { return row_; }
    std::size_t col() const { return col_; }

private:
    std::size_t row_;
    std::size_t col_;
};

class RaggedRows : public Error {
public:
    RaggedRows(std::size_t row, std::size_t expected, std::size_t got)
        : Error("ragged_rows", "row " + std::to_string(row) + " has " + std::to_string(got) +
                                   " fields, expected " + std::to_string(expected)) {}
};

class NonNumeric : public Error {
public:
    NonNumeric(std::size_t row, std::size_t col, const std::string& token)
        : Error("non_numeric", "row " + std::to_string(row) + ", column " + std::to_string(col) +
                                   ": cannot parse '" + token + "'") {}
};

class BadInput : public Error {
public:
    explicit BadInput(const std::string& what) : Error("bad_input", what) {}
};

}  // namespace kroncov
