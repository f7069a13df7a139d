#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gcir {

enum class Errc {
    OutOfRange,
    NegativeInput,
    NonPositiveInput,
    OrderViolation,
    Inadmissible,
    ExponentViolation,
    ExponentRange,
    InvalidConfig,
    QuadratureFailure,
    DegenerateNeighborhood,
    Degenerate,
    NonPositiveFunction,
    DivergentForm,
};

std::string_view to_string(Errc code);

// Every failure raised by the library carries a machine-readable code and,
// where one applies, the name of the offending field.
class Error : public std::runtime_error {
public:
    Error(Errc code, std::string field, const std::string& what)
        : std::runtime_error(what), code_(code), field_(std::move(field)) {}

    [[nodiscard]] Errc code() const noexcept { return code_; }
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    Errc code_;
    std::string field_;
};

struct FieldViolation {
    std::string field;
    std::string reason;
};

// Raised by parameter validation; lists every violated bound, not just the first.
class ParamError : public Error {
public:
    explicit ParamError(std::vector<FieldViolation> violations);

    [[nodiscard]] const std::vector<FieldViolation>& violations() const noexcept {
        return violations_;
    }

private:
    std::vector<FieldViolation> violations_;
};

}  // namespace gcir
