// SPDX-License-Identifier: MIT
// Shared vocabulary: edge colors, error kinds, validation reports and budgets.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace sepshift {

using json = nlohmann::json;

enum class Color : std::uint8_t { Blue, Red };

const char* color_name(Color c);
Color parse_color(const std::string& s);

enum class ErrorKind {
    ParseError,
    UnknownReference,
    SinkOrSource,
    NoCompletion,
    AmbiguousCompletion,
    HorizonExceeded,
    CRViolated,
    NonInjectiveCell,
    ResourceBudgetExceeded,
    OddDepth,
    EvenDepth,
    NotHDiagram,
    InsufficientDepth,
    StructureMismatch,
    StageOverflow,
    Overflow,
    InvalidArgument,
};

const char* error_kind_name(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what);
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct Violation {
    std::string rule;
    std::string witness;
};

// Collects every violated condition instead of stopping at the first one.
// Conditions that need data below the stored horizon are listed separately.
struct Report {
    std::vector<Violation> violations;
    std::vector<std::string> unchecked;

    bool ok() const { return violations.empty(); }
    void add(std::string rule, std::string witness);
    void add_unchecked(std::string what);
    void merge(const Report& other, const std::string& prefix = {});
    json to_json() const;
    std::string to_text() const;
};

// Counts are bounded at 2^31 - 1; exceeding it raises ErrorKind::Overflow.
std::int64_t checked_count(std::int64_t v);

// Vertex cap per layer for exponential constructions. Defaults to 10^6 and
// can be overridden through the SEPSHIFT_BUDGET environment variable.
std::int64_t default_budget();

}  // namespace sepshift
