// SPDX-License-Identifier: MIT
// Shared vocabulary implementation.
#include "sepshift/common.hpp"

#include <cstdlib>
#include <limits>
#include <sstream>

namespace sepshift {

const char* color_name(Color c) { return c == Color::Blue ? "blue" : "red"; }

Color parse_color(const std::string& s) {
    if (s == "blue") return Color::Blue;
    if (s == "red") return Color::Red;
    throw Error(ErrorKind::ParseError, "unknown color '" + s + "'");
}

const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::UnknownReference: return "UnknownReference";
        case ErrorKind::SinkOrSource: return "SinkOrSource";
        case ErrorKind::NoCompletion: return "NoCompletion";
        case ErrorKind::AmbiguousCompletion: return "AmbiguousCompletion";
        case ErrorKind::HorizonExceeded: return "HorizonExceeded";
        case ErrorKind::CRViolated: return "CRViolated";
        case ErrorKind::NonInjectiveCell: return "NonInjectiveCell";
        case ErrorKind::ResourceBudgetExceeded: return "ResourceBudgetExceeded";
        case ErrorKind::OddDepth: return "OddDepth";
        case ErrorKind::EvenDepth: return "EvenDepth";
        case ErrorKind::NotHDiagram: return "NotHDiagram";
        case ErrorKind::InsufficientDepth: return "InsufficientDepth";
        case ErrorKind::StructureMismatch: return "StructureMismatch";
        case ErrorKind::StageOverflow: return "StageOverflow";
        case ErrorKind::Overflow: return "Overflow";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what), kind_(kind) {}

void Report::add(std::string rule, std::string witness) {
    violations.push_back({std::move(rule), std::move(witness)});
}

void Report::add_unchecked(std::string what) { unchecked.push_back(std::move(what)); }

void Report::merge(const Report& other, const std::string& prefix) {
    for (const auto& v : other.violations) violations.push_back({prefix + v.rule, v.witness});
    for (const auto& u : other.unchecked) unchecked.push_back(prefix + u);
}

json Report::to_json() const {
    json j;
    j["ok"] = ok();
    j["violations"] = json::array();
    for (const auto& v : violations) j["violations"].push_back({{"rule", v.rule}, {"witness", v.witness}});
    j["unchecked_at_horizon"] = unchecked;
    return j;
}

std::string Report::to_text() const {
    std::ostringstream os;
    if (ok()) os << "ok\n";
    for (const auto& v : violations) os << "violation [" << v.rule << "] " << v.witness << "\n";
    if (!unchecked.empty()) os << unchecked.size() << " condition(s) unchecked at horizon\n";
    return os.str();
}

std::int64_t checked_count(std::int64_t v) {
    if (v > std::numeric_limits<std::int32_t>::max() || v < std::numeric_limits<std::int32_t>::min())
        throw Error(ErrorKind::Overflow, "count exceeds 2^31 bound: " + std::to_string(v));
    return v;
}

std::int64_t default_budget() {
    if (const char* env = std::getenv("SEPSHIFT_BUDGET")) {
        char* end = nullptr;
        long long v = std::strtoll(env, &end, 10);
        if (end != env && *end == '\0' && v >= 0) return v;
    }
    return 1000000;
}

}  // namespace sepshift
