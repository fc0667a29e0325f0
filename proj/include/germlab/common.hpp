#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace germlab {

// Failure taxonomy shared by all modules. Callers that can recover
// (e.g. by resampling) switch on the code.
enum class ErrorCode {
    InputError,
    ParseError,
    NoConvergence,
    NearSingularPoint,
    EmptySlice,
    AmbiguousClustering,
    SeedOverlap,
    EmptyConflict,
    DimensionMismatch,
    UndersampledGraph,
    Unreachable,
    MatchFailed,
    HornInvalid,
    BoundViolated,
    IoError,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

    const char* code_name() const noexcept { return code_name(code_); }

    static const char* code_name(ErrorCode c) noexcept {
        switch (c) {
            case ErrorCode::InputError: return "InputError";
            case ErrorCode::ParseError: return "ParseError";
            case ErrorCode::NoConvergence: return "NoConvergence";
            case ErrorCode::NearSingularPoint: return "NearSingularPoint";
            case ErrorCode::EmptySlice: return "EmptySlice";
            case ErrorCode::AmbiguousClustering: return "AmbiguousClustering";
            case ErrorCode::SeedOverlap: return "SeedOverlap";
            case ErrorCode::EmptyConflict: return "EmptyConflict";
            case ErrorCode::DimensionMismatch: return "DimensionMismatch";
            case ErrorCode::UndersampledGraph: return "UndersampledGraph";
            case ErrorCode::Unreachable: return "Unreachable";
            case ErrorCode::MatchFailed: return "MatchFailed";
            case ErrorCode::HornInvalid: return "HornInvalid";
            case ErrorCode::BoundViolated: return "BoundViolated";
            case ErrorCode::IoError: return "IoError";
        }
        return "Error";
    }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
    if (!cond) fail(code, what);
}

// Flat point-set view: n points of dimension dim stored row-major.
struct PointsView {
    const double* data = nullptr;
    int n = 0;
    int dim = 0;

    std::span<const double> point(int i) const {
        return {data + static_cast<size_t>(i) * dim, static_cast<size_t>(dim)};
    }
};

inline double dist2(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double norm2(std::span<const double> a) {
    double s = 0.0;
    for (double x : a) s += x * x;
    return s;
}

inline double norm(std::span<const double> a) {
    return std::sqrt(norm2(a));
}

}  // namespace germlab
