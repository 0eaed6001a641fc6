#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace wwc {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Points sampled along a curve, one row per node.
using PointList = Eigen::Matrix<double, Eigen::Dynamic, 2>;

inline constexpr double kPi = std::numbers::pi;

/// Error categories; the numeric values double as CLI exit codes.
enum class ErrorCode : int {
    invalid_argument = 1,
    config = 2,
    numerical = 3,
    acceptance = 4,
    io = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorCode::config, what) {}
};

/// Raised when a surface state leaves the admissible neighbourhood of the
/// reference (degenerate metric, folded map, contact point off its wall...).
class InadmissibleState : public Error {
public:
    explicit InadmissibleState(const std::string& what) : Error(ErrorCode::numerical, what) {}
};

class SolverError : public Error {
public:
    explicit SolverError(const std::string& what) : Error(ErrorCode::numerical, what) {}
};

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Counter-clockwise quarter turn.
inline Vec2 perp(const Vec2& a) { return Vec2(-a.y(), a.x()); }

inline Vec2 row(const PointList& p, Eigen::Index i) { return p.row(i).transpose(); }

}  // namespace wwc
