/**
 * @file core.hpp
 * @brief Common scalar/vector types, error classes and the run log.
 */
#ifndef MOSPH_CORE_HPP
#define MOSPH_CORE_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace mosph
{

using Real = double;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec3i = Eigen::Vector3i;

inline constexpr Real pi = 3.14159265358979323846;

/// Raised when an input file cannot be parsed. Carries the byte offset
/// at which parsing stopped when known (-1 otherwise).
class ParseError : public std::runtime_error
{
  public:
    ParseError(const std::string &what, std::int64_t byte_offset = -1)
        : std::runtime_error(annotate(what, byte_offset)), byte_offset_(byte_offset) {}
    std::int64_t byteOffset() const { return byte_offset_; }

  private:
    static std::string annotate(const std::string &what, std::int64_t off)
    {
        if (off < 0)
            return what;
        return what + " (at byte offset " + std::to_string(off) + ")";
    }
    std::int64_t byte_offset_;
};

/// Invalid configuration: bad keys, violated invariants, unusable resolutions.
class ConfigError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Query outside the valid domain of a data structure (e.g. level-set grid).
class RangeError : public std::out_of_range
{
  public:
    using std::out_of_range::out_of_range;
};

/// Unrecoverable numerical failure: inverted elements, blow-ups, singular matrices.
class NumericalError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Minimal run log. Warnings are collected so tests can assert on them.
class RunLog
{
  public:
    static RunLog &instance()
    {
        static RunLog log;
        return log;
    }

    void warn(const std::string &msg)
    {
        ++warning_count_;
        last_warning_ = msg;
        if (echo_)
            std::cerr << "[warn] " << msg << '\n';
    }

    void info(const std::string &msg)
    {
        if (echo_)
            std::cerr << "[info] " << msg << '\n';
    }

    void setEcho(bool on) { echo_ = on; }
    std::size_t warningCount() const { return warning_count_; }
    const std::string &lastWarning() const { return last_warning_; }
    void reset()
    {
        warning_count_ = 0;
        last_warning_.clear();
    }

  private:
    bool echo_ = true;
    std::size_t warning_count_ = 0;
    std::string last_warning_;
};

inline bool nearlyEqual(Real a, Real b, Real tol) { return std::abs(a - b) <= tol; }

} // namespace mosph
#endif // MOSPH_CORE_HPP
