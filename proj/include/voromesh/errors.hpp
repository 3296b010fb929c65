#pragma once

#include <stdexcept>
#include <string>

#include "voromesh/geometry/vec2.hpp"

namespace voromesh {

/// Malformed arguments: too few points, NaN coordinates, nonpositive lengths.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Collinear or near-collinear triple where a proper triangle was required.
class DegeneracyError : public std::runtime_error {
public:
    DegeneracyError(const std::string& what, Point2 a, Point2 b, Point2 c)
        : std::runtime_error(what), a_(a), b_(b), c_(c) {}

    Point2 a() const { return a_; }
    Point2 b() const { return b_; }
    Point2 c() const { return c_; }

private:
    Point2 a_, b_, c_;
};

class DuplicateVertexError : public std::invalid_argument {
public:
    DuplicateVertexError(const std::string& what, std::size_t existing)
        : std::invalid_argument(what), existing_(existing) {}

    /// Id of the vertex the rejected point coincides with.
    std::size_t existing() const { return existing_; }

private:
    std::size_t existing_;
};

/// Point to insert lies outside the current convex hull.
class OutsideHullError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// |grad u| below threshold; callers skip the term that asked for a normal.
class VanishingGradientError : public std::runtime_error {
public:
    explicit VanishingGradientError(Point2 at)
        : std::runtime_error("vanishing gradient of implicit function"), at_(at) {}
    Point2 at() const { return at_; }

private:
    Point2 at_;
};

class ProjectionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace voromesh
