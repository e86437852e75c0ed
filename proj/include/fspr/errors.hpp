#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fspr {

/// Base of every error raised by the library. Callers that only care about
/// "something went wrong" catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyGraph : public Error {
public:
    EmptyGraph() : Error("graph has no nodes") {}
};

class DuplicateEdge : public Error {
public:
    DuplicateEdge(std::size_t source, std::size_t target)
        : Error("duplicate edge " + std::to_string(source) + " -> " + std::to_string(target)),
          source(source), target(target) {}
    std::size_t source;
    std::size_t target;
};

class DimensionMismatch : public Error {
public:
    DimensionMismatch(std::size_t expected, std::size_t actual)
        : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
                std::to_string(actual)) {}
};

class NoConvergence : public Error {
public:
    NoConvergence(std::string what, std::size_t iterations, double last_residual,
                  std::vector<double> history = {})
        : Error(what + " did not converge after " + std::to_string(iterations) +
                " iterations (residual " + std::to_string(last_residual) + ")"),
          iterations(iterations), last_residual(last_residual),
          residual_history(std::move(history)) {}
    std::size_t iterations;
    double last_residual;
    std::vector<double> residual_history;
};

class GraphTooLargeForDense : public Error {
public:
    GraphTooLargeForDense(std::size_t nodes, std::size_t cap)
        : Error("graph with " + std::to_string(nodes) + " nodes exceeds the dense cap of " +
                std::to_string(cap) + "; use the gmres method instead"),
          nodes(nodes), cap(cap) {}
    std::size_t nodes;
    std::size_t cap;
};

class SingularSystem : public Error {
public:
    using Error::Error;
};

class Infeasible : public Error {
public:
    Infeasible(double target, double min_mass, double max_mass)
        : Error("target protected mass " + std::to_string(target) +
                " outside achievable range [" + std::to_string(min_mass) + ", " +
                std::to_string(max_mass) + "]"),
          target(target), min_mass(min_mass), max_mass(max_mass) {}
    double target;
    double min_mass;
    double max_mass;
};

class DegenerateGroup : public Error {
public:
    using Error::Error;
};

class EmptyMoment : public Error {
public:
    EmptyMoment() : Error("no node with out-degree >= 1; in-degree moment undefined") {}
};

class DegenerateInput : public Error {
public:
    using Error::Error;
};

class NodeSetMismatch : public Error {
public:
    using Error::Error;
};

class InfeasibleDegreeSequence : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace fspr
