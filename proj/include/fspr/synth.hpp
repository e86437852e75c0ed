#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <fspr/graph.hpp>
#include <fspr/groups.hpp>

namespace fspr {

/// Discrete power law P(k) ~ k^-exponent on [k_min, k_max].
struct PowerLawDegrees {
    double exponent = 2.5;
    std::size_t k_min = 1;
    std::size_t k_max = 100;
};

struct PoissonDegrees {
    double mean = 8.0;
};

struct RegularDegrees {
    std::size_t k = 4;
};

using DegreeLaw = std::variant<PowerLawDegrees, PoissonDegrees, RegularDegrees>;

struct SynthSpec {
    std::size_t node_count = 1000;
    /// Fraction of protected nodes; exactly floor(phi * N) get the label.
    double phi = 0.3;
    DegreeLaw in_degree_law = PowerLawDegrees{};
    DegreeLaw out_degree_law = PoissonDegrees{};
    std::uint64_t seed = 1;

    void validate() const;
};

/// Bookkeeping from one generation run, for output metadata.
struct SynthLog {
    std::size_t stubs_trimmed = 0;
    bool trimmed_in_side = false;
    std::size_t rewires = 0;
};

struct SynthGraph {
    DirectedGraph graph;
    GroupAssignment groups;
    SynthLog log;
};

/// Samples N degrees from `law`.
std::vector<std::size_t> sample_degrees(const DegreeLaw &law, std::size_t n, std::mt19937_64 &rng);

/**
 * Directed configuration model. Samples in- and out-degree sequences,
 * trims excess stubs from randomly ordered maximum-degree nodes until both
 * sums agree, pairs stubs at random, then rewires self-loops and repeated
 * edges by target swaps, which keeps every degree intact. Labels are drawn
 * independently of degree. Deterministic for a given spec.
 */
SynthGraph generate(const SynthSpec &spec);

struct DegreeMoments {
    double mean_in_degree = 0.0;
    /// <k_in^2 / k_out> over nodes with k_out >= 1.
    double in_degree_moment = 0.0;
    std::size_t max_in_degree = 0;
    std::size_t max_out_degree = 0;
};

DegreeMoments degree_moments(const DirectedGraph &g);

/// Text forms used on the command line: "powerlaw:ALPHA:KMIN:KMAX",
/// "poisson:MEAN", "regular:K".
std::string describe(const DegreeLaw &law);
DegreeLaw parse_degree_law(std::string_view text);

/// "n=1000,phi=0.3,in=powerlaw:2.5:3:100,out=poisson:8,seed=7"; omitted keys
/// keep their defaults. Throws ParseError.
SynthSpec parse_synth_spec(std::string_view text);
std::string describe(const SynthSpec &spec);

}  // namespace fspr
