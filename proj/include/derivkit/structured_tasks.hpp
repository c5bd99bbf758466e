#pragma once

#include <optional>
#include <vector>

#include "derivkit/image.hpp"
#include "derivkit/rng.hpp"
#include "derivkit/task.hpp"

namespace derivkit {

// ---- path finding -----------------------------------------------------------

/// Breadth-first search from start to end. Throws ContractViolation if end is unreachable
/// or either endpoint is not a node.
std::vector<int> find_path(const GraphInput& g);

GraphInput transform_swap_endpoints(const GraphInput& g);
bool relate_reversed_path(const std::vector<int>& y1, const std::vector<int>& y2);

/// Moves the end to its predecessor on the start..end path and records "base_path".
/// Throws GenerationError when that predecessor is the start itself.
GraphInput transform_retract_endpoint(const GraphInput& g, OracleMeta& meta);
bool relate_truncated_path(const std::vector<int>& y1, const std::vector<int>& y2);

/// Random labelled tree with node count in [min_nodes, max_nodes] and distinct endpoints.
GraphInput generate_tree(Rng& rng, int min_nodes = 6, int max_nodes = 12);

// ---- integrals --------------------------------------------------------------

/// floor(sum of antiderivatives at eval_point), integration constant 0.
long long reference_integral(const IntegralInput& f);

/// Antiderivative of a single term at x, if it is an exact integer.
std::optional<long long> exact_term_integral(const IntegralTerm& term, int x);

/// Appends delta_term and records "delta". Throws GenerationError if the added term's
/// antiderivative at the evaluation point is not an integer.
IntegralInput transform_add_term(const IntegralInput& f, const IntegralTerm& delta_term, OracleMeta& meta);

bool relate_shifted_integral(long long y1, long long y2, long long delta);

IntegralInput generate_integral(Rng& rng);
/// A polynomial term whose antiderivative at x is an integer.
IntegralTerm generate_delta_term(Rng& rng, int x);

// ---- vehicle counting -------------------------------------------------------

SceneImage generate_scene(Rng& rng);

bool relate_swapped_counts(const CountAnswer& y1, const CountAnswer& y2);
bool relate_doubled_counts(const CountAnswer& y1, const CountAnswer& y2);

// ---- circular walk ----------------------------------------------------------

/// (start + sum of signed steps) mod 20, clockwise positive.
int simulate_walk(const WalkInput& w);

/// Flips every move's direction and records "start".
WalkInput transform_reverse_directions(const WalkInput& w, OracleMeta& meta);

bool relate_opposite_position(int y1, int y2, int start);

WalkInput generate_walk(Rng& rng);

}  // namespace derivkit
