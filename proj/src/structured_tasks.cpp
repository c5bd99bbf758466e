#include "derivkit/structured_tasks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <string>

#include "derivkit/errors.hpp"

namespace derivkit {

// ---- path finding -----------------------------------------------------------

std::vector<int> find_path(const GraphInput& g) {
    const auto has = [&](int v) { return std::find(g.nodes.begin(), g.nodes.end(), v) != g.nodes.end(); };
    if (!has(g.start) || !has(g.end)) throw ContractViolation("path endpoint is not a node of the graph");

    std::map<int, std::vector<int>> adj;
    for (const auto& [a, b] : g.edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    for (auto& [v, ns] : adj) std::sort(ns.begin(), ns.end());

    std::map<int, int> parent{{g.start, g.start}};
    std::queue<int> frontier;
    frontier.push(g.start);
    while (!frontier.empty() && !parent.contains(g.end)) {
        const int v = frontier.front();
        frontier.pop();
        for (int n : adj[v]) {
            if (parent.emplace(n, v).second) frontier.push(n);
        }
    }
    if (!parent.contains(g.end)) throw ContractViolation("end node is unreachable from start");

    std::vector<int> path{g.end};
    while (path.back() != g.start) path.push_back(parent[path.back()]);
    std::reverse(path.begin(), path.end());
    return path;
}

GraphInput transform_swap_endpoints(const GraphInput& g) {
    GraphInput out = g;
    std::swap(out.start, out.end);
    return out;
}

bool relate_reversed_path(const std::vector<int>& y1, const std::vector<int>& y2) {
    return !y1.empty() && y2.size() == y1.size() && std::equal(y1.rbegin(), y1.rend(), y2.begin());
}

GraphInput transform_retract_endpoint(const GraphInput& g, OracleMeta& meta) {
    const auto path = find_path(g);
    if (path.size() < 3) throw GenerationError("end's predecessor is the start node");
    GraphInput out = g;
    out.end = path[path.size() - 2];
    std::string joined;
    for (int v : path) joined += (joined.empty() ? "" : ",") + std::to_string(v);
    meta["base_path"] = joined;
    return out;
}

bool relate_truncated_path(const std::vector<int>& y1, const std::vector<int>& y2) {
    return y1.size() >= 2 && y2.size() + 1 == y1.size() && std::equal(y2.begin(), y2.end(), y1.begin());
}

GraphInput generate_tree(Rng& rng, int min_nodes, int max_nodes) {
    if (min_nodes < 3 || max_nodes < min_nodes) throw ContractViolation("tree size bounds are invalid");
    const int n = rng.uniform_int(min_nodes, max_nodes);
    GraphInput g;
    for (int v = 1; v <= n; ++v) g.nodes.push_back(v);
    std::vector<int> order = g.nodes;
    rng.shuffle(std::span(order));
    for (std::size_t i = 1; i < order.size(); ++i) g.edges.emplace_back(order[rng.index(i)], order[i]);
    rng.shuffle(std::span(g.edges));

    // Endpoints at least two hops apart, so the retracted variant stays well defined.
    for (int attempt = 0; attempt < 1000; ++attempt) {
        g.start = rng.pick(g.nodes);
        g.end = rng.pick(g.nodes);
        if (g.start != g.end && find_path(g).size() >= 3) return g;
    }
    throw GenerationError("could not pick distant endpoints");
}

// ---- integrals --------------------------------------------------------------

namespace {

constexpr long long kPowerLcm = 60;  // lcm(1..5)

long long ipow(long long base, int exp) {
    long long v = 1;
    for (int i = 0; i < exp; ++i) v *= base;
    return v;
}

void validate_term(const IntegralTerm& t) {
    if (t.basis == Basis::power && (t.power < 0 || t.power > 4)) {
        throw ContractViolation("power term exponent must be in 0..4");
    }
}

}  // namespace

long long reference_integral(const IntegralInput& f) {
    long long exp_coeff = 0;
    long long scaled = 0;  // polynomial part times kPowerLcm, exact
    for (const auto& t : f.terms) {
        validate_term(t);
        if (t.basis == Basis::exp) {
            exp_coeff += t.coefficient;
        } else {
            scaled += t.coefficient * ipow(f.eval_point, t.power + 1) * (kPowerLcm / (t.power + 1));
        }
    }
    if (exp_coeff == 0) {
        const long long q = scaled / kPowerLcm;
        return (scaled % kPowerLcm != 0 && scaled < 0) ? q - 1 : q;
    }
    const long double total = static_cast<long double>(scaled) / kPowerLcm +
                              static_cast<long double>(exp_coeff) * std::exp(static_cast<long double>(f.eval_point));
    return static_cast<long long>(std::floor(total));
}

std::optional<long long> exact_term_integral(const IntegralTerm& term, int x) {
    validate_term(term);
    if (term.basis == Basis::exp) {
        if (term.coefficient == 0) return 0;
        return std::nullopt;
    }
    const long long num = term.coefficient * ipow(x, term.power + 1);
    if (num % (term.power + 1) != 0) return std::nullopt;
    return num / (term.power + 1);
}

IntegralInput transform_add_term(const IntegralInput& f, const IntegralTerm& delta_term, OracleMeta& meta) {
    const auto delta = exact_term_integral(delta_term, f.eval_point);
    if (!delta) throw GenerationError("added term has a non-integer antiderivative at the evaluation point");
    IntegralInput out = f;
    out.terms.push_back(delta_term);
    meta["delta"] = std::to_string(*delta);
    return out;
}

bool relate_shifted_integral(long long y1, long long y2, long long delta) { return y2 == y1 + delta; }

namespace {

IntegralTerm random_power_term(Rng& rng) {
    IntegralTerm t;
    t.basis = Basis::power;
    t.power = rng.uniform_int(0, 4);
    do {
        t.coefficient = rng.uniform_int(-3, 5);
    } while (t.coefficient == 0);
    return t;
}

}  // namespace

IntegralInput generate_integral(Rng& rng) {
    IntegralInput f;
    f.terms.push_back(IntegralTerm{rng.uniform_int(1, 3), Basis::exp, 0});
    const int extra = rng.uniform_int(0, 2);
    for (int i = 0; i < extra; ++i) f.terms.push_back(random_power_term(rng));
    return f;
}

IntegralTerm generate_delta_term(Rng& rng, int x) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        auto t = random_power_term(rng);
        if (exact_term_integral(t, x)) return t;
    }
    throw GenerationError("no integer-valued delta term found");
}

// ---- vehicle counting -------------------------------------------------------

SceneImage generate_scene(Rng& rng) {
    SceneRequest req;
    req.left = rng.uniform_int(0, 4);
    req.right = rng.uniform_int(0, 4);
    return render_scene(req, rng);
}

bool relate_swapped_counts(const CountAnswer& y1, const CountAnswer& y2) {
    return y2.left == y1.right && y2.right == y1.left;
}

bool relate_doubled_counts(const CountAnswer& y1, const CountAnswer& y2) {
    return y2.left == 2 * y1.left && y2.right == 2 * y1.right;
}

// ---- circular walk ----------------------------------------------------------

namespace {
int wrap(long long v) { return static_cast<int>(((v % kCirclePositions) + kCirclePositions) % kCirclePositions); }
}  // namespace

int simulate_walk(const WalkInput& w) {
    long long pos = w.start;
    for (const auto& m : w.moves) pos += m.direction == Rotation::cw ? m.steps : -m.steps;
    return wrap(pos);
}

WalkInput transform_reverse_directions(const WalkInput& w, OracleMeta& meta) {
    WalkInput out = w;
    for (auto& m : out.moves) m.direction = m.direction == Rotation::cw ? Rotation::ccw : Rotation::cw;
    meta["start"] = std::to_string(w.start);
    return out;
}

bool relate_opposite_position(int y1, int y2, int start) {
    return wrap(static_cast<long long>(y1) + y2) == wrap(2LL * start);
}

WalkInput generate_walk(Rng& rng) {
    WalkInput w;
    w.start = rng.uniform_int(0, kCirclePositions - 1);
    const int moves = rng.uniform_int(1, 5);
    for (int i = 0; i < moves; ++i) {
        w.moves.push_back(WalkMove{rng.coin() ? Rotation::cw : Rotation::ccw, rng.uniform_int(1, 9)});
    }
    return w;
}

}  // namespace derivkit
