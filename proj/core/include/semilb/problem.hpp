#pragma once

#include <concepts>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "semilb/types.hpp"

namespace semilb {

/// What one branching step produced for an instance.
template <class I, class S>
struct BranchOutcome {
  enum class Kind : std::uint8_t { Pruned, Solution, Children };

  Kind kind = Kind::Pruned;
  std::optional<S> solution;
  /// Sub-instances, left to right. With Kind::Solution this is only non-empty
  /// for problems that keep exploring below solutions.
  std::vector<I> children;

  static BranchOutcome pruned() { return {}; }
  static BranchOutcome solved(S s, std::vector<I> below = {}) {
    return {Kind::Solution, std::move(s), std::move(below)};
  }
  static BranchOutcome branched(std::vector<I> c) {
    return {Kind::Children, std::nullopt, std::move(c)};
  }
};

/// The capabilities a branching problem provides to the framework.
///
/// `branch` receives the tightest known bound; it returns Pruned when the
/// instance cannot beat it. Values are minimized. `root` builds the seed
/// instance from whatever the problem loaded at startup.
template <class P>
concept BranchingProblem =
    requires(const P& p, const typename P::Instance& instance, const typename P::Solution& solution,
             std::span<const std::uint8_t> bytes, Value best) {
      typename P::Instance;
      typename P::Solution;
      { p.branch(instance, best) } -> std::same_as<BranchOutcome<typename P::Instance, typename P::Solution>>;
      { p.serialize(instance) } -> std::same_as<Bytes>;
      { p.deserialize(bytes) } -> std::same_as<typename P::Instance>;
      { p.priority(instance) } -> std::same_as<std::int64_t>;
      { p.solution_value(solution) } -> std::same_as<Value>;
      { p.serialize_solution(solution) } -> std::same_as<Bytes>;
      { p.deserialize_solution(bytes) } -> std::same_as<typename P::Solution>;
      { p.max_branching_factor() } -> std::convertible_to<int>;
      { p.root() } -> std::same_as<typename P::Instance>;
      { p.explore_after_solution() } -> std::convertible_to<bool>;
    };

template <class P>
using InstanceOf = typename P::Instance;
template <class P>
using SolutionOf = typename P::Solution;
template <BranchingProblem P>
using OutcomeOf = BranchOutcome<InstanceOf<P>, SolutionOf<P>>;

template <class Solution>
struct SequentialResult {
  Value best_value = kUnboundedValue;
  std::optional<Solution> best_solution;
  std::uint64_t nodes = 0;  // branch() calls
  std::uint64_t solutions = 0;
};

namespace detail {

template <BranchingProblem P>
void search_tree(const P& problem, const InstanceOf<P>& instance, SequentialResult<SolutionOf<P>>& out) {
  ++out.nodes;
  auto outcome = problem.branch(instance, out.best_value);
  using Kind = typename OutcomeOf<P>::Kind;
  if (outcome.kind == Kind::Pruned) return;
  if (outcome.kind == Kind::Solution) {
    ++out.solutions;
    const Value v = problem.solution_value(*outcome.solution);
    if (v < out.best_value) {
      out.best_value = v;
      out.best_solution = std::move(outcome.solution);
    }
    if (!problem.explore_after_solution()) return;
  }
  for (const auto& child : outcome.children) search_tree(problem, child, out);
}

}  // namespace detail

/// Plain recursive branch-and-bound over the adapter, without the framework.
template <BranchingProblem P>
SequentialResult<SolutionOf<P>> solve_sequential(const P& problem, const InstanceOf<P>& root,
                                                 Value initial_bound = kUnboundedValue) {
  SequentialResult<SolutionOf<P>> out;
  out.best_value = initial_bound;
  detail::search_tree(problem, root, out);
  return out;
}

struct AdapterCheck {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct AdapterReport {
  std::vector<AdapterCheck> checks;

  [[nodiscard]] bool passed() const {
    for (const auto& c : checks) {
      if (!c.passed) return false;
    }
    return true;
  }
  [[nodiscard]] const AdapterCheck* find(const std::string& name) const {
    for (const auto& c : checks) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
};

/// Exercises an adapter on author-supplied instances: serialization round
/// trip (same encoding and same branch outcome), branching-factor bound, and
/// priority purity. Report only; never throws for a failing check.
template <BranchingProblem P>
AdapterReport validate_adapter(const P& problem, const std::vector<InstanceOf<P>>& samples,
                               Value bound = kUnboundedValue) {
  AdapterCheck round_trip{"serialize_round_trip"};
  AdapterCheck branching{"branching_factor"};
  AdapterCheck purity{"priority_pure"};
  const int max_b = problem.max_branching_factor();

  auto fingerprint = [&](const OutcomeOf<P>& o) {
    std::vector<Bytes> f;
    f.push_back(Bytes{static_cast<std::uint8_t>(o.kind)});
    if (o.solution) f.push_back(problem.serialize_solution(*o.solution));
    for (const auto& c : o.children) f.push_back(problem.serialize(c));
    return f;
  };

  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const std::string tag = "sample " + std::to_string(i);
    try {
      const Bytes encoded = problem.serialize(s);
      const auto decoded = problem.deserialize(encoded);
      if (problem.serialize(decoded) != encoded) {
        round_trip.passed = false;
        round_trip.detail += tag + ": re-encoding differs; ";
      } else if (fingerprint(problem.branch(s, bound)) != fingerprint(problem.branch(decoded, bound))) {
        round_trip.passed = false;
        round_trip.detail += tag + ": decoded instance branches differently; ";
      }
      if (problem.priority(s) != problem.priority(s) || problem.priority(s) != problem.priority(decoded)) {
        purity.passed = false;
        purity.detail += tag + ": priority not a pure function of the instance; ";
      }
    } catch (const std::exception& e) {
      round_trip.passed = false;
      round_trip.detail += tag + ": " + e.what() + "; ";
    }
    const auto outcome = problem.branch(s, bound);
    using Kind = typename OutcomeOf<P>::Kind;
    if (outcome.kind == Kind::Children &&
        (outcome.children.empty() || static_cast<int>(outcome.children.size()) > max_b)) {
      branching.passed = false;
      branching.detail += tag + ": " + std::to_string(outcome.children.size()) + " children, max_b=" +
                          std::to_string(max_b) + "; ";
    }
  }
  return AdapterReport{{round_trip, branching, purity}};
}

}  // namespace semilb
