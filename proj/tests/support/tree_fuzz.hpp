#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "semilb/task_tree.hpp"

namespace semilb::testing {

struct FuzzTask {
  int id = 0;
  int depth = 0;
};

/// Shallowest Pending node, leftmost in pre-order, found by scanning the
/// whole snapshot.
inline std::optional<NodeHandle> naive_highest(const std::vector<NodeView>& snapshot) {
  std::optional<NodeHandle> best;
  int best_depth = 0;
  for (const auto& v : snapshot) {
    if (v.state != NodeState::Pending) continue;
    if (!best || v.depth < best_depth) {
      best = v.handle;
      best_depth = v.depth;
    }
  }
  return best;
}

struct TreeFuzzResult {
  std::string failure;  // empty when every check held
  std::size_t ops = 0;
  std::size_t takes = 0;
  std::size_t generated = 0;
  std::size_t max_nodes = 0;
};

/// Drives one task tree the way an explorer does (register children, search
/// them left to right, complete on return) and interleaves random
/// take_highest_priority / highest_pending_size calls. Checks after every
/// operation: caterpillar shape, node_count <= max_b * D + max_b, oracle
/// agreement for extraction, and at the end that every generated task was
/// explored or extracted exactly once.
inline TreeFuzzResult fuzz_task_tree(std::uint64_t seed, std::size_t ops, int max_b, int max_depth = 14) {
  TreeFuzzResult out;
  std::mt19937_64 rng(seed);
  TaskTree<FuzzTask> tree([](const FuzzTask& t) { return std::int64_t{1000} - t.depth; });

  struct Frame {
    NodeHandle node;
    int depth;
    std::vector<NodeHandle> children;
    std::size_t next = 0;
  };
  std::vector<Frame> stack;
  std::map<int, int> handled;  // id -> times explored or extracted
  int next_id = 0;

  auto fail = [&](const std::string& what) {
    if (out.failure.empty()) out.failure = "op " + std::to_string(out.ops) + ": " + what;
  };

  auto expand = [&](NodeHandle node, int depth) {
    const int k = depth >= max_depth ? 0 : static_cast<int>(rng() % static_cast<std::uint64_t>(max_b + 1));
    std::vector<FuzzTask> kids;
    for (int i = 0; i < k; ++i) kids.push_back({next_id++, depth + 1});
    out.generated += kids.size();
    if (kids.empty()) {
      tree.complete(node);
      return;
    }
    auto handles = tree.register_child_instances(node, std::move(kids));
    stack.push_back({node, depth, std::move(handles), 0});
  };

  auto explorer_step = [&] {
    if (stack.empty()) {
      if (!tree.empty()) {
        fail("tree not empty between tasks");
        return;
      }
      const NodeHandle root = tree.create_root();
      ++handled[next_id++];
      ++out.generated;
      expand(root, 0);
      return;
    }
    Frame& top = stack.back();
    if (top.next < top.children.size()) {
      const NodeHandle child = top.children[top.next++];
      const auto peek = tree.peek_instance(child);
      auto start = tree.begin_search(child);
      if (start.stolen()) return;
      ++handled[start.instance->id];
      if (!peek || peek->id != start.instance->id) fail("begin_search returned a different instance");
      expand(child, start.instance->depth);
      return;
    }
    tree.complete(top.node);
    stack.pop_back();
  };

  for (out.ops = 0; out.ops < ops && out.failure.empty(); ++out.ops) {
    const auto roll = rng() % 10;
    if (roll < 6) {
      explorer_step();
    } else if (roll < 9) {
      const auto expect = naive_highest(tree.snapshot());
      const auto expect_task = expect ? tree.peek_instance(*expect) : std::nullopt;
      const auto size = tree.highest_pending_size();
      auto got = tree.take_highest_priority();
      ++out.takes;
      if (got.has_value() != expect_task.has_value()) {
        fail("take_highest_priority presence differs from the full scan");
      } else if (got) {
        if (got->id != expect_task->id) {
          fail("take returned id " + std::to_string(got->id) + ", full scan says " + std::to_string(expect_task->id));
        }
        if (!size || *size != 1000 - got->depth) fail("highest_pending_size disagrees with the extracted task");
        ++handled[got->id];
      } else if (size) {
        fail("highest_pending_size set while nothing is extractable");
      }
    } else {
      (void)tree.highest_pending_size();
    }
    if (const std::string why = tree.check_invariants(); !why.empty()) fail(why);
    const std::size_t d = tree.exploring_count();
    const std::size_t n = tree.size();
    out.max_nodes = std::max(out.max_nodes, n);
    if (n > static_cast<std::size_t>(max_b) * d + static_cast<std::size_t>(max_b)) {
      fail("node count " + std::to_string(n) + " exceeds max_b*D+max_b with D=" + std::to_string(d));
    }
  }
  // Drain what is left so every generated task is accounted for.
  for (std::size_t guard = 0; out.failure.empty() && !(stack.empty() && tree.empty()); ++guard) {
    if (guard > 100'000'000) {
      fail("drain did not finish");
      break;
    }
    if (stack.empty()) {
      while (auto t = tree.take_highest_priority()) ++handled[t->id];
      break;
    }
    Frame& top = stack.back();
    if (top.next < top.children.size()) {
      const NodeHandle child = top.children[top.next++];
      auto start = tree.begin_search(child);
      if (start.stolen()) continue;
      ++handled[start.instance->id];
      // Leaves only while draining, to keep it finite.
      tree.complete(child);
      continue;
    }
    tree.complete(top.node);
    stack.pop_back();
  }
  if (out.failure.empty()) {
    if (handled.size() != out.generated) {
      fail("handled " + std::to_string(handled.size()) + " distinct tasks of " + std::to_string(out.generated));
    }
    for (auto [id, times] : handled) {
      if (times != 1) {
        fail("task " + std::to_string(id) + " handled " + std::to_string(times) + " times");
        break;
      }
    }
  }
  return out;
}

}  // namespace semilb::testing
