#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "semilb/types.hpp"

namespace semilb {

class InvalidHandle : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Generation-stamped reference to a task tree node. A handle whose node has
/// been removed (completed, extracted or rerooted away) is detected as stale.
struct NodeHandle {
  std::uint32_t index = 0;
  std::uint32_t generation = 0;

  bool operator==(const NodeHandle&) const = default;
};

enum class NodeState : std::uint8_t { Pending, Exploring };

/// Result of begin_search: the instance to explore, or nothing if the node was
/// sent elsewhere in the meantime.
template <class T>
struct SearchStart {
  std::optional<T> instance;

  [[nodiscard]] bool stolen() const { return !instance.has_value(); }
};

/// Read-only view of one node, for invariant checks and test oracles.
struct NodeView {
  NodeHandle handle;
  std::optional<NodeHandle> parent;
  int depth = 0;
  NodeState state = NodeState::Pending;
  std::vector<NodeHandle> children;  // left to right
};

/// Per-exploration-thread tree of registered but unexplored sub-instances.
///
/// Exploring nodes form the path the owning thread is currently recursing on;
/// every other node is a Pending leaf hanging off that path, so the tree is
/// always a caterpillar. take_highest_priority hands out the shallowest,
/// leftmost Pending leaf after pruning root nodes that have a single child.
///
/// All operations lock an internal mutex: the owning explorer and one
/// communication loop may call concurrently.
template <class T>
class TaskTree {
 public:
  using PriorityFn = std::function<std::int64_t(const T&)>;

  explicit TaskTree(PriorityFn priority = {}) : priority_(std::move(priority)) {}

  TaskTree(const TaskTree&) = delete;
  TaskTree& operator=(const TaskTree&) = delete;

  /// Creates the root for a task the owning thread is about to explore. The
  /// root is Exploring from the start and holds no instance.
  NodeHandle create_root(int depth = 0) {
    std::lock_guard lock(mutex_);
    if (root_ != kNil) throw ContractViolation("task tree already has a root");
    const std::uint32_t id = allocate();
    Node& n = nodes_[id];
    n.depth = depth;
    n.state = NodeState::Exploring;
    root_ = id;
    return handle_of(id);
  }

  std::vector<NodeHandle> register_child_instances(NodeHandle parent, std::vector<T> children) {
    std::lock_guard lock(mutex_);
    const std::uint32_t p = resolve(parent);
    if (p == kNil) throw InvalidHandle("register_child_instances: parent node no longer in tree");
    if (nodes_[p].state != NodeState::Exploring) {
      throw ContractViolation("register_child_instances: parent is not being explored");
    }
    std::vector<NodeHandle> out;
    out.reserve(children.size());
    for (auto& child : children) {
      const std::uint32_t id = allocate();
      Node& n = nodes_[id];
      n.depth = nodes_[p].depth + 1;
      n.state = NodeState::Pending;
      n.priority = priority_ ? priority_(child) : 0;
      n.instance = std::move(child);
      append_child(p, id);
      out.push_back(handle_of(id));
    }
    return out;
  }

  /// Marks the node Exploring and hands its instance to the caller, unless the
  /// node is gone (sent elsewhere), in which case the result is stolen().
  SearchStart<T> begin_search(NodeHandle handle) {
    std::lock_guard lock(mutex_);
    const std::uint32_t id = resolve(handle);
    if (id == kNil || nodes_[id].state != NodeState::Pending) return {};
    Node& n = nodes_[id];
    n.state = NodeState::Exploring;
    SearchStart<T> out{std::move(n.instance)};
    n.instance.reset();
    return out;
  }

  /// Removes an Exploring node whose recursion returned. A stale handle is a
  /// no-op: the node was pruned from the top by rerooting.
  void complete(NodeHandle handle) {
    std::lock_guard lock(mutex_);
    const std::uint32_t id = resolve(handle);
    if (id == kNil) return;
    Node& n = nodes_[id];
    if (n.first_child != kNil) throw ContractViolation("complete: node still has children");
    if (n.state != NodeState::Exploring) throw ContractViolation("complete: node is not being explored");
    remove(id);
  }

  std::optional<T> take_highest_priority() {
    std::lock_guard lock(mutex_);
    const std::uint32_t id = locate_highest();
    if (id == kNil) return std::nullopt;
    std::optional<T> out = std::move(nodes_[id].instance);
    remove(id);
    return out;
  }

  /// Priority of the task take_highest_priority would return next.
  std::optional<std::int64_t> highest_pending_size() {
    std::lock_guard lock(mutex_);
    const std::uint32_t id = locate_highest();
    if (id == kNil) return std::nullopt;
    return nodes_[id].priority;
  }

  [[nodiscard]] std::size_t size() const {
    std::lock_guard lock(mutex_);
    return count_;
  }

  [[nodiscard]] bool empty() const { return size() == 0; }

  /// Number of Exploring nodes, i.e. the length of the current exploration path.
  [[nodiscard]] std::size_t exploring_count() const {
    std::lock_guard lock(mutex_);
    std::size_t k = 0;
    for (std::uint32_t id = root_; id != kNil; id = exploring_child(id)) {
      if (nodes_[id].state == NodeState::Exploring) ++k;
    }
    return k;
  }

  [[nodiscard]] std::optional<NodeHandle> root() const {
    std::lock_guard lock(mutex_);
    if (root_ == kNil) return std::nullopt;
    return handle_of(root_);
  }

  /// Pre-order snapshot of the live tree.
  [[nodiscard]] std::vector<NodeView> snapshot() const {
    std::lock_guard lock(mutex_);
    std::vector<NodeView> out;
    if (root_ == kNil) return out;
    std::vector<std::uint32_t> stack{root_};
    while (!stack.empty()) {
      const std::uint32_t id = stack.back();
      stack.pop_back();
      const Node& n = nodes_[id];
      NodeView v;
      v.handle = handle_of(id);
      if (n.parent != kNil) v.parent = handle_of(n.parent);
      v.depth = n.depth;
      v.state = n.state;
      for (std::uint32_t c = n.first_child; c != kNil; c = nodes_[c].next) v.children.push_back(handle_of(c));
      for (auto it = v.children.rbegin(); it != v.children.rend(); ++it) stack.push_back(it->index);
      out.push_back(std::move(v));
    }
    return out;
  }

  /// Read access to a Pending node's instance (tests and oracles).
  [[nodiscard]] std::optional<T> peek_instance(NodeHandle handle) const {
    std::lock_guard lock(mutex_);
    const std::uint32_t id = resolve(handle);
    if (id == kNil) return std::nullopt;
    return nodes_[id].instance;
  }

  /// Empty string when the caterpillar invariants hold, otherwise a description.
  [[nodiscard]] std::string check_invariants() const {
    std::lock_guard lock(mutex_);
    std::size_t seen = 0;
    if (root_ == kNil) return count_ == 0 ? "" : "empty root with live nodes";
    if (nodes_[root_].parent != kNil) return "root has a parent";
    std::vector<std::uint32_t> stack{root_};
    while (!stack.empty()) {
      const std::uint32_t id = stack.back();
      stack.pop_back();
      ++seen;
      const Node& n = nodes_[id];
      int internal = 0;
      int exploring = 0;
      for (std::uint32_t c = n.first_child; c != kNil; c = nodes_[c].next) {
        const Node& ch = nodes_[c];
        if (ch.parent != id) return "child with wrong parent link";
        if (ch.depth != n.depth + 1) return "child depth mismatch";
        if (ch.first_child != kNil) ++internal;
        if (ch.state == NodeState::Exploring) ++exploring;
        stack.push_back(c);
      }
      if (internal > 1) return "node with more than one internal child";
      if (exploring > 1) return "node with more than one exploring child";
      if (n.first_child != kNil && n.state != NodeState::Exploring) return "pending node with children";
      if (n.state == NodeState::Pending && !n.instance) return "pending node without instance";
    }
    if (seen != count_) return "node count mismatch";
    return "";
  }

 private:
  static constexpr std::uint32_t kNil = 0xFFFFFFFFu;

  struct Node {
    std::uint32_t generation = 0;
    bool live = false;
    std::uint32_t parent = kNil;
    std::uint32_t first_child = kNil;
    std::uint32_t last_child = kNil;
    std::uint32_t prev = kNil;
    std::uint32_t next = kNil;
    int depth = 0;
    NodeState state = NodeState::Pending;
    std::int64_t priority = 0;
    std::optional<T> instance;
  };

  NodeHandle handle_of(std::uint32_t id) const { return NodeHandle{id, nodes_[id].generation}; }

  std::uint32_t resolve(NodeHandle h) const {
    if (h.index >= nodes_.size()) return kNil;
    const Node& n = nodes_[h.index];
    return (n.live && n.generation == h.generation) ? h.index : kNil;
  }

  std::uint32_t allocate() {
    std::uint32_t id;
    if (!free_.empty()) {
      id = free_.back();
      free_.pop_back();
    } else {
      id = static_cast<std::uint32_t>(nodes_.size());
      nodes_.emplace_back();
    }
    Node& n = nodes_[id];
    const std::uint32_t gen = n.generation;
    n = Node{};
    n.generation = gen;
    n.live = true;
    ++count_;
    return id;
  }

  void release(std::uint32_t id) {
    Node& n = nodes_[id];
    n.live = false;
    n.instance.reset();
    ++n.generation;
    free_.push_back(id);
    --count_;
  }

  void append_child(std::uint32_t parent, std::uint32_t child) {
    Node& p = nodes_[parent];
    Node& c = nodes_[child];
    c.parent = parent;
    c.prev = p.last_child;
    c.next = kNil;
    if (p.last_child != kNil) nodes_[p.last_child].next = child;
    else p.first_child = child;
    p.last_child = child;
  }

  void unlink(std::uint32_t id) {
    Node& n = nodes_[id];
    if (n.parent == kNil) {
      if (root_ == id) root_ = kNil;
      return;
    }
    Node& p = nodes_[n.parent];
    if (n.prev != kNil) nodes_[n.prev].next = n.next;
    else p.first_child = n.next;
    if (n.next != kNil) nodes_[n.next].prev = n.prev;
    else p.last_child = n.prev;
    n.parent = n.prev = n.next = kNil;
  }

  void remove(std::uint32_t id) {
    unlink(id);
    release(id);
  }

  std::uint32_t exploring_child(std::uint32_t id) const {
    for (std::uint32_t c = nodes_[id].first_child; c != kNil; c = nodes_[c].next) {
      if (nodes_[c].state == NodeState::Exploring) return c;
    }
    return kNil;
  }

  // Walks down from the root, deleting roots that have exactly one child, and
  // returns the node to hand out (or kNil). Rerooting never drops a task.
  std::uint32_t locate_highest() {
    while (root_ != kNil) {
      Node& r = nodes_[root_];
      if (r.first_child == kNil) {
        // A Pending root only appears after rerooting onto a lone leaf.
        return r.state == NodeState::Pending ? root_ : kNil;
      }
      if (r.first_child == r.last_child) {
        const std::uint32_t q = r.first_child;
        const std::uint32_t old = root_;
        unlink(q);
        release(old);
        root_ = q;
        continue;
      }
      for (std::uint32_t c = r.first_child; c != kNil; c = nodes_[c].next) {
        if (nodes_[c].state == NodeState::Pending) return c;
      }
      return kNil;
    }
    return kNil;
  }

  mutable std::mutex mutex_;
  PriorityFn priority_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> free_;
  std::uint32_t root_ = kNil;
  std::size_t count_ = 0;
};

}  // namespace semilb
