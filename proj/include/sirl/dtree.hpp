#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sirl {

struct QLearnParams {
  double alpha = 0.1;    // learning rate, (0, 1]
  double gamma = 0.9;    // discount, [0, 1]
  double epsilon = 0.05; // exploration probability, [0, 1]
};

/// One environment step as consumed by Q-learning.
struct Transition {
  Eigen::VectorXd s;
  int a = 0;
  double r = 0.0;
  Eigen::VectorXd s_next;
  bool done = false;
};

/// Linear test `weights . x < bias` (strict; ties go to the false branch).
struct ObliqueSplit {
  Eigen::VectorXd weights;
  double bias = 0.0;

  bool test(const Eigen::VectorXd& x) const { return weights.dot(x) < bias; }
  int nonzero_terms() const {
    return static_cast<int>((weights.array() != 0.0).count());
  }
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : std::runtime_error(message + " (at offset " + std::to_string(position) + ")"),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

struct PruneReport {
  struct Removal {
    int node_id;    // removed node, ids from the tree prune() was given
    int parent_id;  // its (bypassed) parent
    double ratio;   // v_node / v_parent that triggered the removal
  };
  struct Merge {
    int node_id;  // internal node collapsed into a single leaf
    int greedy_action;
  };
  std::vector<Removal> removed;
  std::vector<Merge> merged;
  bool empty() const { return removed.empty() && merged.empty(); }
};

/// Oblique decision tree with tabular Q-values on the leaves.
///
/// Nodes are stored in preorder; node ids are preorder indices (root = 0).
/// Leaf ids are assigned at construction and survive pruning, so reports and
/// serialized text stay consistent. Visit counters are instrumentation only:
/// off by default, toggled for pruning traces.
class DecisionTree {
 public:
  DecisionTree() = default;
  DecisionTree(int n_inputs, int n_actions);  // single leaf #0, zero Q

  /// Parse the canonical text form. Dimensions are inferred: input count
  /// from the split conditions (0 for a bare leaf), action count from the
  /// leaf Q-vectors, which must be present on every leaf.
  static DecisionTree parse(std::string_view text);

  /// Parse a phenotype expression whose leaves may be bare `Leaf` tokens;
  /// such leaves get ids in reading order and zero Q-vectors.
  static DecisionTree parse_expression(std::string_view text, int n_inputs, int n_actions);

  /// Canonical text: `Node(c1*x1 + ... + cN*xN < b, <true>, <false>)`,
  /// leaves as `Leaf#<id>[q=...]`. parse(serialize()) is the identity.
  std::string serialize() const;

  /// Serialization with Q-values masked; equal strings mean the trees are
  /// compatible for averaging.
  std::string structure_text() const;

  int n_inputs() const { return n_inputs_; }
  int n_actions() const { return n_actions_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  int leaf_count() const;
  int internal_count() const { return node_count() - leaf_count(); }
  int depth() const;

  /// Descend from the root, true branch iff weights . s < bias; returns the
  /// reached leaf's id. Counts visits along the path when instrumented.
  int route(const Eigen::VectorXd& s) const;

  /// Epsilon-greedy action for s; ties in the greedy argmax break to the
  /// lowest action index. epsilon = 0 consumes no randomness.
  int act(const Eigen::VectorXd& s, double epsilon, std::mt19937_64& rng) const;
  int greedy_action(const Eigen::VectorXd& s) const;

  /// One-step tabular update on the leaf routed by t.s, entry t.a only:
  ///   Q += alpha * (r + gamma * max_a' Q(leaf(s'), a') - Q)
  /// with the bootstrap term dropped when t.done.
  void q_update(const Transition& t, const QLearnParams& p);

  Eigen::VectorXd& leaf_q(int leaf_id);
  const Eigen::VectorXd& leaf_q(int leaf_id) const;
  int greedy_of_leaf(int leaf_id) const;
  std::vector<int> leaf_ids() const;

  /// Draw fresh Q entries, leaves visited in leaf-id order so a given seed
  /// always produces the same table.
  void init_q_uniform(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0);

  void set_instrumented(bool on) { instrumented_ = on; }
  bool instrumented() const { return instrumented_; }
  void reset_visits();
  std::uint64_t visits(int node_id) const { return visits_.at(node_id); }

  /// CSV dump `node_id,visits,parent_id` (root parent is -1).
  std::string visits_csv() const;

  bool is_leaf(int node_id) const { return nodes_.at(node_id).leaf(); }
  int leaf_id_at(int node_id) const { return nodes_.at(node_id).leaf_id; }
  int true_child(int node_id) const { return nodes_.at(node_id).yes; }
  int false_child(int node_id) const { return nodes_.at(node_id).no; }
  const ObliqueSplit& split_at(int node_id) const;
  ObliqueSplit& split_at(int node_id);
  std::vector<int> parent_ids() const;

  /// Multiply-accumulate cost of one decision: sum of nonzero split weights
  /// along the worst-case root-to-leaf path.
  int mac_per_decision() const;
  std::int64_t mac_per_episode(int episode_length) const {
    return static_cast<std::int64_t>(mac_per_decision()) * episode_length;
  }

  bool same_structure(const DecisionTree& other) const {
    return structure_text() == other.structure_text();
  }

  /// Structure plus bit-exact Q equality.
  friend bool operator==(const DecisionTree& a, const DecisionTree& b);

 private:
  struct Node {
    ObliqueSplit split;   // leaves keep an empty weight vector
    Eigen::VectorXd q;    // empty on internal nodes
    std::int32_t yes = -1;
    std::int32_t no = -1;
    std::int32_t leaf_id = -1;
    bool leaf() const { return leaf_id >= 0; }
  };

  int route_node(const Eigen::VectorXd& s) const;
  void rebuild_leaf_index();
  void check_leaf_id(int leaf_id) const;

  friend DecisionTree average_trees(std::span<const DecisionTree> trees);
  friend std::pair<DecisionTree, PruneReport> prune(const DecisionTree& tree, double threshold);

  int n_inputs_ = 0;
  int n_actions_ = 0;
  std::vector<Node> nodes_;
  std::vector<std::int32_t> leaf_node_;       // leaf id -> node id (-1 holes)
  mutable std::vector<std::uint64_t> visits_; // instrumentation
  bool instrumented_ = false;
};

/// Leaf-wise arithmetic mean of structurally identical trees. Entries on
/// which all inputs agree are copied bit-exactly rather than re-averaged.
DecisionTree average_trees(std::span<const DecisionTree> trees);

/// Visit-ratio pruning: repeatedly remove the first node (preorder) whose
/// visit count is below `threshold` times its parent's, bypassing the parent;
/// then merge internal nodes whose two leaf children share a greedy action.
/// Visit counters must have been populated beforehand.
std::pair<DecisionTree, PruneReport> prune(const DecisionTree& tree, double threshold = 0.005);

int argmax_lowest(const Eigen::VectorXd& v);

/// Shortest round-trip decimal with at least one fractional digit (grid
/// coefficients like -5.0 or 0.1 print exactly one).
std::string format_weight(double v);

/// 17 significant digits; round-trips any double.
std::string format_q(double v);

}  // namespace sirl
