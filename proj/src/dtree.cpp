#include "sirl/dtree.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <unordered_set>

namespace sirl {

int argmax_lowest(const Eigen::VectorXd& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

std::string format_weight(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, end);
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

std::string format_q(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

DecisionTree::DecisionTree(int n_inputs, int n_actions)
    : n_inputs_(n_inputs), n_actions_(n_actions) {
  if (n_inputs < 0 || n_actions < 1) {
    throw std::invalid_argument("DecisionTree: bad dimensions");
  }
  Node leaf;
  leaf.leaf_id = 0;
  leaf.q = Eigen::VectorXd::Zero(n_actions);
  nodes_.push_back(std::move(leaf));
  rebuild_leaf_index();
}

void DecisionTree::rebuild_leaf_index() {
  int max_id = -1;
  for (const Node& n : nodes_) max_id = std::max(max_id, int(n.leaf_id));
  leaf_node_.assign(max_id + 1, -1);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].leaf()) leaf_node_[nodes_[i].leaf_id] = static_cast<std::int32_t>(i);
  }
  visits_.assign(nodes_.size(), 0);
}

void DecisionTree::check_leaf_id(int leaf_id) const {
  if (leaf_id < 0 || leaf_id >= int(leaf_node_.size()) || leaf_node_[leaf_id] < 0) {
    throw std::out_of_range("DecisionTree: no leaf #" + std::to_string(leaf_id));
  }
}

int DecisionTree::leaf_count() const {
  return static_cast<int>(std::count_if(nodes_.begin(), nodes_.end(),
                                        [](const Node& n) { return n.leaf(); }));
}

int DecisionTree::depth() const {
  std::function<int(int)> rec = [&](int id) -> int {
    const Node& n = nodes_[id];
    if (n.leaf()) return 0;
    return 1 + std::max(rec(n.yes), rec(n.no));
  };
  return nodes_.empty() ? 0 : rec(0);
}

int DecisionTree::route_node(const Eigen::VectorXd& s) const {
  if (s.size() != n_inputs_ || !s.allFinite()) {
    throw std::invalid_argument("route: invalid observation (size " +
                                std::to_string(s.size()) + ", expected " +
                                std::to_string(n_inputs_) + ", entries must be finite)");
  }
  int id = 0;
  if (instrumented_) ++visits_[0];
  while (!nodes_[id].leaf()) {
    id = nodes_[id].split.test(s) ? nodes_[id].yes : nodes_[id].no;
    if (instrumented_) ++visits_[id];
  }
  return id;
}

int DecisionTree::route(const Eigen::VectorXd& s) const {
  return nodes_[route_node(s)].leaf_id;
}

int DecisionTree::act(const Eigen::VectorXd& s, double epsilon, std::mt19937_64& rng) const {
  int node = route_node(s);
  if (epsilon > 0.0) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    if (u01(rng) < epsilon) {
      return std::uniform_int_distribution<int>(0, n_actions_ - 1)(rng);
    }
  }
  return argmax_lowest(nodes_[node].q);
}

int DecisionTree::greedy_action(const Eigen::VectorXd& s) const {
  return argmax_lowest(nodes_[route_node(s)].q);
}

void DecisionTree::q_update(const Transition& t, const QLearnParams& p) {
  if (t.a < 0 || t.a >= n_actions_) {
    throw std::invalid_argument("q_update: action out of range");
  }
  int node = route_node(t.s);
  double target = t.r;
  if (!t.done) {
    target += p.gamma * nodes_[route_node(t.s_next)].q.maxCoeff();
  }
  double& q = nodes_[node].q[t.a];
  q += p.alpha * (target - q);
}

Eigen::VectorXd& DecisionTree::leaf_q(int leaf_id) {
  check_leaf_id(leaf_id);
  return nodes_[leaf_node_[leaf_id]].q;
}

const Eigen::VectorXd& DecisionTree::leaf_q(int leaf_id) const {
  check_leaf_id(leaf_id);
  return nodes_[leaf_node_[leaf_id]].q;
}

int DecisionTree::greedy_of_leaf(int leaf_id) const {
  return argmax_lowest(leaf_q(leaf_id));
}

std::vector<int> DecisionTree::leaf_ids() const {
  std::vector<int> ids;
  for (std::size_t i = 0; i < leaf_node_.size(); ++i) {
    if (leaf_node_[i] >= 0) ids.push_back(static_cast<int>(i));
  }
  return ids;
}

void DecisionTree::init_q_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  for (int id : leaf_ids()) {
    Eigen::VectorXd& q = nodes_[leaf_node_[id]].q;
    for (int a = 0; a < n_actions_; ++a) q[a] = dist(rng);
  }
}

void DecisionTree::reset_visits() {
  std::fill(visits_.begin(), visits_.end(), 0);
}

std::vector<int> DecisionTree::parent_ids() const {
  std::vector<int> parent(nodes_.size(), -1);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].leaf()) {
      parent[nodes_[i].yes] = static_cast<int>(i);
      parent[nodes_[i].no] = static_cast<int>(i);
    }
  }
  return parent;
}

std::string DecisionTree::visits_csv() const {
  std::vector<int> parent = parent_ids();
  std::string out = "node_id,visits,parent_id\n";
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    out += std::to_string(i) + "," + std::to_string(visits_[i]) + "," +
           std::to_string(parent[i]) + "\n";
  }
  return out;
}

const ObliqueSplit& DecisionTree::split_at(int node_id) const {
  const Node& n = nodes_.at(node_id);
  if (n.leaf()) throw std::invalid_argument("split_at: node is a leaf");
  return n.split;
}

ObliqueSplit& DecisionTree::split_at(int node_id) {
  Node& n = nodes_.at(node_id);
  if (n.leaf()) throw std::invalid_argument("split_at: node is a leaf");
  return n.split;
}

int DecisionTree::mac_per_decision() const {
  std::function<int(int)> rec = [&](int id) -> int {
    const Node& n = nodes_[id];
    if (n.leaf()) return 0;
    return n.split.nonzero_terms() + std::max(rec(n.yes), rec(n.no));
  };
  return nodes_.empty() ? 0 : rec(0);
}

namespace {

void append_serialized(std::string& out, const DecisionTree& t, int node, bool with_q) {
  if (t.is_leaf(node)) {
    out += "Leaf#" + std::to_string(t.leaf_id_at(node));
    if (with_q) {
      out += "[q=";
      const Eigen::VectorXd& q = t.leaf_q(t.leaf_id_at(node));
      for (int a = 0; a < q.size(); ++a) {
        if (a > 0) out += ' ';
        out += format_q(q[a]);
      }
      out += ']';
    }
    return;
  }
  const ObliqueSplit& sp = t.split_at(node);
  out += "Node(";
  for (int i = 0; i < sp.weights.size(); ++i) {
    if (i > 0) out += " + ";
    out += format_weight(sp.weights[i]) + "*x" + std::to_string(i + 1);
  }
  out += " < " + format_weight(sp.bias) + ", ";
  append_serialized(out, t, t.true_child(node), with_q);
  out += ", ";
  append_serialized(out, t, t.false_child(node), with_q);
  out += ')';
}

}  // namespace

std::string DecisionTree::serialize() const {
  std::string out;
  append_serialized(out, *this, 0, true);
  return out;
}

std::string DecisionTree::structure_text() const {
  std::string out;
  append_serialized(out, *this, 0, false);
  return out;
}

bool operator==(const DecisionTree& a, const DecisionTree& b) {
  if (a.n_inputs_ != b.n_inputs_ || a.n_actions_ != b.n_actions_) return false;
  if (!a.same_structure(b)) return false;
  for (std::size_t i = 0; i < a.nodes_.size(); ++i) {
    if (!a.nodes_[i].leaf()) continue;
    const Eigen::VectorXd& qa = a.nodes_[i].q;
    const Eigen::VectorXd& qb = b.nodes_[i].q;
    if (qa.size() != qb.size() || !(qa.array() == qb.array()).all()) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct ParsedNode {
  Eigen::VectorXd weights;
  double bias = 0.0;
  Eigen::VectorXd q;
  bool has_q = false;
  int yes = -1;
  int no = -1;
  int leaf_id = -1;
  bool leaf() const { return yes < 0; }
};

class Parser {
 public:
  Parser(std::string_view text, bool require_q) : text_(text), require_q_(require_q) {}

  int parse_tree() {
    skip_ws();
    if (match("Node(")) return parse_internal();
    if (match("Leaf")) return parse_leaf();
    fail("expected 'Node(' or 'Leaf'");
  }

  void finish(int declared_inputs, int declared_actions) {
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters after tree");

    if (declared_inputs >= 0 && n_inputs_ >= 0 && n_inputs_ != declared_inputs) {
      fail("condition has " + std::to_string(n_inputs_) + " terms, expected " +
           std::to_string(declared_inputs));
    }
    if (n_inputs_ < 0) n_inputs_ = declared_inputs >= 0 ? declared_inputs : 0;

    if (declared_actions >= 0 && n_actions_ >= 0 && n_actions_ != declared_actions) {
      fail("leaf Q-vector has " + std::to_string(n_actions_) + " entries, expected " +
           std::to_string(declared_actions));
    }
    if (n_actions_ < 0) n_actions_ = declared_actions;
    if (n_actions_ < 1) fail("action count could not be determined");

    std::unordered_set<int> seen;
    for (ParsedNode& n : nodes_) {
      if (!n.leaf()) continue;
      if (n.leaf_id < 0) n.leaf_id = next_bare_id_++;
      if (!seen.insert(n.leaf_id).second) {
        fail("duplicate leaf id #" + std::to_string(n.leaf_id));
      }
      if (!n.has_q) {
        if (require_q_) fail("leaf #" + std::to_string(n.leaf_id) + " is missing [q=...]");
        n.q = Eigen::VectorXd::Zero(n_actions_);
      }
    }
  }

  std::vector<ParsedNode> take_nodes() { return std::move(nodes_); }
  int n_inputs() const { return n_inputs_; }
  int n_actions() const { return n_actions_; }

 private:
  int parse_internal() {
    int idx = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    std::vector<double> weights;
    while (true) {
      double w = parse_number();
      expect("*x");
      int var = parse_int();
      if (var != int(weights.size()) + 1) {
        fail("expected x" + std::to_string(weights.size() + 1));
      }
      weights.push_back(w);
      skip_ws();
      if (match("+")) continue;
      if (match("<")) break;
      fail("expected '+' or '<' in condition");
    }
    double bias = parse_number();

    if (n_inputs_ < 0) {
      n_inputs_ = static_cast<int>(weights.size());
    } else if (n_inputs_ != int(weights.size())) {
      fail("condition term count differs from earlier conditions");
    }

    nodes_[idx].weights = Eigen::Map<Eigen::VectorXd>(weights.data(), weights.size());
    nodes_[idx].bias = bias;

    expect(",");
    int yes = parse_tree();
    expect(",");
    int no = parse_tree();
    expect(")");
    nodes_[idx].yes = yes;
    nodes_[idx].no = no;
    return idx;
  }

  int parse_leaf() {
    int idx = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    ParsedNode& leaf = nodes_[idx];
    leaf.leaf_id = -1;

    if (pos_ < text_.size() && text_[pos_] == '#') {
      ++pos_;
      leaf.leaf_id = parse_int();
      if (leaf.leaf_id < 0) fail("leaf id must be non-negative");
    }
    if (match("[q=")) {
      std::vector<double> q;
      q.push_back(parse_number());
      while (true) {
        skip_ws();
        if (match("]")) break;
        q.push_back(parse_number());
      }
      if (n_actions_ < 0) {
        n_actions_ = static_cast<int>(q.size());
      } else if (n_actions_ != int(q.size())) {
        fail("leaf Q-vector length differs from earlier leaves");
      }
      nodes_[idx].q = Eigen::Map<Eigen::VectorXd>(q.data(), q.size());
      nodes_[idx].has_q = true;
    }
    return idx;
  }

  double parse_number() {
    skip_ws();
    double value = 0.0;
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    auto [next, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{}) fail("expected a number");
    pos_ = static_cast<std::size_t>(next - text_.data());
    return value;
  }

  int parse_int() {
    int value = 0;
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    auto [next, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{}) fail("expected an integer");
    pos_ = static_cast<std::size_t>(next - text_.data());
    return value;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool match(std::string_view token) {
    skip_ws();
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view token) {
    if (!match(token)) fail("expected '" + std::string(token) + "'");
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(message, pos_);
  }

  std::string_view text_;
  bool require_q_;
  std::size_t pos_ = 0;
  std::vector<ParsedNode> nodes_;
  int n_inputs_ = -1;
  int n_actions_ = -1;
  int next_bare_id_ = 0;
};

}  // namespace

DecisionTree DecisionTree::parse(std::string_view text) {
  Parser parser(text, /*require_q=*/true);
  parser.parse_tree();
  parser.finish(-1, -1);

  DecisionTree t;
  t.n_inputs_ = parser.n_inputs();
  t.n_actions_ = parser.n_actions();
  for (ParsedNode& pn : parser.take_nodes()) {
    Node n;
    if (pn.leaf()) {
      n.leaf_id = pn.leaf_id;
      n.q = std::move(pn.q);
    } else {
      n.split.weights = std::move(pn.weights);
      n.split.bias = pn.bias;
      n.yes = pn.yes;
      n.no = pn.no;
    }
    t.nodes_.push_back(std::move(n));
  }
  t.rebuild_leaf_index();
  return t;
}

DecisionTree DecisionTree::parse_expression(std::string_view text, int n_inputs, int n_actions) {
  if (n_inputs < 0 || n_actions < 1) {
    throw std::invalid_argument("parse_expression: bad dimensions");
  }
  Parser parser(text, /*require_q=*/false);
  parser.parse_tree();
  parser.finish(n_inputs, n_actions);

  DecisionTree t;
  t.n_inputs_ = n_inputs;
  t.n_actions_ = n_actions;
  for (ParsedNode& pn : parser.take_nodes()) {
    Node n;
    if (pn.leaf()) {
      n.leaf_id = pn.leaf_id;
      n.q = std::move(pn.q);
    } else {
      n.split.weights = std::move(pn.weights);
      n.split.bias = pn.bias;
      n.yes = pn.yes;
      n.no = pn.no;
    }
    t.nodes_.push_back(std::move(n));
  }
  t.rebuild_leaf_index();
  return t;
}

// ---------------------------------------------------------------------------
// Averaging and pruning

DecisionTree average_trees(std::span<const DecisionTree> trees) {
  if (trees.empty()) {
    throw std::invalid_argument("average_trees: empty tree list");
  }
  const DecisionTree& first = trees.front();
  for (std::size_t i = 1; i < trees.size(); ++i) {
    if (!first.same_structure(trees[i])) {
      throw std::invalid_argument("average_trees: incompatible tree structures");
    }
  }

  DecisionTree out = first;
  const double k = static_cast<double>(trees.size());
  for (std::size_t n = 0; n < out.nodes_.size(); ++n) {
    if (!out.nodes_[n].leaf()) continue;
    Eigen::VectorXd& q = out.nodes_[n].q;
    for (int a = 0; a < out.n_actions_; ++a) {
      const double v0 = trees[0].nodes_[n].q[a];
      double sum = v0;
      bool all_equal = true;
      for (std::size_t t = 1; t < trees.size(); ++t) {
        const double v = trees[t].nodes_[n].q[a];
        all_equal = all_equal && v == v0;
        sum += v;
      }
      q[a] = all_equal ? v0 : sum / k;
    }
  }
  return out;
}

std::pair<DecisionTree, PruneReport> prune(const DecisionTree& tree, double threshold) {
  struct WorkNode {
    ObliqueSplit split;
    Eigen::VectorXd q;
    int yes = -1, no = -1, leaf_id = -1;
    std::uint64_t visits = 0;
    bool leaf() const { return yes < 0; }
  };

  std::vector<WorkNode> work(tree.node_count());
  for (int i = 0; i < tree.node_count(); ++i) {
    WorkNode& w = work[i];
    w.visits = tree.visits(i);
    if (tree.is_leaf(i)) {
      w.leaf_id = tree.leaf_id_at(i);
      w.q = tree.leaf_q(w.leaf_id);
    } else {
      w.split = tree.split_at(i);
      w.yes = tree.true_child(i);
      w.no = tree.false_child(i);
    }
  }

  int root = 0;
  PruneReport report;

  // Preorder list of live nodes with their parents; work indices are the
  // original node ids, so report entries stay meaningful after relinking.
  auto live_preorder = [&]() {
    std::vector<std::pair<int, int>> order;  // (node, parent)
    std::function<void(int, int)> rec = [&](int id, int parent) {
      order.emplace_back(id, parent);
      if (!work[id].leaf()) {
        rec(work[id].yes, id);
        rec(work[id].no, id);
      }
    };
    rec(root, -1);
    return order;
  };

  // Phase 1: remove visit-starved nodes until none qualifies.
  for (bool changed = true; changed;) {
    changed = false;
    for (auto [node, parent] : live_preorder()) {
      if (parent < 0) continue;
      const double vp = static_cast<double>(work[parent].visits);
      const double ratio = vp > 0.0 ? static_cast<double>(work[node].visits) / vp : 0.0;
      if (ratio >= threshold) continue;

      int sibling = work[parent].yes == node ? work[parent].no : work[parent].yes;
      report.removed.push_back({node, parent, ratio});

      // Bypass the parent: its other subtree takes its place.
      bool relinked = false;
      for (auto [cand, cand_parent] : live_preorder()) {
        if (cand == parent && cand_parent >= 0) {
          if (work[cand_parent].yes == parent) {
            work[cand_parent].yes = sibling;
          } else {
            work[cand_parent].no = sibling;
          }
          relinked = true;
          break;
        }
      }
      if (!relinked) root = sibling;
      changed = true;
      break;
    }
  }

  // Phase 2: collapse internal nodes whose two leaf children agree on the
  // greedy action.
  for (bool changed = true; changed;) {
    changed = false;
    for (auto [node, parent] : live_preorder()) {
      WorkNode& w = work[node];
      if (w.leaf()) continue;
      WorkNode& a = work[w.yes];
      WorkNode& b = work[w.no];
      if (!a.leaf() || !b.leaf()) continue;
      if (argmax_lowest(a.q) != argmax_lowest(b.q)) continue;

      report.merged.push_back({node, argmax_lowest(a.q)});
      w.q = (a.q + b.q) / 2.0;
      w.leaf_id = a.leaf_id;
      w.yes = w.no = -1;
      changed = true;
      break;
    }
  }

  // Compact the surviving nodes back into preorder.
  DecisionTree out;
  out.n_inputs_ = tree.n_inputs();
  out.n_actions_ = tree.n_actions();
  out.instrumented_ = tree.instrumented();
  std::vector<std::uint64_t> out_visits;
  std::function<int(int)> emit = [&](int id) -> int {
    const WorkNode& w = work[id];
    int idx = static_cast<int>(out.nodes_.size());
    out.nodes_.emplace_back();
    out_visits.push_back(w.visits);
    if (w.leaf()) {
      out.nodes_[idx].leaf_id = w.leaf_id;
      out.nodes_[idx].q = w.q;
    } else {
      out.nodes_[idx].split = w.split;
      int yes = emit(w.yes);
      int no = emit(w.no);
      out.nodes_[idx].yes = yes;
      out.nodes_[idx].no = no;
    }
    return idx;
  };
  emit(root);
  out.rebuild_leaf_index();
  out.visits_ = std::move(out_visits);
  return {std::move(out), std::move(report)};
}

}  // namespace sirl
