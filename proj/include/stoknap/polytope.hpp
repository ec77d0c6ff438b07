#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "stoknap/model.hpp"

namespace stoknap {

// One state of an item's Markov arm: the start node, or a transient node
// Mid(k, s) meaning "pulled k times out of a realized size s". A size-s
// item started at slot t occupies slots t..t+s-1; terminal states carry
// no variables.
struct Node {
  size_t item = 0;  // dense instance index
  int pulls = 0;    // 0 for the start node, else 1 <= pulls <= size-1
  int size = 0;     // 0 for the start node

  bool is_start() const { return pulls == 0; }
};

enum class ConstraintFamily {
  kXLeqS,          // x_{u,t} <= s_{u,t}
  kMidForcedPull,  // x_{u,t} = s_{u,t} for transient nodes
  kSlotCapacity,   // sum_u x_{u,t} <= 1
  kPartition,      // sum_{i in I_k} s_{Start(i),1} <= 1
  kMidStartsEmpty, // s_{u,1} = 0 for transient nodes
  kStartChain,     // s_{Start,t} = s_{Start,t-1} - x_{Start,t-1}
  kMidChain,       // transient mass propagation
  kStartFit,       // x_{Start,t} = 0 when t + cap - 1 > B
};

struct LinearConstraint {
  ConstraintFamily family;
  std::string label;
  std::vector<std::pair<size_t, double>> terms;  // (variable index, coefficient)
  char sense = 'L';                              // 'L': <= rhs, 'E': == rhs
  double rhs = 0.0;
};

// Variables are x_{u,t} and s_{u,t} for every node u and slot t in
// {1..B}: all x variables first, then all s variables, nodes ordered by
// (item, kind, pulls, size) and slots ascending. Every variable carries
// an implicit lower bound of 0.
class ConstraintSystem {
 public:
  static ConstraintSystem build(const Instance& instance);

  size_t variable_count() const { return 2 * nodes_.size() * budget_; }
  size_t node_count() const { return nodes_.size(); }
  int budget() const { return budget_; }
  size_t item_count() const { return items_; }

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<LinearConstraint>& constraints() const { return constraints_; }
  size_t start_node(size_t item) const { return start_node_[item]; }
  const std::vector<size_t>& item_nodes(size_t item) const { return item_nodes_[item]; }
  const std::vector<std::vector<size_t>>& partitions() const { return partition_members_; }
  int item_cap(size_t item) const { return caps_[item]; }
  bool start_fits(size_t item, int t) const { return t + caps_[item] - 1 <= budget_; }

  size_t var_x(size_t node, int t) const { return node * budget_ + (t - 1); }
  size_t var_s(size_t node, int t) const {
    return nodes_.size() * budget_ + node * budget_ + (t - 1);
  }
  std::string variable_name(size_t var) const;

  // Pr[size_i >= L] and Pr[size_i = s], mirrored from the instance so the
  // solver can presolve the equality chains without re-reading it.
  double size_tail(size_t item, int L) const;
  double size_prob(size_t item, int s) const;
  const std::string& item_id(size_t item) const { return item_ids_[item]; }

 private:
  std::vector<Node> nodes_;
  std::vector<size_t> start_node_;               // item -> node index
  std::vector<std::vector<size_t>> item_nodes_;  // item -> its node indices
  std::vector<std::vector<size_t>> partition_members_;
  std::vector<int> caps_;
  std::vector<std::string> item_ids_;
  std::vector<std::vector<std::pair<int, double>>> size_support_;  // per item
  std::vector<LinearConstraint> constraints_;
  size_t items_ = 0;
  int budget_ = 1;
};

// Exposed separately for inspection/tests; ConstraintSystem::build uses
// the same enumeration.
std::vector<Node> build_nodes(const Instance& instance);

struct FractionalSolution {
  std::vector<double> values;  // aligned with ConstraintSystem variables
  std::vector<double> xbar;    // per item: sum_t x_{Start(i),t}
  double tolerance = 1e-9;

  double x_start(const ConstraintSystem& sys, size_t item, int t) const {
    return values[sys.var_x(sys.start_node(item), t)];
  }
  // total transient (mid-processing) x-mass of an item at slot t
  double mid_mass(const ConstraintSystem& sys, size_t item, int t) const;

  FractionalSolution scaled(double factor) const;
};

struct FeasibilityViolation {
  std::string label;
  double amount = 0.0;  // how far past the constraint the point sits
};

// Maximizes sum_i item_weights[i] * xbar(i) over the system. The zero
// point is always feasible, so infeasibility signals a construction bug.
FractionalSolution solve_weighted(const ConstraintSystem& system,
                                  const std::vector<double>& item_weights);

// Expands start-node values into the full variable vector through the
// equality families: x_start indexed [item][t] with t in 1..B, s_start1
// the initial start-node mass per item.
FractionalSolution assemble_solution(const ConstraintSystem& system,
                                     const std::vector<std::vector<double>>& x_start,
                                     const std::vector<double>& s_start1);

std::vector<FeasibilityViolation> check_feasibility(const FractionalSolution& solution,
                                                    const ConstraintSystem& system,
                                                    double tol = 1e-6);

// xbar(i) = sum_t x_{Start(i),t}: the probability the arm is started.
std::vector<double> inclusion_probability(const ConstraintSystem& system,
                                          const std::vector<double>& values);

// Debug dump in LP text interchange format (Maximize / Subject To /
// Bounds / End) for cross-checks against third-party solvers.
void write_lp_format(const ConstraintSystem& system, const std::vector<double>& item_weights,
                     std::ostream& os);

}  // namespace stoknap
