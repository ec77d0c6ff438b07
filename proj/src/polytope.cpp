#include "stoknap/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "stoknap/simplex.hpp"

namespace stoknap {

std::vector<Node> build_nodes(const Instance& instance) {
  std::vector<Node> nodes;
  for (size_t i = 0; i < instance.item_count(); ++i) {
    nodes.push_back(Node{i, 0, 0});
    // transient nodes ordered by (pulls, size)
    const int max_s = instance.items[i].sizes.max_size();
    for (int k = 1; k < max_s; ++k) {
      for (const auto& [s, p] : instance.items[i].sizes.support) {
        (void)p;
        if (k <= s - 1) nodes.push_back(Node{i, k, s});
      }
    }
  }
  return nodes;
}

double ConstraintSystem::size_tail(size_t item, int L) const {
  double sum = 0.0;
  for (const auto& [s, p] : size_support_[item])
    if (s >= L) sum += p;
  return sum;
}

double ConstraintSystem::size_prob(size_t item, int s) const {
  for (const auto& [size, p] : size_support_[item])
    if (size == s) return p;
  return 0.0;
}

ConstraintSystem ConstraintSystem::build(const Instance& instance) {
  ConstraintSystem sys;
  sys.items_ = instance.item_count();
  sys.budget_ = instance.budget;
  sys.nodes_ = build_nodes(instance);
  sys.start_node_.assign(sys.items_, 0);
  sys.item_nodes_.assign(sys.items_, {});
  sys.caps_.resize(sys.items_);
  sys.item_ids_.resize(sys.items_);
  sys.size_support_.resize(sys.items_);
  for (size_t i = 0; i < sys.items_; ++i) {
    sys.caps_[i] = instance.items[i].cap;
    sys.item_ids_[i] = instance.items[i].id;
    for (const auto& [s, p] : instance.items[i].sizes.support)
      sys.size_support_[i].push_back({s, p});
  }
  for (size_t u = 0; u < sys.nodes_.size(); ++u) {
    const Node& node = sys.nodes_[u];
    if (node.is_start()) sys.start_node_[node.item] = u;
    sys.item_nodes_[node.item].push_back(u);
  }
  for (const auto& [pid, members] : instance.matroid.partitions) {
    (void)pid;
    std::vector<size_t> idxs;
    for (const auto& id : members) idxs.push_back(instance.item_index(id));
    std::sort(idxs.begin(), idxs.end());
    sys.partition_members_.push_back(std::move(idxs));
  }

  const int B = sys.budget_;
  auto label = [&](const char* tag, size_t u, int t) {
    std::ostringstream os;
    const Node& node = sys.nodes_[u];
    os << tag << '[' << sys.item_ids_[node.item];
    if (!node.is_start()) os << ",k=" << node.pulls << ",s=" << node.size;
    os << ",t=" << t << ']';
    return os.str();
  };

  // (a) x <= s everywhere; equality on transient nodes (forced pulls)
  for (size_t u = 0; u < sys.nodes_.size(); ++u) {
    for (int t = 1; t <= B; ++t) {
      if (sys.nodes_[u].is_start()) {
        sys.constraints_.push_back({ConstraintFamily::kXLeqS, label("x<=s", u, t),
                                    {{sys.var_x(u, t), 1.0}, {sys.var_s(u, t), -1.0}},
                                    'L',
                                    0.0});
      } else {
        sys.constraints_.push_back({ConstraintFamily::kMidForcedPull, label("x=s", u, t),
                                    {{sys.var_x(u, t), 1.0}, {sys.var_s(u, t), -1.0}},
                                    'E',
                                    0.0});
      }
    }
  }

  // (b) per-slot capacity over all start and transient nodes
  for (int t = 1; t <= B; ++t) {
    LinearConstraint row{ConstraintFamily::kSlotCapacity,
                         "capacity[t=" + std::to_string(t) + "]",
                         {},
                         'L',
                         1.0};
    for (size_t u = 0; u < sys.nodes_.size(); ++u) row.terms.push_back({sys.var_x(u, t), 1.0});
    sys.constraints_.push_back(std::move(row));
  }

  // (c) partition budget at t=1
  {
    size_t k = 0;
    for (const auto& members : sys.partition_members_) {
      LinearConstraint row{ConstraintFamily::kPartition,
                           "partition[" + std::to_string(k) + "]",
                           {},
                           'L',
                           1.0};
      for (size_t i : members) row.terms.push_back({sys.var_s(sys.start_node_[i], 1), 1.0});
      sys.constraints_.push_back(std::move(row));
      ++k;
    }
  }

  // (d) transient nodes start empty
  for (size_t u = 0; u < sys.nodes_.size(); ++u) {
    if (sys.nodes_[u].is_start()) continue;
    sys.constraints_.push_back({ConstraintFamily::kMidStartsEmpty, label("s1=0", u, 1),
                                {{sys.var_s(u, 1), 1.0}},
                                'E',
                                0.0});
  }

  // (e) start-node mass: s_t = s_{t-1} - x_{t-1}
  for (size_t i = 0; i < sys.items_; ++i) {
    const size_t u = sys.start_node_[i];
    for (int t = 2; t <= B; ++t) {
      sys.constraints_.push_back({ConstraintFamily::kStartChain, label("chain", u, t),
                                  {{sys.var_s(u, t), 1.0},
                                   {sys.var_s(u, t - 1), -1.0},
                                   {sys.var_x(u, t - 1), 1.0}},
                                  'E',
                                  0.0});
    }
  }

  // (f) transient mass propagation
  for (size_t u = 0; u < sys.nodes_.size(); ++u) {
    const Node& node = sys.nodes_[u];
    if (node.is_start()) continue;
    for (int t = 2; t <= B; ++t) {
      LinearConstraint row{ConstraintFamily::kMidChain, label("mid", u, t), {}, 'E', 0.0};
      row.terms.push_back({sys.var_s(u, t), 1.0});
      if (node.pulls == 1) {
        const double p = sys.size_prob(node.item, node.size);
        row.terms.push_back({sys.var_x(sys.start_node_[node.item], t - 1), -p});
      } else {
        size_t parent = 0;
        bool found = false;
        for (size_t v : sys.item_nodes_[node.item]) {
          const Node& cand = sys.nodes_[v];
          if (!cand.is_start() && cand.pulls == node.pulls - 1 && cand.size == node.size) {
            parent = v;
            found = true;
            break;
          }
        }
        if (!found) throw std::logic_error("missing parent transient node");
        row.terms.push_back({sys.var_x(parent, t - 1), -1.0});
      }
      sys.constraints_.push_back(std::move(row));
    }
  }

  // (g) start-fit: only caps fitting the remaining horizon may start
  for (size_t i = 0; i < sys.items_; ++i) {
    const size_t u = sys.start_node_[i];
    for (int t = 1; t <= B; ++t) {
      if (!sys.start_fits(i, t)) {
        sys.constraints_.push_back({ConstraintFamily::kStartFit, label("fit", u, t),
                                    {{sys.var_x(u, t), 1.0}},
                                    'E',
                                    0.0});
      }
    }
  }

  return sys;
}

std::string ConstraintSystem::variable_name(size_t var) const {
  const bool is_s = var >= nodes_.size() * static_cast<size_t>(budget_);
  const size_t rest = is_s ? var - nodes_.size() * budget_ : var;
  const size_t node = rest / budget_;
  const int t = static_cast<int>(rest % budget_) + 1;
  std::ostringstream os;
  os << (is_s ? 's' : 'x') << '[' << item_ids_[nodes_[node].item];
  if (!nodes_[node].is_start()) os << ",k=" << nodes_[node].pulls << ",s=" << nodes_[node].size;
  os << ",t=" << t << ']';
  return os.str();
}

double FractionalSolution::mid_mass(const ConstraintSystem& sys, size_t item, int t) const {
  double total = 0.0;
  for (size_t u : sys.item_nodes(item)) {
    if (!sys.nodes()[u].is_start()) total += values[sys.var_x(u, t)];
  }
  return total;
}

FractionalSolution FractionalSolution::scaled(double factor) const {
  FractionalSolution out = *this;
  for (double& v : out.values) v *= factor;
  for (double& v : out.xbar) v *= factor;
  return out;
}

// Expands start-variable values into the full (x, s) vector via the
// equality families, clamping solver noise in [-1e-9, 0) to exact zero.
FractionalSolution assemble_solution(const ConstraintSystem& sys,
                                     const std::vector<std::vector<double>>& x_start,
                                     const std::vector<double>& s_start1) {
  const int B = sys.budget();
  FractionalSolution sol;
  sol.values.assign(sys.variable_count(), 0.0);
  sol.xbar.assign(sys.item_count(), 0.0);

  auto clamp = [](double v) { return (v < 0.0 && v >= -1e-9) ? 0.0 : v; };

  for (size_t i = 0; i < sys.item_count(); ++i) {
    const size_t u = sys.start_node(i);
    double cum = 0.0;
    for (int t = 1; t <= B; ++t) {
      const double xv = clamp(x_start[i][t]);
      sol.values[sys.var_x(u, t)] = xv;
      sol.values[sys.var_s(u, t)] = clamp(s_start1[i] - cum);
      cum += xv;
      sol.xbar[i] += xv;
    }
    sol.xbar[i] = clamp(sol.xbar[i]);
  }
  for (size_t u = 0; u < sys.node_count(); ++u) {
    const Node& node = sys.nodes()[u];
    if (node.is_start()) continue;
    const double p = sys.size_prob(node.item, node.size);
    for (int t = 2; t <= B; ++t) {
      const int t0 = t - node.pulls;  // slot the arm was started
      if (t0 >= 1) {
        const double mass = clamp(x_start[node.item][t0] * p);
        sol.values[sys.var_s(u, t)] = mass;
        sol.values[sys.var_x(u, t)] = mass;
      }
    }
  }
  return sol;
}

FractionalSolution solve_weighted(const ConstraintSystem& system,
                                  const std::vector<double>& item_weights) {
  if (item_weights.size() != system.item_count())
    throw std::invalid_argument("solve_weighted: weight count mismatch");
  for (double w : item_weights) {
    if (!std::isfinite(w) || w < 0.0)
      throw std::invalid_argument("solve_weighted: weights must be finite and >= 0");
  }

  const int B = system.budget();
  const size_t n_items = system.item_count();

  // Reduced variables: x_{Start(i),t} for fitting (i,t), then s_{Start(i),1};
  // the equality families pin every other variable to these.
  std::vector<std::pair<size_t, int>> xvars;
  std::vector<std::vector<int>> xvar_of(n_items, std::vector<int>(B + 1, -1));
  for (size_t i = 0; i < n_items; ++i) {
    for (int t = 1; t <= B; ++t) {
      if (system.start_fits(i, t)) {
        xvar_of[i][t] = static_cast<int>(xvars.size());
        xvars.push_back({i, t});
      }
    }
  }
  const size_t num_x = xvars.size();
  const size_t num_vars = num_x + n_items;

  std::vector<std::vector<double>> A;
  std::vector<double> b;

  // per-slot capacity: a start at t' < t still occupies slot t with
  // probability Pr[size >= t-t'+1]
  for (int t = 1; t <= B; ++t) {
    std::vector<double> row(num_vars, 0.0);
    for (size_t k = 0; k < num_x; ++k) {
      const auto& [i, ts] = xvars[k];
      if (ts == t)
        row[k] += 1.0;
      else if (ts < t)
        row[k] += system.size_tail(i, t - ts + 1);
    }
    A.push_back(std::move(row));
    b.push_back(1.0);
  }

  // cumulative starts bounded by the initial start mass
  for (size_t i = 0; i < n_items; ++i) {
    for (int t = 1; t <= B; ++t) {
      if (xvar_of[i][t] < 0) continue;
      std::vector<double> row(num_vars, 0.0);
      for (int ts = 1; ts <= t; ++ts) {
        if (xvar_of[i][ts] >= 0) row[xvar_of[i][ts]] = 1.0;
      }
      row[num_x + i] = -1.0;
      A.push_back(std::move(row));
      b.push_back(0.0);
    }
  }

  // partition budget
  for (const auto& members : system.partitions()) {
    std::vector<double> row(num_vars, 0.0);
    for (size_t i : members) row[num_x + i] = 1.0;
    A.push_back(std::move(row));
    b.push_back(1.0);
  }

  std::vector<double> c(num_vars, 0.0);
  for (size_t k = 0; k < num_x; ++k) c[k] = item_weights[xvars[k].first];

  const SimplexResult lp = simplex_maximize(A, b, c, 1e-10);

  std::vector<std::vector<double>> x_start(n_items, std::vector<double>(B + 1, 0.0));
  std::vector<double> s_start1(n_items, 0.0);
  for (size_t k = 0; k < num_x; ++k) x_start[xvars[k].first][xvars[k].second] = lp.values[k];
  for (size_t i = 0; i < n_items; ++i) s_start1[i] = lp.values[num_x + i];

  return assemble_solution(system, x_start, s_start1);
}

std::vector<FeasibilityViolation> check_feasibility(const FractionalSolution& solution,
                                                    const ConstraintSystem& system,
                                                    double tol) {
  std::vector<FeasibilityViolation> out;
  if (solution.values.size() != system.variable_count()) {
    out.push_back({"dimension mismatch", 0.0});
    return out;
  }
  for (size_t v = 0; v < solution.values.size(); ++v) {
    if (solution.values[v] < -tol)
      out.push_back({system.variable_name(v) + " >= 0", -solution.values[v]});
  }
  for (const auto& row : system.constraints()) {
    double lhs = 0.0;
    for (const auto& [v, coef] : row.terms) lhs += coef * solution.values[v];
    const double excess = (row.sense == 'L') ? lhs - row.rhs : std::abs(lhs - row.rhs);
    if (excess > tol) out.push_back({row.label, excess});
  }
  return out;
}

std::vector<double> inclusion_probability(const ConstraintSystem& system,
                                          const std::vector<double>& values) {
  std::vector<double> xbar(system.item_count(), 0.0);
  for (size_t i = 0; i < system.item_count(); ++i) {
    const size_t u = system.start_node(i);
    for (int t = 1; t <= system.budget(); ++t) xbar[i] += values[system.var_x(u, t)];
  }
  return xbar;
}

namespace {

std::string lp_safe_name(std::string name) {
  for (char& ch : name) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                    (ch >= '0' && ch <= '9') || ch == '_';
    if (!ok) ch = '_';
  }
  return name;
}

}  // namespace

void write_lp_format(const ConstraintSystem& system, const std::vector<double>& item_weights,
                     std::ostream& os) {
  os << "\\ stochastic knapsack relaxation\n";
  os << "Maximize\n obj:";
  for (size_t i = 0; i < system.item_count(); ++i) {
    if (item_weights[i] == 0.0) continue;
    const size_t u = system.start_node(i);
    for (int t = 1; t <= system.budget(); ++t) {
      os << " + " << item_weights[i] << ' ' << lp_safe_name(system.variable_name(system.var_x(u, t)));
    }
  }
  os << "\nSubject To\n";
  size_t idx = 0;
  for (const auto& row : system.constraints()) {
    os << ' ' << lp_safe_name("c" + std::to_string(idx++) + "_" + row.label) << ':';
    for (const auto& [v, coef] : row.terms) {
      os << (coef >= 0.0 ? " + " : " - ") << std::abs(coef) << ' '
         << lp_safe_name(system.variable_name(v));
    }
    os << (row.sense == 'L' ? " <= " : " = ") << row.rhs << '\n';
  }
  os << "Bounds\n";
  for (size_t v = 0; v < system.variable_count(); ++v)
    os << ' ' << lp_safe_name(system.variable_name(v)) << " >= 0\n";
  os << "End\n";
}

}  // namespace stoknap
