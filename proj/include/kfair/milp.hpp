#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kfair/bounds.hpp"
#include "kfair/model.hpp"
#include "kfair/schema.hpp"

namespace kfair {

/// Sparse linear expression: terms over variable ids plus a constant.
struct LinearExpr {
  std::vector<std::pair<int, double>> terms;  // canonical: sorted, unique ids
  double constant = 0.0;

  void add(int var, double coef) { terms.emplace_back(var, coef); }
  void canonicalize();
  double eval(const Vector& assignment) const;
};

enum class VarKind { Continuous, Binary };

struct MilpVar {
  VarKind kind = VarKind::Continuous;
  double lower = 0.0;
  double upper = 0.0;
  std::string name;
};

enum class Relation { LessEq, Equal, GreaterEq };

struct MilpConstraint {
  LinearExpr expr;
  Relation rel = Relation::LessEq;
  double rhs = 0.0;
};

/// Named handles into the paired-fairness encoding. -1 marks an absent
/// variable (e.g. a provably inactive neuron).
struct PairVarMap {
  std::array<std::vector<int>, 2> input;      // full encoded width per copy
  std::array<std::vector<int>, 2> selectors;  // K protected-combo binaries
  std::array<std::vector<std::vector<int>>, 2> x;  // [copy][layer][neuron]
  std::array<std::vector<std::vector<int>>, 2> s;
  std::array<std::vector<std::vector<int>>, 2> z;
  std::array<int, 2> fv{-1, -1};
  int objective_var = -1;
  int side_selector = -1;
};

struct MilpProblem {
  std::vector<MilpVar> vars;
  std::vector<MilpConstraint> constraints;
  LinearExpr objective;  // sense: maximize
  PairVarMap map;
  double epsilon = 0.0;  // score-level epsilon the encoding was built for

  int add_var(VarKind kind, double lower, double upper, std::string name);
  void add_constraint(LinearExpr expr, Relation rel, double rhs);
  std::size_t num_binaries() const;

  /// Max constraint violation of an assignment (0 when feasible).
  double max_violation(const Vector& assignment) const;
};

struct SolveStats {
  std::uint64_t nodes_explored = 0;
  std::uint64_t lp_iterations = 0;
  std::uint64_t unresolved_nodes = 0;
  double wall_time_seconds = 0.0;
};

struct SolveConfig {
  double timeout_seconds = 100.0;  // solver budget per query
  double tolerance = 1e-4;         // best-bound convergence gap
  std::optional<double> early_stop_threshold;
  int workers = 1;  // >1 is opt-in and nondeterministic in tie cases
};

enum class SolveStatus { Optimal, FeasibleIncumbent, Infeasible, TimedOut };

struct SolveResult {
  SolveStatus status = SolveStatus::Infeasible;
  std::optional<double> objective_value;  // incumbent value when one exists
  Vector assignment;                      // empty when no incumbent
  double best_bound = 0.0;
  SolveStats stats;
};

/// Branch-and-bound over the problem's binaries on top of the dense simplex.
/// Branching: most fractional binary, ties to the lowest id; node order:
/// best bound, ties to insertion order.
SolveResult solve(const MilpProblem& problem, const SolveConfig& config);

/// Two network copies share the non-protected inputs; protected blocks are
/// tied to per-copy combination selectors; ReLU neurons get big-M indicator
/// rows with constants from `bounds` (computed over `input_box`).
/// Objective: maximize |F1 - F2| on logits.
MilpProblem encode_pair_fairness(const Network& net, const FeatureSchema& schema,
                                 const LayerBounds& bounds, double epsilon,
                                 const Box& input_box);
MilpProblem encode_pair_fairness(const Network& net, const FeatureSchema& schema,
                                 const LayerBounds& bounds, double epsilon);

/// Fair verdicts compare the logit-level optimum against 4*epsilon: the
/// logistic map is 1/4-Lipschitz, so a logit gap <= 4*eps bounds the score
/// gap by eps. Unfair verdicts re-validate at score level instead.
double epsilon_to_logit(double epsilon);

enum class Verdict { Fair, Unfair, Unknown };

struct CounterexampleInfo {
  Instance instance;
  std::size_t combo_a = 0;
  std::size_t combo_b = 0;
  double score_a = 0.0;
  double score_b = 0.0;
};

struct Certificate {
  Verdict verdict = Verdict::Unknown;
  double epsilon = 0.0;
  double epsilon_logit = 0.0;
  std::optional<double> max_logit_gap;  // proven optimum, when solve finished
  std::optional<CounterexampleInfo> counterexample;
  std::string reason;  // populated for Unknown
  SolveResult solve;
};

struct CertifyConfig {
  SolveConfig solve;
  /// Stop as soon as an incumbent crosses the logit threshold; the optimality
  /// proof is only needed for Fair verdicts, which never trigger the stop.
  bool stop_at_first_violation = true;
  /// Radius (encoded units) of the non-protected box around a seed instance.
  double seed_radius = 0.2;
};

Certificate certify(const Network& net, const FeatureSchema& schema,
                    double epsilon, const CertifyConfig& config);

/// One validated 2-discriminant, optionally near a seed instance. Returns
/// nullopt when the solver finds nothing that survives forward-pass
/// re-validation within its budget.
std::optional<Instance> seed_counterexample(const Network& net,
                                            const FeatureSchema& schema,
                                            double epsilon,
                                            const std::optional<Instance>& near,
                                            const CertifyConfig& config);

/// Decode a solver assignment: shared inputs + copy-0 protected combination.
Instance decode_assignment(const MilpProblem& problem,
                           const FeatureSchema& schema,
                           const Vector& assignment);

/// CPLEX-style LP text dump for cross-checking with external solvers.
std::string lp_text(const MilpProblem& problem);

}  // namespace kfair
