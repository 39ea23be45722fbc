#include "kfair/milp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <mutex>
#include <queue>
#include <sstream>
#include <thread>

#include "kfair/cluster.hpp"
#include "kfair/errors.hpp"
#include "kfair/simplex.hpp"

namespace kfair {

namespace {
constexpr double kFeasTol = 1e-7;
constexpr double kIntegralityTol = 1e-6;
}  // namespace

void LinearExpr::canonicalize() {
  std::sort(terms.begin(), terms.end());
  std::vector<std::pair<int, double>> merged;
  for (const auto& [var, coef] : terms) {
    if (!merged.empty() && merged.back().first == var) {
      merged.back().second += coef;
    } else {
      merged.emplace_back(var, coef);
    }
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(),
                              [](const auto& t) { return t.second == 0.0; }),
               merged.end());
  terms = std::move(merged);
}

double LinearExpr::eval(const Vector& assignment) const {
  double acc = constant;
  for (const auto& [var, coef] : terms) acc += coef * assignment[var];
  return acc;
}

int MilpProblem::add_var(VarKind kind, double lower, double upper,
                         std::string name) {
  if (!(std::isfinite(lower) && std::isfinite(upper)) || lower > upper) {
    throw InputError("variable \"" + name + "\": invalid bounds [" +
                     std::to_string(lower) + ", " + std::to_string(upper) + "]");
  }
  vars.push_back({kind, lower, upper, std::move(name)});
  return static_cast<int>(vars.size()) - 1;
}

void MilpProblem::add_constraint(LinearExpr expr, Relation rel, double rhs) {
  expr.canonicalize();
  for (const auto& [var, coef] : expr.terms) {
    if (var < 0 || var >= static_cast<int>(vars.size())) {
      throw InputError("constraint references undeclared variable id " +
                       std::to_string(var));
    }
    if (!std::isfinite(coef)) throw InputError("non-finite coefficient");
  }
  constraints.push_back({std::move(expr), rel, rhs});
}

std::size_t MilpProblem::num_binaries() const {
  std::size_t n = 0;
  for (const auto& v : vars) n += v.kind == VarKind::Binary ? 1 : 0;
  return n;
}

double MilpProblem::max_violation(const Vector& assignment) const {
  double worst = 0.0;
  for (const auto& c : constraints) {
    const double lhs = c.expr.eval(assignment);
    double v = 0.0;
    switch (c.rel) {
      case Relation::LessEq: v = lhs - c.rhs; break;
      case Relation::GreaterEq: v = c.rhs - lhs; break;
      case Relation::Equal: v = std::abs(lhs - c.rhs); break;
    }
    worst = std::max(worst, v);
  }
  for (std::size_t i = 0; i < vars.size(); ++i) {
    worst = std::max(worst, vars[i].lower - assignment[i]);
    worst = std::max(worst, assignment[i] - vars[i].upper);
  }
  return worst;
}

double epsilon_to_logit(double epsilon) { return 4.0 * epsilon; }

// ---------------------------------------------------------------------------
// LP relaxation of the problem under overridden variable bounds.
// Variables are shifted to y = x - lb; fixed variables are substituted out.
// ---------------------------------------------------------------------------

namespace {

struct RelaxOutcome {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  Vector x;  // full assignment over problem variables
  std::uint64_t iterations = 0;
};

RelaxOutcome solve_relaxation(const MilpProblem& problem, const Vector& lb,
                              const Vector& ub) {
  const std::size_t nvars = problem.vars.size();
  std::vector<int> col(nvars, -1);
  std::vector<int> active;
  for (std::size_t i = 0; i < nvars; ++i) {
    if (lb[i] > ub[i] + kFeasTol) return {};  // empty domain
    if (ub[i] - lb[i] > 1e-12) {
      col[i] = static_cast<int>(active.size());
      active.push_back(static_cast<int>(i));
    }
  }
  const std::size_t n = active.size();

  LpProblem lp;
  auto emit_leq = [&](const LinearExpr& expr, double rhs) -> bool {
    Vector row(n, 0.0);
    double shift = expr.constant;
    bool empty = true;
    for (const auto& [var, coef] : expr.terms) {
      shift += coef * lb[var];
      if (col[var] >= 0) {
        row[col[var]] += coef;
        empty = false;
      }
    }
    const double b = rhs - shift;
    if (empty) return b >= -kFeasTol;  // constant row: check and drop
    lp.rows.push_back(std::move(row));
    lp.rhs.push_back(b);
    return true;
  };

  for (const auto& c : problem.constraints) {
    bool ok = true;
    if (c.rel == Relation::LessEq || c.rel == Relation::Equal) {
      ok = emit_leq(c.expr, c.rhs);
    }
    if (ok && (c.rel == Relation::GreaterEq || c.rel == Relation::Equal)) {
      LinearExpr neg;
      neg.constant = -c.expr.constant;
      for (const auto& [var, coef] : c.expr.terms) neg.add(var, -coef);
      ok = emit_leq(neg, -c.rhs);
    }
    if (!ok) return {};
  }
  // Upper bounds as explicit rows (the tableau keeps only y >= 0).
  for (std::size_t j = 0; j < n; ++j) {
    Vector row(n, 0.0);
    row[j] = 1.0;
    lp.rows.push_back(std::move(row));
    lp.rhs.push_back(ub[active[j]] - lb[active[j]]);
  }

  lp.objective.assign(n, 0.0);
  double obj_const = problem.objective.constant;
  for (const auto& [var, coef] : problem.objective.terms) {
    obj_const += coef * lb[var];
    if (col[var] >= 0) lp.objective[col[var]] += coef;
  }

  LpResult r = solve_lp(lp);
  RelaxOutcome out;
  out.iterations = r.iterations;
  out.status = r.status;
  if (r.status == LpStatus::Optimal) {
    out.objective = r.objective + obj_const;
    out.x = lb;
    for (std::size_t j = 0; j < n; ++j) out.x[active[j]] += r.x[j];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Branch and bound
// ---------------------------------------------------------------------------

struct BnbNode {
  double bound = 0.0;  // parent LP bound (upper bound for the subtree)
  std::uint64_t seq = 0;
  std::vector<std::int8_t> fix;  // per binary: -1 free, 0, 1
};

struct NodeOrder {
  bool operator()(const BnbNode& a, const BnbNode& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;  // max-heap on bound
    return a.seq > b.seq;                              // FIFO on ties
  }
};

class BnbSolver {
 public:
  BnbSolver(const MilpProblem& problem, const SolveConfig& config)
      : problem_(problem), config_(config) {
    for (std::size_t i = 0; i < problem.vars.size(); ++i) {
      if (problem.vars[i].kind == VarKind::Binary) {
        binaries_.push_back(static_cast<int>(i));
      }
    }
    base_lb_.resize(problem.vars.size());
    base_ub_.resize(problem.vars.size());
    for (std::size_t i = 0; i < problem.vars.size(); ++i) {
      base_lb_[i] = problem.vars[i].lower;
      base_ub_[i] = problem.vars[i].upper;
      if (problem.vars[i].kind == VarKind::Binary) {
        base_lb_[i] = std::max(base_lb_[i], 0.0);
        base_ub_[i] = std::min(base_ub_[i], 1.0);
      }
    }
  }

  SolveResult run() {
    const auto t0 = std::chrono::steady_clock::now();
    deadline_ = t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                         std::chrono::duration<double>(config_.timeout_seconds));

    BnbNode root;
    root.bound = std::numeric_limits<double>::infinity();
    root.fix.assign(binaries_.size(), -1);
    queue_.push(std::move(root));

    if (config_.workers <= 1) {
      work_loop();
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < config_.workers; ++w) {
        pool.emplace_back([this] { work_loop(); });
      }
      for (auto& t : pool) t.join();
    }

    SolveResult res;
    res.stats = stats_;
    res.stats.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (has_incumbent_) {
      res.objective_value = incumbent_value_;
      res.assignment = incumbent_;
    }
    double open_bound = -std::numeric_limits<double>::infinity();
    while (!queue_.empty()) {
      open_bound = std::max(open_bound, queue_.top().bound);
      queue_.pop();
    }
    if (stopped_early_) {
      res.status = SolveStatus::FeasibleIncumbent;
      res.best_bound = std::max(open_bound, incumbent_value_);
    } else if (timed_out_) {
      res.status = SolveStatus::TimedOut;
      res.best_bound =
          has_incumbent_ ? std::max(open_bound, incumbent_value_) : open_bound;
    } else if (has_incumbent_) {
      res.status = SolveStatus::Optimal;
      res.best_bound = incumbent_value_;
    } else {
      res.status = SolveStatus::Infeasible;
      res.best_bound = -std::numeric_limits<double>::infinity();
    }
    return res;
  }

 private:
  bool expired() const { return std::chrono::steady_clock::now() >= deadline_; }

  /// Shared-state worker loop. With one worker this runs inline and is fully
  /// deterministic; with several, the node queue and incumbent are the only
  /// shared state and tie-order is scheduling-dependent.
  void work_loop() {
    std::unique_lock<std::mutex> lock(mu_);
    for (;;) {
      cv_.wait(lock, [this] {
        return stop_ || !queue_.empty() || busy_workers_ == 0;
      });
      if (stop_) return;
      if (queue_.empty()) {
        if (busy_workers_ == 0) {
          cv_.notify_all();
          return;
        }
        continue;
      }
      BnbNode node = queue_.top();
      queue_.pop();
      ++busy_workers_;
      lock.unlock();

      const bool keep_going = process(node);

      lock.lock();
      --busy_workers_;
      if (!keep_going) stop_ = true;
      cv_.notify_all();
      if (stop_) return;
    }
  }

  /// Returns false when the whole search must stop (timeout / early stop).
  bool process(const BnbNode& node) {
    {
      std::lock_guard<std::mutex> g(inc_mu_);
      ++stats_.nodes_explored;
      if (expired()) {
        timed_out_ = true;
        return false;
      }
      if (has_incumbent_ && node.bound <= incumbent_value_ + config_.tolerance) {
        return true;  // parent bound already dominated
      }
    }

    Vector lb = base_lb_;
    Vector ub = base_ub_;
    for (std::size_t k = 0; k < binaries_.size(); ++k) {
      if (node.fix[k] >= 0) {
        lb[binaries_[k]] = node.fix[k];
        ub[binaries_[k]] = node.fix[k];
      }
    }
    RelaxOutcome rel = solve_relaxation(problem_, lb, ub);
    {
      std::lock_guard<std::mutex> g(inc_mu_);
      stats_.lp_iterations += rel.iterations;
      if (rel.status == LpStatus::Infeasible) return true;
      if (rel.status != LpStatus::Optimal) {
        // Singular/stalled basis: skip the node, its siblings carry on.
        ++stats_.unresolved_nodes;
        return true;
      }
      if (has_incumbent_ && rel.objective <= incumbent_value_ + config_.tolerance) {
        return true;
      }
    }

    // Fractionality over free binaries.
    int branch_var = -1;
    double branch_frac = -1.0;
    std::size_t branch_k = 0;
    for (std::size_t k = 0; k < binaries_.size(); ++k) {
      const double v = rel.x[binaries_[k]];
      const double frac = std::min(v - std::floor(v), std::ceil(v) - v);
      if (frac > kIntegralityTol && frac > branch_frac + 1e-15) {
        branch_frac = frac;
        branch_var = binaries_[k];
        branch_k = k;
      }
    }

    if (branch_var < 0) {
      Vector snapped = rel.x;
      for (int b : binaries_) snapped[b] = std::round(snapped[b]);
      return offer_incumbent(rel.objective, std::move(snapped));
    }

    // Rounding repair: fix every binary to its rounded LP value and re-solve;
    // an optimal result is a feasible integral incumbent.
    {
      Vector rlb = lb;
      Vector rub = ub;
      bool domain_ok = true;
      for (std::size_t k = 0; k < binaries_.size(); ++k) {
        const int var = binaries_[k];
        const double r = std::round(rel.x[var]);
        if (r < lb[var] - kFeasTol || r > ub[var] + kFeasTol) {
          domain_ok = false;
          break;
        }
        rlb[var] = r;
        rub[var] = r;
      }
      if (domain_ok) {
        RelaxOutcome rep = solve_relaxation(problem_, rlb, rub);
        std::lock_guard<std::mutex> g(inc_mu_);
        stats_.lp_iterations += rep.iterations;
        if (rep.status == LpStatus::Optimal) {
          Vector snapped = rep.x;
          for (int b : binaries_) snapped[b] = std::round(snapped[b]);
          const double val = rep.objective;
          if (!push_incumbent_locked(val, std::move(snapped))) return false;
        }
      }
    }

    BnbNode lo, hi;
    lo.fix = node.fix;
    hi.fix = node.fix;
    lo.fix[branch_k] = 0;
    hi.fix[branch_k] = 1;
    lo.bound = rel.objective;
    hi.bound = rel.objective;
    {
      std::lock_guard<std::mutex> g(mu_);
      lo.seq = next_seq_++;
      hi.seq = next_seq_++;
      queue_.push(std::move(lo));
      queue_.push(std::move(hi));
    }
    cv_.notify_all();
    return true;
  }

  bool offer_incumbent(double value, Vector assignment) {
    std::lock_guard<std::mutex> g(inc_mu_);
    return push_incumbent_locked(value, std::move(assignment));
  }

  /// Returns false when the search must stop (early-stop threshold crossed).
  bool push_incumbent_locked(double value, Vector assignment) {
    if (!has_incumbent_ || value > incumbent_value_) {
      has_incumbent_ = true;
      incumbent_value_ = value;
      incumbent_ = std::move(assignment);
      if (config_.early_stop_threshold &&
          incumbent_value_ > *config_.early_stop_threshold) {
        stopped_early_ = true;
        return false;
      }
    }
    return true;
  }

  const MilpProblem& problem_;
  const SolveConfig& config_;
  std::vector<int> binaries_;
  Vector base_lb_, base_ub_;

  std::mutex mu_;  // queue + worker accounting
  std::condition_variable cv_;
  std::priority_queue<BnbNode, std::vector<BnbNode>, NodeOrder> queue_;
  int busy_workers_ = 0;
  bool stop_ = false;
  std::uint64_t next_seq_ = 1;

  std::mutex inc_mu_;  // incumbent + stats
  bool has_incumbent_ = false;
  double incumbent_value_ = -std::numeric_limits<double>::infinity();
  Vector incumbent_;
  bool stopped_early_ = false;
  bool timed_out_ = false;
  SolveStats stats_;

  std::chrono::steady_clock::time_point deadline_;
};

}  // namespace

SolveResult solve(const MilpProblem& problem, const SolveConfig& config) {
  BnbSolver solver(problem, config);
  return solver.run();
}

// ---------------------------------------------------------------------------
// Paired-fairness encoding
// ---------------------------------------------------------------------------

MilpProblem encode_pair_fairness(const Network& net, const FeatureSchema& schema,
                                 const LayerBounds& bounds, double epsilon,
                                 const Box& input_box) {
  if (net.output_width != 1 && net.output_width != 2) {
    throw InputError("pair-fairness encoding supports 1 or 2 outputs, got " +
                     std::to_string(net.output_width));
  }
  if (net.input_width != schema.encoded_width()) {
    throw InputError("network input width != schema encoded width");
  }
  if (input_box.size() != net.input_width ||
      bounds.pre.size() != net.layers.size()) {
    throw InputError("bounds/input box do not match the network");
  }

  MilpProblem p;
  p.epsilon = epsilon;
  const std::size_t width = schema.encoded_width();
  const std::size_t K = schema.K();
  const double slack = kBigMSlack;

  p.map.input[0].assign(width, -1);
  p.map.input[1].assign(width, -1);

  // Shared non-protected inputs. Categorical one-hot coordinates are binary
  // with a sum-to-one row, which keeps the encoding exact over the discrete
  // feature space; numerics stay continuous.
  for (std::size_t fi : schema.non_protected_indices()) {
    const FeatureSpec& f = schema.feature(fi);
    const std::size_t off = schema.offset(fi);
    if (f.numeric()) {
      const int id = p.add_var(VarKind::Continuous, input_box.lower[off],
                               input_box.upper[off], "in_" + f.name);
      p.map.input[0][off] = id;
      p.map.input[1][off] = id;
    } else {
      LinearExpr sum;
      for (std::size_t c = 0; c < f.cat().labels.size(); ++c) {
        const int id =
            p.add_var(VarKind::Binary, input_box.lower[off + c],
                      input_box.upper[off + c], "in_" + f.name + "_" +
                          std::to_string(c));
        p.map.input[0][off + c] = id;
        p.map.input[1][off + c] = id;
        sum.add(id, 1.0);
      }
      p.add_constraint(std::move(sum), Relation::Equal, 1.0);
    }
  }

  // Per-copy protected inputs: K selector binaries summing to one, with
  // every protected coordinate pinned to the selected combination's value.
  for (int v = 0; v < 2; ++v) {
    const std::string tag = std::to_string(v + 1);
    for (std::size_t fi : schema.protected_indices()) {
      const FeatureSpec& f = schema.feature(fi);
      const std::size_t off = schema.offset(fi);
      for (std::size_t c = 0; c < f.encoded_width(); ++c) {
        p.map.input[v][off + c] = p.add_var(
            VarKind::Continuous, 0.0, 1.0,
            "p" + tag + "_" + f.name + (f.numeric() ? "" : "_" + std::to_string(c)));
      }
    }
    LinearExpr sum;
    for (std::size_t c = 0; c < K; ++c) {
      const int id = p.add_var(VarKind::Binary, 0.0, 1.0,
                               "sel" + tag + "_" + std::to_string(c));
      p.map.selectors[v].push_back(id);
      sum.add(id, 1.0);
    }
    p.add_constraint(std::move(sum), Relation::Equal, 1.0);

    for (std::size_t fi : schema.protected_indices()) {
      const FeatureSpec& f = schema.feature(fi);
      const std::size_t off = schema.offset(fi);
      for (std::size_t c = 0; c < f.encoded_width(); ++c) {
        LinearExpr tie;
        tie.add(p.map.input[v][off + c], 1.0);
        for (std::size_t k = 0; k < K; ++k) {
          for (const auto& [coord, value] : schema.protected_combos()[k].encoded) {
            if (coord == off + c && value != 0.0) {
              tie.add(p.map.selectors[v][k], -value);
            }
          }
        }
        p.add_constraint(std::move(tie), Relation::Equal, 0.0);
      }
    }
  }

  // Hidden layers per copy: equality rows for pre-activations, big-M
  // indicator rows for unstable ReLUs, stability fixing from the bounds.
  const std::size_t n_layers = net.layers.size();
  for (int v = 0; v < 2; ++v) {
    const std::string tag = std::to_string(v + 1);
    std::vector<int> prev(width);
    for (std::size_t c = 0; c < width; ++c) prev[c] = p.map.input[v][c];

    p.map.x[v].resize(n_layers);
    p.map.s[v].resize(n_layers);
    p.map.z[v].resize(n_layers);

    for (std::size_t li = 0; li + 1 < n_layers; ++li) {
      const DenseLayer& layer = net.layers[li];
      const std::size_t out_w = layer.output_width();
      p.map.x[v][li].assign(out_w, -1);
      p.map.s[v][li].assign(out_w, -1);
      p.map.z[v][li].assign(out_w, -1);
      std::vector<int> cur(out_w, -1);
      for (std::size_t j = 0; j < out_w; ++j) {
        const double lo = bounds.pre[li].lower[j];
        const double hi = bounds.pre[li].upper[j];
        const std::string nm = tag + "_" + std::to_string(li) + "_" +
                               std::to_string(j);
        LinearExpr pre;
        pre.constant = layer.bias[j];
        for (std::size_t c = 0; c < layer.weights.cols; ++c) {
          const double w = layer.weights.at(j, c);
          if (w != 0.0 && prev[c] >= 0) pre.add(prev[c], w);
        }
        if (hi <= 0.0) {
          continue;  // provably inactive: output is identically zero
        }
        if (lo >= 0.0) {
          // Provably active: the ReLU is the identity branch.
          const int x = p.add_var(VarKind::Continuous, std::max(0.0, lo - slack),
                                  hi + slack, "x" + nm);
          p.map.x[v][li][j] = x;
          cur[j] = x;
          LinearExpr eq = pre;  // x = pre
          eq.add(x, -1.0);
          p.add_constraint(std::move(eq), Relation::Equal, 0.0);
          continue;
        }
        const double ux = hi + slack;
        const double us = -lo + slack;
        const int x = p.add_var(VarKind::Continuous, 0.0, ux, "x" + nm);
        const int sneg = p.add_var(VarKind::Continuous, 0.0, us, "s" + nm);
        const int z = p.add_var(VarKind::Binary, 0.0, 1.0, "z" + nm);
        p.map.x[v][li][j] = x;
        p.map.s[v][li][j] = sneg;
        p.map.z[v][li][j] = z;
        cur[j] = x;
        LinearExpr eq = pre;
        eq.add(x, -1.0);
        eq.add(sneg, 1.0);
        p.add_constraint(std::move(eq), Relation::Equal, 0.0);  // pre = x - s
        LinearExpr xrow;  // x <= ux * (1 - z)
        xrow.add(x, 1.0);
        xrow.add(z, ux);
        p.add_constraint(std::move(xrow), Relation::LessEq, ux);
        LinearExpr srow;  // s <= us * z
        srow.add(sneg, 1.0);
        srow.add(z, -us);
        p.add_constraint(std::move(srow), Relation::LessEq, 0.0);
      }
      prev = std::move(cur);
    }

    // Output layer: F_v as the favorable logit (1 output) or the favorable
    // minus the other logit (2 outputs); a monotone proxy for the score.
    const DenseLayer& out = net.layers.back();
    const std::size_t fav = net.favorable_output_index;
    const Box& obox = bounds.pre.back();
    double flo, fhi;
    LinearExpr fexpr;
    if (net.output_width == 1) {
      flo = obox.lower[0];
      fhi = obox.upper[0];
      fexpr.constant = out.bias[0];
      for (std::size_t c = 0; c < out.weights.cols; ++c) {
        const double w = out.weights.at(0, c);
        if (w != 0.0 && prev[c] >= 0) fexpr.add(prev[c], w);
      }
    } else {
      const std::size_t oth = 1 - fav;
      flo = obox.lower[fav] - obox.upper[oth];
      fhi = obox.upper[fav] - obox.lower[oth];
      fexpr.constant = out.bias[fav] - out.bias[oth];
      for (std::size_t c = 0; c < out.weights.cols; ++c) {
        const double w = out.weights.at(fav, c) - out.weights.at(oth, c);
        if (w != 0.0 && prev[c] >= 0) fexpr.add(prev[c], w);
      }
    }
    const int fv = p.add_var(VarKind::Continuous, flo - slack, fhi + slack,
                             "F" + tag);
    p.map.fv[v] = fv;
    fexpr.add(fv, -1.0);
    p.add_constraint(std::move(fexpr), Relation::Equal, 0.0);
  }

  // Objective |F1 - F2| via the two-sided epigraph plus a side selector.
  const double span =
      (p.vars[p.map.fv[0]].upper - p.vars[p.map.fv[0]].lower) + slack;
  const double big = 2.0 * span + 1.0;
  const int fobj =
      p.add_var(VarKind::Continuous, 0.0, span + slack, "F_abs");
  const int side = p.add_var(VarKind::Binary, 0.0, 1.0, "side");
  p.map.objective_var = fobj;
  p.map.side_selector = side;
  const int f1 = p.map.fv[0];
  const int f2 = p.map.fv[1];
  {
    LinearExpr e;  // F >= F1 - F2
    e.add(fobj, 1.0);
    e.add(f1, -1.0);
    e.add(f2, 1.0);
    p.add_constraint(std::move(e), Relation::GreaterEq, 0.0);
  }
  {
    LinearExpr e;  // F >= F2 - F1
    e.add(fobj, 1.0);
    e.add(f2, -1.0);
    e.add(f1, 1.0);
    p.add_constraint(std::move(e), Relation::GreaterEq, 0.0);
  }
  {
    LinearExpr e;  // side = 1  =>  F <= F1 - F2
    e.add(fobj, 1.0);
    e.add(f1, -1.0);
    e.add(f2, 1.0);
    e.add(side, big);
    p.add_constraint(std::move(e), Relation::LessEq, big);
  }
  {
    LinearExpr e;  // side = 0  =>  F <= F2 - F1
    e.add(fobj, 1.0);
    e.add(f2, -1.0);
    e.add(f1, 1.0);
    e.add(side, -big);
    p.add_constraint(std::move(e), Relation::LessEq, 0.0);
  }
  p.objective.add(fobj, 1.0);
  p.objective.canonicalize();
  return p;
}

MilpProblem encode_pair_fairness(const Network& net, const FeatureSchema& schema,
                                 const LayerBounds& bounds, double epsilon) {
  return encode_pair_fairness(net, schema, bounds, epsilon,
                              unit_box(schema.encoded_width()));
}

Instance decode_assignment(const MilpProblem& problem,
                           const FeatureSchema& schema,
                           const Vector& assignment) {
  Vector encoded(schema.encoded_width(), 0.0);
  for (std::size_t c = 0; c < encoded.size(); ++c) {
    encoded[c] = assignment[problem.map.input[0][c]];
  }
  Instance inst = schema.decode(encoded);
  // Protected values come from copy 0's selector, not the raw coordinates.
  std::size_t combo = 0;
  double best = -1.0;
  for (std::size_t k = 0; k < problem.map.selectors[0].size(); ++k) {
    const double v = assignment[problem.map.selectors[0][k]];
    if (v > best) {
      best = v;
      combo = k;
    }
  }
  const auto& prot = schema.protected_indices();
  for (std::size_t d = 0; d < prot.size(); ++d) {
    inst.values[prot[d]] = schema.protected_combos()[combo].values[d];
  }
  return inst;
}

namespace {

std::size_t selected_combo(const MilpProblem& problem, const Vector& assignment,
                           int copy) {
  std::size_t combo = 0;
  double best = -1.0;
  for (std::size_t k = 0; k < problem.map.selectors[copy].size(); ++k) {
    const double v = assignment[problem.map.selectors[copy][k]];
    if (v > best) {
      best = v;
      combo = k;
    }
  }
  return combo;
}

/// Forward-pass re-validation of a solver incumbent: decode, enumerate all
/// counterfactual scores, report the widest pair. Nothing from the solver's
/// arithmetic is trusted here.
std::optional<CounterexampleInfo> validate_incumbent(
    const MilpProblem& problem, const Network& net, const FeatureSchema& schema,
    double epsilon, const Vector& assignment) {
  Instance inst = decode_assignment(problem, schema, assignment);
  Vector encoded = schema.encode(inst);
  std::vector<double> scores(schema.K());
  for (std::size_t k = 0; k < schema.K(); ++k) {
    schema.apply_combo(encoded, k);
    scores[k] = score(net, encoded);
  }
  // Prefer the solver's own combo pair if it already violates; otherwise
  // take the widest pair.
  const std::size_t sel_a = selected_combo(problem, assignment, 0);
  const std::size_t sel_b = selected_combo(problem, assignment, 1);
  std::size_t best_a = sel_a, best_b = sel_b;
  double best_gap = std::abs(scores[sel_a] - scores[sel_b]);
  for (std::size_t a = 0; a < scores.size(); ++a) {
    for (std::size_t b = a + 1; b < scores.size(); ++b) {
      const double gap = std::abs(scores[a] - scores[b]);
      if (gap > best_gap) {
        best_gap = gap;
        best_a = a;
        best_b = b;
      }
    }
  }
  if (!(best_gap > epsilon)) return std::nullopt;
  CounterexampleInfo info;
  const auto& prot = schema.protected_indices();
  for (std::size_t d = 0; d < prot.size(); ++d) {
    inst.values[prot[d]] = schema.protected_combos()[best_a].values[d];
  }
  info.instance = std::move(inst);
  info.combo_a = best_a;
  info.combo_b = best_b;
  info.score_a = scores[best_a];
  info.score_b = scores[best_b];
  return info;
}

}  // namespace

Certificate certify(const Network& net, const FeatureSchema& schema,
                    double epsilon, const CertifyConfig& config) {
  Certificate cert;
  cert.epsilon = epsilon;
  cert.epsilon_logit = epsilon_to_logit(epsilon);

  const Box box = unit_box(schema.encoded_width());
  const LayerBounds lb = propagate(net, box);
  const MilpProblem problem = encode_pair_fairness(net, schema, lb, epsilon, box);

  SolveConfig scfg = config.solve;
  if (config.stop_at_first_violation && !scfg.early_stop_threshold) {
    scfg.early_stop_threshold = cert.epsilon_logit;
  }
  cert.solve = solve(problem, scfg);

  if (cert.solve.status == SolveStatus::Optimal &&
      *cert.solve.objective_value <= cert.epsilon_logit + 1e-9) {
    cert.verdict = Verdict::Fair;
    cert.max_logit_gap = *cert.solve.objective_value;
    return cert;
  }
  if (cert.solve.objective_value.has_value()) {
    auto cex = validate_incumbent(problem, net, schema, epsilon,
                                  cert.solve.assignment);
    if (cex) {
      cert.verdict = Verdict::Unfair;
      cert.counterexample = std::move(cex);
      if (cert.solve.status == SolveStatus::Optimal) {
        cert.max_logit_gap = *cert.solve.objective_value;
      }
      return cert;
    }
  }
  cert.verdict = Verdict::Unknown;
  switch (cert.solve.status) {
    case SolveStatus::TimedOut:
      cert.reason = "solver timed out without a validating incumbent";
      break;
    case SolveStatus::Infeasible:
      cert.reason = "MILP infeasible (encoding inconsistency)";
      break;
    default:
      cert.reason =
          "logit-level optimum exceeds the threshold but no incumbent "
          "validates at score level";
      break;
  }
  return cert;
}

std::optional<Instance> seed_counterexample(const Network& net,
                                            const FeatureSchema& schema,
                                            double epsilon,
                                            const std::optional<Instance>& near,
                                            const CertifyConfig& config) {
  Box box = unit_box(schema.encoded_width());
  if (near) {
    const Vector e = schema.encode(*near);
    for (std::size_t fi : schema.non_protected_indices()) {
      const FeatureSpec& f = schema.feature(fi);
      const std::size_t off = schema.offset(fi);
      for (std::size_t c = 0; c < f.encoded_width(); ++c) {
        box.lower[off + c] = std::max(0.0, e[off + c] - config.seed_radius);
        box.upper[off + c] = std::min(1.0, e[off + c] + config.seed_radius);
      }
    }
  }
  const LayerBounds lb = propagate(net, box);
  const MilpProblem problem = encode_pair_fairness(net, schema, lb, epsilon, box);

  SolveConfig scfg = config.solve;
  scfg.early_stop_threshold = epsilon_to_logit(epsilon);
  const SolveResult res = solve(problem, scfg);
  if (!res.objective_value.has_value()) return std::nullopt;
  auto cex = validate_incumbent(problem, net, schema, epsilon, res.assignment);
  if (!cex) return std::nullopt;
  return std::move(cex->instance);
}

std::string lp_text(const MilpProblem& problem) {
  std::ostringstream out;
  out.precision(17);
  auto write_expr = [&](const LinearExpr& e) {
    for (const auto& [var, coef] : e.terms) {
      out << (coef < 0 ? " - " : " + ");
      out << std::abs(coef) << " " << problem.vars[var].name;
    }
  };
  out << "Maximize\n obj:";
  write_expr(problem.objective);
  out << "\nSubject To\n";
  for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
    const auto& c = problem.constraints[i];
    out << " c" << i << ":";
    write_expr(c.expr);
    switch (c.rel) {
      case Relation::LessEq: out << " <= "; break;
      case Relation::Equal: out << " = "; break;
      case Relation::GreaterEq: out << " >= "; break;
    }
    out << c.rhs - c.expr.constant << "\n";
  }
  out << "Bounds\n";
  for (const auto& v : problem.vars) {
    out << " " << v.lower << " <= " << v.name << " <= " << v.upper << "\n";
  }
  bool any_bin = false;
  for (const auto& v : problem.vars) any_bin |= v.kind == VarKind::Binary;
  if (any_bin) {
    out << "Binaries\n";
    for (const auto& v : problem.vars) {
      if (v.kind == VarKind::Binary) out << " " << v.name;
    }
    out << "\n";
  }
  out << "End\n";
  return out.str();
}

}  // namespace kfair
