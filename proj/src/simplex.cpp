#include "kfair/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kfair/errors.hpp"

namespace kfair {

namespace {

constexpr double kPivotEps = 1e-9;

/// Full-tableau simplex state. Column labels: 0..n-1 original variables,
/// n..n+m-1 slacks, -1 the phase-one artificial.
class Tableau {
 public:
  Tableau(const LpProblem& lp)
      : m_(lp.rows.size()),
        n_(lp.objective.size()),
        cols_(n_ + 2),
        data_((m_ + 2) * (n_ + 2), 0.0),
        nonbasic_(n_ + 1),
        basic_(m_) {
    for (std::size_t i = 0; i < m_; ++i) {
      double* row = at(i);
      for (std::size_t j = 0; j < n_; ++j) row[j] = lp.rows[i][j];
      row[n_] = -1.0;       // artificial column
      row[n_ + 1] = lp.rhs[i];
      basic_[i] = static_cast<int>(n_ + i);
    }
    for (std::size_t j = 0; j < n_; ++j) {
      nonbasic_[j] = static_cast<int>(j);
      at(m_)[j] = -lp.objective[j];
    }
    nonbasic_[n_] = -1;
    at(m_ + 1)[n_] = 1.0;
  }

  LpResult run(std::uint64_t pivot_cap) {
    LpResult res;
    pivot_cap_ = pivot_cap;

    // Phase one only if some rhs is negative.
    std::size_t worst = 0;
    for (std::size_t i = 1; i < m_; ++i) {
      if (at(i)[n_ + 1] < at(worst)[n_ + 1]) worst = i;
    }
    if (m_ > 0 && at(worst)[n_ + 1] < -kPivotEps) {
      pivot(worst, n_);
      const int phase1 = optimize(m_ + 1, /*skip_label=*/-2);
      if (phase1 < 0) {
        res.status = LpStatus::Stalled;
        res.iterations = iterations_;
        return res;
      }
      if (at(m_ + 1)[n_ + 1] < -kPivotEps) {
        res.status = LpStatus::Infeasible;
        res.iterations = iterations_;
        return res;
      }
      // Drive the artificial out of the basis if it is still there.
      for (std::size_t i = 0; i < m_; ++i) {
        if (basic_[i] != -1) continue;
        std::size_t s = n_ + 1;
        double best = kPivotEps;
        for (std::size_t j = 0; j <= n_; ++j) {
          if (nonbasic_[j] == -1) continue;
          if (std::abs(at(i)[j]) > best) {
            best = std::abs(at(i)[j]);
            s = j;
          }
        }
        if (s <= n_) pivot(i, s);
        // else: redundant zero row; the artificial stays basic at level 0.
      }
    }

    const int phase2 = optimize(m_, /*skip_label=*/-1);
    if (phase2 < 0) {
      res.status = LpStatus::Stalled;
    } else if (phase2 == 0) {
      res.status = LpStatus::Unbounded;
    } else {
      res.status = LpStatus::Optimal;
      res.objective = at(m_)[n_ + 1];
      res.x.assign(n_, 0.0);
      for (std::size_t i = 0; i < m_; ++i) {
        if (basic_[i] >= 0 && basic_[i] < static_cast<int>(n_)) {
          res.x[basic_[i]] = at(i)[n_ + 1];
        }
      }
    }
    res.iterations = iterations_;
    return res;
  }

 private:
  double* at(std::size_t row) { return data_.data() + row * cols_; }

  void pivot(std::size_t r, std::size_t s) {
    double* a = at(r);
    const double inv = 1.0 / a[s];
    for (std::size_t i = 0; i < m_ + 2; ++i) {
      if (i == r) continue;
      double* b = at(i);
      if (std::abs(b[s]) <= kPivotEps) {
        // Elimination is a no-op, but the exchanged column still rescales.
        b[s] *= -inv;
        continue;
      }
      const double factor = b[s] * inv;
      for (std::size_t j = 0; j < n_ + 2; ++j) b[j] -= a[j] * factor;
      b[s] = -factor;  // entering variable's column after the exchange
    }
    for (std::size_t j = 0; j < n_ + 2; ++j) {
      if (j != s) a[j] *= inv;
    }
    a[s] = inv;
    std::swap(basic_[r], nonbasic_[s]);
    ++iterations_;
  }

  /// Runs pivots on the given objective row until optimal (1), unbounded (0)
  /// or the hard pivot cap (-1). `skip_label` excludes the artificial column
  /// during phase two.
  int optimize(std::size_t obj_row, int skip_label) {
    // Bland's rule (lowest eligible label) after the soft cap; provably
    // terminating, so the hard cap only trips on numerical breakdown.
    const std::uint64_t soft_cap = pivot_cap_ / 2;
    for (;;) {
      if (iterations_ >= pivot_cap_) return -1;
      const bool bland = iterations_ >= soft_cap;
      std::size_t s = n_ + 1;
      for (std::size_t j = 0; j <= n_; ++j) {
        if (nonbasic_[j] == skip_label) continue;
        if (at(obj_row)[j] >= -kPivotEps) continue;
        if (s == n_ + 1) {
          s = j;
        } else if (bland) {
          if (nonbasic_[j] < nonbasic_[s]) s = j;
        } else if (at(obj_row)[j] < at(obj_row)[s] ||
                   (at(obj_row)[j] == at(obj_row)[s] &&
                    nonbasic_[j] < nonbasic_[s])) {
          s = j;
        }
      }
      if (s == n_ + 1) return 1;  // no improving column: optimal

      std::size_t r = m_;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        const double coef = at(i)[s];
        if (coef <= kPivotEps) continue;
        const double ratio = at(i)[n_ + 1] / coef;
        if (ratio < best_ratio - 1e-12 ||
            (std::abs(ratio - best_ratio) <= 1e-12 && r < m_ &&
             basic_[i] < basic_[r])) {
          best_ratio = ratio;
          r = i;
        }
      }
      if (r == m_) return 0;  // column unbounded
      pivot(r, s);
    }
  }

  std::size_t m_;
  std::size_t n_;
  std::size_t cols_;
  std::vector<double> data_;
  std::vector<int> nonbasic_;  // labels per column, position n = artificial
  std::vector<int> basic_;     // labels per row
  std::uint64_t iterations_ = 0;
  std::uint64_t pivot_cap_ = 0;
};

}  // namespace

LpResult solve_lp(const LpProblem& lp) {
  const std::size_t m = lp.rows.size();
  const std::size_t n = lp.objective.size();
  if (lp.rhs.size() != m) throw InputError("solve_lp: rhs size != row count");
  for (const Vector& row : lp.rows) {
    if (row.size() != n) {
      throw InputError("solve_lp: constraint row width != variable count");
    }
  }
  Tableau tableau(lp);
  const std::uint64_t cap = 2000 + 100 * static_cast<std::uint64_t>(m + n);
  return tableau.run(cap);
}

}  // namespace kfair
