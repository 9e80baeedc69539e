#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "circpolicy/errors.hpp"

namespace circpolicy {

enum class Relation { LessEqual, Equal, GreaterEqual };

/// minimize c'x  subject to  A.row(i) x (rel_i) b_i,  lower <= x <= upper.
///
/// Lower bounds may be -inf and upper bounds +inf.
template <typename Scalar>
struct LinearProgram {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Vector objective;
  Matrix constraints;
  Vector rhs;
  std::vector<Relation> relations;
  Vector lower;
  Vector upper;

  /// Empty problem over n variables bounded to [0, +inf).
  static LinearProgram with_variables(Eigen::Index n) {
    LinearProgram lp;
    lp.objective = Vector::Zero(n);
    lp.constraints = Matrix::Zero(0, n);
    lp.rhs = Vector::Zero(0);
    lp.lower = Vector::Zero(n);
    lp.upper = Vector::Constant(n, std::numeric_limits<Scalar>::infinity());
    return lp;
  }

  template <typename Row>
  void add_constraint(const Eigen::MatrixBase<Row>& row, Relation rel, Scalar value) {
    const Eigen::Index m = constraints.rows();
    constraints.conservativeResize(m + 1, Eigen::NoChange);
    constraints.row(m) = row.transpose();
    rhs.conservativeResize(m + 1);
    rhs(m) = value;
    relations.push_back(rel);
  }

  Eigen::Index variable_count() const { return objective.size(); }
  Eigen::Index constraint_count() const { return constraints.rows(); }

  /// Throws PreconditionViolated on inconsistent dimensions or crossed bounds.
  void check() const {
    const Eigen::Index n = objective.size();
    if (constraints.cols() != n || lower.size() != n || upper.size() != n) {
      throw PreconditionViolated("linear program: variable dimensions disagree");
    }
    if (rhs.size() != constraints.rows() ||
        static_cast<Eigen::Index>(relations.size()) != constraints.rows()) {
      throw PreconditionViolated("linear program: constraint dimensions disagree");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (lower(j) > upper(j)) {
        throw PreconditionViolated("linear program: lower bound above upper bound for variable " +
                                   std::to_string(j));
      }
    }
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

template <typename Scalar>
struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x;
  Scalar objective = Scalar(0);
  int iterations = 0;
};

struct SimplexOptions {
  double tolerance = 1e-9;
  /// Consecutive degenerate pivots tolerated before switching to Bland's rule.
  int degenerate_switch = 50;
  int max_iterations = 100000;
};

namespace detail {

/// Dense two-phase tableau simplex over the standard form
/// min c'y, Ay = b, y >= 0, b >= 0.
template <typename Scalar>
class Tableau {
public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Tableau(Matrix table, std::vector<Eigen::Index> basis, Eigen::Index structural,
          const SimplexOptions& opt)
      : t_(std::move(table)), basis_(std::move(basis)), structural_(structural), opt_(opt) {}

  Matrix& table() { return t_; }
  std::vector<Eigen::Index>& basis() { return basis_; }
  int iterations() const { return iterations_; }

  /// Runs pivots on the objective stored in the last row. Columns at or beyond
  /// `allowed` never enter. Returns false when unbounded.
  bool optimize(Eigen::Index allowed) {
    const Eigen::Index m = t_.rows() - 1;
    const Eigen::Index rhs = t_.cols() - 1;
    const Scalar tol = static_cast<Scalar>(opt_.tolerance);
    int degenerate_run = 0;
    while (true) {
      const bool bland = degenerate_run >= opt_.degenerate_switch;
      Eigen::Index enter = -1;
      Scalar best = -tol;
      for (Eigen::Index j = 0; j < allowed; ++j) {
        if (t_(m, j) < best) {
          enter = j;
          if (bland) {
            break;
          }
          best = t_(m, j);
        }
      }
      if (enter < 0) {
        return true;
      }

      Eigen::Index leave = -1;
      Scalar ratio = std::numeric_limits<Scalar>::infinity();
      for (Eigen::Index i = 0; i < m; ++i) {
        if (t_(i, enter) > tol) {
          const Scalar r = t_(i, rhs) / t_(i, enter);
          if (r < ratio - tol || (std::abs(r - ratio) <= tol && leave >= 0 &&
                                  basis_[static_cast<std::size_t>(i)] <
                                      basis_[static_cast<std::size_t>(leave)])) {
            ratio = r;
            leave = i;
          }
        }
      }
      if (leave < 0) {
        return false;
      }
      degenerate_run = ratio <= tol ? degenerate_run + 1 : 0;
      pivot(leave, enter);
      if (++iterations_ > opt_.max_iterations) {
        throw NumericFailure("simplex: iteration budget exhausted (possible cycling)");
      }
    }
  }

  void pivot(Eigen::Index row, Eigen::Index col) {
    const Scalar p = t_(row, col);
    if (std::abs(p) < std::numeric_limits<Scalar>::epsilon()) {
      throw NumericFailure("simplex: pivot element vanished");
    }
    t_.row(row) /= p;
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i != row && t_(i, col) != Scalar(0)) {
        t_.row(i) -= t_(i, col) * t_.row(row);
      }
    }
    basis_[static_cast<std::size_t>(row)] = col;
  }

  /// Sets the objective row to costs over the current basis (reduced costs).
  void price(const Vector& costs) {
    const Eigen::Index m = t_.rows() - 1;
    t_.row(m).setZero();
    t_.row(m).head(costs.size()) = costs.transpose();
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index b = basis_[static_cast<std::size_t>(i)];
      const Scalar cb = b < costs.size() ? costs(b) : Scalar(0);
      if (cb != Scalar(0)) {
        t_.row(m) -= cb * t_.row(i);
      }
    }
  }

private:
  Matrix t_;
  std::vector<Eigen::Index> basis_;
  Eigen::Index structural_;
  SimplexOptions opt_;
  int iterations_ = 0;
};

}  // namespace detail

/// Two-phase primal simplex. Dantzig pricing, switching to Bland's rule after a
/// run of degenerate pivots. Infeasible and unbounded problems are reported in
/// the status; NumericFailure is thrown when the iteration budget runs out.
template <typename Scalar>
LpSolution<Scalar> simplex_solve(const LinearProgram<Scalar>& lp, const SimplexOptions& opt = {}) {
  using Vector = typename LinearProgram<Scalar>::Vector;
  using Matrix = typename LinearProgram<Scalar>::Matrix;
  lp.check();

  const Eigen::Index n = lp.variable_count();
  const Scalar inf = std::numeric_limits<Scalar>::infinity();

  // Map each original variable onto nonnegative columns:
  //   finite lower:           x = l + y
  //   -inf lower, finite upper: x = u - y
  //   free:                   x = y+ - y-
  struct Mapping {
    Eigen::Index col;
    Eigen::Index neg_col;  // free variables only
    Scalar offset;
    Scalar sign;
  };
  std::vector<Mapping> map(static_cast<std::size_t>(n));
  Eigen::Index cols = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    auto& mp = map[static_cast<std::size_t>(j)];
    if (std::isfinite(static_cast<double>(lp.lower(j)))) {
      mp = {cols++, -1, lp.lower(j), Scalar(1)};
    } else if (std::isfinite(static_cast<double>(lp.upper(j)))) {
      mp = {cols++, -1, lp.upper(j), Scalar(-1)};
    } else {
      mp = {cols, cols + 1, Scalar(0), Scalar(1)};
      cols += 2;
    }
  }
  const Eigen::Index ycols = cols;

  // Rows over y: original constraints, then finite upper bounds of shifted vars.
  std::vector<Vector> rows;
  std::vector<Scalar> rhs;
  std::vector<Relation> rel;
  auto push_row = [&](const Vector& coeffs, Relation r, Scalar b) {
    rows.push_back(coeffs);
    rhs.push_back(b);
    rel.push_back(r);
  };
  for (Eigen::Index i = 0; i < lp.constraint_count(); ++i) {
    Vector row = Vector::Zero(ycols);
    Scalar b = lp.rhs(i);
    for (Eigen::Index j = 0; j < n; ++j) {
      const Scalar a = lp.constraints(i, j);
      if (a == Scalar(0)) {
        continue;
      }
      const auto& mp = map[static_cast<std::size_t>(j)];
      row(mp.col) += a * mp.sign;
      if (mp.neg_col >= 0) {
        row(mp.neg_col) -= a;
      }
      b -= a * mp.offset;
    }
    push_row(row, lp.relations[static_cast<std::size_t>(i)], b);
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& mp = map[static_cast<std::size_t>(j)];
    if (mp.neg_col < 0 && mp.sign > 0 && lp.upper(j) < inf) {
      Vector row = Vector::Zero(ycols);
      row(mp.col) = Scalar(1);
      push_row(row, Relation::LessEqual, lp.upper(j) - lp.lower(j));
    }
  }

  const auto m = static_cast<Eigen::Index>(rows.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    auto k = static_cast<std::size_t>(i);
    if (rhs[k] < Scalar(0)) {
      rows[k] = -rows[k];
      rhs[k] = -rhs[k];
      if (rel[k] == Relation::LessEqual) {
        rel[k] = Relation::GreaterEqual;
      } else if (rel[k] == Relation::GreaterEqual) {
        rel[k] = Relation::LessEqual;
      }
    }
  }

  Eigen::Index slacks = 0;
  Eigen::Index artificials = 0;
  for (auto r : rel) {
    slacks += r == Relation::Equal ? 0 : 1;
    artificials += r == Relation::LessEqual ? 0 : 1;
  }
  const Eigen::Index structural = ycols + slacks;
  const Eigen::Index total = structural + artificials;

  Matrix table = Matrix::Zero(m + 1, total + 1);
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  Eigen::Index next_slack = ycols;
  Eigen::Index next_art = structural;
  for (Eigen::Index i = 0; i < m; ++i) {
    auto k = static_cast<std::size_t>(i);
    table.row(i).head(ycols) = rows[k].transpose();
    table(i, total) = rhs[k];
    switch (rel[k]) {
      case Relation::LessEqual:
        table(i, next_slack) = Scalar(1);
        basis[k] = next_slack++;
        break;
      case Relation::GreaterEqual:
        table(i, next_slack++) = Scalar(-1);
        table(i, next_art) = Scalar(1);
        basis[k] = next_art++;
        break;
      case Relation::Equal:
        table(i, next_art) = Scalar(1);
        basis[k] = next_art++;
        break;
    }
  }

  detail::Tableau<Scalar> tab(std::move(table), std::move(basis), structural, opt);
  const Scalar tol = static_cast<Scalar>(opt.tolerance);
  LpSolution<Scalar> out;

  if (artificials > 0) {
    Vector phase1 = Vector::Zero(total);
    phase1.tail(artificials).setOnes();
    tab.price(phase1);
    tab.optimize(total);
    const Scalar infeas = -tab.table()(m, total);
    Scalar scale = Scalar(1);
    for (auto b : rhs) {
      scale = std::max(scale, std::abs(b));
    }
    if (infeas > tol * scale * Scalar(10)) {
      out.status = LpStatus::Infeasible;
      out.iterations = tab.iterations();
      return out;
    }
    // Drive remaining artificials out of the basis; rows with no structural
    // pivot are redundant and left alone (their artificial stays at zero).
    for (Eigen::Index i = 0; i < m; ++i) {
      if (tab.basis()[static_cast<std::size_t>(i)] >= structural) {
        for (Eigen::Index j = 0; j < structural; ++j) {
          if (std::abs(tab.table()(i, j)) > tol) {
            tab.pivot(i, j);
            break;
          }
        }
      }
    }
  }

  Vector costs = Vector::Zero(total);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& mp = map[static_cast<std::size_t>(j)];
    costs(mp.col) += lp.objective(j) * mp.sign;
    if (mp.neg_col >= 0) {
      costs(mp.neg_col) -= lp.objective(j);
    }
  }
  tab.price(costs);
  const bool bounded = tab.optimize(structural);
  out.iterations = tab.iterations();
  if (!bounded) {
    out.status = LpStatus::Unbounded;
    return out;
  }

  Vector y = Vector::Zero(total);
  for (Eigen::Index i = 0; i < m; ++i) {
    y(tab.basis()[static_cast<std::size_t>(i)]) = tab.table()(i, total);
  }
  out.x.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& mp = map[static_cast<std::size_t>(j)];
    Scalar v = mp.offset + mp.sign * y(mp.col);
    if (mp.neg_col >= 0) {
      v -= y(mp.neg_col);
    }
    out.x(j) = v;
  }
  out.objective = lp.objective.dot(out.x);
  out.status = LpStatus::Optimal;
  return out;
}

}  // namespace circpolicy
