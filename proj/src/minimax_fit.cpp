#include "misscov/minimax_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace misscov {

double minimax_objective(const MinimaxProblem& p, const std::vector<double>& theta) {
  double worst = 0.0;
  for (std::size_t v = 0; v < p.nrows; ++v) {
    const double* a = p.features.data() + v * p.nvar;
    double dot = 0.0;
    for (std::size_t j = 0; j < p.nvar; ++j) dot += a[j] * theta[j];
    worst = std::max(worst, std::abs(dot - p.targets[v]));
  }
  return worst;
}

namespace {

// Simplex over the dual program
//   max sum_v b_v (l_v - u_v)
//   s.t. sum_v a_v (u_v - l_v) [- s] = 0   (nvar rows; slack s only when
//        sum_v (u_v + l_v) = 1              theta >= 0 is requested)
//   u, l, s >= 0.
// Column ids: [0,V) = u_v, [V,2V) = l_v, [2V,2V+nslack) = s_j, then one
// artificial per row. The optimal simplex prices y recover the primal:
// theta_j = -y_j, objective = y_nvar.
class DualSimplex {
 public:
  explicit DualSimplex(const MinimaxProblem& p)
      : p_(p),
        m_(p.nvar + 1),
        nslack_(p.nonneg ? p.nvar : 0),
        art_base_(2 * p.nrows + nslack_),
        ncols_(art_base_ + m_) {
    basis_.resize(m_);
    binv_.assign(m_ * m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      basis_[i] = art_base_ + i;
      binv_[i * m_ + i] = 1.0;
    }
    cost_scale_ = 1.0;
    for (double b : p_.targets) cost_scale_ = std::max(cost_scale_, std::abs(b));
  }

  MinimaxSolution solve() {
    run_phase(/*phase1=*/true);
    double infeas = 0.0;
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] >= art_base_) infeas += std::abs(basic_value(i));
    if (infeas > 1e-7) throw std::runtime_error("minimax fit: simplex lost feasibility");
    expel_artificials();
    run_phase(/*phase1=*/false);

    std::vector<double> y = prices(/*phase1=*/false);
    MinimaxSolution sol;
    sol.theta.assign(p_.nvar, 0.0);
    for (std::size_t j = 0; j < p_.nvar; ++j) {
      double t = -y[j];
      if (p_.nonneg && t < 0.0) t = 0.0;  // roundoff guard; dual feasibility gives t >= 0
      sol.theta[j] = t;
    }
    sol.objective = minimax_objective(p_, sol.theta);
    sol.iterations = pivots_;
    return sol;
  }

 private:
  double basic_value(std::size_t i) const { return binv_[i * m_ + (m_ - 1)]; }

  double column_cost(std::size_t col, bool phase1) const {
    if (phase1) return col >= art_base_ ? -1.0 : 0.0;
    if (col < p_.nrows) return -p_.targets[col];
    if (col < 2 * p_.nrows) return p_.targets[col - p_.nrows];
    return 0.0;
  }

  // Entries of structural column `col` into `out` (size m_).
  void column_entries(std::size_t col, std::vector<double>& out) const {
    std::fill(out.begin(), out.end(), 0.0);
    if (col < 2 * p_.nrows) {
      const bool upper = col < p_.nrows;
      const std::size_t v = upper ? col : col - p_.nrows;
      const double sign = upper ? 1.0 : -1.0;
      const double* a = p_.features.data() + v * p_.nvar;
      for (std::size_t j = 0; j < p_.nvar; ++j) out[j] = sign * a[j];
      out[m_ - 1] = 1.0;
    } else if (col < art_base_) {
      out[col - 2 * p_.nrows] = -1.0;
    } else {
      out[col - art_base_] = 1.0;
    }
  }

  std::vector<double> prices(bool phase1) const {
    std::vector<double> y(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const double c = column_cost(basis_[i], phase1);
      if (c == 0.0) continue;
      const double* row = binv_.data() + i * m_;
      for (std::size_t j = 0; j < m_; ++j) y[j] += c * row[j];
    }
    return y;
  }

  // Reduced costs of u_v/l_v need one feature pass; slacks are direct.
  std::size_t pick_entering(const std::vector<double>& y, bool phase1, bool bland) const {
    const double tol = 1e-9 * (phase1 ? 1.0 : cost_scale_);
    std::size_t best_col = ncols_;
    double best_gain = tol;
    auto consider = [&](std::size_t col, double gain) {
      if (gain <= (bland ? tol : best_gain)) return;
      if (bland) {
        if (best_col == ncols_ || col < best_col) {
          best_col = col;
          best_gain = gain;
        }
        return;
      }
      best_col = col;
      best_gain = gain;
    };
    for (std::size_t v = 0; v < p_.nrows; ++v) {
      const double* a = p_.features.data() + v * p_.nvar;
      double t = 0.0;
      for (std::size_t j = 0; j < p_.nvar; ++j) t += a[j] * y[j];
      const double base = column_cost(v, phase1);
      const double base_l = column_cost(v + p_.nrows, phase1);
      consider(v, base - (t + y[m_ - 1]));
      consider(v + p_.nrows, base_l - (-t + y[m_ - 1]));
    }
    for (std::size_t s = 0; s < nslack_; ++s)
      consider(2 * p_.nrows + s, column_cost(2 * p_.nrows + s, phase1) + y[s]);
    return best_col;  // artificials never re-enter
  }

  // Returns false when no admissible pivot row exists.
  bool pivot_on_column(std::size_t entering) {
    std::vector<double> col(m_), d(m_);
    column_entries(entering, col);
    for (std::size_t i = 0; i < m_; ++i) {
      double s = 0.0;
      const double* row = binv_.data() + i * m_;
      for (std::size_t k = 0; k < m_; ++k) s += row[k] * col[k];
      d[i] = s;
    }
    constexpr double kPivotTol = 1e-10;
    std::size_t leave = m_;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m_; ++i) {
      if (d[i] <= kPivotTol) continue;
      const double ratio = std::max(basic_value(i), 0.0) / d[i];
      if (ratio < best_ratio - 1e-15 ||
          (ratio <= best_ratio + 1e-15 && (leave == m_ || basis_[i] < basis_[leave]))) {
        best_ratio = ratio;
        leave = i;
      }
    }
    if (leave == m_) return false;
    apply_pivot(entering, leave, d);
    return true;
  }

  void apply_pivot(std::size_t entering, std::size_t leave, const std::vector<double>& d) {
    double* prow = binv_.data() + leave * m_;
    const double inv = 1.0 / d[leave];
    for (std::size_t k = 0; k < m_; ++k) prow[k] *= inv;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == leave || d[i] == 0.0) continue;
      double* row = binv_.data() + i * m_;
      const double f = d[i];
      for (std::size_t k = 0; k < m_; ++k) row[k] -= f * prow[k];
    }
    basis_[leave] = entering;
    ++pivots_;
    if (pivots_ % 64 == 0) refactorize();
  }

  void refactorize() {
    // rebuild binv_ from the basis columns with partial-pivot Gauss-Jordan
    std::vector<double> work(m_ * 2 * m_, 0.0), col(m_);
    for (std::size_t j = 0; j < m_; ++j) {
      column_entries(basis_[j], col);
      for (std::size_t i = 0; i < m_; ++i) work[i * 2 * m_ + j] = col[i];
    }
    for (std::size_t i = 0; i < m_; ++i) work[i * 2 * m_ + m_ + i] = 1.0;
    for (std::size_t c = 0; c < m_; ++c) {
      std::size_t piv = c;
      for (std::size_t i = c + 1; i < m_; ++i)
        if (std::abs(work[i * 2 * m_ + c]) > std::abs(work[piv * 2 * m_ + c])) piv = i;
      if (std::abs(work[piv * 2 * m_ + c]) < 1e-13)
        throw std::runtime_error("minimax fit: singular basis during refactorization");
      if (piv != c)
        for (std::size_t k = 0; k < 2 * m_; ++k)
          std::swap(work[piv * 2 * m_ + k], work[c * 2 * m_ + k]);
      const double inv = 1.0 / work[c * 2 * m_ + c];
      for (std::size_t k = 0; k < 2 * m_; ++k) work[c * 2 * m_ + k] *= inv;
      for (std::size_t i = 0; i < m_; ++i) {
        if (i == c) continue;
        const double f = work[i * 2 * m_ + c];
        if (f == 0.0) continue;
        for (std::size_t k = 0; k < 2 * m_; ++k) work[i * 2 * m_ + k] -= f * work[c * 2 * m_ + k];
      }
    }
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < m_; ++j) binv_[i * m_ + j] = work[i * 2 * m_ + m_ + j];
  }

  void run_phase(bool phase1) {
    const std::size_t cap = 5000 + 50 * (2 * p_.nrows + m_);
    double best_obj = -std::numeric_limits<double>::infinity();
    std::size_t since_gain = 0;
    bool bland = false;
    for (std::size_t iter = 0; iter < cap; ++iter) {
      const std::vector<double> y = prices(phase1);
      const std::size_t entering = pick_entering(y, phase1, bland);
      if (entering == ncols_) return;  // phase optimal
      if (!pivot_on_column(entering)) {
        if (!bland) {  // degenerate stall; retry under Bland's rule
          bland = true;
          continue;
        }
        throw std::runtime_error("minimax fit: simplex detected an unbounded direction");
      }
      double obj = 0.0;
      for (std::size_t i = 0; i < m_; ++i)
        obj += column_cost(basis_[i], phase1) * basic_value(i);
      if (obj > best_obj + 1e-12 * (1.0 + cost_scale_)) {
        best_obj = obj;
        since_gain = 0;
      } else if (++since_gain > 5 * m_ + 20) {
        bland = true;  // anti-cycling
      }
    }
    throw std::runtime_error("minimax fit: simplex iteration cap exceeded");
  }

  // After phase 1, swap basic artificials for structural columns where the
  // row admits one; rows that admit none are redundant and keep a pinned
  // zero artificial.
  void expel_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < art_base_) continue;
      std::vector<double> col(m_);
      bool done = false;
      for (std::size_t cand = 0; cand < art_base_ && !done; ++cand) {
        if (std::find(basis_.begin(), basis_.end(), cand) != basis_.end()) continue;
        column_entries(cand, col);
        double d_i = 0.0;
        const double* row = binv_.data() + i * m_;
        for (std::size_t k = 0; k < m_; ++k) d_i += row[k] * col[k];
        if (std::abs(d_i) > 1e-8) {
          std::vector<double> d(m_);
          for (std::size_t r = 0; r < m_; ++r) {
            double s = 0.0;
            const double* rr = binv_.data() + r * m_;
            for (std::size_t k = 0; k < m_; ++k) s += rr[k] * col[k];
            d[r] = s;
          }
          // degenerate pivot on row i (value stays 0)
          double* prow = binv_.data() + i * m_;
          const double inv = 1.0 / d[i];
          for (std::size_t k = 0; k < m_; ++k) prow[k] *= inv;
          for (std::size_t r = 0; r < m_; ++r) {
            if (r == i || d[r] == 0.0) continue;
            double* rr = binv_.data() + r * m_;
            for (std::size_t k = 0; k < m_; ++k) rr[k] -= d[r] * prow[k];
          }
          basis_[i] = cand;
          done = true;
        }
      }
    }
  }

  const MinimaxProblem& p_;
  std::size_t m_;
  std::size_t nslack_;
  std::size_t art_base_;
  std::size_t ncols_;
  std::vector<std::size_t> basis_;
  std::vector<double> binv_;
  std::size_t pivots_ = 0;
  double cost_scale_ = 1.0;
};

}  // namespace

MinimaxSolution solve_minimax_linear(const MinimaxProblem& p) {
  if (p.nvar == 0 || p.nrows == 0 || p.features.size() != p.nrows * p.nvar ||
      p.targets.size() != p.nrows)
    throw std::invalid_argument("solve_minimax_linear: malformed problem");
  DualSimplex simplex(p);
  return simplex.solve();
}

MinimaxSolution minimax_subgradient_reference(const MinimaxProblem& p, std::size_t dim_scale) {
  double max_target = 0.0;
  for (double b : p.targets) max_target = std::max(max_target, std::abs(b));
  const double radius = 2.0 * max_target * static_cast<double>(dim_scale);

  std::vector<double> theta(p.nvar, 0.0);
  MinimaxSolution best;
  best.theta = theta;
  best.objective = minimax_objective(p, theta);

  constexpr std::size_t kIters = 5000;
  for (std::size_t t = 1; t <= kIters && best.objective > 0.0; ++t) {
    // first attaining row in order
    std::size_t arg = 0;
    double worst = -1.0, residual = 0.0;
    for (std::size_t v = 0; v < p.nrows; ++v) {
      const double* a = p.features.data() + v * p.nvar;
      double dot = 0.0;
      for (std::size_t j = 0; j < p.nvar; ++j) dot += a[j] * theta[j];
      const double r = dot - p.targets[v];
      if (std::abs(r) > worst) {
        worst = std::abs(r);
        arg = v;
        residual = r;
      }
    }
    const double step = radius / std::sqrt(static_cast<double>(t));
    const double sign = residual >= 0.0 ? 1.0 : -1.0;
    const double* a = p.features.data() + arg * p.nvar;
    for (std::size_t j = 0; j < p.nvar; ++j) {
      theta[j] -= step * sign * a[j];
      if (p.nonneg && theta[j] < 0.0) theta[j] = 0.0;
    }
    const double obj = minimax_objective(p, theta);
    best.iterations = t;
    if (obj < best.objective) {
      best.objective = obj;
      best.theta = theta;
    }
  }
  return best;
}

MinimaxProblem diagonal_fit_problem(const TruncatedFormTable& table) {
  if (table.part != MatrixPart::diagonal)
    throw std::invalid_argument("fit_diagonal: table holds off-diagonal forms");
  const DirectionNet& net = *table.net;
  MinimaxProblem p;
  p.nvar = net.dim;
  p.nrows = net.count;
  p.nonneg = true;
  p.targets = table.values;
  p.features.resize(p.nrows * p.nvar);
  for (std::size_t v = 0; v < net.count; ++v) {
    const auto dir = net.vec(v);
    for (std::size_t j = 0; j < net.dim; ++j) p.features[v * p.nvar + j] = dir[j] * dir[j];
  }
  return p;
}

MinimaxProblem offdiagonal_fit_problem(const TruncatedFormTable& table) {
  if (table.part != MatrixPart::offdiagonal)
    throw std::invalid_argument("fit_offdiagonal: table holds diagonal forms");
  const DirectionNet& net = *table.net;
  const std::size_t d = net.dim;
  MinimaxProblem p;
  p.nvar = d * (d - 1) / 2;
  p.nrows = net.count;
  p.nonneg = false;
  p.targets = table.values;
  if (p.nvar == 0) return p;  // d == 1: off part is identically zero
  p.features.resize(p.nrows * p.nvar);
  for (std::size_t v = 0; v < net.count; ++v) {
    const auto dir = net.vec(v);
    std::size_t k = 0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j, ++k)
        p.features[v * p.nvar + k] = 2.0 * dir[i] * dir[j];
  }
  return p;
}

MinimaxFitResult fit_diagonal(const TruncatedFormTable& table) {
  const MinimaxProblem p = diagonal_fit_problem(table);
  const MinimaxSolution sol = solve_minimax_linear(p);
  MinimaxFitResult r;
  r.matrix = SymmetricMatrix(table.net->dim);
  for (std::size_t j = 0; j < table.net->dim; ++j) r.matrix.ref(j, j) = sol.theta[j];
  r.objective = sol.objective;
  r.iterations = sol.iterations;
  return r;
}

MinimaxFitResult fit_offdiagonal(const TruncatedFormTable& table) {
  const MinimaxProblem p = offdiagonal_fit_problem(table);
  const std::size_t d = table.net->dim;
  MinimaxFitResult r;
  r.matrix = SymmetricMatrix(d);
  if (p.nvar == 0) {
    // d == 1: the only zero-diagonal symmetric matrix is 0
    double worst = 0.0;
    for (double b : p.targets) worst = std::max(worst, std::abs(b));
    r.objective = worst;
    return r;
  }
  const MinimaxSolution sol = solve_minimax_linear(p);
  std::size_t k = 0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j, ++k) r.matrix.ref(j, i) = sol.theta[k];
  r.objective = sol.objective;
  r.iterations = sol.iterations;
  return r;
}

}  // namespace misscov
