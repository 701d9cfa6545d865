#include "dispatch/lp.hpp"

#include <algorithm>
#include <cmath>

#include "dispatch/errors.hpp"

namespace dispatch {

namespace {
constexpr double kPivotTol = 1e-10;
constexpr double kCostTol = 1e-10;
constexpr double kFeasTol = 1e-8;
constexpr signed char kBasic = 0, kAtLower = 1, kAtUpper = 2;
}  // namespace

void LpSolver::setup(const LpProblem& p) {
  n_ = p.n();
  m_ = static_cast<int>(p.rows.size());
  total_ = n_ + 2 * m_;  // structural, slack, artificial
  lower_.assign(total_, 0.0);
  upper_.assign(total_, 0.0);
  cost_.assign(total_, 0.0);
  phase1_cost_.assign(total_, 0.0);
  x_.assign(total_, 0.0);
  cb_.assign(m_, 0.0);
  tab_.assign(static_cast<std::size_t>(m_) * total_, 0.0);
  state_.assign(total_, kAtLower);
  basis_.assign(m_, -1);
  need_phase1_ = false;

  cost_scale_ = 1.0;
  for (int j = 0; j < n_; ++j) {
    lower_[j] = p.lower[j];
    upper_[j] = p.upper[j];
    cost_[j] = p.cost[j];
    if (!(lower_[j] <= upper_[j]) || !std::isfinite(lower_[j]) || !std::isfinite(upper_[j]))
      throw NumericError("lp: variable bounds must be finite and ordered");
    x_[j] = lower_[j];
    cost_scale_ = std::max(cost_scale_, std::fabs(cost_[j]));
  }

  for (int i = 0; i < m_; ++i) {
    const auto& row = p.rows[i];
    double mx = 0.0;
    for (double a : row.coef) mx = std::max(mx, std::fabs(a));
    double scale = mx > 0.0 ? 1.0 / mx : 1.0;
    double* t = &tab_[static_cast<std::size_t>(i) * total_];
    for (int j = 0; j < n_; ++j) t[j] = row.coef[j] * scale;
    int slack = n_ + i;
    int art = n_ + m_ + i;
    t[slack] = -1.0;
    t[art] = -1.0;
    lower_[slack] = row.lo * scale;
    upper_[slack] = row.hi * scale;
    double r = 0.0;
    for (int j = 0; j < n_; ++j) r += t[j] * x_[j];
    if (r >= lower_[slack] && r <= upper_[slack]) {
      basis_[i] = slack;
      state_[slack] = kBasic;
      x_[slack] = r;
    } else {
      double pin = r < lower_[slack] ? lower_[slack] : upper_[slack];
      state_[slack] = r < lower_[slack] ? kAtLower : kAtUpper;
      x_[slack] = pin;
      double viol = r - pin;
      lower_[art] = std::min(0.0, viol);
      upper_[art] = std::max(0.0, viol);
      basis_[i] = art;
      state_[art] = kBasic;
      x_[art] = viol;
      phase1_cost_[art] = viol > 0.0 ? 1.0 : -1.0;
      need_phase1_ = true;
    }
  }
}

void LpSolver::refresh_basics() {
  for (int i = 0; i < m_; ++i) {
    const double* t = &tab_[static_cast<std::size_t>(i) * total_];
    double v = 0.0;
    for (int j = 0; j < total_; ++j) {
      if (state_[j] != kBasic) v -= t[j] * x_[j];
    }
    x_[basis_[i]] = v;
  }
}

// Runs one phase to optimality. Returns false if the iteration cap trips.
bool LpSolver::iterate(bool phase1) {
  refresh_basics();
  const std::vector<double>& cost = phase1 ? phase1_cost_ : cost_;
  const double ctol = kCostTol * (phase1 ? 1.0 : cost_scale_);
  const int max_iters = 500 + 50 * total_;
  for (int iter = 0; iter < max_iters; ++iter) {
    for (int i = 0; i < m_; ++i) cb_[i] = cost[basis_[i]];

    int enter = -1;
    double enter_dir = 0.0;
    for (int j = 0; j < total_ && enter < 0; ++j) {
      if (state_[j] == kBasic || upper_[j] - lower_[j] <= 0.0) continue;
      double d = cost[j];
      for (int i = 0; i < m_; ++i) {
        if (cb_[i] != 0.0) d -= cb_[i] * tab_[static_cast<std::size_t>(i) * total_ + j];
      }
      if (state_[j] == kAtLower && d < -ctol) {
        enter = j;
        enter_dir = 1.0;
      } else if (state_[j] == kAtUpper && d > ctol) {
        enter = j;
        enter_dir = -1.0;
      }
    }
    if (enter < 0) return true;  // phase optimal

    double limit = upper_[enter] - lower_[enter];
    int leave_row = -1;
    bool leave_to_upper = false;
    for (int i = 0; i < m_; ++i) {
      double w = -enter_dir * tab_[static_cast<std::size_t>(i) * total_ + enter];
      if (std::fabs(w) <= kPivotTol) continue;
      int b = basis_[i];
      double room = w > 0.0 ? (upper_[b] - x_[b]) / w : (lower_[b] - x_[b]) / w;
      if (room < 0.0) room = 0.0;  // round-off pushed a basic past its bound
      bool better = room < limit || (room == limit && leave_row >= 0 && b < basis_[leave_row]);
      if (better) {
        limit = room;
        leave_row = i;
        leave_to_upper = w > 0.0;
      }
    }
    if (!std::isfinite(limit)) throw NumericError("lp: unbounded direction in a boxed problem");

    if (leave_row < 0) {
      // bound flip
      state_[enter] = state_[enter] == kAtLower ? kAtUpper : kAtLower;
      x_[enter] = state_[enter] == kAtLower ? lower_[enter] : upper_[enter];
      refresh_basics();
      continue;
    }

    int leave = basis_[leave_row];
    double* prow = &tab_[static_cast<std::size_t>(leave_row) * total_];
    double piv = prow[enter];
    if (std::fabs(piv) <= kPivotTol) throw NumericError("lp: vanishing pivot");
    double inv = 1.0 / piv;
    for (int j = 0; j < total_; ++j) prow[j] *= inv;
    prow[enter] = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == leave_row) continue;
      double* row = &tab_[static_cast<std::size_t>(i) * total_];
      double f = row[enter];
      if (f == 0.0) continue;
      for (int j = 0; j < total_; ++j) row[j] -= f * prow[j];
      row[enter] = 0.0;
    }
    basis_[leave_row] = enter;
    state_[enter] = kBasic;
    state_[leave] = leave_to_upper ? kAtUpper : kAtLower;
    x_[leave] = leave_to_upper ? upper_[leave] : lower_[leave];
    refresh_basics();
  }
  return false;
}

const LpResult& LpSolver::solve(const LpProblem& p) {
  if (p.lower.size() != p.cost.size() || p.upper.size() != p.cost.size())
    throw NumericError("lp: inconsistent problem sizes");
  for (const auto& r : p.rows) {
    if (static_cast<int>(r.coef.size()) != p.n()) throw NumericError("lp: row width mismatch");
    if (!(r.lo <= r.hi)) {
      result_ = {LpStatus::kInfeasible, 0.0, {}};
      return result_;
    }
  }
  setup(p);
  if (need_phase1_) {
    if (!iterate(true)) throw NumericError("lp: phase-1 iteration limit");
    double infeas = 0.0;
    for (int i = 0; i < m_; ++i) infeas += std::fabs(x_[n_ + m_ + i]);
    if (infeas > kFeasTol) {
      result_ = {LpStatus::kInfeasible, 0.0, {}};
      return result_;
    }
    for (int i = 0; i < m_; ++i) {
      int a = n_ + m_ + i;
      lower_[a] = upper_[a] = 0.0;
      if (state_[a] != kBasic) x_[a] = 0.0;
    }
  }
  if (!iterate(false)) throw NumericError("lp: phase-2 iteration limit");

  result_.status = LpStatus::kOptimal;
  result_.x.assign(x_.begin(), x_.begin() + n_);
  // clean round-off against the original bounds
  for (int j = 0; j < n_; ++j) result_.x[j] = std::clamp(result_.x[j], p.lower[j], p.upper[j]);
  result_.value = 0.0;
  for (int j = 0; j < n_; ++j) result_.value += p.cost[j] * result_.x[j];
  return result_;
}

LpResult solve_lp(const LpProblem& p) {
  LpSolver solver;
  return solver.solve(p);
}

}  // namespace dispatch
