#include "dispatch/qp.hpp"

#include <algorithm>
#include <cmath>

#include "dispatch/errors.hpp"

namespace dispatch {

namespace {

// argmin over [lo,hi] of q (x-t)^2 + s x; ties of the linear case go to lo
double scalar_min(double q, double t, double s, double lo, double hi) {
  if (q > 0.0) return std::clamp(t - s / (2.0 * q), lo, hi);
  if (s > 0.0) return lo;
  if (s < 0.0) return hi;
  return lo;
}

struct PairSolve {
  bool feasible = true;
  double xa = 0.0, xb = 0.0;
};

// two-variable slab subproblem at a fixed balance multiplier mu
PairSolve pair_min(const SepQp& p, const SepQp::Slab& sl, double mu) {
  const auto& A = p.cols[sl.a];
  const auto& B = p.cols[sl.b];
  const double ca = A.c + mu * A.bal;
  const double cb = B.c + mu * B.bal;
  PairSolve r;
  r.xa = scalar_min(A.q, A.target, ca, A.lo, A.hi);
  r.xb = scalar_min(B.q, B.target, cb, B.lo, B.hi);
  double v = sl.pa * r.xa + sl.pb * r.xb;
  if (v >= sl.lo && v <= sl.hi) return r;
  const double pin = v < sl.lo ? sl.lo : sl.hi;

  if (std::fabs(sl.pb) < 1e-300) {
    // slab touches only x_a
    double lo = A.lo, hi = A.hi;
    if (sl.pa > 0.0) {
      lo = std::max(lo, sl.lo / sl.pa);
      hi = std::min(hi, sl.hi / sl.pa);
    } else if (sl.pa < 0.0) {
      lo = std::max(lo, sl.hi / sl.pa);
      hi = std::min(hi, sl.lo / sl.pa);
    }
    if (lo > hi + 1e-12) return {false, 0.0, 0.0};
    r.xa = scalar_min(A.q, A.target, ca, lo, std::max(lo, hi));
    return r;
  }

  // pin to the violated face: pa xa + pb xb = pin, xb = rr - ss xa
  const double ss = sl.pa / sl.pb;
  const double rr = pin / sl.pb;
  double lo = A.lo, hi = A.hi;
  if (ss > 0.0) {
    lo = std::max(lo, (pin - sl.pb * B.hi) / sl.pa);
    hi = std::min(hi, (pin - sl.pb * B.lo) / sl.pa);
  } else {
    lo = std::max(lo, (pin - sl.pb * B.lo) / sl.pa);
    hi = std::min(hi, (pin - sl.pb * B.hi) / sl.pa);
  }
  if (lo > hi + 1e-12) return {false, 0.0, 0.0};
  hi = std::max(lo, hi);
  // f(xa) = qa (xa-ta)^2 + ca xa + qb (rr - ss xa - tb)^2 + cb (rr - ss xa)
  const double curv = 2.0 * A.q + 2.0 * ss * ss * B.q;
  const double slope0 =
      -2.0 * A.q * A.target + ca - 2.0 * ss * B.q * (rr - B.target) - ss * cb;
  if (curv > 0.0)
    r.xa = std::clamp(-slope0 / curv, lo, hi);
  else
    r.xa = slope0 > 0.0 ? lo : (slope0 < 0.0 ? hi : lo);
  r.xb = rr - ss * r.xa;
  r.xb = std::clamp(r.xb, B.lo, B.hi);  // round-off hygiene
  return r;
}

}  // namespace

SepQpResult solve_separable_qp(const SepQp& p, LpSolver& lp) {
  const int n = static_cast<int>(p.cols.size());
  std::vector<int> slab_of(n, -1);
  for (int s = 0; s < static_cast<int>(p.slabs.size()); ++s) {
    slab_of[p.slabs[s].a] = s;
    slab_of[p.slabs[s].b] = s;
  }

  // evaluate all units at a fixed multiplier; returns total generation
  std::vector<double> x(n, 0.0);
  auto eval_at = [&](double mu) -> bool {
    for (int s = 0; s < static_cast<int>(p.slabs.size()); ++s) {
      PairSolve r = pair_min(p, p.slabs[s], mu);
      if (!r.feasible) return false;
      x[p.slabs[s].a] = r.xa;
      x[p.slabs[s].b] = r.xb;
    }
    for (int j = 0; j < n; ++j) {
      if (slab_of[j] >= 0) continue;
      x[j] = scalar_min(p.cols[j].q, p.cols[j].target, p.cols[j].c + mu * p.cols[j].bal,
                        p.cols[j].lo, p.cols[j].hi);
    }
    return true;
  };
  auto generation = [&]() {
    double g = 0.0;
    for (int j = 0; j < n; ++j) g += p.cols[j].bal * x[j];
    return g;
  };

  // saturation bound: beyond +-mu_max every unit is pinned
  double mu_max = 1.0;
  for (const auto& c : p.cols) {
    if (c.bal <= 0.0) continue;
    double span = std::fabs(c.hi) + std::fabs(c.lo) + 2.0 * std::fabs(c.target) + 1.0;
    mu_max = std::max(mu_max, (std::fabs(c.c) + 2.0 * c.q * span + 1.0) / c.bal);
  }
  mu_max *= 2.0;

  SepQpResult res;
  if (!eval_at(-mu_max)) return res;
  double g_hi = generation();
  if (!eval_at(mu_max)) return res;
  double g_lo = generation();
  const double scale = std::max({1.0, std::fabs(p.demand), std::fabs(g_hi), std::fabs(g_lo)});
  if (p.demand > g_hi + 1e-9 * scale || p.demand < g_lo - 1e-9 * scale) return res;

  double lo = -mu_max, hi = mu_max;
  for (int it = 0; it < 100; ++it) {
    double mid = 0.5 * (lo + hi);
    if (!eval_at(mid)) return res;
    if (generation() >= p.demand)
      lo = mid;
    else
      hi = mid;
  }
  const double mu = 0.5 * (lo + hi);
  if (!eval_at(mu)) return res;

  // Freeze the strictly convex variables and complete the linear ones with the
  // simplex so the balance holds exactly and ties break deterministically.
  bool any_linear = false, any_quad = false;
  for (const auto& c : p.cols) (c.q > 0.0 ? any_quad : any_linear) = true;
  if (any_linear) {
    LpProblem sub;
    std::vector<int> col_of(n, -1);
    double residual = p.demand;
    for (int j = 0; j < n; ++j) {
      if (p.cols[j].q > 0.0) {
        residual -= p.cols[j].bal * x[j];
        continue;
      }
      col_of[j] = sub.n();
      sub.cost.push_back(p.cols[j].c);
      sub.lower.push_back(p.cols[j].lo);
      sub.upper.push_back(p.cols[j].hi);
    }
    LpProblem::Row balance;
    balance.coef.assign(sub.n(), 0.0);
    for (int j = 0; j < n; ++j)
      if (col_of[j] >= 0) balance.coef[col_of[j]] = p.cols[j].bal;
    balance.lo = balance.hi = residual;
    sub.rows.push_back(std::move(balance));
    for (const auto& sl : p.slabs) {
      double lo_s = sl.lo, hi_s = sl.hi;
      LpProblem::Row row;
      row.coef.assign(sub.n(), 0.0);
      bool has_free = false;
      if (col_of[sl.a] >= 0) {
        row.coef[col_of[sl.a]] = sl.pa;
        has_free = true;
      } else {
        lo_s -= sl.pa * x[sl.a];
        hi_s -= sl.pa * x[sl.a];
      }
      if (col_of[sl.b] >= 0) {
        row.coef[col_of[sl.b]] = sl.pb;
        has_free = true;
      } else {
        lo_s -= sl.pb * x[sl.b];
        hi_s -= sl.pb * x[sl.b];
      }
      if (!has_free) continue;  // both frozen; already satisfied at mu
      row.lo = lo_s;
      row.hi = hi_s;
      sub.rows.push_back(std::move(row));
    }
    const LpResult& lr = lp.solve(sub);
    if (lr.status != LpStatus::kOptimal) return res;
    for (int j = 0; j < n; ++j)
      if (col_of[j] >= 0) x[j] = lr.x[col_of[j]];
  }

  double g = 0.0;
  for (int j = 0; j < n; ++j) g += p.cols[j].bal * x[j];
  if (std::fabs(g - p.demand) > 1e-7 * scale)
    throw NumericError("qp: balance residual " + std::to_string(g - p.demand) +
                       " after completion");

  res.feasible = true;
  res.x = x;
  res.multiplier = mu;
  res.value = 0.0;
  for (int j = 0; j < n; ++j) {
    double d = x[j] - p.cols[j].target;
    res.value += p.cols[j].q * d * d + p.cols[j].c * x[j];
  }
  return res;
}

}  // namespace dispatch
