#pragma once

// Linear programs in constraint form and a dense two-phase simplex solver.
// Doubly bounded variables are handled natively: a nonbasic variable may sit
// at either bound and the ratio test admits bound flips, so ranges never
// become extra rows. The solver is deterministic: Dantzig pricing with
// lowest-index tie breaks, switching to Bland's rule after a stall so cycling
// cannot occur. Numerical trouble is reported as its own status, never
// conflated with infeasibility.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace flexregion {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Rel { le, eq, ge };
enum class LpStatus { optimal, infeasible, unbounded, failure };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::failure: return "failure";
  }
  return "?";
}

struct LinearProgram {
  struct Variable {
    std::string name;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
  };
  struct Row {
    std::vector<std::pair<int, double>> terms;  // (variable index, coefficient)
    Rel rel = Rel::le;
    double rhs = 0.0;
    std::string name;
  };

  std::vector<Variable> vars;
  std::vector<Row> rows;
  std::vector<double> obj;  // minimized; aligned with vars
  double obj_constant = 0.0;

  int add_var(std::string name,
              double lo = -std::numeric_limits<double>::infinity(),
              double hi = std::numeric_limits<double>::infinity()) {
    vars.push_back({std::move(name), lo, hi});
    obj.push_back(0.0);
    return static_cast<int>(vars.size()) - 1;
  }

  void add_row(std::vector<std::pair<int, double>> terms, Rel rel, double rhs,
               std::string name = {}) {
    for (const auto& [idx, coef] : terms) {
      if (idx < 0 || idx >= static_cast<int>(vars.size()))
        throw std::out_of_range("add_row: variable index out of range");
      if (!std::isfinite(coef)) throw std::invalid_argument("add_row: non-finite coefficient");
    }
    if (!std::isfinite(rhs)) throw std::invalid_argument("add_row: non-finite rhs");
    rows.push_back({std::move(terms), rel, rhs, std::move(name)});
  }

  void set_objective(int var, double coef) {
    obj.at(static_cast<std::size_t>(var)) = coef;
  }

  std::string to_lp_format() const;
};

struct LpSolution {
  LpStatus status = LpStatus::failure;
  std::vector<double> values;
  double objective_value = 0.0;
  int iterations = 0;
  std::string message;
};

namespace detail {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool is_free_low(double lo) { return !(lo > -1e30); }
inline bool is_free_high(double hi) { return !(hi < 1e30); }

}  // namespace detail

inline LpSolution solve(const LinearProgram& lp) {
  using Eigen::Dynamic;
  using Matrix = Eigen::Matrix<double, Dynamic, Dynamic, Eigen::RowMajor>;

  LpSolution out;
  const int nvar = static_cast<int>(lp.vars.size());

  // Classify variables and assign structural columns of the standard form.
  // Every column lives in [0, range]; finite upper bounds are handled by the
  // bounded-variable simplex (nonbasic at either bound), never as extra rows.
  enum class Map { shift_lo, flip_hi, split, fixed };
  struct VarMap {
    Map kind;
    int col = -1;
    int col_neg = -1;
    double base = 0.0;
    double range = detail::kInf;  // upper bound of the shifted column, if any
  };
  std::vector<VarMap> vmap(static_cast<std::size_t>(nvar));
  int ncol_struct = 0;
  for (int j = 0; j < nvar; ++j) {
    const auto& v = lp.vars[static_cast<std::size_t>(j)];
    const bool flo = detail::is_free_low(v.lo);
    const bool fhi = detail::is_free_high(v.hi);
    if (!flo && !fhi && v.lo > v.hi) {
      out.status = LpStatus::infeasible;
      out.message = "variable '" + v.name + "' has lo > hi";
      return out;
    }
    auto& m = vmap[static_cast<std::size_t>(j)];
    if (!flo && !fhi && v.lo == v.hi) {
      m = {Map::fixed, -1, -1, v.lo, 0.0};
    } else if (!flo) {
      m = {Map::shift_lo, ncol_struct++, -1, v.lo,
           fhi ? detail::kInf : v.hi - v.lo};
    } else if (!fhi) {
      m = {Map::flip_hi, ncol_struct++, -1, v.hi, detail::kInf};
    } else {
      m = {Map::split, ncol_struct, ncol_struct + 1, 0.0, detail::kInf};
      ncol_struct += 2;
    }
  }

  // Transformed rows: dense structural coefficients, adjusted rhs.
  struct ProcRow {
    Eigen::VectorXd a;
    Rel rel;
    double rhs;
  };
  std::vector<ProcRow> prows;
  prows.reserve(lp.rows.size());
  for (const auto& row : lp.rows) {
    ProcRow pr{Eigen::VectorXd::Zero(ncol_struct), row.rel, row.rhs};
    for (const auto& [j, coef] : row.terms) {
      const auto& m = vmap[static_cast<std::size_t>(j)];
      switch (m.kind) {
        case Map::fixed:
          pr.rhs -= coef * m.base;
          break;
        case Map::shift_lo:
          pr.a(m.col) += coef;
          pr.rhs -= coef * m.base;
          break;
        case Map::flip_hi:
          pr.a(m.col) -= coef;
          pr.rhs -= coef * m.base;
          break;
        case Map::split:
          pr.a(m.col) += coef;
          pr.a(m.col_neg) -= coef;
          break;
      }
    }
    prows.push_back(std::move(pr));
  }

  const int m = static_cast<int>(prows.size());
  double max_rhs = 1.0;

  // Column layout: structural, then one slack/surplus per inequality, then
  // artificials for eq/ge rows.
  int n_slack = 0, n_art = 0;
  for (auto& pr : prows) {
    if (pr.rhs < 0.0) {
      pr.a = -pr.a;
      pr.rhs = -pr.rhs;
      pr.rel = pr.rel == Rel::le ? Rel::ge : (pr.rel == Rel::ge ? Rel::le : Rel::eq);
    }
    max_rhs = std::max(max_rhs, pr.rhs);
    if (pr.rel != Rel::eq) ++n_slack;
    if (pr.rel != Rel::le) ++n_art;
  }
  const int ncol = ncol_struct + n_slack + n_art;

  // Tableau rows 0..m-1 carry B^-1 A; the rhs column carries the CURRENT
  // value of each row's basic variable (offsets of nonbasics at their upper
  // bound included). Rows m and m+1 are the phase-2 and phase-1 cost rows.
  Matrix T = Matrix::Zero(m + 2, ncol + 1);
  std::vector<int> basis(static_cast<std::size_t>(m), -1);
  std::vector<bool> artificial(static_cast<std::size_t>(ncol), false);
  std::vector<bool> active(static_cast<std::size_t>(m), true);
  std::vector<double> range(static_cast<std::size_t>(ncol), detail::kInf);
  enum : uint8_t { kAtLo = 0, kAtHi = 1, kBasic = 2 };
  std::vector<uint8_t> status(static_cast<std::size_t>(ncol), kAtLo);
  for (int j = 0; j < nvar; ++j) {
    const auto& vm = vmap[static_cast<std::size_t>(j)];
    if (vm.kind == Map::shift_lo) range[static_cast<std::size_t>(vm.col)] = vm.range;
  }
  {
    int slack_next = ncol_struct;
    int art_next = ncol_struct + n_slack;
    for (int i = 0; i < m; ++i) {
      T.block(i, 0, 1, ncol_struct) = prows[static_cast<std::size_t>(i)].a.transpose();
      T(i, ncol) = prows[static_cast<std::size_t>(i)].rhs;
      switch (prows[static_cast<std::size_t>(i)].rel) {
        case Rel::le:
          T(i, slack_next) = 1.0;
          basis[static_cast<std::size_t>(i)] = slack_next++;
          break;
        case Rel::ge:
          T(i, slack_next++) = -1.0;
          [[fallthrough]];
        case Rel::eq:
          T(i, art_next) = 1.0;
          artificial[static_cast<std::size_t>(art_next)] = true;
          basis[static_cast<std::size_t>(i)] = art_next++;
          break;
      }
      status[static_cast<std::size_t>(basis[static_cast<std::size_t>(i)])] = kBasic;
    }
  }

  // Phase-2 cost row over structural columns.
  for (int j = 0; j < nvar; ++j) {
    const double c = lp.obj[static_cast<std::size_t>(j)];
    if (c == 0.0) continue;
    const auto& vm = vmap[static_cast<std::size_t>(j)];
    switch (vm.kind) {
      case Map::fixed: break;
      case Map::shift_lo: T(m, vm.col) += c; break;
      case Map::flip_hi: T(m, vm.col) -= c; break;
      case Map::split:
        T(m, vm.col) += c;
        T(m, vm.col_neg) -= c;
        break;
    }
  }
  // Phase-1 cost row: sum of artificials, reduced against the initial basis.
  for (int c = ncol_struct + n_slack; c < ncol; ++c) T(m + 1, c) = 1.0;
  for (int i = 0; i < m; ++i) {
    if (artificial[static_cast<std::size_t>(basis[static_cast<std::size_t>(i)])])
      T.row(m + 1) -= T.row(i);
  }

  const double cost_tol = 1e-9;
  const double pivot_tol = 1e-9;
  const long max_iter = 20000 + 50L * (m + ncol);
  long iter = 0;
  bool bland = false;
  long last_progress = 0;
  double best_obj = detail::kInf;

  // Replaces basis[prow] by pcol. The rhs column is NOT part of the
  // elimination; callers keep it consistent with the motion they applied.
  auto pivot = [&](int prow, int pcol) {
    const double piv = T(prow, pcol);
    T.row(prow).head(ncol) /= piv;
    T(prow, pcol) = 1.0;
    for (int r = 0; r < m + 2; ++r) {
      if (r == prow) continue;
      const double f = T(r, pcol);
      if (f != 0.0) {
        T.row(r).head(ncol) -= f * T.row(prow).head(ncol);
        T(r, pcol) = 0.0;
      }
    }
    status[static_cast<std::size_t>(basis[static_cast<std::size_t>(prow)])] = kAtLo;
    status[static_cast<std::size_t>(pcol)] = kBasic;
    basis[static_cast<std::size_t>(prow)] = pcol;
  };

  // Runs bounded-variable simplex iterations against the cost row `orow`;
  // returns false on an unbounded ray.
  auto run_phase = [&](int orow, bool allow_artificial) -> bool {
    best_obj = detail::kInf;
    last_progress = iter;
    for (;;) {
      // Entering: nonbasic at lower with negative reduced cost moves up,
      // nonbasic at upper with positive reduced cost moves down.
      int enter = -1;
      double sigma = 1.0;
      double best = cost_tol;
      for (int j = 0; j < ncol; ++j) {
        if (status[static_cast<std::size_t>(j)] == kBasic) continue;
        if (!allow_artificial && artificial[static_cast<std::size_t>(j)]) continue;
        const double rc = T(orow, j);
        double score = 0.0, dir = 1.0;
        if (status[static_cast<std::size_t>(j)] == kAtLo && rc < -cost_tol) {
          score = -rc;
        } else if (status[static_cast<std::size_t>(j)] == kAtHi && rc > cost_tol) {
          score = rc;
          dir = -1.0;
        } else {
          continue;
        }
        if (bland) {
          enter = j;
          sigma = dir;
          break;
        }
        if (score > best) {
          best = score;
          enter = j;
          sigma = dir;
        }
      }
      if (enter < 0) return true;

      // Ratio test: entering moves by t in direction sigma; basic variables
      // change by -sigma*t*column and may hit either of their bounds; the
      // entering variable itself may hit its opposite bound (a bound flip).
      // Two passes: the first finds the tightest step with a small
      // feasibility slack, the second picks the largest pivot element among
      // rows whose exact ratio fits that step. A near-tied row passed over
      // can then slip past its bound by at most the slack, regardless of how
      // large its column entry is, and big pivots keep the tableau stable.
      // Under Bland's rule the exact minimum with the lowest basis index is
      // used instead so the anti-cycling argument stays intact.
      const double ratio_eps = 1e-9;
      int leave = -1;
      bool leave_at_hi = false;
      double step = range[static_cast<std::size_t>(enter)];
      auto exact_ratio = [&](int i, double& ratio, bool& at_hi) {
        const double y = sigma * T(i, enter);
        if (y > pivot_tol) {
          ratio = T(i, ncol) / y;
          at_hi = false;
          return true;
        }
        if (y < -pivot_tol) {
          const double ub = range[static_cast<std::size_t>(basis[static_cast<std::size_t>(i)])];
          if (ub < detail::kInf) {
            ratio = (T(i, ncol) - ub) / y;
            at_hi = true;
            return true;
          }
        }
        return false;
      };
      if (!bland) {
        double t_lim = step;
        for (int i = 0; i < m; ++i) {
          if (!active[static_cast<std::size_t>(i)]) continue;
          const double y = sigma * T(i, enter);
          double t_i;
          if (y > pivot_tol) {
            t_i = (T(i, ncol) + ratio_eps) / y;
          } else if (y < -pivot_tol) {
            const double ub =
                range[static_cast<std::size_t>(basis[static_cast<std::size_t>(i)])];
            if (ub == detail::kInf) continue;
            t_i = (T(i, ncol) - ub - ratio_eps) / y;
          } else {
            continue;
          }
          t_lim = std::min(t_lim, std::max(t_i, 0.0));
        }
        double best_y = 0.0;
        for (int i = 0; i < m; ++i) {
          if (!active[static_cast<std::size_t>(i)]) continue;
          double ratio;
          bool at_hi;
          if (!exact_ratio(i, ratio, at_hi) || ratio > t_lim) continue;
          const double ay = std::abs(T(i, enter));
          if (ay > best_y ||
              (ay == best_y && leave >= 0 &&
               basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
            best_y = ay;
            leave = i;
            leave_at_hi = at_hi;
            step = std::max(ratio, 0.0);
          }
        }
      } else {
        double best_ratio = step;
        for (int i = 0; i < m; ++i) {
          if (!active[static_cast<std::size_t>(i)]) continue;
          double ratio;
          bool at_hi;
          if (!exact_ratio(i, ratio, at_hi)) continue;
          if (ratio < best_ratio ||
              (ratio <= best_ratio && leave >= 0 &&
               basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
            best_ratio = ratio;
            leave = i;
            leave_at_hi = at_hi;
          }
        }
        if (leave >= 0) step = std::max(best_ratio, 0.0);
      }

      if (leave < 0) {
        if (range[static_cast<std::size_t>(enter)] < detail::kInf) {
          // Bound flip: the entering variable crosses to its other bound.
          const double t = range[static_cast<std::size_t>(enter)];
          for (int r = 0; r < m; ++r) T(r, ncol) -= sigma * t * T(r, enter);
          T(m, ncol) += sigma * t * T(m, enter);
          T(m + 1, ncol) += sigma * t * T(m + 1, enter);
          status[static_cast<std::size_t>(enter)] ^= 1;
        } else {
          return false;  // unbounded ray
        }
      } else {
        const double t = step;
        const double enter_val =
            (status[static_cast<std::size_t>(enter)] == kAtHi
                 ? range[static_cast<std::size_t>(enter)]
                 : 0.0) +
            sigma * t;
        for (int r = 0; r < m; ++r) {
          if (r != leave) T(r, ncol) -= sigma * t * T(r, enter);
        }
        T(m, ncol) += sigma * t * T(m, enter);
        T(m + 1, ncol) += sigma * t * T(m + 1, enter);
        const int leaving_col = basis[static_cast<std::size_t>(leave)];
        pivot(leave, enter);
        T(leave, ncol) = enter_val;
        status[static_cast<std::size_t>(leaving_col)] = leave_at_hi ? kAtHi : kAtLo;
      }

      ++iter;
      const double obj = T(orow, ncol);
      if (obj < best_obj - 1e-12) {
        best_obj = obj;
        last_progress = iter;
      }
      if (!bland && iter - last_progress > 200 + m) bland = true;
      if (iter > max_iter) throw SolverError("simplex iteration limit");
    }
  };

  // Internal consistency guard: a basic artificial within feasibility noise
  // is treated as exactly zero before it is pivoted out, so the noise cannot
  // be amplified by a small pivot element.
  const double art_zero_tol = 1e-7 * max_rhs + 1e-9;

  try {
    if (n_art > 0) {
      if (!run_phase(m + 1, true)) {
        out.status = LpStatus::failure;
        out.message = "phase-1 ray";
        return out;
      }
      double phase1 = 0.0;
      for (int i = 0; i < m; ++i) {
        if (active[static_cast<std::size_t>(i)] &&
            artificial[static_cast<std::size_t>(basis[static_cast<std::size_t>(i)])])
          phase1 += std::max(T(i, ncol), 0.0);
      }
      if (phase1 > art_zero_tol) {
        out.status = LpStatus::infeasible;
        out.iterations = static_cast<int>(iter);
        return out;
      }
      // Drive leftover artificials out of the basis; rows that offer no
      // pivot are linearly dependent and drop out.
      for (int i = 0; i < m; ++i) {
        if (!active[static_cast<std::size_t>(i)]) continue;
        if (!artificial[static_cast<std::size_t>(basis[static_cast<std::size_t>(i)])]) continue;
        int best_col = -1;
        double best_mag = 1e-8;
        for (int j = 0; j < ncol_struct + n_slack; ++j) {
          if (status[static_cast<std::size_t>(j)] == kBasic) continue;
          const double a = std::abs(T(i, j));
          if (a > best_mag) {
            best_mag = a;
            best_col = j;
          }
        }
        if (best_col >= 0) {
          if (std::abs(T(i, ncol)) <= art_zero_tol) T(i, ncol) = 0.0;
          const double val = T(i, ncol) / T(i, best_col);
          const double offset = status[static_cast<std::size_t>(best_col)] == kAtHi
                                    ? range[static_cast<std::size_t>(best_col)]
                                    : 0.0;
          pivot(i, best_col);
          T(i, ncol) = offset + val;
        } else {
          active[static_cast<std::size_t>(i)] = false;
          status[static_cast<std::size_t>(basis[static_cast<std::size_t>(i)])] = kAtLo;
        }
      }
      bland = false;
    }
    if (!run_phase(m, false)) {
      out.status = LpStatus::unbounded;
      out.iterations = static_cast<int>(iter);
      return out;
    }
  } catch (const SolverError& e) {
    out.status = LpStatus::failure;
    out.message = e.what();
    out.iterations = static_cast<int>(iter);
    return out;
  }

  // Recover original variable values.
  Eigen::VectorXd xs = Eigen::VectorXd::Zero(ncol);
  for (int j = 0; j < ncol; ++j) {
    if (status[static_cast<std::size_t>(j)] == kAtHi)
      xs(j) = range[static_cast<std::size_t>(j)];
  }
  for (int i = 0; i < m; ++i) {
    if (active[static_cast<std::size_t>(i)])
      xs(basis[static_cast<std::size_t>(i)]) = T(i, ncol);
  }
  out.values.assign(static_cast<std::size_t>(nvar), 0.0);
  for (int j = 0; j < nvar; ++j) {
    const auto& vm = vmap[static_cast<std::size_t>(j)];
    double x = 0.0;
    switch (vm.kind) {
      case Map::fixed: x = vm.base; break;
      case Map::shift_lo: x = vm.base + xs(vm.col); break;
      case Map::flip_hi: x = vm.base - xs(vm.col); break;
      case Map::split: x = xs(vm.col) - xs(vm.col_neg); break;
    }
    out.values[static_cast<std::size_t>(j)] = x;
  }
  double obj_val = lp.obj_constant;
  for (int j = 0; j < nvar; ++j)
    obj_val += lp.obj[static_cast<std::size_t>(j)] * out.values[static_cast<std::size_t>(j)];
  out.objective_value = obj_val;
  out.iterations = static_cast<int>(iter);

  // Certify the claimed optimum actually satisfies the input; numerical
  // drift surfaces as an explicit failure.
  const double verify_tol = std::max(1e-6, 1e-6 * max_rhs);
  for (int j = 0; j < nvar; ++j) {
    const auto& v = lp.vars[static_cast<std::size_t>(j)];
    const double x = out.values[static_cast<std::size_t>(j)];
    if (x < v.lo - verify_tol || x > v.hi + verify_tol) {
      out.status = LpStatus::failure;
      out.message = "bound violated at '" + v.name + "'";
      return out;
    }
  }
  for (const auto& row : lp.rows) {
    double val = 0.0;
    for (const auto& [j, coef] : row.terms)
      val += coef * out.values[static_cast<std::size_t>(j)];
    const bool ok = row.rel == Rel::le   ? val <= row.rhs + verify_tol
                    : row.rel == Rel::ge ? val >= row.rhs - verify_tol
                                         : std::abs(val - row.rhs) <= verify_tol;
    if (!ok) {
      out.status = LpStatus::failure;
      out.message = "row '" + row.name + "' violated by " +
                    std::to_string(std::abs(val - row.rhs));
      return out;
    }
  }
  out.status = LpStatus::optimal;
  return out;
}

inline std::string LinearProgram::to_lp_format() const {
  auto var_name = [&](int j) {
    std::string n = vars[static_cast<std::size_t>(j)].name;
    for (char& c : n) {
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') c = '_';
    }
    if (n.empty()) n = "v" + std::to_string(j);
    return n;
  };
  std::ostringstream os;
  os << "Minimize\n obj:";
  bool first = true;
  for (std::size_t j = 0; j < vars.size(); ++j) {
    if (obj[j] == 0.0) continue;
    os << (first ? " " : obj[j] >= 0 ? " + " : " ") << obj[j] << " "
       << var_name(static_cast<int>(j));
    first = false;
  }
  if (first) os << " 0";
  os << "\nSubject To\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    os << " " << (row.name.empty() ? "r" + std::to_string(i) : row.name) << ":";
    for (const auto& [j, coef] : row.terms) os << " " << (coef >= 0 ? "+" : "") << coef << " " << var_name(j);
    os << (row.rel == Rel::le ? " <= " : row.rel == Rel::ge ? " >= " : " = ") << row.rhs
       << "\n";
  }
  os << "Bounds\n";
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const auto& v = vars[j];
    const bool flo = detail::is_free_low(v.lo);
    const bool fhi = detail::is_free_high(v.hi);
    os << " ";
    if (flo && fhi) {
      os << var_name(static_cast<int>(j)) << " free";
    } else {
      if (flo) os << "-inf <= ";
      else os << v.lo << " <= ";
      os << var_name(static_cast<int>(j));
      if (fhi) os << " <= +inf";
      else os << " <= " << v.hi;
    }
    os << "\n";
  }
  os << "End\n";
  return os.str();
}

}  // namespace flexregion
