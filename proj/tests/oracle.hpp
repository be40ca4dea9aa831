#pragma once

// Brute-force reference computations for the tests. Everything here works on
// an explicit list of outcome points and their probabilities, enumerated by
// an odometer and grouped with std::map, so it shares no indexing or
// reduction code with the library.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "eifkit/dist.hpp"

namespace oracle {

using Key = std::vector<std::size_t>;

struct Joint {
  std::vector<std::vector<double>> levels;  // level values per variable
  std::vector<Key> points;                  // every outcome point, odometer order (last variable fastest)
  std::vector<double> prob;

  std::size_t size() const { return points.size(); }
  double value(std::size_t point, std::size_t var) const { return levels[var][points[point][var]]; }
  Key project(std::size_t point, const std::vector<std::size_t>& vars) const {
    Key k;
    for (std::size_t v : vars) k.push_back(points[point][v]);
    return k;
  }
};

inline std::vector<std::size_t> range(std::size_t first, std::size_t last) {
  std::vector<std::size_t> out;
  for (std::size_t i = first; i < last; ++i) out.push_back(i);
  return out;
}

// Enumerates the space and multiplies factor lookups, locating each parent
// row by counting how many parent configurations precede it.
inline Joint joint_of(const eifkit::FactorizedDistribution& p) {
  Joint j;
  const std::size_t d = p.num_variables();
  for (const auto& v : p.variables()) j.levels.push_back(v.levels);
  Key cur(d, 0);
  while (true) {
    double prob = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
      std::size_t parent = 0;
      for (std::size_t k = 0; k < i; ++k) parent = parent * j.levels[k].size() + cur[k];
      prob *= p.factor(i)[parent * j.levels[i].size() + cur[i]];
    }
    j.points.push_back(cur);
    j.prob.push_back(prob);
    std::size_t k = d;
    while (k > 0) {
      --k;
      if (++cur[k] < j.levels[k].size()) break;
      cur[k] = 0;
      if (k == 0) return j;
    }
    if (d == 0) return j;
  }
}

inline Joint with_prob(const Joint& j, std::vector<double> prob) {
  Joint out = j;
  out.prob = std::move(prob);
  return out;
}

inline double expect(const Joint& j, const std::vector<double>& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < j.size(); ++i) s += j.prob[i] * f[i];
  return s;
}

inline double inner(const Joint& j, const std::vector<double>& f, const std::vector<double>& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < j.size(); ++i) s += j.prob[i] * f[i] * g[i];
  return s;
}

// E[f | O_v, v in vars] at every point; 0 where the cell has no mass.
inline std::vector<double> cond_mean(const Joint& j, const std::vector<double>& f, const std::vector<std::size_t>& vars) {
  std::map<Key, std::pair<double, double>> cells;
  for (std::size_t i = 0; i < j.size(); ++i) {
    auto& c = cells[j.project(i, vars)];
    c.first += j.prob[i] * f[i];
    c.second += j.prob[i];
  }
  std::vector<double> out(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& c = cells[j.project(i, vars)];
    out[i] = c.second > 0.0 ? c.first / c.second : 0.0;
  }
  return out;
}

// Mass of the cell of each point.
inline std::vector<double> cell_mass(const Joint& j, const std::vector<std::size_t>& vars) {
  std::map<Key, double> cells;
  for (std::size_t i = 0; i < j.size(); ++i) cells[j.project(i, vars)] += j.prob[i];
  std::vector<double> out(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out[i] = cells[j.project(i, vars)];
  return out;
}

// Mass of {O_v = levels} for an explicit assignment.
inline double mass(const Joint& j, const std::vector<std::size_t>& vars, const Key& levels) {
  double s = 0.0;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j.project(i, vars) == levels) s += j.prob[i];
  }
  return s;
}

inline std::vector<double> values_of(const Joint& j, std::size_t var) {
  std::vector<double> out(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out[i] = j.value(i, var);
  return out;
}

// All level assignments of the given variables.
inline std::vector<Key> configurations(const Joint& j, const std::vector<std::size_t>& vars) {
  std::vector<Key> out{Key{}};
  for (std::size_t v : vars) {
    std::vector<Key> next;
    for (const auto& k : out) {
      for (std::size_t l = 0; l < j.levels[v].size(); ++l) {
        Key e = k;
        e.push_back(l);
        next.push_back(e);
      }
    }
    out = next;
  }
  return out;
}

inline Key concat(Key a, const Key& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// E[Y | A = a, W = w] with W the variables before A.
inline double q_bar(const Joint& j, std::size_t a_var, std::size_t y_var, const Key& w, std::size_t a) {
  const auto vars = range(0, a_var + 1);
  double num = 0.0;
  double den = 0.0;
  const Key key = concat(w, {a});
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j.project(i, vars) == key) {
      num += j.prob[i] * j.value(i, y_var);
      den += j.prob[i];
    }
  }
  return num / den;
}

// ---------------------------------------------------------------------------
// Parameters as functions of the joint

inline double cdf_square(const Joint& j, const std::vector<double>& points, const std::vector<double>& weights) {
  double s = 0.0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    double f = 0.0;
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (j.value(i, 0) <= points[k]) f += j.prob[i];
    }
    s += weights[k] * f * f;
  }
  return s;
}

// Point-treatment layout (W..., A, Y).
struct PointTreatmentParts {
  std::vector<Key> ws;
  std::vector<double> pw, q0, q1, pa1;  // per W configuration; pa1 = P(A=1, W=w)
};

inline PointTreatmentParts point_treatment(const Joint& j) {
  const std::size_t a = j.levels.size() - 2;
  PointTreatmentParts out;
  out.ws = configurations(j, range(0, a));
  for (const auto& w : out.ws) {
    out.pw.push_back(mass(j, range(0, a), w));
    out.pa1.push_back(mass(j, range(0, a + 1), concat(w, {1})));
    out.q0.push_back(q_bar(j, a, a + 1, w, 0));
    out.q1.push_back(q_bar(j, a, a + 1, w, 1));
  }
  return out;
}

inline double tsm(const Joint& j) {
  const auto pt = point_treatment(j);
  double s = 0.0;
  for (std::size_t k = 0; k < pt.ws.size(); ++k) s += pt.pw[k] * pt.q1[k];
  return s;
}

inline double vte(const Joint& j) {
  const auto pt = point_treatment(j);
  double m1 = 0.0;
  double m2 = 0.0;
  for (std::size_t k = 0; k < pt.ws.size(); ++k) {
    const double b = pt.q1[k] - pt.q0[k];
    m1 += pt.pw[k] * b;
    m2 += pt.pw[k] * b * b;
  }
  return m2 - m1 * m1;
}

inline double att(const Joint& j) {
  const auto pt = point_treatment(j);
  double num = 0.0;
  double p1 = 0.0;
  for (std::size_t k = 0; k < pt.ws.size(); ++k) {
    num += pt.pa1[k] * (pt.q1[k] - pt.q0[k]);
    p1 += pt.pa1[k];
  }
  return num / p1;
}

// Transport layout (S, W, A, Z, M, Y). supplied[w][m] when given.
inline double transport(const Joint& j, std::size_t a, std::size_t a_star, std::size_t s_star,
                        const std::vector<std::vector<double>>* supplied) {
  double psi = 0.0;
  const double ps0 = mass(j, {0}, {0});
  for (std::size_t w = 0; w < j.levels[1].size(); ++w) {
    const double pw0 = mass(j, {0, 1}, {0, w}) / ps0;
    std::vector<double> g(2, 0.0);
    for (std::size_t m = 0; m < 2; ++m) {
      if (supplied) {
        g[m] = (*supplied)[w][m];
        continue;
      }
      for (std::size_t z = 0; z < 2; ++z) {
        const double pz = mass(j, {0, 1, 2, 3}, {s_star, w, a_star, z}) / mass(j, {0, 1, 2}, {s_star, w, a_star});
        const double pm =
            mass(j, {0, 1, 2, 3, 4}, {s_star, w, a_star, z, m}) / mass(j, {0, 1, 2, 3}, {s_star, w, a_star, z});
        g[m] += pm * pz;
      }
    }
    for (std::size_t z = 0; z < 2; ++z) {
      const double pz = mass(j, {0, 1, 2, 3}, {0, w, a, z}) / mass(j, {0, 1, 2}, {0, w, a});
      for (std::size_t m = 0; m < 2; ++m) {
        double ey = 0.0;
        const double den = mass(j, {0, 1, 2, 3, 4}, {1, w, a, z, m});
        for (std::size_t y = 0; y < j.levels[5].size(); ++y) {
          ey += j.levels[5][y] * mass(j, {0, 1, 2, 3, 4, 5}, {1, w, a, z, m, y}) / den;
        }
        psi += ey * g[m] * pz * pw0;
      }
    }
  }
  return psi;
}

// Mean of the last variable under interventions g_star on the listed
// treatment variables: sum over every point of y * prod p(o_i | past) *
// prod g*(a_i | past).
inline double longitudinal(const Joint& j, const std::vector<std::size_t>& treatments,
                           const std::vector<eifkit::Table>& g_star) {
  const std::size_t d = j.levels.size();
  std::vector<std::map<Key, double>> prefix(d + 1);
  for (std::size_t i = 0; i < j.size(); ++i) {
    for (std::size_t k = 0; k <= d; ++k) prefix[k][Key(j.points[i].begin(), j.points[i].begin() + k)] += j.prob[i];
  }
  double psi = 0.0;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Key& o = j.points[i];
    double w = 1.0;
    for (std::size_t v = 0; v < d && w != 0.0; ++v) {
      const auto t = std::find(treatments.begin(), treatments.end(), v);
      if (t != treatments.end()) {
        std::size_t parent = 0;
        for (std::size_t k = 0; k < v; ++k) parent = parent * j.levels[k].size() + o[k];
        w *= g_star[static_cast<std::size_t>(t - treatments.begin())][parent * j.levels[v].size() + o[v]];
      } else {
        const double den = prefix[v][Key(o.begin(), o.begin() + v)];
        w *= den > 0.0 ? prefix[v + 1][Key(o.begin(), o.begin() + v + 1)] / den : 0.0;
      }
    }
    psi += w * j.value(i, d - 1);
  }
  return psi;
}

// Survival layout (W..., A, C0, N1, C1, ..., C_{T-1}, N_T).
inline double failure_hazard(const Joint& j, std::size_t a_var, const Key& w, std::size_t a, std::size_t t) {
  const std::size_t n_var = a_var + 2 * t;
  Key history = concat(w, {a});
  for (std::size_t v = a_var + 1; v < n_var; ++v) history.push_back(0);
  const auto vars = range(0, n_var);
  const double den = mass(j, vars, history);
  return mass(j, range(0, n_var + 1), concat(history, {1})) / den;
}

inline double survival(const Joint& j, std::size_t a_var, const std::vector<std::size_t>& rule, std::size_t t0) {
  const auto ws = configurations(j, range(0, a_var));
  double psi = 0.0;
  for (std::size_t k = 0; k < ws.size(); ++k) {
    double s = 1.0;
    for (std::size_t t = 1; t <= t0; ++t) s *= 1.0 - failure_hazard(j, a_var, ws[k], rule[k], t);
    psi += mass(j, range(0, a_var), ws[k]) * s;
  }
  return psi;
}

// ---------------------------------------------------------------------------
// Derivatives

using JointPsi = std::function<double(const Joint&)>;

// Richardson-extrapolated central difference of eps -> psi(p + eps * dir).
inline double directional(const Joint& j, const JointPsi& psi, const std::vector<double>& dir, double h = 1e-4) {
  auto at = [&](double eps) {
    std::vector<double> q(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) q[i] = j.prob[i] + eps * dir[i];
    return psi(with_prob(j, std::move(q)));
  };
  const double d1 = (at(h) - at(-h)) / (2 * h);
  const double d2 = (at(h / 2) - at(-h / 2)) / h;
  return (4 * d2 - d1) / 3;
}

// Pathwise derivative along (1 + eps S) p.
inline double pathwise(const Joint& j, const JointPsi& psi, const std::vector<double>& s, double h = 1e-4) {
  std::vector<double> dir(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) dir[i] = s[i] * j.prob[i];
  return directional(j, psi, dir, h);
}

// Influence function of the nonparametric model by point-mass contamination:
// D(o) = d/deps psi((1 - eps) P + eps delta_o). Only points with mass are
// filled; the rest are left at 0.
inline std::vector<double> gateaux(const Joint& j, const JointPsi& psi, double h = 1e-5) {
  std::vector<double> out(j.size(), 0.0);
  for (std::size_t o = 0; o < j.size(); ++o) {
    if (j.prob[o] <= 0.0) continue;
    std::vector<double> dir(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) dir[i] = (i == o ? 1.0 : 0.0) - j.prob[i];
    out[o] = directional(j, psi, dir, h);
  }
  return out;
}

inline double max_abs_diff_on_support(const Joint& j, const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j.prob[i] > 0.0) m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

// Centered version of f restricted to a conditional: f - E[f | given].
inline std::vector<double> center_given(const Joint& j, const std::vector<double>& f,
                                        const std::vector<std::size_t>& given) {
  const auto m = cond_mean(j, f, given);
  std::vector<double> out(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out[i] = f[i] - m[i];
  return out;
}

}  // namespace oracle
