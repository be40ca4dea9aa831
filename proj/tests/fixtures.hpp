#pragma once

// Hand-built distributions shared by several test files.

#include <vector>

#include "eifkit/dist.hpp"
#include "eifkit/generate.hpp"
#include "eifkit/layout.hpp"

namespace fixtures {

using namespace eifkit;

// (W, A, Y) from p(w), g(1 | w) and rows p(y | w, a) listed as (w0,a0), (w0,a1), (w1,a0), ...
inline FactorizedDistribution point_treatment(const std::vector<double>& pw, const std::vector<double>& g1,
                                              const std::vector<double>& y_levels,
                                              const std::vector<Table>& y_rows) {
  Table a_table;
  for (double g : g1) {
    a_table.push_back(1 - g);
    a_table.push_back(g);
  }
  Table y_table;
  for (const auto& r : y_rows) y_table.insert(y_table.end(), r.begin(), r.end());
  return FactorizedDistribution(
      {make_variable("W", pw.size(), "covariate"), make_variable("A", 2, "treatment"), VariableSpec{"Y", y_levels, "outcome"}},
      {pw, a_table, y_table});
}

// Replaces the Y factor of a transport distribution: rows under S = 1 from
// row_for(w, a, z, m), point mass at level 0 under S = 0.
template <class F>
FactorizedDistribution with_transport_outcome(const FactorizedDistribution& p, F row_for) {
  const auto l = transport_layout(p);
  const std::size_t yc = p.space().cardinality(l.y);
  Table t;
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t w = 0; w < l.w_count; ++w) {
      for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t z = 0; z < 2; ++z) {
          for (std::size_t m = 0; m < 2; ++m) {
            Table row(yc, 0.0);
            if (s == 0) {
              row[0] = 1.0;
            } else {
              row = row_for(w, a, z, m);
            }
            t.insert(t.end(), row.begin(), row.end());
          }
        }
      }
    }
  }
  return p.with_factor(l.y, t);
}

inline std::vector<std::vector<double>> as_rows(const Table& t) {
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < t.size(); i += 2) out.push_back({t[i], t[i + 1]});
  return out;
}

// Sets every row of every failure indicator to [1 - h, h].
inline FactorizedDistribution constant_hazard(const FactorizedDistribution& p, double h) {
  const auto l = survival_layout(p);
  FactorizedDistribution q = p;
  for (std::size_t t = 1; t <= l.horizon; ++t) {
    Table rows(p.factor(l.event(t)).size());
    for (std::size_t i = 0; i < rows.size(); i += 2) {
      rows[i] = 1 - h;
      rows[i + 1] = h;
    }
    q = q.with_factor(l.event(t), rows);
  }
  return q;
}

}  // namespace fixtures
