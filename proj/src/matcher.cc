#include "hetserve/matcher.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hetserve/errors.h"

namespace hetserve {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Shortest augmenting path assignment for nr <= nc. Returns the column of each row.
template <typename CostFn>
std::vector<int> assign_rows(std::size_t nr, std::size_t nc, CostFn cost) {
  std::vector<double> u(nr, 0.0), v(nc, 0.0), spc(nc);
  std::vector<int> col4row(nr, -1), row4col(nc, -1), path(nc, -1);
  std::vector<char> in_sr(nr), in_sc(nc);

  for (std::size_t cur = 0; cur < nr; ++cur) {
    std::fill(spc.begin(), spc.end(), kInf);
    std::fill(in_sr.begin(), in_sr.end(), 0);
    std::fill(in_sc.begin(), in_sc.end(), 0);

    double min_val = 0.0;
    std::size_t i = cur;
    int sink = -1;
    while (sink < 0) {
      in_sr[i] = 1;
      double lowest = kInf;
      int pick = -1;
      for (std::size_t j = 0; j < nc; ++j) {
        if (in_sc[j]) continue;
        double r = min_val + cost(i, j) - u[i] - v[j];
        if (r < spc[j]) {
          path[j] = static_cast<int>(i);
          spc[j] = r;
        }
        // Lowest reduced distance; on ties prefer a free column, then the lower index.
        if (spc[j] < lowest ||
            (spc[j] == lowest && pick >= 0 && row4col[j] < 0 && row4col[static_cast<std::size_t>(pick)] >= 0)) {
          lowest = spc[j];
          pick = static_cast<int>(j);
        }
      }
      if (pick < 0 || !std::isfinite(lowest)) throw StateError("assignment problem is infeasible");
      min_val = lowest;
      auto jp = static_cast<std::size_t>(pick);
      in_sc[jp] = 1;
      if (row4col[jp] < 0) {
        sink = pick;
      } else {
        i = static_cast<std::size_t>(row4col[jp]);
      }
    }

    u[cur] += min_val;
    for (std::size_t r = 0; r < nr; ++r) {
      if (in_sr[r] && r != cur) u[r] += min_val - spc[static_cast<std::size_t>(col4row[r])];
    }
    for (std::size_t j = 0; j < nc; ++j) {
      if (in_sc[j]) v[j] -= min_val - spc[j];
    }

    auto j = static_cast<std::size_t>(sink);
    while (true) {
      int r = path[j];
      row4col[j] = r;
      int prev = col4row[static_cast<std::size_t>(r)];
      col4row[static_cast<std::size_t>(r)] = static_cast<int>(j);
      if (static_cast<std::size_t>(r) == cur) break;
      j = static_cast<std::size_t>(prev);
    }
  }
  return col4row;
}

AssignmentPlan make_plan(const CostMatrix& m, const std::vector<int>& instance_of_query) {
  AssignmentPlan plan;
  std::vector<char> used(m.cols(), 0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    int j = instance_of_query[i];
    if (j < 0) {
      plan.unassigned_queries.push_back(i);
      continue;
    }
    auto ju = static_cast<std::size_t>(j);
    plan.pairs.emplace_back(i, ju);
    plan.total_cost += m.cost(i, ju);
    used[ju] = 1;
  }
  for (std::size_t j = 0; j < m.cols(); ++j)
    if (!used[j]) plan.unassigned_instances.push_back(j);
  return plan;
}

}  // namespace

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows),
      cols_(cols),
      cost_(rows * cols, 0.0),
      completion_(rows * cols, 0.0),
      penalized_(rows * cols, 0),
      wait_(rows, 0.0) {}

CostMatrix CostMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  std::size_t m = rows.size();
  std::size_t n = m ? rows.front().size() : 0;
  CostMatrix out(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    if (rows[i].size() != n) throw ParameterError("ragged cost matrix");
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(rows[i][j]) || rows[i][j] < 0.0)
        throw ParameterError("cost entries must be finite and non-negative");
      out.set(i, j, rows[i][j], rows[i][j], false);
    }
  }
  return out;
}

void CostMatrix::set(std::size_t i, std::size_t j, double cost, double completion_ms, bool penalized) {
  auto k = i * cols_ + j;
  cost_[k] = cost;
  completion_[k] = completion_ms;
  penalized_[k] = penalized ? 1 : 0;
}

CostMatrix build_cost_matrix(std::span<const Query> queries, std::span<const InstanceState> instances,
                             const LatencyPredictor& predictor, std::span<const double> coefficients,
                             const QoSSpec& qos, double now, PenaltySettings penalty) {
  if (queries.empty() || instances.empty()) throw ParameterError("cost matrix needs m >= 1 and n >= 1");
  const double deadline = qos.deadline_ms();
  const double penalty_ms = penalty.multiplier * qos.t_qos_ms;

  CostMatrix m(queries.size(), instances.size());
  std::vector<double> remaining(instances.size());
  for (std::size_t j = 0; j < instances.size(); ++j) remaining[j] = instances[j].busy_remaining_ms(now);

  for (std::size_t i = 0; i < queries.size(); ++i) {
    double wait = std::max(0.0, (now - queries[i].first_queued_time) * 1000.0);
    m.set_wait(i, wait);
    for (std::size_t j = 0; j < instances.size(); ++j) {
      int type = instances[j].type_id;
      double completion = remaining[j] + predictor.predict(type, queries[i].batch_size);
      bool late = completion + wait > deadline;
      double weight = coefficients[static_cast<std::size_t>(type)];
      m.set(i, j, weight * (late ? penalty_ms : completion), completion, late);
    }
  }
  return m;
}

AssignmentPlan solve(const CostMatrix& matrix) {
  const std::size_t m = matrix.rows(), n = matrix.cols();
  std::vector<int> instance_of_query(m, -1);
  if (m == 0 || n == 0) return make_plan(matrix, instance_of_query);

  if (m <= n) {
    instance_of_query = assign_rows(m, n, [&](std::size_t i, std::size_t j) { return matrix.cost(i, j); });
  } else {
    // Instances become rows so that the search runs over the smaller side.
    auto query_of_instance =
        assign_rows(n, m, [&](std::size_t j, std::size_t i) { return matrix.cost(i, j); });
    for (std::size_t j = 0; j < n; ++j)
      instance_of_query[static_cast<std::size_t>(query_of_instance[j])] = static_cast<int>(j);
  }
  return make_plan(matrix, instance_of_query);
}

AssignmentPlan brute_force_solve(const CostMatrix& matrix) {
  const std::size_t m = matrix.rows(), n = matrix.cols();
  const std::size_t k = std::min(m, n);
  if (k > 8) throw ParameterError("brute_force_solve supports min(m, n) <= 8");

  const bool by_rows = m <= n;
  const std::size_t small = by_rows ? m : n, large = by_rows ? n : m;
  auto entry = [&](std::size_t s, std::size_t l) { return by_rows ? matrix.cost(s, l) : matrix.cost(l, s); };

  std::vector<int> current(small, -1), best(small, -1);
  std::vector<char> taken(large, 0);
  double best_cost = kInf;

  auto recurse = [&](auto&& self, std::size_t s, double acc) -> void {
    if (s == small) {
      if (acc < best_cost) {
        best_cost = acc;
        best = current;
      }
      return;
    }
    for (std::size_t l = 0; l < large; ++l) {
      if (taken[l]) continue;
      taken[l] = 1;
      current[s] = static_cast<int>(l);
      self(self, s + 1, acc + entry(s, l));
      taken[l] = 0;
    }
  };
  recurse(recurse, 0, 0.0);

  std::vector<int> instance_of_query(m, -1);
  for (std::size_t s = 0; s < small; ++s) {
    if (by_rows) {
      instance_of_query[s] = best[s];
    } else {
      instance_of_query[static_cast<std::size_t>(best[s])] = static_cast<int>(s);
    }
  }
  return make_plan(matrix, instance_of_query);
}

}  // namespace hetserve
