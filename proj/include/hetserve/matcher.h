#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "hetserve/latency.h"
#include "hetserve/workload.h"

namespace hetserve {

// Controller's view of one serving instance.
struct InstanceState {
  int id = 0;
  int type_id = 0;
  double busy_until = 0.0;  // predicted time (s) at which all committed work is done
  bool serving = false;     // a query is executing right now
  int committed = 0;        // queued behind the executing query

  bool idle() const { return !serving && committed == 0; }
  double busy_remaining_ms(double now) const {
    return busy_until > now ? (busy_until - now) * 1000.0 : 0.0;
  }
};

// Row-major m x n matrix of weighted costs C_j * L'_ij, with the unweighted completion
// time L_ij and the penalty flags kept alongside.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols);
  // Plain matrix without penalty information (tests, oracles).
  static CostMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double cost(std::size_t i, std::size_t j) const { return cost_[i * cols_ + j]; }
  double& cost(std::size_t i, std::size_t j) { return cost_[i * cols_ + j]; }
  double completion_ms(std::size_t i, std::size_t j) const { return completion_[i * cols_ + j]; }
  bool penalized(std::size_t i, std::size_t j) const { return penalized_[i * cols_ + j] != 0; }
  double wait_ms(std::size_t i) const { return wait_[i]; }

  void set(std::size_t i, std::size_t j, double cost, double completion_ms, bool penalized);
  void set_wait(std::size_t i, double wait_ms) { wait_[i] = wait_ms; }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> cost_;
  std::vector<double> completion_;
  std::vector<unsigned char> penalized_;
  std::vector<double> wait_;
};

struct AssignmentPlan {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (query, instance), by query index
  std::vector<std::size_t> unassigned_queries;
  std::vector<std::size_t> unassigned_instances;
  double total_cost = 0.0;
};

struct PenaltySettings {
  double multiplier = 10.0;  // L' = multiplier * t_qos for QoS-violating pairs
};

// L_ij = busy_remaining(j) + predicted latency(type_j, batch_i); a pair is penalized when
// L_ij + W_i exceeds xi * t_qos. Entries are scaled by the instance's coefficient.
CostMatrix build_cost_matrix(std::span<const Query> queries, std::span<const InstanceState> instances,
                             const LatencyPredictor& predictor, std::span<const double> coefficients,
                             const QoSSpec& qos, double now, PenaltySettings penalty = {});

// Exact rectangular min-cost assignment of size min(m, n) by shortest augmenting paths
// with dual potentials (Jonker-Volgenant).
AssignmentPlan solve(const CostMatrix& matrix);

// Exhaustive enumeration of all size-min(m, n) injections; min(m, n) <= 8.
// Among equal-cost optima the first in lexicographic enumeration order wins.
AssignmentPlan brute_force_solve(const CostMatrix& matrix);

}  // namespace hetserve
