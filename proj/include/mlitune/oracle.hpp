#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "mlitune/inverter.hpp"
#include "mlitune/objective.hpp"

namespace mlitune {

/// Largest bridge count the exhaustive search accepts.
inline constexpr std::size_t kGridSearchMaxBridges = 4;

struct GridSearchOptions {
  double step = 0.5;           // degrees
  std::size_t threads = 0;     // 0: hardware concurrency
  bool keep_values = false;    // record every evaluated of_value, in enumeration order
};

struct GridSearchResult {
  FiringAngles angles;
  Fitness fitness;
  std::size_t evaluated = 0;
  std::vector<double> values;  // only with keep_values
};

/// Grid points {0, step, 2 step, ...} not exceeding 90 degrees.
std::vector<double> angle_grid(double step);

/// Number of non-decreasing m-tuples over a grid of `points` values.
std::size_t grid_tuple_count(std::size_t points, std::size_t m);

/// Calls `visit` with every non-decreasing index tuple in lexicographic order.
void for_each_sorted_tuple(std::size_t points, std::size_t m,
                           const std::function<void(const std::vector<std::size_t>&)>& visit);

/// Exhaustive minimum of the objective over non-decreasing angle tuples on
/// the grid. Ties resolve to the lexicographically smallest tuple regardless
/// of thread scheduling. Throws ConfigError for step <= 0 or more than
/// kGridSearchMaxBridges bridges.
GridSearchResult grid_search(const InverterConfig& inv, const ObjectiveConfig& obj,
                             const GridSearchOptions& options = {});

}  // namespace mlitune
