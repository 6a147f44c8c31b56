#include "mlitune/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <thread>

#include "mlitune/errors.hpp"

namespace mlitune {

std::vector<double> angle_grid(double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("grid step must be > 0");
  std::vector<double> grid;
  for (std::size_t k = 0;; ++k) {
    const double a = static_cast<double>(k) * step;
    if (a > 90.0 + 1e-9) break;
    grid.push_back(std::min(a, 90.0));
  }
  return grid;
}

std::size_t grid_tuple_count(std::size_t points, std::size_t m) {
  // C(points + m - 1, m), built incrementally so it stays exact.
  std::size_t c = 1;
  for (std::size_t i = 1; i <= m; ++i) c = c * (points + i - 1) / i;
  return c;
}

void for_each_sorted_tuple(std::size_t points, std::size_t m,
                           const std::function<void(const std::vector<std::size_t>&)>& visit) {
  if (points == 0) return;
  std::vector<std::size_t> idx(m, 0);
  if (m == 0) {
    visit(idx);
    return;
  }
  while (true) {
    visit(idx);
    // Advance the rightmost index that can still grow; reset the tail to it.
    std::size_t k = m;
    while (k > 0 && idx[k - 1] == points - 1) --k;
    if (k == 0) return;
    const std::size_t v = ++idx[k - 1];
    std::fill(idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), v);
  }
}

namespace {

struct PartialBest {
  double value = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> tuple;
  std::optional<Fitness> fitness;
};

}  // namespace

GridSearchResult grid_search(const InverterConfig& inv, const ObjectiveConfig& obj,
                             const GridSearchOptions& options) {
  inv.validate();
  obj.validate();
  const std::size_t m = inv.bridges;
  if (m > kGridSearchMaxBridges) {
    throw ConfigError("grid search refuses " + std::to_string(m) + " bridges (limit " +
                      std::to_string(kGridSearchMaxBridges) +
                      "); use the hybrid optimizer or a coarser problem");
  }
  const std::vector<double> grid = angle_grid(options.step);
  const std::size_t points = grid.size();
  const std::size_t total = grid_tuple_count(points, m);

  GridSearchResult result;
  if (options.keep_values) result.values.assign(total, 0.0);

  // Work item i fixes the first index to i; its tuples occupy a contiguous
  // block of the lexicographic order starting at offsets[i].
  std::vector<std::size_t> offsets(points + 1, 0);
  for (std::size_t i = 0; i < points; ++i) {
    offsets[i + 1] = offsets[i] + grid_tuple_count(points - i, m - 1);
  }

  std::vector<PartialBest> partial(points);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    std::vector<double> theta(m);
    for (std::size_t first = next++; first < points; first = next++) {
      PartialBest& best = partial[first];
      std::size_t pos = offsets[first];
      for_each_sorted_tuple(points - first, m - 1, [&](const std::vector<std::size_t>& rest) {
        theta[0] = grid[first];
        for (std::size_t d = 1; d < m; ++d) theta[d] = grid[first + rest[d - 1]];
        const Fitness f = evaluate(inv, obj, FiringAngles(theta));
        if (options.keep_values) result.values[pos] = f.of_value();
        ++pos;
        if (f.of_value() < best.value) {
          best.value = f.of_value();
          best.fitness = f;
          best.tuple.assign(1, first);
          for (std::size_t r : rest) best.tuple.push_back(first + r);
        }
      });
    }
  };

  std::size_t threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, points);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  // Reduce in item order with strict comparison: earliest tuple wins ties.
  const PartialBest* winner = nullptr;
  for (const auto& p : partial) {
    if (p.fitness && (!winner || p.value < winner->value)) winner = &p;
  }
  std::vector<double> theta(m);
  for (std::size_t d = 0; d < m; ++d) theta[d] = grid[winner->tuple[d]];
  result.angles = FiringAngles(theta);
  result.fitness = *winner->fitness;
  result.evaluated = total;
  return result;
}

}  // namespace mlitune
