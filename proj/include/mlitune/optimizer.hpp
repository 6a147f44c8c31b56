#pragma once

// Series hybrid GA/PSO over firing angles.
//
// One population is shared by both paradigms. Each generation runs
//   PSO velocity/position update -> evaluate -> GA offspring -> evaluate
//   -> merge parents and offspring, sort by fitness, truncate to n.
// Particles carry their pbest memory through selection and crossover, so the
// GA phase never loses the best positions found by the swarm.
//
// Evaluation is inverted: callers pull candidates with ask() and push
// fitness back with tell(). The engine advances to the next phase only once
// every candidate of the current batch has been told.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "mlitune/inverter.hpp"
#include "mlitune/objective.hpp"

namespace mlitune {

struct PsoParams {
  double w = 0.72;     // inertia weight
  double c1 = 1.49;    // cognitive acceleration
  double c2 = 1.49;    // social acceleration
  double v_max = 20.0; // degrees per iteration, per dimension

  void validate() const;
  bool operator==(const PsoParams&) const = default;
};

struct GaParams {
  double crossover_rate = 0.9;
  std::optional<double> mutation_rate;  // per gene; unset means 1/m
  double mutation_sigma = 5.0;          // degrees
  double sigma_decay = 0.99;            // applied once per generation
  std::size_t tournament_size = 2;
  std::optional<std::size_t> offspring_count;  // unset means population size
  double blend_low = -0.1;   // range of the per-gene blend coefficient
  double blend_high = 1.1;

  void validate() const;
  double mutation_rate_for(std::size_t m) const;
  std::size_t offspring_for(std::size_t population) const;
  bool operator==(const GaParams&) const = default;
};

struct StopCriteria {
  std::size_t budget = 500;
  // Stop when gbest improves by less than `stagnation_tolerance` across this
  // many consecutive generations. Zero disables the check.
  std::size_t stagnation_generations = 5;
  double stagnation_tolerance = 1e-3;

  bool operator==(const StopCriteria&) const = default;
};

struct Particle {
  FiringAngles position;
  std::vector<double> velocity;
  FiringAngles pbest_position;
  std::optional<Fitness> pbest_fitness;
  std::optional<Fitness> fitness;  // latest evaluation of `position`
};

enum class Phase { kInitial, kPso, kGa };

/// Where a queued candidate's fitness will be recorded.
struct Slot {
  enum class Pool { kParticle, kOffspring } pool = Pool::kParticle;
  std::size_t index = 0;
};

struct PendingCandidate {
  std::uint64_t id = 0;
  Slot slot;
  FiringAngles angles;
};

struct SwarmState {
  std::size_t dimension = 0;
  std::size_t population = 0;
  std::vector<Particle> particles;
  std::vector<Particle> offspring;
  FiringAngles gbest_position;
  std::optional<Fitness> gbest_fitness;
  std::size_t generation = 0;
  std::size_t evaluations_used = 0;
  std::uint64_t rng_seed = 0;
  std::mt19937_64 rng;
  double mutation_sigma = 5.0;
  Phase phase = Phase::kInitial;
  std::uint64_t next_id = 0;
  std::deque<PendingCandidate> pending;
  std::map<std::uint64_t, PendingCandidate> outstanding;
};

/// Clamp each component to [0, 90] and sort ascending. Total and idempotent.
FiringAngles repair(std::span<const double> raw);

/// Uniform positions in [0, 90]^m (repaired), uniform velocities in
/// [-v_max, v_max]. All n positions are queued for their first evaluation.
SwarmState init_swarm(std::size_t m, const PsoParams& pso, const GaParams& ga, std::size_t n,
                      std::uint64_t seed);

/// Single-particle velocity/position update with explicit r1, r2.
/// Velocity is clamped to +-v_max, the new position is repaired.
void pso_update(Particle& particle, const FiringAngles& gbest, const PsoParams& pso, double r1,
                double r2);

/// Draws scalar r1, r2 per particle, moves every particle and queues it.
/// Throws OrderingError before the initial evaluation has completed.
void pso_step(SwarmState& state, const PsoParams& pso);

/// child_d = alpha_d p1_d + (1 - alpha_d) p2_d
std::vector<double> blend_crossover(std::span<const double> p1, std::span<const double> p2,
                                    std::span<const double> alphas);

/// Tournament index on pbest fitness over `contestants` drawn indices.
/// Ties go to the lower particle index.
std::size_t tournament_pick(const std::vector<Particle>& particles,
                            std::span<const std::size_t> contestants);

/// Breeds offspring from the evaluated population and queues them.
/// Throws OrderingError while PSO candidates are still unevaluated.
void ga_step(SwarmState& state, const GaParams& ga);

/// Pool parents and evaluated offspring, keep the n best by latest fitness
/// (stable: parents before offspring, lower index first), advance the
/// generation and decay the mutation sigma.
void merge_truncate(SwarmState& state, const GaParams& ga);

/// Record a fitness for a slot: updates that particle's pbest and the gbest.
void record_fitness(SwarmState& state, const Slot& slot, const Fitness& fitness);

struct Candidate {
  std::uint64_t id = 0;
  FiringAngles angles;
};

/// Thrown by ask() once the search is over. Carries the incumbent.
class SearchExhausted : public std::runtime_error {
 public:
  enum class Reason { kBudget, kStagnation };
  SearchExhausted(Reason reason, FiringAngles best, std::optional<Fitness> fitness);

  Reason reason() const { return reason_; }
  const FiringAngles& best() const { return best_; }
  const std::optional<Fitness>& best_fitness() const { return fitness_; }

 private:
  Reason reason_;
  FiringAngles best_;
  std::optional<Fitness> fitness_;
};

class HybridOptimizer {
 public:
  HybridOptimizer(std::size_t dimension, PsoParams pso, GaParams ga, std::size_t population,
                  std::uint64_t seed, StopCriteria stop = {},
                  std::optional<FiringAngles> seed_position = std::nullopt);

  /// Next candidate to evaluate. Throws SearchExhausted when the budget is
  /// spent or the search has stagnated, ProtocolError when the batch is
  /// handed out and tells are still outstanding.
  Candidate ask();

  /// Throws ProtocolError for ids that are not outstanding.
  void tell(std::uint64_t id, const Fitness& fitness);

  /// True once no further ask() can succeed.
  bool finished() const;
  std::optional<SearchExhausted::Reason> finish_reason() const;

  const SwarmState& state() const { return state_; }
  const FiringAngles& best_position() const { return state_.gbest_position; }
  const std::optional<Fitness>& best_fitness() const { return state_.gbest_fitness; }
  std::size_t evaluations_used() const { return state_.evaluations_used; }
  std::size_t budget() const { return stop_.budget; }

  /// Run ask/tell to completion against a fitness function.
  template <typename Fn>
  void run(Fn&& fitness_fn) {
    while (!finished()) {
      const Candidate c = ask();
      tell(c.id, fitness_fn(c.angles));
    }
  }

 private:
  void refill();
  bool stagnated() const;

  PsoParams pso_;
  GaParams ga_;
  StopCriteria stop_;
  SwarmState state_;
  std::vector<double> gbest_history_;  // gbest value after each merge
};

}  // namespace mlitune
