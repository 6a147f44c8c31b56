#include "mlitune/optimizer.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "mlitune/errors.hpp"

namespace mlitune {

namespace {

constexpr double kAngleMax = 90.0;

bool better(const Fitness& a, const Fitness& b) { return a.of_value() < b.of_value(); }

Particle& slot_particle(SwarmState& state, const Slot& slot) {
  auto& pool = slot.pool == Slot::Pool::kParticle ? state.particles : state.offspring;
  if (slot.index >= pool.size()) throw ProtocolError("candidate slot no longer exists");
  return pool[slot.index];
}

void enqueue(SwarmState& state, Slot slot, const FiringAngles& angles) {
  state.pending.push_back({state.next_id++, slot, angles});
}

void require_quiescent(const SwarmState& state, const char* step) {
  if (!state.pending.empty() || !state.outstanding.empty()) {
    throw OrderingError(std::string(step) + " called with unevaluated candidates pending");
  }
}

}  // namespace

void PsoParams::validate() const {
  if (!(w >= 0.0 && w <= 1.2)) throw ConfigError("pso.w must lie in [0, 1.2]");
  if (!(c1 >= 0.0) || !(c2 >= 0.0)) throw ConfigError("pso.c1 and pso.c2 must be >= 0");
  if (!(v_max > 0.0)) throw ConfigError("pso.v_max must be > 0");
}

void GaParams::validate() const {
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) {
    throw ConfigError("ga.crossover_rate must lie in [0, 1]");
  }
  if (mutation_rate && !(*mutation_rate >= 0.0 && *mutation_rate <= 1.0)) {
    throw ConfigError("ga.mutation_rate must lie in [0, 1]");
  }
  if (!(mutation_sigma > 0.0)) throw ConfigError("ga.mutation_sigma must be > 0");
  if (!(sigma_decay > 0.0 && sigma_decay <= 1.0)) throw ConfigError("ga.sigma_decay must lie in (0, 1]");
  if (tournament_size < 2) throw ConfigError("ga.tournament_size must be >= 2");
  if (offspring_count && *offspring_count < 1) throw ConfigError("ga.offspring_count must be >= 1");
  if (!(blend_low <= blend_high)) throw ConfigError("ga blend range is empty");
}

double GaParams::mutation_rate_for(std::size_t m) const {
  return mutation_rate.value_or(1.0 / static_cast<double>(m));
}

std::size_t GaParams::offspring_for(std::size_t population) const {
  return offspring_count.value_or(population);
}

FiringAngles repair(std::span<const double> raw) {
  std::vector<double> x(raw.begin(), raw.end());
  for (double& v : x) {
    // NaN maps to 0 so the result is always feasible.
    v = (v >= 0.0) ? std::min(v, kAngleMax) : 0.0;
  }
  std::sort(x.begin(), x.end());
  return FiringAngles(std::move(x));
}

SwarmState init_swarm(std::size_t m, const PsoParams& pso, const GaParams& ga, std::size_t n,
                      std::uint64_t seed) {
  if (m < 1) throw ConfigError("swarm dimension must be >= 1");
  if (n < 2) throw ConfigError("population must be >= 2");
  pso.validate();
  ga.validate();

  SwarmState state;
  state.dimension = m;
  state.population = n;
  state.rng_seed = seed;
  state.rng.seed(seed);
  state.mutation_sigma = ga.mutation_sigma;

  std::uniform_real_distribution<double> pos(0.0, kAngleMax);
  std::uniform_real_distribution<double> vel(-pso.v_max, pso.v_max);
  state.particles.resize(n);
  for (auto& p : state.particles) {
    std::vector<double> raw(m);
    for (double& x : raw) x = pos(state.rng);
    p.velocity.resize(m);
    for (double& v : p.velocity) v = vel(state.rng);
    p.position = repair(raw);
    p.pbest_position = p.position;
  }
  for (std::size_t i = 0; i < n; ++i) {
    enqueue(state, {Slot::Pool::kParticle, i}, state.particles[i].position);
  }
  state.phase = Phase::kInitial;
  return state;
}

void pso_update(Particle& particle, const FiringAngles& gbest, const PsoParams& pso, double r1,
                double r2) {
  const std::size_t m = particle.position.size();
  std::vector<double> next(m);
  for (std::size_t d = 0; d < m; ++d) {
    const double x = particle.position[d];
    double v = pso.w * particle.velocity[d] + pso.c1 * r1 * (particle.pbest_position[d] - x) +
               pso.c2 * r2 * (gbest[d] - x);
    v = std::clamp(v, -pso.v_max, pso.v_max);
    particle.velocity[d] = v;
    next[d] = x + v;
  }
  particle.position = repair(next);
  particle.fitness.reset();
}

void pso_step(SwarmState& state, const PsoParams& pso) {
  require_quiescent(state, "pso_step");
  if (!state.gbest_fitness) throw OrderingError("pso_step before initial evaluation (no gbest)");
  for (const auto& p : state.particles) {
    if (!p.pbest_fitness) throw OrderingError("pso_step before initial evaluation (no pbest)");
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < state.particles.size(); ++i) {
    const double r1 = unit(state.rng);
    const double r2 = unit(state.rng);
    pso_update(state.particles[i], state.gbest_position, pso, r1, r2);
    enqueue(state, {Slot::Pool::kParticle, i}, state.particles[i].position);
  }
  state.phase = Phase::kPso;
}

std::vector<double> blend_crossover(std::span<const double> p1, std::span<const double> p2,
                                    std::span<const double> alphas) {
  if (p1.size() != p2.size() || p1.size() != alphas.size()) {
    throw ConfigError("blend_crossover: dimension mismatch");
  }
  std::vector<double> child(p1.size());
  for (std::size_t d = 0; d < p1.size(); ++d) {
    child[d] = alphas[d] * p1[d] + (1.0 - alphas[d]) * p2[d];
  }
  return child;
}

std::size_t tournament_pick(const std::vector<Particle>& particles,
                            std::span<const std::size_t> contestants) {
  std::size_t best = contestants.front();
  for (std::size_t idx : contestants) {
    const auto& cand = particles[idx].pbest_fitness;
    const auto& cur = particles[best].pbest_fitness;
    if (better(*cand, *cur) || (cand->of_value() == cur->of_value() && idx < best)) best = idx;
  }
  return best;
}

void ga_step(SwarmState& state, const GaParams& ga) {
  require_quiescent(state, "ga_step");
  for (const auto& p : state.particles) {
    if (!p.pbest_fitness || !p.fitness) throw OrderingError("ga_step on unevaluated population");
  }
  const std::size_t m = state.dimension;
  const std::size_t n = state.particles.size();
  const std::size_t count = ga.offspring_for(state.population);
  const double rate = ga.mutation_rate_for(m);

  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> blend(ga.blend_low, ga.blend_high);
  std::normal_distribution<double> gauss(0.0, state.mutation_sigma);

  std::vector<std::size_t> contestants(ga.tournament_size);
  auto tournament = [&] {
    for (auto& c : contestants) c = pick(state.rng);
    return tournament_pick(state.particles, contestants);
  };

  state.offspring.clear();
  state.offspring.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    const std::size_t a = tournament();
    const std::size_t b = tournament();
    const Particle& pa = state.particles[a];
    const Particle& pb = state.particles[b];

    std::vector<double> genes = pa.position.vector();
    if (unit(state.rng) < ga.crossover_rate) {
      std::vector<double> alphas(m);
      for (double& al : alphas) al = blend(state.rng);
      genes = blend_crossover(pa.position.degrees(), pb.position.degrees(), alphas);
    }
    for (double& g : genes) {
      if (unit(state.rng) < rate) g += gauss(state.rng);
    }

    // The child remembers the better parent's experience.
    const Particle& elder = better(*pb.pbest_fitness, *pa.pbest_fitness) ? pb : pa;
    Particle child;
    child.position = repair(genes);
    child.velocity = elder.velocity;
    child.pbest_position = elder.pbest_position;
    child.pbest_fitness = elder.pbest_fitness;
    state.offspring.push_back(std::move(child));
    enqueue(state, {Slot::Pool::kOffspring, c}, state.offspring.back().position);
  }
  state.phase = Phase::kGa;
}

void merge_truncate(SwarmState& state, const GaParams& ga) {
  require_quiescent(state, "merge_truncate");
  std::vector<Particle> pool;
  pool.reserve(state.particles.size() + state.offspring.size());
  for (auto& p : state.particles) pool.push_back(std::move(p));
  for (auto& p : state.offspring) {
    if (!p.fitness) throw OrderingError("merge_truncate with unevaluated offspring");
    pool.push_back(std::move(p));
  }
  auto latest = [](const Particle& p) {
    return p.fitness ? p.fitness->of_value() : std::numeric_limits<double>::infinity();
  };
  std::stable_sort(pool.begin(), pool.end(),
                   [&](const Particle& a, const Particle& b) { return latest(a) < latest(b); });
  pool.resize(std::min(pool.size(), state.population));
  state.particles = std::move(pool);
  state.offspring.clear();
  state.generation += 1;
  state.mutation_sigma *= ga.sigma_decay;
}

void record_fitness(SwarmState& state, const Slot& slot, const Fitness& fitness) {
  Particle& p = slot_particle(state, slot);
  p.fitness = fitness;
  if (!p.pbest_fitness || better(fitness, *p.pbest_fitness)) {
    p.pbest_fitness = fitness;
    p.pbest_position = p.position;
  }
  if (!state.gbest_fitness || better(fitness, *state.gbest_fitness)) {
    state.gbest_fitness = fitness;
    state.gbest_position = p.position;
  }
}

SearchExhausted::SearchExhausted(Reason reason, FiringAngles best, std::optional<Fitness> fitness)
    : std::runtime_error(reason == Reason::kBudget ? "evaluation budget exhausted"
                                                   : "search stagnated"),
      reason_(reason),
      best_(std::move(best)),
      fitness_(fitness) {}

HybridOptimizer::HybridOptimizer(std::size_t dimension, PsoParams pso, GaParams ga,
                                 std::size_t population, std::uint64_t seed, StopCriteria stop,
                                 std::optional<FiringAngles> seed_position)
    : pso_(pso), ga_(ga), stop_(stop) {
  state_ = init_swarm(dimension, pso_, ga_, population, seed);
  if (seed_position) {
    if (seed_position->size() != dimension) {
      throw ConfigError("seed position dimension does not match the swarm");
    }
    state_.particles.front().position = *seed_position;
    state_.particles.front().pbest_position = *seed_position;
    state_.pending.front().angles = *seed_position;
  }
}

bool HybridOptimizer::stagnated() const {
  const std::size_t window = stop_.stagnation_generations;
  if (window == 0 || gbest_history_.size() <= window) return false;
  const double then = gbest_history_[gbest_history_.size() - 1 - window];
  const double now = gbest_history_.back();
  return then - now < stop_.stagnation_tolerance;
}

std::optional<SearchExhausted::Reason> HybridOptimizer::finish_reason() const {
  if (state_.evaluations_used >= stop_.budget) return SearchExhausted::Reason::kBudget;
  if (state_.pending.empty() && state_.outstanding.empty() && stagnated()) {
    return SearchExhausted::Reason::kStagnation;
  }
  return std::nullopt;
}

bool HybridOptimizer::finished() const { return finish_reason().has_value(); }

void HybridOptimizer::refill() {
  switch (state_.phase) {
    case Phase::kInitial:
      pso_step(state_, pso_);
      break;
    case Phase::kPso:
      ga_step(state_, ga_);
      break;
    case Phase::kGa:
      merge_truncate(state_, ga_);
      gbest_history_.push_back(state_.gbest_fitness->of_value());
      if (!stagnated()) pso_step(state_, pso_);
      break;
  }
}

Candidate HybridOptimizer::ask() {
  if (auto reason = finish_reason()) {
    throw SearchExhausted(*reason, state_.gbest_position, state_.gbest_fitness);
  }
  if (state_.evaluations_used + state_.outstanding.size() >= stop_.budget) {
    throw SearchExhausted(SearchExhausted::Reason::kBudget, state_.gbest_position,
                          state_.gbest_fitness);
  }
  if (state_.pending.empty()) {
    throw ProtocolError("batch fully handed out; tell outstanding candidates before asking");
  }
  PendingCandidate next = std::move(state_.pending.front());
  state_.pending.pop_front();
  Candidate c{next.id, next.angles};
  state_.outstanding.emplace(next.id, std::move(next));
  return c;
}

void HybridOptimizer::tell(std::uint64_t id, const Fitness& fitness) {
  auto it = state_.outstanding.find(id);
  if (it == state_.outstanding.end()) {
    throw ProtocolError("tell for unknown or already-told candidate " + std::to_string(id));
  }
  record_fitness(state_, it->second.slot, fitness);
  state_.outstanding.erase(it);
  state_.evaluations_used += 1;
  if (state_.pending.empty() && state_.outstanding.empty() &&
      state_.evaluations_used < stop_.budget) {
    refill();
  }
}

}  // namespace mlitune
