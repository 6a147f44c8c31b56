#include "mlitune/scenario_io.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"
#include "mlitune/errors.hpp"

namespace mlitune {

namespace {

using nlohmann::json;

constexpr std::string_view kOptimizeAtStart = "optimize-at-start";

// Finds the 1-based line of the last key in `keys`, searching each key after
// the previous one. Good enough to point at a field in a hand-written file.
std::size_t locate_line(std::string_view text, const std::vector<std::string>& keys) {
  std::size_t pos = 0;
  bool found = false;
  for (const auto& key : keys) {
    const std::string quoted = "\"" + key + "\"";
    const std::size_t at = text.find(quoted, pos);
    if (at == std::string_view::npos) break;
    pos = at;
    found = true;
  }
  if (!found) return 0;
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + pos, '\n'));
}

class Reader {
 public:
  Reader(std::string_view text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& what) const {
    std::string key;
    for (const auto& p : path) key += (key.empty() ? "" : ".") + p;
    std::ostringstream msg;
    msg << source_;
    if (const std::size_t line = locate_line(text_, path); line > 0) msg << ":" << line;
    msg << ": key '" << key << "': " << what;
    throw ScenarioError(msg.str());
  }

  void require_object(const json& j, const std::vector<std::string>& path) const {
    if (!j.is_object()) fail(path, "expected an object");
  }

  void allow_only(const json& j, const std::vector<std::string>& path,
                  std::initializer_list<std::string_view> allowed) const {
    for (const auto& [key, _] : j.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        auto p = path;
        p.push_back(key);
        fail(p, "unknown key");
      }
    }
  }

  double number(const json& j, const std::vector<std::string>& path) const {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
  }

  std::size_t count(const json& j, const std::vector<std::string>& path) const {
    if (!j.is_number_integer() || j.get<long long>() < 0) fail(path, "expected a non-negative integer");
    return j.get<std::size_t>();
  }

  bool boolean(const json& j, const std::vector<std::string>& path) const {
    if (!j.is_boolean()) fail(path, "expected true or false");
    return j.get<bool>();
  }

  std::vector<double> numbers(const json& j, const std::vector<std::string>& path) const {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : j) {
      if (!x.is_number()) fail(path, "expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  template <typename T, typename Fn>
  void optional_field(const json& obj, const std::vector<std::string>& path, const char* key,
                      T& target, Fn&& convert) const {
    if (auto it = obj.find(key); it != obj.end()) {
      auto p = path;
      p.emplace_back(key);
      target = convert(*it, p);
    }
  }

  void read_number(const json& obj, const std::vector<std::string>& path, const char* key,
                   double& target) const {
    optional_field(obj, path, key, target,
                   [this](const json& j, const auto& p) { return number(j, p); });
  }

  void read_count(const json& obj, const std::vector<std::string>& path, const char* key,
                  std::size_t& target) const {
    optional_field(obj, path, key, target,
                   [this](const json& j, const auto& p) { return count(j, p); });
  }

 private:
  std::string_view text_;
  std::string source_;
};

Load parse_load(const Reader& r, const json& j, const std::vector<std::string>& path) {
  r.require_object(j, path);
  auto type_it = j.find("type");
  if (type_it == j.end() || !type_it->is_string()) {
    r.fail(path, "load needs a string 'type' (resistive, grid or open)");
  }
  const std::string type = type_it->get<std::string>();
  if (type == "resistive") {
    r.allow_only(j, path, {"type", "r_load"});
    ResistiveLoad load;
    r.read_number(j, path, "r_load", load.r_load);
    return load;
  }
  if (type == "grid") {
    r.allow_only(j, path, {"type", "v_rms", "frequency", "phase"});
    IdealGrid grid;
    r.read_number(j, path, "v_rms", grid.v_rms);
    r.read_number(j, path, "frequency", grid.frequency);
    r.read_number(j, path, "phase", grid.phase);
    return grid;
  }
  if (type == "open") {
    r.allow_only(j, path, {"type"});
    return OpenCircuit{};
  }
  auto p = path;
  p.emplace_back("type");
  r.fail(p, "unknown load type '" + type + "'");
}

InverterConfig parse_inverter(const Reader& r, const json& j) {
  const std::vector<std::string> path{"inverter"};
  r.require_object(j, path);
  r.allow_only(j, path, {"bridges", "vdc", "r_internal", "r_line", "load", "f0"});
  InverterConfig inv;
  inv.load = ResistiveLoad{};
  if (!j.contains("bridges")) r.fail(path, "missing required key 'bridges'");
  if (!j.contains("vdc")) r.fail(path, "missing required key 'vdc'");
  inv.bridges = r.count(j["bridges"], {"inverter", "bridges"});
  inv.vdc = r.numbers(j["vdc"], {"inverter", "vdc"});
  if (j.contains("r_internal")) inv.r_internal = r.numbers(j["r_internal"], {"inverter", "r_internal"});
  r.read_number(j, path, "r_line", inv.r_line);
  r.read_number(j, path, "f0", inv.f0);
  if (j.contains("load")) inv.load = parse_load(r, j["load"], {"inverter", "load"});
  return inv;
}

ObjectiveConfig parse_objective(const Reader& r, const json& j) {
  const std::vector<std::string> path{"objective"};
  r.require_object(j, path);
  r.allow_only(j, path, {"k_v", "v_target", "n_max", "n_samples"});
  ObjectiveConfig obj;
  r.read_number(j, path, "k_v", obj.k_v);
  r.read_number(j, path, "v_target", obj.v_target);
  r.read_count(j, path, "n_max", obj.n_max);
  r.read_count(j, path, "n_samples", obj.n_samples);
  return obj;
}

PsoParams parse_pso(const Reader& r, const json& j) {
  const std::vector<std::string> path{"pso"};
  r.require_object(j, path);
  r.allow_only(j, path, {"w", "c1", "c2", "v_max"});
  PsoParams pso;
  r.read_number(j, path, "w", pso.w);
  r.read_number(j, path, "c1", pso.c1);
  r.read_number(j, path, "c2", pso.c2);
  r.read_number(j, path, "v_max", pso.v_max);
  return pso;
}

GaParams parse_ga(const Reader& r, const json& j) {
  const std::vector<std::string> path{"ga"};
  r.require_object(j, path);
  r.allow_only(j, path,
               {"crossover_rate", "mutation_rate", "mutation_sigma", "sigma_decay",
                "tournament_size", "offspring_count", "blend_low", "blend_high"});
  GaParams ga;
  r.read_number(j, path, "crossover_rate", ga.crossover_rate);
  if (auto it = j.find("mutation_rate"); it != j.end() && !it->is_null()) {
    ga.mutation_rate = r.number(*it, {"ga", "mutation_rate"});
  }
  r.read_number(j, path, "mutation_sigma", ga.mutation_sigma);
  r.read_number(j, path, "sigma_decay", ga.sigma_decay);
  r.read_count(j, path, "tournament_size", ga.tournament_size);
  if (auto it = j.find("offspring_count"); it != j.end() && !it->is_null()) {
    ga.offspring_count = r.count(*it, {"ga", "offspring_count"});
  }
  r.read_number(j, path, "blend_low", ga.blend_low);
  r.read_number(j, path, "blend_high", ga.blend_high);
  return ga;
}

ChangeDetectorConfig parse_detector(const Reader& r, const json& j) {
  const std::vector<std::string> path{"detector"};
  r.require_object(j, path);
  r.allow_only(j, path, {"vrms_threshold", "thd_threshold", "periodic_interval"});
  ChangeDetectorConfig det;
  r.read_number(j, path, "vrms_threshold", det.vrms_threshold);
  r.read_number(j, path, "thd_threshold", det.thd_threshold);
  if (auto it = j.find("periodic_interval"); it != j.end() && !it->is_null()) {
    det.periodic_interval = r.number(*it, {"detector", "periodic_interval"});
  }
  return det;
}

ScenarioEvent parse_event(const Reader& r, const json& j, std::size_t index) {
  const std::vector<std::string> path{"events"};
  if (!j.is_object()) r.fail(path, "events[" + std::to_string(index) + "] must be an object");
  auto type_it = j.find("type");
  if (type_it == j.end() || !type_it->is_string()) {
    r.fail(path, "events[" + std::to_string(index) + "] needs a string 'type'");
  }
  if (!j.contains("at")) r.fail(path, "events[" + std::to_string(index) + "] needs 'at'");
  ScenarioEvent ev;
  ev.at = r.number(j["at"], {"events", "at"});
  const std::string type = type_it->get<std::string>();
  auto need = [&](const char* key) -> const json& {
    if (!j.contains(key)) {
      r.fail(path, "events[" + std::to_string(index) + "] (" + type + ") needs '" + key + "'");
    }
    return j[key];
  };
  if (type == "set_vdc_percent") {
    r.allow_only(j, path, {"at", "type", "level", "percent"});
    ev.kind = SetVdcPercent{r.count(need("level"), {"events", "level"}),
                            r.number(need("percent"), {"events", "percent"})};
  } else if (type == "set_vdc_absolute") {
    r.allow_only(j, path, {"at", "type", "level", "volts"});
    ev.kind = SetVdcAbsolute{r.count(need("level"), {"events", "level"}),
                             r.number(need("volts"), {"events", "volts"})};
  } else if (type == "set_resistor") {
    r.allow_only(j, path, {"at", "type", "which", "index", "ohms"});
    SetResistor sr;
    const json& which = need("which");
    if (which == "line") {
      sr.which = SetResistor::Which::kLine;
    } else if (which == "internal") {
      sr.which = SetResistor::Which::kInternal;
      sr.index = r.count(need("index"), {"events", "index"});
    } else {
      r.fail({"events", "which"}, "expected 'line' or 'internal'");
    }
    sr.ohms = r.number(need("ohms"), {"events", "ohms"});
    ev.kind = sr;
  } else if (type == "manual_trigger") {
    r.allow_only(j, path, {"at", "type"});
    ev.kind = ManualTrigger{};
  } else if (type == "level_failure") {
    r.allow_only(j, path, {"at", "type", "level"});
    ev.kind = LevelFailure{r.count(need("level"), {"events", "level"})};
  } else {
    r.fail({"events", "type"}, "unknown event type '" + type + "'");
  }
  return ev;
}

json event_to_json(const ScenarioEvent& ev) {
  json j;
  j["at"] = ev.at;
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, SetVdcPercent>) {
          j["type"] = "set_vdc_percent";
          j["level"] = e.level;
          j["percent"] = e.percent;
        } else if constexpr (std::is_same_v<T, SetVdcAbsolute>) {
          j["type"] = "set_vdc_absolute";
          j["level"] = e.level;
          j["volts"] = e.volts;
        } else if constexpr (std::is_same_v<T, SetResistor>) {
          j["type"] = "set_resistor";
          if (e.which == SetResistor::Which::kLine) {
            j["which"] = "line";
          } else {
            j["which"] = "internal";
            j["index"] = e.index;
          }
          j["ohms"] = e.ohms;
        } else if constexpr (std::is_same_v<T, ManualTrigger>) {
          j["type"] = "manual_trigger";
        } else {
          j["type"] = "level_failure";
          j["level"] = e.level;
        }
      },
      ev.kind);
  return j;
}

json load_to_json(const Load& load) {
  return std::visit(
      [](const auto& l) -> json {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, ResistiveLoad>) {
          return {{"type", "resistive"}, {"r_load", l.r_load}};
        } else if constexpr (std::is_same_v<T, IdealGrid>) {
          return {{"type", "grid"}, {"v_rms", l.v_rms}, {"frequency", l.frequency}, {"phase", l.phase}};
        } else {
          return {{"type", "open"}};
        }
      },
      load);
}

}  // namespace

Scenario parse_scenario_text(std::string_view text, std::string_view source) {
  const Reader r(text, std::string(source));
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string(source) + ": malformed JSON: " + e.what());
  }
  r.require_object(doc, {});
  r.allow_only(doc, {},
               {"inverter", "objective", "pso", "ga", "population", "budget_evals", "duration",
                "events", "initial_angles", "detector", "disconnect_during_tuning", "seed", "stop"});

  Scenario s;
  if (!doc.contains("inverter")) r.fail({"inverter"}, "missing required section");
  s.inverter = parse_inverter(r, doc["inverter"]);
  if (doc.contains("objective")) s.objective = parse_objective(r, doc["objective"]);
  if (doc.contains("pso")) s.pso = parse_pso(r, doc["pso"]);
  if (doc.contains("ga")) s.ga = parse_ga(r, doc["ga"]);
  if (doc.contains("detector")) s.detector = parse_detector(r, doc["detector"]);
  r.read_count(doc, {}, "population", s.population);
  r.read_count(doc, {}, "budget_evals", s.budget_evals);
  r.read_number(doc, {}, "duration", s.duration);
  if (doc.contains("disconnect_during_tuning")) {
    s.disconnect_during_tuning = r.boolean(doc["disconnect_during_tuning"], {"disconnect_during_tuning"});
  }
  if (doc.contains("seed")) {
    const json& seed = doc["seed"];
    if (!seed.is_number_integer() || (seed.is_number_integer() && !seed.is_number_unsigned() &&
                                      seed.get<long long>() < 0)) {
      r.fail({"seed"}, "expected a non-negative integer");
    }
    s.seed = seed.get<std::uint64_t>();
  }
  if (doc.contains("stop")) {
    const json& stop = doc["stop"];
    r.require_object(stop, {"stop"});
    r.allow_only(stop, {"stop"}, {"stagnation_generations", "stagnation_tolerance"});
    r.read_count(stop, {"stop"}, "stagnation_generations", s.stagnation_generations);
    r.read_number(stop, {"stop"}, "stagnation_tolerance", s.stagnation_tolerance);
  }
  if (doc.contains("events")) {
    const json& events = doc["events"];
    if (!events.is_array()) r.fail({"events"}, "expected an array");
    for (std::size_t i = 0; i < events.size(); ++i) s.events.push_back(parse_event(r, events[i], i));
  }
  if (doc.contains("initial_angles")) {
    const json& ia = doc["initial_angles"];
    if (ia.is_string() && ia.get<std::string>() == kOptimizeAtStart) {
      s.initial_angles.reset();
    } else if (ia.is_array()) {
      try {
        s.initial_angles = FiringAngles(r.numbers(ia, {"initial_angles"}));
      } catch (const ConfigError& e) {
        r.fail({"initial_angles"}, e.what());
      }
    } else {
      r.fail({"initial_angles"}, "expected an array of degrees or \"optimize-at-start\"");
    }
  }

  try {
    s.validate();
  } catch (const ScenarioError& e) {
    throw ScenarioError(std::string(source) + ": " + e.what());
  }
  return s;
}

Scenario parse_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(path.string() + ": cannot open scenario file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario_text(buffer.str(), path.string());
}

std::string scenario_to_json(const Scenario& s, int indent) {
  json doc;
  doc["inverter"] = {{"bridges", s.inverter.bridges},
                     {"vdc", s.inverter.vdc},
                     {"r_internal", s.inverter.r_internal},
                     {"r_line", s.inverter.r_line},
                     {"load", load_to_json(s.inverter.load)},
                     {"f0", s.inverter.f0}};
  doc["objective"] = {{"k_v", s.objective.k_v},
                      {"v_target", s.objective.v_target},
                      {"n_max", s.objective.n_max},
                      {"n_samples", s.objective.n_samples}};
  doc["pso"] = {{"w", s.pso.w}, {"c1", s.pso.c1}, {"c2", s.pso.c2}, {"v_max", s.pso.v_max}};
  json ga = {{"crossover_rate", s.ga.crossover_rate},
             {"mutation_sigma", s.ga.mutation_sigma},
             {"sigma_decay", s.ga.sigma_decay},
             {"tournament_size", s.ga.tournament_size},
             {"blend_low", s.ga.blend_low},
             {"blend_high", s.ga.blend_high}};
  ga["mutation_rate"] = s.ga.mutation_rate ? json(*s.ga.mutation_rate) : json(nullptr);
  ga["offspring_count"] = s.ga.offspring_count ? json(*s.ga.offspring_count) : json(nullptr);
  doc["ga"] = ga;
  doc["population"] = s.population;
  doc["budget_evals"] = s.budget_evals;
  doc["duration"] = s.duration;
  doc["events"] = json::array();
  for (const auto& ev : s.events) doc["events"].push_back(event_to_json(ev));
  doc["initial_angles"] =
      s.initial_angles ? json(s.initial_angles->vector()) : json(std::string(kOptimizeAtStart));
  doc["detector"] = {{"vrms_threshold", s.detector.vrms_threshold},
                     {"thd_threshold", s.detector.thd_threshold},
                     {"periodic_interval", s.detector.periodic_interval
                                               ? json(*s.detector.periodic_interval)
                                               : json(nullptr)}};
  doc["disconnect_during_tuning"] = s.disconnect_during_tuning;
  doc["seed"] = s.seed;
  doc["stop"] = {{"stagnation_generations", s.stagnation_generations},
                 {"stagnation_tolerance", s.stagnation_tolerance}};
  return doc.dump(indent) + "\n";
}

}  // namespace mlitune
