#include "mampc/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "mampc/csv.hpp"

namespace mampc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& value) {
  const char* begin = value.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || trim(end) != "")
    throw ConfigError("config: bad number for '" + key + "': " + value);
  return v;
}

int to_int(const std::string& key, const std::string& value) {
  const double v = to_double(key, value);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    throw ConfigError("config: expected an integer for '" + key + "': " + value);
  return i;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config: expected true/false for '" + key + "': " + value);
}

std::vector<double> to_vector(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(to_double(key, trim(field)));
  if (out.empty()) throw ConfigError("config: empty list for '" + key + "'");
  return out;
}

std::string from_vector(const std::vector<double>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_num(v[i]);
  }
  return out;
}

struct Field {
  std::string key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define NUM_FIELD(key, member) \
  {key, [](ExperimentConfig& c, const std::string& v) { c.member = to_double(key, v); }, \
   [](const ExperimentConfig& c) { return format_num(c.member); }}
#define INT_FIELD(key, member) \
  {key, [](ExperimentConfig& c, const std::string& v) { c.member = to_int(key, v); }, \
   [](const ExperimentConfig& c) { return std::to_string(c.member); }}
#define BOOL_FIELD(key, member) \
  {key, [](ExperimentConfig& c, const std::string& v) { c.member = to_bool(key, v); }, \
   [](const ExperimentConfig& c) { return c.member ? "true" : "false"; }}
#define VEC_FIELD(key, member) \
  {key, [](ExperimentConfig& c, const std::string& v) { c.member = to_vector(key, v); }, \
   [](const ExperimentConfig& c) { return from_vector(c.member); }}

const std::vector<Field>& field_table() {
  static const std::vector<Field> fields = {
      {"plant",
       [](ExperimentConfig& c, const std::string& v) {
         if (v != "tank" && v != "sofc")
           throw ConfigError("config: plant must be 'tank' or 'sofc', got '" + v + "'");
         c.plant = v;
       },
       [](const ExperimentConfig& c) { return c.plant; }},
      INT_FIELD("seed", seed),
      NUM_FIELD("sim.dt", sample_dt),
      INT_FIELD("sim.samples", sim_samples),
      INT_FIELD("sim.settle", settle_samples),
      INT_FIELD("sim.substeps", plant_substeps),
      INT_FIELD("prbs.order", prbs_order),
      INT_FIELD("prbs.hold", prbs_hold),
      VEC_FIELD("prbs.low", prbs_low),
      VEC_FIELD("prbs.high", prbs_high),
      INT_FIELD("id.order", id_order),
      INT_FIELD("id.block_rows", id_block_rows),
      INT_FIELD("horizon.np", n_p),
      INT_FIELD("horizon.nc", n_c),
      INT_FIELD("horizon.ns", n_s),
      INT_FIELD("horizon.s", s),
      NUM_FIELD("cost.lambda", lambda),
      NUM_FIELD("cost.mu", mu),
      NUM_FIELD("alt.eps1", eps1),
      INT_FIELD("alt.max_iter", max_alt_iter),
      BOOL_FIELD("alt.warm_start", alt_warm_start),
      BOOL_FIELD("alt.exclude_past_differences", exclude_past_differences),
      NUM_FIELD("qp.tol", qp_tol),
      INT_FIELD("qp.max_iter", qp_max_iter),
      VEC_FIELD("limits.u_min", u_min),
      VEC_FIELD("limits.u_max", u_max),
      VEC_FIELD("limits.y_min", y_min),
      VEC_FIELD("limits.y_max", y_max),
      INT_FIELD("run.steps", run_steps),
      INT_FIELD("run.bootstrap", bootstrap),
      BOOL_FIELD("run.bias_correction", bias_correction),
      INT_FIELD("run.drop", drop),
      NUM_FIELD("run.threshold", threshold),
      NUM_FIELD("tank.gamma1", tank_gamma1),
      NUM_FIELD("tank.gamma2", tank_gamma2),
      NUM_FIELD("sofc.temperature", sofc_temperature),
      NUM_FIELD("sofc.current", sofc_current),
      NUM_FIELD("sofc.anode_volume", sofc_anode_volume),
      NUM_FIELD("sofc.cathode_volume", sofc_cathode_volume),
      NUM_FIELD("sofc.cell_area", sofc_cell_area),
      NUM_FIELD("sofc.orifice_ratio", sofc_orifice_ratio),
      NUM_FIELD("sofc.fuel_h2_fraction", sofc_fuel_h2_fraction),
      NUM_FIELD("sofc.air_o2_fraction", sofc_air_o2_fraction),
  };
  return fields;
}

#undef NUM_FIELD
#undef INT_FIELD
#undef BOOL_FIELD
#undef VEC_FIELD

}  // namespace

ExperimentConfig default_config(const std::string& plant) {
  ExperimentConfig c;
  if (plant == "tank") {
    c.plant = "tank";
    c.sample_dt = 5.0;
    c.sim_samples = 2200;
    c.plant_substeps = 5;
    c.prbs_hold = 4;
    c.prbs_low = {37.5, 37.5};
    c.prbs_high = {62.5, 62.5};
    c.u_min = {0.0, 0.0};
    c.u_max = {100.0, 100.0};
    const double inf = std::numeric_limits<double>::infinity();
    c.y_min = {-inf, -inf};
    c.y_max = {inf, inf};
    c.reference = {{0, {0.0, 0.0}}, {30, {2.0, 2.0}}, {120, {-1.0, -1.0}}};
  } else if (plant == "sofc") {
    c.plant = "sofc";
    c.sample_dt = 0.01;
    c.sim_samples = 3000;
    c.plant_substeps = 50;
    c.prbs_hold = 5;
    c.prbs_low = {1.14, 4.5};
    c.prbs_high = {1.26, 5.5};
    c.u_min = {0.95, 3.5};
    c.u_max = {1.6, 6.5};
    const double inf = std::numeric_limits<double>::infinity();
    c.y_min = {-inf};
    c.y_max = {inf};
    c.reference = {{0, {0.0}}, {50, {2.0}}, {150, {-1.0}}};
  } else {
    throw ConfigError("config: unknown plant '" + plant + "'");
  }
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) +
                        " is not 'key = value': " + line);
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }

  std::string plant = "tank";
  for (const auto& [k, v] : entries)
    if (k == "plant") plant = v;
  ExperimentConfig cfg = default_config(plant);

  bool reference_given = false;
  std::map<int, ReferenceSegment> segments;
  for (const auto& [key, value] : entries) {
    if (key.rfind("reference.", 0) == 0) {
      const auto rest = key.substr(10);
      const auto dot = rest.find('.');
      if (dot == std::string::npos)
        throw ConfigError("config: expected reference.<n>.start/level, got '" + key + "'");
      const int idx = to_int(key, rest.substr(0, dot));
      const std::string what = rest.substr(dot + 1);
      if (!reference_given) {
        cfg.reference.clear();
        reference_given = true;
      }
      if (what == "start")
        segments[idx].start = to_int(key, value);
      else if (what == "level") {
        const auto lv = to_vector(key, value);
        segments[idx].level = lv;
      } else
        throw ConfigError("config: unknown reference field '" + key + "'");
      continue;
    }
    bool found = false;
    for (const auto& field : field_table()) {
      if (field.key == key) {
        field.set(cfg, value);
        found = true;
        break;
      }
    }
    if (!found) throw ConfigError("config: unknown key '" + key + "'");
  }
  if (reference_given) {
    for (const auto& [idx, seg] : segments) {
      if (seg.level.empty())
        throw ConfigError("config: reference." + std::to_string(idx) + " has no level");
      cfg.reference.push_back(seg);
    }
    std::sort(cfg.reference.begin(), cfg.reference.end(),
              [](const ReferenceSegment& a, const ReferenceSegment& b) {
                return a.start < b.start;
              });
  }

  // cross-field checks that do not need the plant built
  const int m = cfg.input_dim();
  const int l = cfg.output_dim();
  auto expect_size = [&](const std::vector<double>& v, int dim, const char* what) {
    if (static_cast<int>(v.size()) != dim)
      throw ConfigError(std::string("config: ") + what + " must have " +
                        std::to_string(dim) + " entries");
  };
  expect_size(cfg.prbs_low, m, "prbs.low");
  expect_size(cfg.prbs_high, m, "prbs.high");
  expect_size(cfg.u_min, m, "limits.u_min");
  expect_size(cfg.u_max, m, "limits.u_max");
  expect_size(cfg.y_min, l, "limits.y_min");
  expect_size(cfg.y_max, l, "limits.y_max");
  for (const auto& seg : cfg.reference)
    expect_size(seg.level, l, "reference level");
  if (cfg.sample_dt <= 0.0) throw ConfigError("config: sim.dt must be positive");
  if (cfg.plant_substeps < 1) throw ConfigError("config: sim.substeps must be >= 1");
  if (cfg.run_steps < 1) throw ConfigError("config: run.steps must be >= 1");
  if (cfg.bootstrap < cfg.n_s)
    throw ConfigError("config: run.bootstrap must be >= horizon.ns");
  if (cfg.drop >= cfg.run_steps || cfg.drop < 0)
    throw ConfigError("config: run.drop must lie in [0, run.steps)");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& field : field_table())
    out += field.key + " = " + field.get(cfg) + "\n";
  for (size_t i = 0; i < cfg.reference.size(); ++i) {
    out += "reference." + std::to_string(i) + ".start = " +
           std::to_string(cfg.reference[i].start) + "\n";
    out += "reference." + std::to_string(i) + ".level = " +
           from_vector(cfg.reference[i].level) + "\n";
  }
  return out;
}

}  // namespace mampc
