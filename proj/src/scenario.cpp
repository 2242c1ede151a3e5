#include "schreg/scenario.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

namespace schreg {

namespace {

using nlohmann::json;
const double kPi = 3.14159265358979323846;

Complex parse_complex(const json& v, const char* where) {
  if (v.is_number()) return Complex(v.get<double>(), 0.0);
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return Complex(v[0].get<double>(), v[1].get<double>());
  throw_config(std::string(where) + ": expected a number or [re, im] pair");
}

// One profile term: {"kind": "constant"|"sinusoid"|"gaussian-bump"|"samples", ...}.
ComplexProfile parse_profile_term(const json& spec, const SpatialGrid& grid, const char* where) {
  if (!spec.is_object() || !spec.contains("kind"))
    throw_config(std::string(where) + ": profile entries need a \"kind\"");
  const std::string kind = spec["kind"].get<std::string>();
  if (kind == "constant") {
    const Complex v = spec.contains("value") ? parse_complex(spec["value"], where) : Complex(0.0);
    return ComplexProfile(grid, v);
  }
  if (kind == "sinusoid") {
    // amplitude * cos(freq_pi * pi * x + phase_pi * pi)
    const Complex a = spec.contains("amplitude") ? parse_complex(spec["amplitude"], where)
                                                 : Complex(1.0);
    const double f = spec.value("freq_pi", 1.0);
    const double p = spec.value("phase_pi", 0.0);
    return ComplexProfile::sample(
        grid, [&](double x) { return a * std::cos(f * kPi * x + p * kPi); });
  }
  if (kind == "gaussian-bump") {
    const Complex a = spec.contains("amplitude") ? parse_complex(spec["amplitude"], where)
                                                 : Complex(1.0);
    const double center = spec.value("center", 0.5);
    const double width = spec.value("width", 0.1);
    if (width <= 0.0) throw_config(std::string(where) + ": gaussian-bump width must be positive");
    return ComplexProfile::sample(grid, [&](double x) {
      const double d = (x - center) / width;
      return a * std::exp(-0.5 * d * d);
    });
  }
  if (kind == "samples") {
    if (!spec.contains("values") || !spec["values"].is_array())
      throw_config(std::string(where) + ": samples need a \"values\" array");
    const json& vals = spec["values"];
    if (static_cast<int>(vals.size()) != grid.size())
      throw_config(std::string(where) + ": samples need exactly n_cells + 1 values");
    ComplexProfile out(grid);
    for (int i = 0; i < grid.size(); ++i)
      out[i] = parse_complex(vals[static_cast<size_t>(i)], where);
    return out;
  }
  throw_config(std::string(where) + ": unknown profile kind '" + kind + "'");
}

ComplexProfile parse_profile(const json& spec, const SpatialGrid& grid, const char* where) {
  if (spec.is_array()) {  // a sum of terms
    ComplexProfile acc(grid);
    for (const json& term : spec) acc = acc + parse_profile_term(term, grid, where);
    return acc;
  }
  return parse_profile_term(spec, grid, where);
}

Eigen::MatrixXd parse_matrix(const json& v, const char* where) {
  if (!v.is_array()) throw_config(std::string(where) + ": expected a matrix (array of rows)");
  const int rows = static_cast<int>(v.size());
  if (rows == 0) return Eigen::MatrixXd(0, 0);
  const int cols = static_cast<int>(v[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(v[static_cast<size_t>(r)].size()) != cols)
      throw_config(std::string(where) + ": ragged matrix");
    for (int c = 0; c < cols; ++c)
      m(r, c) = v[static_cast<size_t>(r)][static_cast<size_t>(c)].get<double>();
  }
  return m;
}

Eigen::VectorXd parse_vector(const json& v, const char* where) {
  if (!v.is_array()) throw_config(std::string(where) + ": expected a vector");
  Eigen::VectorXd out(static_cast<int>(v.size()));
  for (int i = 0; i < out.size(); ++i) out(i) = v[static_cast<size_t>(i)].get<double>();
  return out;
}

std::vector<Complex> parse_pole_list(const json& v, const char* where) {
  if (!v.is_array()) throw_config(std::string(where) + ": expected a list of poles");
  std::vector<Complex> out;
  for (const json& p : v) out.push_back(parse_complex(p, where));
  return out;
}

}  // namespace

RunMode parse_mode(const std::string& name) {
  if (name == "kernels") return RunMode::kernels;
  if (name == "spectrum") return RunMode::spectrum;
  if (name == "regulate") return RunMode::regulate;
  if (name == "observe") return RunMode::observe;
  if (name == "closedloop") return RunMode::closedloop;
  if (name == "verify") return RunMode::verify;
  throw_config("unknown mode '" + name + "'");
}

std::string mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::kernels: return "kernels";
    case RunMode::spectrum: return "spectrum";
    case RunMode::regulate: return "regulate";
    case RunMode::observe: return "observe";
    case RunMode::closedloop: return "closedloop";
    case RunMode::verify: return "verify";
  }
  return "?";
}

void Scenario::validate() const {
  plant().validate();
  exosystem.validate();
  if (x0 < 0.0 || x0 > 1.0) throw_config("Scenario: observation point x0 must lie in [0,1]");
  if (c_s <= 0.0 || c_o <= 0.0) throw_config("Scenario: c_s and c_o must be positive");
  if (static_cast<int>(poles_r.size()) != exosystem.n_r())
    throw_config("Scenario: poles_r must list one pole per reference state");
  if (static_cast<int>(poles_d.size()) != exosystem.n_d())
    throw_config("Scenario: poles_d must list one pole per disturbance state");
  sim_config().validate();
  if (what0.size() != exosystem.n_w())
    throw_config("Scenario: what0 must have dimension n_d + n_r");
}

Scenario parse_scenario(const std::string& json_text, const ScenarioOverrides& overrides) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw_config(std::string("config is not valid JSON: ") + e.what());
  }

  Scenario sc;
  sc.name = doc.value("name", "scenario");

  const json numerics = doc.value("numerics", json::object());
  int n_cells = numerics.value("n_cells", 200);
  if (overrides.n_cells) n_cells = *overrides.n_cells;
  if (n_cells < 8) throw_config("numerics.n_cells too small");
  sc.grid = SpatialGrid(n_cells);
  sc.dt = overrides.dt ? *overrides.dt : numerics.value("dt", 1e-4);
  sc.horizon = overrides.horizon ? *overrides.horizon : numerics.value("horizon", 1.0);
  sc.record_every = numerics.value("record_every", 100);

  if (!doc.contains("plant")) throw_config("config needs a \"plant\" section");
  const json& plant = doc["plant"];
  sc.q = plant.value("q", 1.0);
  sc.h = plant.contains("h") ? parse_profile(plant["h"], sc.grid, "plant.h")
                             : ComplexProfile(sc.grid);
  sc.g = plant.contains("g") ? parse_profile(plant["g"], sc.grid, "plant.g")
                             : ComplexProfile(sc.grid);

  if (!doc.contains("exosystem")) throw_config("config needs an \"exosystem\" section");
  const json& exo = doc["exosystem"];
  sc.exosystem.S_d = exo.contains("S_d") ? parse_matrix(exo["S_d"], "exosystem.S_d")
                                         : Eigen::MatrixXd(0, 0);
  sc.exosystem.S_r = exo.contains("S_r") ? parse_matrix(exo["S_r"], "exosystem.S_r")
                                         : Eigen::MatrixXd(0, 0);
  sc.exosystem.q_d1 = exo.contains("q_d1") ? parse_vector(exo["q_d1"], "exosystem.q_d1")
                                           : Eigen::VectorXd(0);
  sc.exosystem.q_d2 = exo.contains("q_d2") ? parse_vector(exo["q_d2"], "exosystem.q_d2")
                                           : Eigen::VectorXd(0);
  sc.exosystem.q_r = exo.contains("q_r") ? parse_vector(exo["q_r"], "exosystem.q_r")
                                         : Eigen::VectorXd(0);
  sc.exosystem.w0 = exo.contains("w0") ? parse_vector(exo["w0"], "exosystem.w0")
                                       : Eigen::VectorXd::Zero(sc.exosystem.n_w());

  const json obs = doc.value("observation", json::object());
  sc.theta = obs.contains("theta") ? parse_complex(obs["theta"], "observation.theta")
                                   : Complex(0.0);
  sc.x0 = obs.value("x0", 0.0);
  sc.c = obs.contains("c") ? parse_profile(obs["c"], sc.grid, "observation.c")
                           : ComplexProfile(sc.grid);

  const json tuning = doc.value("tuning", json::object());
  sc.c_s = tuning.value("c_s", 1.0);
  sc.c_o = tuning.value("c_o", 1.0);
  if (tuning.contains("poles_r")) sc.poles_r = parse_pole_list(tuning["poles_r"], "tuning.poles_r");
  if (tuning.contains("poles_d")) sc.poles_d = parse_pole_list(tuning["poles_d"], "tuning.poles_d");

  const json init = doc.value("initial", json::object());
  sc.z0 = init.contains("z0") ? parse_profile(init["z0"], sc.grid, "initial.z0")
                              : ComplexProfile(sc.grid);
  sc.zhat0 = init.contains("zhat0") ? parse_profile(init["zhat0"], sc.grid, "initial.zhat0")
                                    : ComplexProfile(sc.grid);
  sc.what0 = Eigen::VectorXcd::Zero(sc.exosystem.n_w());
  if (init.contains("what0")) {
    const json& w = init["what0"];
    if (!w.is_array() || static_cast<int>(w.size()) != sc.exosystem.n_w())
      throw_config("initial.what0 must have dimension n_d + n_r");
    for (int i = 0; i < sc.what0.size(); ++i)
      sc.what0(i) = parse_complex(w[static_cast<size_t>(i)], "initial.what0");
  }

  return sc;
}

Scenario load_scenario(const std::filesystem::path& config_path,
                       const ScenarioOverrides& overrides) {
  std::ifstream in(config_path);
  if (!in) throw_config("cannot open config file " + config_path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_scenario(text, overrides);
}

Scenario reference_scenario(int n_cells) {
  Scenario sc;
  sc.name = "reference";
  sc.grid = SpatialGrid(n_cells);
  sc.q = 1.0;
  sc.h = ComplexProfile(sc.grid, 0.5);
  sc.g = ComplexProfile(sc.grid, 1.0);

  sc.exosystem.S_d.resize(3, 3);
  sc.exosystem.S_d << 0, 0, 0, 0, 0, 2, 0, -2, 0;
  sc.exosystem.S_r.resize(2, 2);
  sc.exosystem.S_r << 0, 1, -1, 0;
  sc.exosystem.q_d1.resize(3);
  sc.exosystem.q_d1 << 1, 1, 0;
  sc.exosystem.q_d2.resize(3);
  sc.exosystem.q_d2 << 0.5, 0, 1;
  sc.exosystem.q_r.resize(2);
  sc.exosystem.q_r << 1, 0;
  sc.exosystem.w0.resize(5);
  sc.exosystem.w0 << 1, 1, 0, 1, 0;

  sc.theta = 1.0;
  sc.x0 = 0.3;
  sc.c = ComplexProfile(sc.grid, 0.5);

  sc.c_s = 1.0;
  sc.c_o = 2.0;
  sc.poles_r = {Complex(-1.0, 0.0), Complex(-2.0, 0.0)};
  sc.poles_d = {Complex(-1.5, 0.0), Complex(-2.5, 0.0), Complex(-3.5, 0.0)};

  sc.dt = 1e-4;
  sc.horizon = 10.0;
  sc.record_every = 100;

  sc.z0 = ComplexProfile::sample(sc.grid, [](double x) {
    return Complex(std::cos(kPi * x) + 0.4 * std::cos(2.0 * kPi * x),
                   0.25 * std::cos(3.0 * kPi * x));
  });
  sc.zhat0 = ComplexProfile(sc.grid);
  sc.what0 = Eigen::VectorXcd::Zero(5);
  return sc;
}

}  // namespace schreg
