#include "run_config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace ksapprox::cli {

namespace {

double parse_real(const std::string& text, const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw std::invalid_argument(std::string("cannot parse ") + what + " from '" + text + "'");
  }
  return v;
}

std::string interpolation_name(Interpolation i) { return i == Interpolation::linear ? "linear" : "step"; }

template <class T>
void read_optional(const nlohmann::json& doc, const char* key, std::optional<T>& out) {
  if (doc.contains(key) && !doc.at(key).is_null()) out = doc.at(key).get<T>();
}

template <class T>
void read(const nlohmann::json& doc, const char* key, T& out) {
  if (doc.contains(key) && !doc.at(key).is_null()) out = doc.at(key).get<T>();
}

}  // namespace

double parse_angle(const std::string& text) {
  std::string s;
  for (char ch : text) {
    if (!std::isspace(static_cast<unsigned char>(ch)) && ch != '*') s.push_back(static_cast<char>(std::tolower(ch)));
  }
  const auto pos = s.find("pi");
  if (pos == std::string::npos) return parse_real(s, "angle");
  const std::string coef = s.substr(0, pos);
  const std::string rest = s.substr(pos + 2);
  double c = 1.0;
  if (coef == "-") {
    c = -1.0;
  } else if (!coef.empty() && coef != "+") {
    c = parse_real(coef, "angle coefficient");
  }
  double den = 1.0;
  if (!rest.empty()) {
    if (rest.front() != '/') throw std::invalid_argument("cannot parse angle from '" + text + "'");
    den = parse_real(rest.substr(1), "angle denominator");
  }
  return c * std::numbers::pi / den;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }),
               item.end());
    if (item.empty()) continue;
    out.push_back(parse_real(item, "list entry"));
  }
  if (out.empty()) throw std::invalid_argument("empty list '" + text + "'");
  return out;
}

nlohmann::json to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["command"] = cfg.command;
  j["kernel"] = cfg.kernel;
  j["H"] = cfg.H;
  if (cfg.table) {
    j["table"] = {{"grid", cfg.table->grid},
                  {"values", cfg.table->values},
                  {"interpolation", interpolation_name(cfg.table->interpolation)},
                  {"gate_at_t", cfg.table->gate_at_t}};
  }
  j["theta"] = cfg.theta;
  j["epsilons"] = cfg.epsilons;
  j["grid"] = cfg.grid;
  j["replicas"] = cfg.replicas;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["mode"] = cfg.mode;
  j["lei_nualart_channel"] = cfg.lei_nualart_channel;
  j["tail_tol"] = cfg.tail_tol ? nlohmann::json(*cfg.tail_tol) : nlohmann::json(nullptr);
  j["truncation_radius"] = cfg.truncation_radius ? nlohmann::json(*cfg.truncation_radius) : nlohmann::json(nullptr);
  j["quad_tol"] = cfg.quad_tol;
  j["max_events"] = cfg.max_events;
  j["model"] = cfg.model;
  j["target"] = cfg.target ? nlohmann::json(*cfg.target) : nlohmann::json(nullptr);
  j["tol"] = cfg.tol;
  j["out_dir"] = cfg.out_dir;
  j["format"] = cfg.format;
  j["verbosity"] = cfg.verbosity;
  return j;
}

RunConfig from_json(const nlohmann::json& input) {
  if (!input.is_object()) throw std::invalid_argument("config must be a JSON object");
  const nlohmann::json& doc = (input.contains("schema_version") && input.contains("config")) ? input.at("config") : input;
  RunConfig cfg;
  try {
    read(doc, "command", cfg.command);
    read(doc, "kernel", cfg.kernel);
    read(doc, "H", cfg.H);
    if (doc.contains("table") && !doc.at("table").is_null()) {
      const auto& t = doc.at("table");
      TabulatedTable table;
      table.grid = t.at("grid").get<std::vector<double>>();
      table.values = t.at("values").get<std::vector<double>>();
      const std::string interp = t.value("interpolation", std::string("linear"));
      if (interp == "linear") {
        table.interpolation = Interpolation::linear;
      } else if (interp == "step") {
        table.interpolation = Interpolation::step;
      } else {
        throw std::invalid_argument("table.interpolation must be 'linear' or 'step'");
      }
      table.gate_at_t = t.value("gate_at_t", false);
      cfg.table = std::move(table);
    }
    if (doc.contains("theta")) {
      const auto& th = doc.at("theta");
      cfg.theta = th.is_string() ? parse_angle(th.get<std::string>()) : th.get<double>();
    }
    if (doc.contains("epsilon")) cfg.epsilons = {doc.at("epsilon").get<double>()};
    read(doc, "epsilons", cfg.epsilons);
    read(doc, "grid", cfg.grid);
    read(doc, "replicas", cfg.replicas);
    if (doc.contains("seed")) {
      const auto& s = doc.at("seed");
      if (s.is_string()) {
        throw std::invalid_argument("config seed must be a number ('auto' is only accepted on the command line)");
      }
      cfg.seed = s.get<std::uint64_t>();
    }
    read(doc, "threads", cfg.threads);
    read(doc, "mode", cfg.mode);
    read(doc, "lei_nualart_channel", cfg.lei_nualart_channel);
    read_optional(doc, "tail_tol", cfg.tail_tol);
    read_optional(doc, "truncation_radius", cfg.truncation_radius);
    read(doc, "quad_tol", cfg.quad_tol);
    read(doc, "max_events", cfg.max_events);
    read(doc, "model", cfg.model);
    read_optional(doc, "target", cfg.target);
    read(doc, "tol", cfg.tol);
    read(doc, "out_dir", cfg.out_dir);
    read(doc, "format", cfg.format);
    read(doc, "verbosity", cfg.verbosity);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed config: ") + e.what());
  }
  return cfg;
}

CovModel parse_model(const std::string& name, double H) {
  if (name == "fbm") return {CovKind::fbm, H};
  if (name == "sub-fbm") return {CovKind::sub_fbm, H};
  if (name == "lei-nualart-x") return {CovKind::lei_nualart_x, H};
  throw std::invalid_argument("unknown covariance model '" + name + "' (fbm, sub-fbm, lei-nualart-x)");
}

EnsembleMode parse_mode(const std::string& name) {
  if (name == "single") return EnsembleMode::single_channel;
  if (name == "dual") return EnsembleMode::dual_channel;
  if (name == "decomposition") return EnsembleMode::decomposition;
  throw std::invalid_argument("unknown mode '" + name + "' (single, dual, decomposition)");
}

KernelSpec make_kernel(const RunConfig& cfg) {
  if (cfg.kernel == "fbm") return KernelSpec::fbm_volterra(cfg.H);
  if (cfg.kernel == "lei-nualart") return KernelSpec::lei_nualart(cfg.H);
  if (cfg.kernel == "tabulated") {
    if (!cfg.table) throw std::invalid_argument("kernel 'tabulated' needs a 'table' entry in the config");
    return KernelSpec::tabulated(*cfg.table);
  }
  throw std::invalid_argument("unknown kernel '" + cfg.kernel + "' (fbm, lei-nualart, tabulated)");
}

void validate(const RunConfig& cfg) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (cfg.kernel != "tabulated" && !(cfg.H > 0.0 && cfg.H < 2.0)) fail("H must lie in (0, 2)");
  if (!std::isfinite(cfg.theta)) fail("theta must be finite");
  if (cfg.epsilons.empty()) fail("at least one epsilon is required");
  for (double e : cfg.epsilons) {
    if (!(e > 0.0) || !std::isfinite(e)) fail("epsilon must be positive");
  }
  if (cfg.grid.empty()) fail("grid must not be empty");
  for (double t : cfg.grid) {
    if (!(t >= 0.0) || !std::isfinite(t)) fail("grid times must be finite and non-negative");
  }
  if (cfg.replicas == 0) fail("replicas must be positive");
  if (!(cfg.quad_tol > 0.0 && cfg.quad_tol <= 1e-2)) fail("quad_tol must lie in (0, 1e-2]");
  if (cfg.tail_tol && !(*cfg.tail_tol > 0.0)) fail("tail_tol must be positive");
  if (cfg.truncation_radius && !(*cfg.truncation_radius > 0.0)) fail("truncation_radius must be positive");
  if (!(cfg.max_events > 0.0)) fail("max_events must be positive");
  if (!(cfg.tol > 0.0)) fail("tol must be positive");
  if (cfg.format != "csv" && cfg.format != "json") fail("format must be 'csv' or 'json'");
  if (cfg.lei_nualart_channel != "cos" && cfg.lei_nualart_channel != "sin") {
    fail("lei_nualart_channel must be 'cos' or 'sin'");
  }
  (void)parse_mode(cfg.mode);
  (void)parse_model(cfg.model, cfg.H);
  if (cfg.target) (void)parse_model(*cfg.target, cfg.H);
  (void)make_kernel(cfg);
  (void)Theta(cfg.theta);
}

EnsembleConfig make_ensemble(const RunConfig& cfg, double epsilon) {
  EnsembleConfig e;
  e.mode = parse_mode(cfg.mode);
  e.kernel = e.mode == EnsembleMode::decomposition ? KernelSpec::lei_nualart(cfg.H) : make_kernel(cfg);
  e.grid = cfg.grid;
  e.params.epsilon = epsilon;
  e.params.theta = Theta(cfg.theta);
  e.params.tail_tol = cfg.tail_tol;
  e.params.truncation_radius = cfg.truncation_radius;
  e.params.quad_tol = cfg.quad_tol;
  e.params.max_expected_events = cfg.max_events;
  e.replicas = cfg.replicas;
  e.master_seed = cfg.seed;
  e.threads = cfg.threads;
  e.lei_nualart_channel = cfg.lei_nualart_channel == "sin" ? Channel::sin : Channel::cos;
  return e;
}

}  // namespace ksapprox::cli
