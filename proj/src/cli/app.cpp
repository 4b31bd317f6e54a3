#include "app.hpp"

#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "run_config.hpp"

namespace ksapprox::cli {

namespace {

// Raw flag values; only flags actually given override the config file.
struct Flags {
  std::string config;
  double H = 0.0;
  std::string theta;
  std::vector<std::string> epsilon;
  std::string grid;
  std::size_t replicas = 0;
  std::string seed;
  unsigned threads = 0;
  std::string out;
  std::string format;
  double tail_tol = 0.0;
  double truncation_radius = 0.0;
  double quad_tol = 0.0;
  std::string kernel;
  std::string model;
  std::string target;
  double tol = 0.0;
  std::string mode;
  std::string channel;
  double max_events = 0.0;
};

struct Options {
  CLI::Option* H;
  CLI::Option* theta;
  CLI::Option* epsilon;
  CLI::Option* grid;
  CLI::Option* replicas;
  CLI::Option* seed;
  CLI::Option* threads;
  CLI::Option* out;
  CLI::Option* format;
  CLI::Option* tail_tol;
  CLI::Option* truncation_radius;
  CLI::Option* quad_tol;
  CLI::Option* kernel;
  CLI::Option* model;
  CLI::Option* target;
  CLI::Option* tol;
  CLI::Option* mode;
  CLI::Option* channel;
  CLI::Option* max_events;
};

Options add_options(CLI::App& app, Flags& f) {
  Options o{};
  app.add_option("--config", f.config, "JSON config file (a previous summary.json also works)");
  o.H = app.add_option("--H", f.H, "Hurst-type parameter in (0, 2); fBm covariance (t^H + s^H - |t-s|^H)/2");
  o.theta = app.add_option("--theta", f.theta, "Poisson phase angle, e.g. 2pi/3 or 1.5708");
  o.epsilon = app.add_option("--epsilon", f.epsilon, "Scaling parameter (repeatable or comma separated)");
  o.grid = app.add_option("--grid", f.grid, "Time grid \"t1,t2,...\"");
  o.replicas = app.add_option("--replicas", f.replicas, "Monte Carlo replicas");
  o.seed = app.add_option("--seed", f.seed, "Master seed (integer, or 'auto')");
  o.threads = app.add_option("--threads", f.threads, "Worker threads (0 = hardware concurrency)");
  o.out = app.add_option("--out", f.out, "Output directory");
  o.format = app.add_option("--format", f.format, "Table format")->check(CLI::IsMember({"csv", "json"}));
  o.tail_tol = app.add_option("--tail-tol", f.tail_tol, "Tail tolerance for the Lei-Nualart cut-off");
  o.truncation_radius = app.add_option("--truncation-radius", f.truncation_radius, "Explicit Lei-Nualart cut-off");
  o.quad_tol = app.add_option("--quad-tol", f.quad_tol, "Per-segment quadrature tolerance");
  o.kernel = app.add_option("--kernel", f.kernel, "fbm | lei-nualart | tabulated");
  o.model = app.add_option("--model", f.model, "kernel-check model: fbm | lei-nualart-x");
  o.target = app.add_option("--target", f.target, "convergence target: fbm | sub-fbm | lei-nualart-x");
  o.tol = app.add_option("--tol", f.tol, "kernel-check relative tolerance");
  o.mode = app.add_option("--mode", f.mode, "single | dual | decomposition");
  o.channel = app.add_option("--lei-nualart-channel", f.channel, "Channel of the Lei-Nualart functional in decompositions");
  o.max_events = app.add_option("--max-events", f.max_events, "Ceiling on expected Poisson events per path");
  return o;
}

std::uint64_t parse_seed(const std::string& text) {
  if (text == "auto") {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(text, &used, 0);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || text.front() == '-') {
    throw std::invalid_argument("seed must be a non-negative integer or 'auto'");
  }
  return v;
}

RunConfig assemble(const std::string& command, const Flags& f, const Options& o) {
  RunConfig cfg;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw std::invalid_argument("cannot open config file " + f.config);
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    cfg = from_json(doc);
  }
  cfg.command = command;
  if (o.H->count()) cfg.H = f.H;
  if (o.theta->count()) cfg.theta = parse_angle(f.theta);
  if (o.epsilon->count()) {
    cfg.epsilons.clear();
    for (const auto& e : f.epsilon) {
      for (double v : parse_list(e)) cfg.epsilons.push_back(v);
    }
  }
  if (o.grid->count()) cfg.grid = parse_list(f.grid);
  if (o.replicas->count()) cfg.replicas = f.replicas;
  if (o.seed->count()) cfg.seed = parse_seed(f.seed);
  if (o.threads->count()) cfg.threads = f.threads;
  if (o.out->count()) cfg.out_dir = f.out;
  if (o.format->count()) cfg.format = f.format;
  if (o.tail_tol->count()) cfg.tail_tol = f.tail_tol;
  if (o.truncation_radius->count()) cfg.truncation_radius = f.truncation_radius;
  if (o.quad_tol->count()) cfg.quad_tol = f.quad_tol;
  if (o.kernel->count()) cfg.kernel = f.kernel;
  if (o.model->count()) cfg.model = f.model;
  if (o.target->count()) cfg.target = f.target;
  if (o.tol->count()) cfg.tol = f.tol;
  if (o.mode->count()) cfg.mode = f.mode;
  if (o.channel->count()) cfg.lei_nualart_channel = f.channel;
  if (o.max_events->count()) cfg.max_events = f.max_events;
  return cfg;
}

}  // namespace

int run_app(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Poisson-driven approximations of fBm, sub-fBm and the Lei-Nualart process", "ksapprox"};
  app.require_subcommand(1);
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "More output (repeatable)");

  struct Sub {
    CLI::App* app;
    Flags flags;
    Options options;
  };
  const std::vector<std::pair<std::string, std::string>> names = {
      {"kernel-check", "Compare kernel inner products with the closed-form covariance"},
      {"simulate", "Run an ensemble and write covariance and moment estimates"},
      {"convergence", "Sweep epsilon and compare with a target covariance"},
      {"independence", "Test that the cos and sin channels are uncorrelated"},
      {"decompose", "Check C1 X + B against the sub-fBm covariance"},
  };
  std::vector<std::unique_ptr<Sub>> subs;
  for (const auto& [name, help] : names) {
    auto sub = std::make_unique<Sub>();
    sub->app = app.add_subcommand(name, help);
    sub->options = add_options(*sub->app, sub->flags);
    subs.push_back(std::move(sub));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o;
    std::ostringstream e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kExitPass : kExitConfig;
  }

  for (const auto& sub : subs) {
    if (!sub->app->parsed()) continue;
    RunConfig cfg;
    try {
      cfg = assemble(sub->app->get_name(), sub->flags, sub->options);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitConfig;
    }
    cfg.verbosity = std::max(cfg.verbosity, verbosity);
    return execute(cfg, out, err);
  }
  return kExitConfig;
}

}  // namespace ksapprox::cli
