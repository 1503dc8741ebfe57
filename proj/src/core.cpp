#include "dssp/core.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace dssp {

namespace {

std::string trim(std::string_view s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

template <typename T>
T parse_number(std::string_view field, std::string_view text) {
  T value{};
  auto first = text.data();
  auto last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError(std::string(field), "cannot parse '" + std::string(text) + "' as a number");
  }
  return value;
}

}  // namespace

std::string_view to_string(Paradigm p) {
  switch (p) {
    case Paradigm::BSP: return "bsp";
    case Paradigm::ASP: return "asp";
    case Paradigm::SSP: return "ssp";
    case Paradigm::DSSP: return "dssp";
  }
  return "?";
}

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::QuadraticBowl: return "quadratic_bowl";
    case ModelKind::LinearRegression: return "linear_regression";
    case ModelKind::LogisticRegression: return "logistic_regression";
    case ModelKind::TinyMLP: return "tiny_mlp";
  }
  return "?";
}

std::string_view to_string(RunMode m) {
  return m == RunMode::Simulated ? "simulated" : "threaded";
}

Paradigm parse_paradigm(std::string_view text) {
  auto t = lower(trim(text));
  if (t == "bsp") return Paradigm::BSP;
  if (t == "asp") return Paradigm::ASP;
  if (t == "ssp") return Paradigm::SSP;
  if (t == "dssp") return Paradigm::DSSP;
  throw ConfigError("paradigm", "unknown paradigm '" + std::string(text) + "'");
}

ModelKind parse_model_kind(std::string_view text) {
  auto t = lower(trim(text));
  if (t == "quadratic_bowl") return ModelKind::QuadraticBowl;
  if (t == "linear_regression") return ModelKind::LinearRegression;
  if (t == "logistic_regression") return ModelKind::LogisticRegression;
  if (t == "tiny_mlp") return ModelKind::TinyMLP;
  throw ConfigError("model_kind", "unknown model kind '" + std::string(text) + "'");
}

RunMode parse_run_mode(std::string_view text) {
  auto t = lower(trim(text));
  if (t == "simulated") return RunMode::Simulated;
  if (t == "threaded") return RunMode::Threaded;
  throw ConfigError("mode", "unknown mode '" + std::string(text) + "'");
}

double Distribution::sample(std::mt19937_64& rng) const {
  switch (kind) {
    case Kind::Constant:
      return a;
    case Kind::Uniform:
      return std::uniform_real_distribution<double>(a, b)(rng);
    case Kind::LogNormal:
      return std::lognormal_distribution<double>(a, b)(rng);
  }
  return a;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::string format_distribution(const Distribution& d) {
  switch (d.kind) {
    case Distribution::Kind::Constant:
      return "constant " + format_double(d.a);
    case Distribution::Kind::Uniform:
      return "uniform " + format_double(d.a) + " " + format_double(d.b);
    case Distribution::Kind::LogNormal:
      return "lognormal " + format_double(d.a) + " " + format_double(d.b);
  }
  return {};
}

Distribution parse_distribution(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::vector<std::string> parts;
  for (std::string tok; in >> tok;) parts.push_back(tok);
  if (parts.empty()) throw ConfigError("distribution", "empty distribution");
  auto kind = lower(parts[0]);
  auto arg = [&](std::size_t i) { return parse_number<double>("distribution", parts[i]); };
  if (kind == "constant" && parts.size() == 2) return Distribution::constant(arg(1));
  if (kind == "uniform" && parts.size() == 3) return Distribution::uniform(arg(1), arg(2));
  if (kind == "lognormal" && parts.size() == 3) return Distribution::lognormal(arg(1), arg(2));
  // A bare number is shorthand for a constant.
  if (parts.size() == 1) return Distribution::constant(arg(0));
  throw ConfigError("distribution", "cannot parse '" + std::string(text) + "'");
}

TimingModel make_timing_preset(std::string_view name, int worker_count) {
  TimingModel model;
  model.preset = std::string(name);
  model.comm_delay = Distribution::constant(0.05);
  auto n = static_cast<std::size_t>(std::max(worker_count, 0));
  if (name == "homogeneous" || name == "custom") {
    model.compute.assign(n, Distribution::constant(1.0));
  } else if (name == "gtx-mix") {
    // Lower half runs on the fast card, upper half 2.2x slower.
    std::size_t fast = (n + 1) / 2;
    for (std::size_t i = 0; i < n; ++i) {
      model.compute.push_back(Distribution::constant(i < fast ? 1.0 : 2.2));
    }
  } else {
    throw ConfigError("timing", "unknown timing preset '" + std::string(name) + "'");
  }
  return model;
}

namespace {

void check_distribution(const std::string& field, const Distribution& d, bool allow_zero) {
  using K = Distribution::Kind;
  bool ok = std::isfinite(d.a) && std::isfinite(d.b);
  if (d.kind == K::Constant) ok = ok && (allow_zero ? d.a >= 0.0 : d.a > 0.0);
  if (d.kind == K::Uniform) ok = ok && (allow_zero ? d.a >= 0.0 : d.a > 0.0) && d.b >= d.a;
  if (d.kind == K::LogNormal) ok = ok && d.b >= 0.0;
  if (!ok) throw ConfigError(field, "invalid duration distribution '" + format_distribution(d) + "'");
}

}  // namespace

ExperimentConfig validate_config(ExperimentConfig c) {
  if (c.worker_count < 1) throw ConfigError("worker_count", "must be >= 1");
  if (c.staleness.s_lower < 0) throw ConfigError("s_lower", "staleness range: s_lower must be >= 0");
  if (c.staleness.r_max < 0) throw ConfigError("r_max", "staleness range: r_max must be >= 0");
  if (c.batch_size < 1) throw ConfigError("batch_size", "must be >= 1");
  if (!(c.learning_rate > 0.0) || !std::isfinite(c.learning_rate)) {
    throw ConfigError("learning_rate", "must be a positive finite number");
  }
  if (c.epochs < 1) throw ConfigError("epochs", "must be >= 1");
  if (c.dimension < 1) throw ConfigError("dimension", "must be >= 1");
  if (c.hidden_units < 1 || c.hidden_units > 32) throw ConfigError("hidden_units", "must be in [1, 32]");
  if (!(c.noise >= 0.0) || !std::isfinite(c.noise)) throw ConfigError("noise", "must be >= 0");
  if (static_cast<long long>(c.dataset_size) <
      static_cast<long long>(c.worker_count) * c.batch_size) {
    throw ConfigError("dataset_size", "must be >= worker_count * batch_size so every shard holds a batch");
  }
  if (c.loss_every < 0) throw ConfigError("loss_every", "must be >= 0");
  if (!(c.loss_target >= 0.0) || !std::isfinite(c.loss_target)) {
    throw ConfigError("loss_target", "must be >= 0");
  }

  if (c.timing.compute.empty()) {
    auto comm = c.timing.comm_delay;
    c.timing = make_timing_preset(c.timing.preset, c.worker_count);
    c.timing.comm_delay = comm;
  }
  if (c.timing.compute.size() != static_cast<std::size_t>(c.worker_count)) {
    throw ConfigError("timing", "expected one compute_time per worker");
  }
  for (std::size_t i = 0; i < c.timing.compute.size(); ++i) {
    check_distribution("compute_time." + std::to_string(i), c.timing.compute[i], false);
  }
  check_distribution("comm_delay", c.timing.comm_delay, true);

  switch (c.paradigm) {
    case Paradigm::BSP:
    case Paradigm::ASP:
      c.staleness = {0, 0};
      break;
    case Paradigm::SSP:
      c.staleness.r_max = 0;
      break;
    case Paradigm::DSSP:
      break;
  }
  return c;
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig c;
  std::optional<Distribution> all_compute;
  std::map<int, Distribution> per_worker;
  std::map<std::string, bool> seen;

  std::istringstream in{std::string(text)};
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto body = trim(line);
    if (body.empty()) continue;
    auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    }
    auto key = trim(std::string_view(body).substr(0, eq));
    auto value = trim(std::string_view(body).substr(eq + 1));
    if (seen[key]) throw ConfigError(key, "duplicate key");
    seen[key] = true;

    if (key == "paradigm") c.paradigm = parse_paradigm(value);
    else if (key == "s_lower") c.staleness.s_lower = parse_number<int>(key, value);
    else if (key == "r_max") c.staleness.r_max = parse_number<int>(key, value);
    else if (key == "worker_count") c.worker_count = parse_number<int>(key, value);
    else if (key == "timing") c.timing.preset = value;
    else if (key == "comm_delay") c.timing.comm_delay = parse_distribution(value);
    else if (key == "compute_time") all_compute = parse_distribution(value);
    else if (key.rfind("compute_time.", 0) == 0) {
      per_worker[parse_number<int>(key, std::string_view(key).substr(13))] = parse_distribution(value);
    }
    else if (key == "model_kind") c.model_kind = parse_model_kind(value);
    else if (key == "batch_size") c.batch_size = parse_number<int>(key, value);
    else if (key == "learning_rate") c.learning_rate = parse_number<double>(key, value);
    else if (key == "epochs") c.epochs = parse_number<int>(key, value);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "mode") c.mode = parse_run_mode(value);
    else if (key == "dataset_size") c.dataset_size = parse_number<int>(key, value);
    else if (key == "dimension") c.dimension = parse_number<int>(key, value);
    else if (key == "hidden_units") c.hidden_units = parse_number<int>(key, value);
    else if (key == "noise") c.noise = parse_number<double>(key, value);
    else if (key == "loss_every") c.loss_every = parse_number<int>(key, value);
    else if (key == "loss_target") c.loss_target = parse_number<double>(key, value);
    else throw ConfigError(key, "unknown key");
  }

  if (c.worker_count < 1) throw ConfigError("worker_count", "must be >= 1");
  auto comm = c.timing.comm_delay;
  c.timing = make_timing_preset(c.timing.preset, c.worker_count);
  c.timing.comm_delay = comm;
  if (all_compute) std::fill(c.timing.compute.begin(), c.timing.compute.end(), *all_compute);
  for (const auto& [worker, dist] : per_worker) {
    if (worker < 0 || worker >= c.worker_count) {
      throw ConfigError("compute_time." + std::to_string(worker), "worker index out of range");
    }
    c.timing.compute[static_cast<std::size_t>(worker)] = dist;
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "paradigm = " << to_string(c.paradigm) << '\n'
      << "s_lower = " << c.staleness.s_lower << '\n'
      << "r_max = " << c.staleness.r_max << '\n'
      << "worker_count = " << c.worker_count << '\n'
      << "timing = " << c.timing.preset << '\n'
      << "comm_delay = " << format_distribution(c.timing.comm_delay) << '\n';
  for (std::size_t i = 0; i < c.timing.compute.size(); ++i) {
    out << "compute_time." << i << " = " << format_distribution(c.timing.compute[i]) << '\n';
  }
  out << "model_kind = " << to_string(c.model_kind) << '\n'
      << "batch_size = " << c.batch_size << '\n'
      << "learning_rate = " << format_double(c.learning_rate) << '\n'
      << "epochs = " << c.epochs << '\n'
      << "seed = " << c.seed << '\n'
      << "mode = " << to_string(c.mode) << '\n'
      << "dataset_size = " << c.dataset_size << '\n'
      << "dimension = " << c.dimension << '\n'
      << "hidden_units = " << c.hidden_units << '\n'
      << "noise = " << format_double(c.noise) << '\n'
      << "loss_every = " << c.loss_every << '\n'
      << "loss_target = " << format_double(c.loss_target) << '\n';
  return out.str();
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t worker, std::uint64_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(worker), static_cast<std::uint32_t>(worker >> 32),
                    static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(purpose >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace dssp
