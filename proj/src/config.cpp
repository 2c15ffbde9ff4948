#include "gibbslz/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gibbslz/errors.hpp"

namespace gibbslz {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected a nonnegative integer, got '" + v + "'");
  }
  return out;
}

// "1024" or "2^10"
std::size_t to_length(const std::string& key, const std::string& v) {
  const auto caret = v.find('^');
  if (caret == std::string::npos) return to_u64(key, v);
  const auto base = to_u64(key, v.substr(0, caret));
  const auto exp = to_u64(key, v.substr(caret + 1));
  if (exp > 40) throw ConfigError(key + ": exponent too large");
  std::size_t out = 1;
  for (std::uint64_t i = 0; i < exp; ++i) out *= base;
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

std::vector<double> read_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open grid file '" + path + "'");
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(to_double("ensemble.grid_file", tok));
  return out;
}

void apply(ExperimentConfig& cfg, const std::string& key, const std::string& v) {
  if (key == "ensemble.stats") {
    if (v != "fermi" && v != "bose") throw ConfigError("ensemble.stats must be fermi or bose");
    cfg.stats = parse_statistics(v);
  } else if (key == "ensemble.beta") {
    cfg.beta = to_double(key, v);
  } else if (key == "ensemble.mu") {
    cfg.mu = to_double(key, v);
  } else if (key == "ensemble.density") {
    cfg.density = to_double(key, v);
  } else if (key == "ensemble.dispersion") {
    if (v == "cosine") {
      cfg.dispersion = Dispersion::cosine_lattice();
    } else if (v != "grid") {
      throw ConfigError("ensemble.dispersion must be cosine or grid");
    }
  } else if (key == "ensemble.grid") {
    std::vector<double> vals;
    for (const auto& s : split_list(v)) vals.push_back(to_double(key, s));
    if (vals.size() < 2) throw ConfigError("ensemble.grid needs at least two values");
    cfg.dispersion = Dispersion::tabulated(std::move(vals));
  } else if (key == "ensemble.grid_file") {
    auto vals = read_grid_file(v);
    if (vals.size() < 2) throw ConfigError("grid file needs at least two values");
    cfg.dispersion = Dispersion::tabulated(std::move(vals));
  } else if (key == "run.lengths") {
    cfg.lengths.clear();
    for (const auto& s : split_list(v)) cfg.lengths.push_back(to_length(key, s));
  } else if (key == "run.replicas") {
    cfg.replicas = to_u64(key, v);
  } else if (key == "run.seed") {
    cfg.seed = to_u64(key, v);
  } else if (key == "run.kind") {
    if (v == "grand") {
      cfg.kind = RunKind::Grand;
    } else if (v == "canonical") {
      cfg.kind = RunKind::Canonical;
    } else if (v == "both") {
      cfg.kind = RunKind::Both;
    } else {
      throw ConfigError("run.kind must be grand, canonical or both");
    }
  } else if (key == "analysis.epsilon") {
    cfg.epsilon = to_double(key, v);
  } else if (key == "analysis.quad_tol") {
    cfg.quad_tol = to_double(key, v);
  } else if (key == "analysis.out_dir") {
    cfg.out_dir = v;
  } else if (key == "analysis.format") {
    if (v == "csv") {
      cfg.format = OutputFormat::Csv;
    } else if (v == "jsonl") {
      cfg.format = OutputFormat::Jsonl;
    } else {
      throw ConfigError("analysis.format must be csv or jsonl");
    }
  } else if (key == "analysis.typical") {
    if (v == "one_sided") {
      cfg.typical = Deviation::OneSided;
    } else if (v == "absolute") {
      cfg.typical = Deviation::Absolute;
    } else {
      throw ConfigError("analysis.typical must be one_sided or absolute");
    }
  } else if (key == "analysis.entropy_gap") {
    cfg.entropy_gap = to_bool(key, v);
  } else if (key == "analysis.gap_budget") {
    cfg.gap_budget = to_double(key, v);
  } else if (key == "check.scale") {
    cfg.check_scale = to_double(key, v);
  } else if (key == "check.inject_fault") {
    if (v != "none" && v != "lc") throw ConfigError("check.inject_fault must be none or lc");
    cfg.inject_fault = v;
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.mu.has_value() == cfg.density.has_value()) {
    throw ConfigError("exactly one of ensemble.mu and ensemble.density must be given");
  }
  if (!(cfg.beta > 0)) throw ConfigError("ensemble.beta must be positive");
  if (const auto it = cfg.entries.find("ensemble.dispersion");
      it != cfg.entries.end() && it->second == "grid" &&
      cfg.dispersion.form() != Dispersion::Form::TabulatedGrid) {
    throw ConfigError("ensemble.dispersion = grid needs ensemble.grid or ensemble.grid_file");
  }
  if (cfg.lengths.empty()) throw ConfigError("run.lengths must not be empty");
  for (std::size_t i = 0; i < cfg.lengths.size(); ++i) {
    if (cfg.lengths[i] < 2) throw ConfigError("run.lengths entries must be >= 2");
    if (i > 0 && cfg.lengths[i] <= cfg.lengths[i - 1]) {
      throw ConfigError("run.lengths must be strictly increasing");
    }
  }
  if (cfg.replicas < 1) throw ConfigError("run.replicas must be >= 1");
  if (!(cfg.epsilon > 0 && cfg.epsilon < 1)) throw ConfigError("analysis.epsilon must lie in (0,1)");
  if (!(cfg.quad_tol > 0)) throw ConfigError("analysis.quad_tol must be positive");
  if (!(cfg.check_scale > 0)) throw ConfigError("check.scale must be positive");
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const std::vector<std::string>& overrides) {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  auto add = [&](const std::string& raw, const std::string& where) {
    const auto eq = raw.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    std::string key = trim(std::string_view(raw).substr(0, eq));
    std::string value = trim(std::string_view(raw).substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    pairs.emplace_back(std::move(key), std::move(value));
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    add(line, "line " + std::to_string(line_no));
  }
  for (const auto& o : overrides) add(o, "override '" + o + "'");

  ExperimentConfig cfg;
  for (const auto& [k, v] : pairs) {
    // a later mu/density replaces an earlier one of either kind
    if (k == "ensemble.mu") {
      cfg.density.reset();
      cfg.entries.erase("ensemble.density");
    } else if (k == "ensemble.density") {
      cfg.mu.reset();
      cfg.entries.erase("ensemble.mu");
    }
    try {
      apply(cfg, k, v);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(k + ": " + e.what());
    }
    cfg.entries[k] = v;
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& [k, v] : cfg.entries) {
    if (k == "analysis.out_dir" || k == "analysis.format") continue;
    feed(k);
    feed("=");
    feed(v);
    feed("\n");
  }
  return h;
}

std::string config_hash_hex(const ExperimentConfig& cfg) {
  char buf[17];
  auto h = config_hash(cfg);
  for (int i = 15; i >= 0; --i) {
    buf[i] = "0123456789abcdef"[h & 0xF];
    h >>= 4;
  }
  buf[16] = '\0';
  return buf;
}

EnsembleSpec resolve_ensemble(const ExperimentConfig& cfg) {
  EnsembleSpec spec{cfg.stats, cfg.beta, 0.0, cfg.dispersion};
  if (cfg.mu) {
    spec.mu = *cfg.mu;
  } else {
    spec.mu = solve_mu(cfg.stats, cfg.dispersion, cfg.beta, *cfg.density);
  }
  spec.validate();
  return spec;
}

double target_density(const ExperimentConfig& cfg, const EnsembleSpec& spec) {
  return cfg.density ? *cfg.density : particle_density(spec, cfg.quad_tol);
}

std::string to_string(RunKind k) {
  switch (k) {
    case RunKind::Grand:
      return "grand";
    case RunKind::Canonical:
      return "canonical";
    case RunKind::Both:
      return "both";
  }
  return "?";
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace gibbslz
