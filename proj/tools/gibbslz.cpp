// gibbslz: command-line front end.
//
// Exit status: 0 ok, 1 configuration error, 2 property failure, 3 numeric error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gibbslz/config.hpp"
#include "gibbslz/errors.hpp"
#include "gibbslz/experiment.hpp"
#include "gibbslz/lzparse.hpp"
#include "gibbslz/property_suite.hpp"
#include "gibbslz/sampler.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace gibbslz;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitProperty = 2;
constexpr int kExitNumeric = 3;

struct Globals {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<int> workers;
};

ExperimentConfig load(const Globals& g) {
  std::vector<std::string> overrides = g.sets;
  if (g.seed) overrides.push_back("run.seed=" + std::to_string(*g.seed));
  if (g.out) overrides.push_back("analysis.out_dir=" + *g.out);
  if (g.format) overrides.push_back("analysis.format=" + *g.format);
  return g.config_path.empty() ? parse_config("", overrides) : load_config(g.config_path, overrides);
}

int workers_of(const Globals& g) {
  if (g.workers) return *g.workers;
  if (const char* env = std::getenv("GIBBSLZ_WORKERS")) {
    try {
      return std::stoi(env);
    } catch (const std::exception&) {
      throw ConfigError(std::string("GIBBSLZ_WORKERS: not an integer: ") + env);
    }
  }
  return 0;
}

std::string ext(OutputFormat f) { return f == OutputFormat::Csv ? ".csv" : ".jsonl"; }

std::ofstream open_out(const ExperimentConfig& cfg, const std::string& stem) {
  fs::create_directories(cfg.out_dir);
  const fs::path p = fs::path(cfg.out_dir) / stem;
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + p.string());
  return os;
}

// Whitespace-separated occupancies; blank lines separate strings.
std::vector<std::vector<std::uint32_t>> read_strings(std::istream& in) {
  std::vector<std::vector<std::uint32_t>> out(1);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    long long v = 0;
    bool any = false;
    std::string tok;
    while (ls >> tok) {
      any = true;
      try {
        std::size_t pos = 0;
        v = std::stoll(tok, &pos);
        if (pos != tok.size() || v < 0 || v > 0xFFFFFFFFLL) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ConfigError("parse input: bad occupancy '" + tok + "'");
      }
      out.back().push_back(static_cast<std::uint32_t>(v));
    }
    if (!any && !out.back().empty()) out.emplace_back();
  }
  if (out.back().empty()) out.pop_back();
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lempel-Ziv rates of free-fermion and free-boson occupancy strings"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config_path, "configuration file (key = value)");
  app.add_option("--set", g.sets, "override, key=value (repeatable)");
  app.add_option("--seed", g.seed, "master seed (run.seed)");
  app.add_option("--out", g.out, "output directory (analysis.out_dir)");
  app.add_option("--format", g.format, "csv or jsonl (analysis.format)")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  app.add_option("--workers", g.workers, "worker threads; GIBBSLZ_WORKERS if absent");

  auto* density = app.add_subcommand("density", "print the particle density m");
  auto* rate = app.add_subcommand("rate", "print the entropy rate h in bits");
  auto* solve = app.add_subcommand("solve-mu", "print mu for ensemble.density");

  auto* sample = app.add_subcommand("sample", "print one occupancy string, one value per line");
  std::size_t length = 0;
  std::uint64_t replica = 0;
  std::string kind_name;
  sample->add_option("--length", length, "string length")->required();
  sample->add_option("--replica", replica, "replica index");
  sample->add_option("--kind", kind_name, "grand or canonical")
      ->check(CLI::IsMember({"grand", "canonical"}));

  auto* parse = app.add_subcommand("parse", "LZ78-parse strings (JSONL per string)");
  std::string input;
  parse->add_option("--input", input, "input file; stdin if absent");

  auto* converge = app.add_subcommand("converge", "LZ rate against the entropy rate over run.lengths");
  auto* gap = app.add_subcommand("entropy-gap", "exact conditional entropy gap over run.lengths");
  auto* check = app.add_subcommand("check", "run the property-verification suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*parse) {
      std::vector<std::vector<std::uint32_t>> strings;
      if (input.empty()) {
        strings = read_strings(std::cin);
      } else {
        std::ifstream in(input);
        if (!in) throw ConfigError("cannot open " + input);
        strings = read_strings(in);
      }
      for (std::size_t r = 0; r < strings.size(); ++r) {
        const LzParse p = lz78_parse(strings[r]);
        nlohmann::ordered_json j;
        j["replica"] = r;
        j["C"] = p.count();
        j["rate"] = strings[r].size() >= 2 ? nlohmann::ordered_json(lz_rate(p, strings[r].size()))
                                           : nlohmann::ordered_json();
        nlohmann::ordered_json hist = nlohmann::ordered_json::object();
        for (const auto& [len, c] : p.length_histogram()) hist[std::to_string(len)] = c;
        j["word_lengths_histogram"] = hist;
        std::cout << j.dump() << '\n';
      }
      return kExitOk;
    }
    const ExperimentConfig cfg = load(g);
    std::cout.precision(17);

    if (*density) {
      const EnsembleSpec spec = resolve_ensemble(cfg);
      std::cout << "density=" << format_double(particle_density(spec, cfg.quad_tol))
                << " quad_tol=" << format_double(cfg.quad_tol) << '\n';
    } else if (*rate) {
      const EnsembleSpec spec = resolve_ensemble(cfg);
      std::cout << "rate=" << format_double(entropy_rate(spec, cfg.quad_tol))
                << " quad_tol=" << format_double(cfg.quad_tol) << '\n';
    } else if (*solve) {
      if (!cfg.density) throw ConfigError("solve-mu needs ensemble.density");
      const double mu = solve_mu(cfg.stats, cfg.dispersion, cfg.beta, *cfg.density);
      std::cout << "mu=" << format_double(mu) << " quad_tol=" << format_double(kDefaultQuadTol)
                << '\n';
    } else if (*sample) {
      const EnsembleSpec spec = resolve_ensemble(cfg);
      const bool grand = kind_name.empty() ? cfg.kind == RunKind::Grand : kind_name == "grand";
      const OccupancyString s =
          grand ? sample_grand(spec, length, cfg.seed, replica)
                : sample_canonical(spec, length,
                                   choose_n(ParticleTarget{target_density(cfg, spec)}, length),
                                   cfg.seed, replica);
      std::string buf;
      for (auto v : s.values) {
        buf += std::to_string(v);
        buf += '\n';
      }
      std::cout << buf;
    } else if (*converge) {
      const ConvergeResult res = run_converge(cfg, workers_of(g));
      {
        auto os = open_out(cfg, "converge" + ext(cfg.format));
        write_rows(os, res, cfg.format);
      }
      {
        auto os = open_out(cfg, "converge_summary" + ext(cfg.format));
        write_summary(os, res, cfg.format);
      }
      {
        auto os = open_out(cfg, "converge_timings.csv");
        write_timings(os, res);
      }
      write_summary(std::cout, res, cfg.format);
    } else if (*gap) {
      const EntropyGapResult res = run_entropy_gap(cfg);
      {
        auto os = open_out(cfg, "entropy_gap" + ext(cfg.format));
        write_entropy_gap(os, res, cfg.format);
      }
      write_entropy_gap(std::cout, res, cfg.format);
    } else if (*check) {
      const PropertyReport report = run_property_suite(cfg, workers_of(g));
      if (g.out) {
        auto os = open_out(cfg, "check" + ext(cfg.format));
        write_property_report(os, report, cfg.format);
      }
      write_property_report(std::cout, report, cfg.format);
      return report.all_passed() ? kExitOk : kExitProperty;
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
}
