#include "gibbslz/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <omp.h>

#include "gibbslz/errors.hpp"
#include "gibbslz/lzparse.hpp"
#include "gibbslz/suffix_dp.hpp"
#include "json.hpp"

namespace gibbslz {

using nlohmann::ordered_json;

MeanSe mean_and_se(std::span<const double> xs) {
  MeanSe out;
  if (xs.empty()) return out;
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return out;
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.se = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  return out;
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("slope needs >= 2 paired points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0 && y[i] > 0)) throw DomainError("log-log slope needs positive values");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

ResultRow run_replica(EnsembleKind kind, const GrandSampler* grand,
                      const CanonicalSampler* canonical, std::span<const double> l_profile,
                      std::span<const double> g_profile, const TypicalParams& typical,
                      std::uint64_t seed, std::size_t replica) {
  const auto t0 = std::chrono::steady_clock::now();
  const OccupancyString s =
      kind == EnsembleKind::Grand ? grand->sample(seed, replica) : canonical->sample(seed, replica);
  const LzParse parse = lz78_parse(s.values);
  const WordClasses classes = classify_words(parse, s.values, l_profile, g_profile, typical);
  ResultRow row;
  row.kind = kind;
  row.length = s.length();
  row.n = s.provenance.n.value_or(0);
  row.replica = replica;
  row.words = parse.count();
  row.lz_rate = lz_rate(parse, s.length());
  row.low_entropy_typical = classes.low_entropy_typical;
  row.non_typical = classes.non_typical;
  row.other = classes.other;
  row.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

namespace {

struct Slot {
  EnsembleKind kind;
  std::size_t length;
  std::size_t n;
  std::unique_ptr<GrandSampler> grand;
  std::unique_ptr<CanonicalSampler> canonical;
  std::vector<double> l_profile;
  std::vector<double> g_profile;
  std::optional<double> gap_per_site;
  bool ok = true;
};

std::vector<EnsembleKind> kinds_of(RunKind k) {
  switch (k) {
    case RunKind::Grand:
      return {EnsembleKind::Grand};
    case RunKind::Canonical:
      return {EnsembleKind::Canonical};
    case RunKind::Both:
      return {EnsembleKind::Grand, EnsembleKind::Canonical};
  }
  return {};
}

std::size_t max_support(const std::vector<DistTable>& marginals, std::size_t n) {
  std::size_t k = 0;
  for (const auto& m : marginals) k = std::max(k, std::min(m.support_max(), n));
  return k;
}

ConvergeResult converge_impl(const ExperimentConfig& cfg, int workers, bool parallel) {
  ConvergeResult res;
  res.config_hash = config_hash_hex(cfg);
  res.spec = resolve_ensemble(cfg);
  res.density = target_density(cfg, res.spec);
  res.h_target = entropy_rate(res.spec, cfg.quad_tol);
  const TypicalParams typical = make_typical_params(res.spec, cfg.epsilon, cfg.typical);

  std::vector<Slot> slots;
  for (std::size_t length : cfg.lengths) {
    const std::size_t n = choose_n({res.density}, length);
    const auto lp = mean_profile(res.spec, length);
    const auto gp = entropy_profile(res.spec, length);
    for (EnsembleKind kind : kinds_of(cfg.kind)) {
      Slot slot{kind, length, kind == EnsembleKind::Canonical ? n : 0, nullptr, nullptr, lp, gp,
                std::nullopt, true};
      try {
        if (kind == EnsembleKind::Grand) {
          slot.grand = std::make_unique<GrandSampler>(res.spec, length);
        } else {
          if (res.spec.stats == Statistics::Fermi && n > length) {
            throw ImpossibleCondition("n exceeds l for Fermi statistics");
          }
          auto marginals = site_marginals(res.spec, length);
          if (cfg.entropy_gap) {
            const double cost = static_cast<double>(length) * static_cast<double>(n) *
                                static_cast<double>(max_support(marginals, n));
            if (cost <= cfg.gap_budget) {
              slot.gap_per_site = entropy_gap(marginals, n) / static_cast<double>(length);
            }
          }
          slot.canonical = std::make_unique<CanonicalSampler>(std::move(marginals), n,
                                                              spec_identifier(res.spec));
        }
      } catch (const std::exception& e) {
        slot.ok = false;
        res.errors.push_back({kind, length, slot.n, e.what()});
      }
      slots.push_back(std::move(slot));
    }
  }

  struct Task {
    std::size_t slot;
    std::size_t replica;
  };
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < slots.size(); ++s) {
    if (!slots[s].ok) continue;
    for (std::size_t r = 0; r < cfg.replicas; ++r) tasks.push_back({s, r});
  }
  std::vector<ResultRow> rows(tasks.size());
  std::vector<std::string> task_errors(tasks.size());
  const int threads = workers > 0 ? workers : omp_get_max_threads();

  auto work = [&](std::size_t t) {
    const Slot& slot = slots[tasks[t].slot];
    try {
      rows[t] = run_replica(slot.kind, slot.grand.get(), slot.canonical.get(), slot.l_profile,
                            slot.g_profile, typical, cfg.seed, tasks[t].replica);
      rows[t].h_target = res.h_target;
      rows[t].entropy_gap_per_site = slot.gap_per_site;
    } catch (const std::exception& e) {
      task_errors[t] = e.what();
    }
  };
  if (parallel) {
#pragma omp parallel for schedule(dynamic) num_threads(threads) if (workers != 1)
    for (std::size_t t = 0; t < tasks.size(); ++t) work(t);
  } else {
    for (std::size_t t = 0; t < tasks.size(); ++t) work(t);
  }

  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const Slot& slot = slots[tasks[t].slot];
    if (task_errors[t].empty()) {
      res.rows.push_back(rows[t]);
    } else {
      res.errors.push_back({slot.kind, slot.length, slot.n,
                            "replica " + std::to_string(tasks[t].replica) + ": " + task_errors[t]});
    }
  }

  for (const Slot& slot : slots) {
    if (!slot.ok) continue;
    std::vector<double> rates, words, low, frac;
    for (const auto& row : res.rows) {
      if (row.kind != slot.kind || row.length != slot.length) continue;
      rates.push_back(row.lz_rate);
      words.push_back(static_cast<double>(row.words));
      low.push_back(static_cast<double>(row.low_entropy_typical));
      frac.push_back(row.words ? static_cast<double>(row.non_typical) / static_cast<double>(row.words)
                               : 0.0);
    }
    if (rates.empty()) continue;
    LengthSummary s;
    s.kind = slot.kind;
    s.length = slot.length;
    s.n = slot.n;
    s.replicas = rates.size();
    const MeanSe ms = mean_and_se(rates);
    s.mean_rate = ms.mean;
    s.std_error = ms.se;
    s.h_target = res.h_target;
    s.rel_deviation = (ms.mean - res.h_target) / res.h_target;
    s.mean_words = mean_and_se(words).mean;
    s.mean_low_entropy_typical = mean_and_se(low).mean;
    s.mean_non_typical_fraction = mean_and_se(frac).mean;
    res.summaries.push_back(s);
  }

  if (cfg.kind == RunKind::Both) {
    for (std::size_t length : cfg.lengths) {
      const LengthSummary* g = nullptr;
      const LengthSummary* c = nullptr;
      for (const auto& s : res.summaries) {
        if (s.length != length) continue;
        (s.kind == EnsembleKind::Grand ? g : c) = &s;
      }
      if (!g || !c) continue;
      KindComparison cmp;
      cmp.length = length;
      cmp.grand_mean = g->mean_rate;
      cmp.canonical_mean = c->mean_rate;
      cmp.pooled_se = std::sqrt(g->std_error * g->std_error + c->std_error * c->std_error);
      cmp.flagged = std::abs(g->mean_rate - c->mean_rate) > 3.0 * cmp.pooled_se;
      res.comparisons.push_back(cmp);
    }
  }
  return res;
}

std::string opt_str(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

}  // namespace

ConvergeResult run_converge(const ExperimentConfig& cfg, int workers) {
  return converge_impl(cfg, workers, true);
}

ConvergeResult run_converge_serial(const ExperimentConfig& cfg) {
  return converge_impl(cfg, 1, false);
}

void write_rows(std::ostream& os, const ConvergeResult& r, OutputFormat fmt) {
  if (fmt == OutputFormat::Csv) {
    os << "config_hash,kind,ell,n,replica,C,lz_rate,h_target,entropy_gap_per_site,"
          "low_entropy_typical,non_typical,other,status\n";
    for (const auto& row : r.rows) {
      os << r.config_hash << ',' << to_string(row.kind) << ',' << row.length << ',' << row.n
         << ',' << row.replica << ',' << row.words << ',' << format_double(row.lz_rate) << ','
         << format_double(row.h_target) << ',' << opt_str(row.entropy_gap_per_site) << ','
         << row.low_entropy_typical << ',' << row.non_typical << ',' << row.other << ",ok\n";
    }
    for (const auto& e : r.errors) {
      std::string msg = e.message;
      std::replace(msg.begin(), msg.end(), ',', ';');
      os << r.config_hash << ',' << to_string(e.kind) << ',' << e.length << ',' << e.n
         << ",,,," << format_double(r.h_target) << ",,,,,error: " << msg << '\n';
    }
    return;
  }
  for (const auto& row : r.rows) {
    ordered_json j;
    j["config_hash"] = r.config_hash;
    j["kind"] = to_string(row.kind);
    j["ell"] = row.length;
    j["n"] = row.n;
    j["replica"] = row.replica;
    j["C"] = row.words;
    j["lz_rate"] = row.lz_rate;
    j["h_target"] = row.h_target;
    j["entropy_gap_per_site"] =
        row.entropy_gap_per_site ? ordered_json(*row.entropy_gap_per_site) : ordered_json();
    j["low_entropy_typical"] = row.low_entropy_typical;
    j["non_typical"] = row.non_typical;
    j["other"] = row.other;
    j["status"] = "ok";
    os << j.dump() << '\n';
  }
  for (const auto& e : r.errors) {
    ordered_json j;
    j["config_hash"] = r.config_hash;
    j["kind"] = to_string(e.kind);
    j["ell"] = e.length;
    j["n"] = e.n;
    j["status"] = "error";
    j["message"] = e.message;
    os << j.dump() << '\n';
  }
}

void write_summary(std::ostream& os, const ConvergeResult& r, OutputFormat fmt) {
  if (fmt == OutputFormat::Csv) {
    os << "config_hash,kind,ell,n,replicas,mean_rate,std_error,h_target,rel_deviation,mean_C,"
          "mean_low_entropy_typical,mean_non_typical_fraction\n";
    for (const auto& s : r.summaries) {
      os << r.config_hash << ',' << to_string(s.kind) << ',' << s.length << ',' << s.n << ','
         << s.replicas << ',' << format_double(s.mean_rate) << ',' << format_double(s.std_error)
         << ',' << format_double(s.h_target) << ',' << format_double(s.rel_deviation) << ','
         << format_double(s.mean_words) << ',' << format_double(s.mean_low_entropy_typical) << ','
         << format_double(s.mean_non_typical_fraction) << '\n';
    }
    if (!r.comparisons.empty()) {
      os << "\nconfig_hash,ell,grand_mean,canonical_mean,pooled_se,flagged\n";
      for (const auto& c : r.comparisons) {
        os << r.config_hash << ',' << c.length << ',' << format_double(c.grand_mean) << ','
           << format_double(c.canonical_mean) << ',' << format_double(c.pooled_se) << ','
           << (c.flagged ? "true" : "false") << '\n';
      }
    }
    return;
  }
  for (const auto& s : r.summaries) {
    ordered_json j;
    j["config_hash"] = r.config_hash;
    j["kind"] = to_string(s.kind);
    j["ell"] = s.length;
    j["n"] = s.n;
    j["replicas"] = s.replicas;
    j["mean_rate"] = s.mean_rate;
    j["std_error"] = s.std_error;
    j["h_target"] = s.h_target;
    j["rel_deviation"] = s.rel_deviation;
    j["mean_C"] = s.mean_words;
    j["mean_low_entropy_typical"] = s.mean_low_entropy_typical;
    j["mean_non_typical_fraction"] = s.mean_non_typical_fraction;
    os << j.dump() << '\n';
  }
  for (const auto& c : r.comparisons) {
    ordered_json j;
    j["config_hash"] = r.config_hash;
    j["comparison"] = "grand_vs_canonical";
    j["ell"] = c.length;
    j["grand_mean"] = c.grand_mean;
    j["canonical_mean"] = c.canonical_mean;
    j["pooled_se"] = c.pooled_se;
    j["flagged"] = c.flagged;
    os << j.dump() << '\n';
  }
}

void write_timings(std::ostream& os, const ConvergeResult& r) {
  os << "config_hash,kind,ell,replica,wall_seconds\n";
  for (const auto& row : r.rows) {
    os << r.config_hash << ',' << to_string(row.kind) << ',' << row.length << ',' << row.replica
       << ',' << format_double(row.wall_seconds) << '\n';
  }
}

EntropyGapResult run_entropy_gap(const ExperimentConfig& cfg) {
  EntropyGapResult res;
  res.config_hash = config_hash_hex(cfg);
  const EnsembleSpec spec = resolve_ensemble(cfg);
  const double r = target_density(cfg, spec);
  for (std::size_t length : cfg.lengths) {
    GapRow row;
    row.length = length;
    row.n = choose_n({r}, length);
    try {
      const auto marginals = site_marginals(spec, length);
      const double cost = static_cast<double>(length) * static_cast<double>(row.n) *
                          static_cast<double>(max_support(marginals, row.n));
      if (cost > cfg.gap_budget) {
        row.status = "skipped: budget";
      } else {
        row.delta = entropy_gap(marginals, row.n);
      }
    } catch (const std::exception& e) {
      row.status = std::string("error: ") + e.what();
    }
    res.rows.push_back(row);
  }
  return res;
}

void write_entropy_gap(std::ostream& os, const EntropyGapResult& r, OutputFormat fmt) {
  if (fmt == OutputFormat::Csv) {
    os << "config_hash,ell,n,delta,delta_per_site,status\n";
    for (const auto& row : r.rows) {
      std::string status = row.status;
      std::replace(status.begin(), status.end(), ',', ';');
      os << r.config_hash << ',' << row.length << ',' << row.n << ',' << opt_str(row.delta) << ','
         << (row.delta ? format_double(*row.delta / static_cast<double>(row.length)) : "") << ','
         << status << '\n';
    }
    return;
  }
  for (const auto& row : r.rows) {
    ordered_json j;
    j["config_hash"] = r.config_hash;
    j["ell"] = row.length;
    j["n"] = row.n;
    j["delta"] = row.delta ? ordered_json(*row.delta) : ordered_json();
    j["delta_per_site"] = row.delta
                              ? ordered_json(*row.delta / static_cast<double>(row.length))
                              : ordered_json();
    j["status"] = row.status;
    os << j.dump() << '\n';
  }
}

}  // namespace gibbslz
