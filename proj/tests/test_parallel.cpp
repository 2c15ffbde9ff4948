#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "gibbslz/config.hpp"
#include "gibbslz/experiment.hpp"
#include "gibbslz/split_tree.hpp"

using namespace gibbslz;

namespace {
std::string dump(const ConvergeResult& r) {
  std::ostringstream os;
  write_rows(os, r, OutputFormat::Csv);
  write_summary(os, r, OutputFormat::Csv);
  write_rows(os, r, OutputFormat::Jsonl);
  return os.str();
}
}  // namespace

TEST_CASE("parallel converge matches the serial reference for any worker count") {
  const auto cfg = parse_config(
      "ensemble.stats = bose\nensemble.mu = -0.5\nrun.lengths = 512, 2^13\nrun.replicas = 5\n"
      "run.kind = both\nanalysis.entropy_gap = true\n");
  const std::string ref = dump(run_converge_serial(cfg));
  for (int workers : {1, 2, 3, 8}) CHECK(dump(run_converge(cfg, workers)) == ref);
}

TEST_CASE("parallel split tree build matches the serial build") {
  for (Statistics st : {Statistics::Fermi, Statistics::Bose}) {
    const EnsembleSpec spec{st, 1.0, st == Statistics::Fermi ? 1.0 : -0.5, Dispersion::cosine_lattice()};
    const auto m = site_marginals(spec, 3001);
    CHECK(SplitTree::build(m, 1500).levels() == SplitTree::build_serial(m, 1500).levels());
  }
}
