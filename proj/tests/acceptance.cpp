// Acceptance suite: one PASS/FAIL (or SKIP) line per criterion.
// Exit status is non-zero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "oracles.hpp"
#include "pdna/outliers.hpp"
#include "pdna/pipeline.hpp"
#include "pdna/synth.hpp"

using namespace pdna;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const char* id, const char* title, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  std::printf("%s %s %s: %s\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

EncodedMatrix encoded(const Eigen::MatrixXi& z) {
  EncodedMatrix e{z, {}, {}};
  for (Eigen::Index i = 0; i < z.rows(); ++i) e.row_ids.push_back("r" + std::to_string(i));
  for (Eigen::Index j = 0; j < z.cols(); ++j) e.col_ids.push_back("c" + std::to_string(j));
  return e;
}

// 1. column sums 0 (1e-9 m), unit norms (1e-9), ||X||_F^2 = n (1e-8), < 1 s
Outcome c1_standardization() {
  std::mt19937_64 rng(101);
  double worst_sum = 0, worst_norm = 0, worst_frob = 0;
  bool ok = true;
  const auto t0 = Clock::now();
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(rng() % 49), n = 1 + static_cast<Eigen::Index>(rng() % 50);
    const auto x = standardize(encoded(oracle::random_ternary(rng, m, n)));
    for (Eigen::Index j = 0; j < n; ++j) {
      const double s = std::abs(x.values.col(j).sum()), nr = std::abs(x.values.col(j).norm() - 1);
      worst_sum = std::max(worst_sum, s / static_cast<double>(m));
      worst_norm = std::max(worst_norm, nr);
      ok &= s <= 1e-9 * static_cast<double>(m) && nr <= 1e-9;
    }
    const double f = std::abs(x.values.squaredNorm() - static_cast<double>(n));
    worst_frob = std::max(worst_frob, f);
    ok &= f <= 1e-8;
  }
  const double secs = seconds_since(t0);
  ok &= secs < 1.0;
  return {ok, "max |sum|/m=" + fmt("%.2e", worst_sum) + " max |norm-1|=" + fmt("%.2e", worst_norm) +
                  " max |F^2-n|=" + fmt("%.2e", worst_frob) + " time=" + fmt("%.3f", secs) + "s"};
}

// 2. residual identity (1e-8 relative) and rank-1 exactness (1e-10)
Outcome c2_pca() {
  std::mt19937_64 rng(202);
  double worst_resid = 0, worst_rank1 = 0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(rng() % 40), n = 2 + static_cast<Eigen::Index>(rng() % 30);
    const Eigen::MatrixXd x = oracle::random_matrix(rng, m, n);
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(std::min(m, n)));
    const auto b = pca_fit(x, k);
    const Eigen::MatrixXd xv = x * b.directions;
    const double lhs = x.squaredNorm();
    const double rhs = xv.squaredNorm() + (x - xv * b.directions.transpose()).squaredNorm();
    worst_resid = std::max(worst_resid, std::abs(lhs - rhs) / lhs);

    Eigen::VectorXd u = oracle::random_matrix(rng, m, 1), v = oracle::random_matrix(rng, n, 1);
    u.normalize();
    v.normalize();
    const double sigma = 0.5 + 10.0 * static_cast<double>(rng() % 1000) / 1000.0;
    const auto r1 = pca_fit(Eigen::MatrixXd(sigma * u * v.transpose()), 1);
    const double dv = std::min((r1.directions.col(0) - v).norm(), (r1.directions.col(0) + v).norm());
    worst_rank1 = std::max({worst_rank1, dv, std::abs(r1.singular_values(0) - sigma) / sigma});
  }
  return {worst_resid <= 1e-8 && worst_rank1 <= 1e-10,
          "max relative residual gap=" + fmt("%.2e", worst_resid) + " max rank-1 error=" + fmt("%.2e", worst_rank1)};
}

// 3. sigma >= 0.99 oracle on all 200, exact support on >= 90%, < 30 s.
//    Solver runs with a start from every coordinate plus swap refinement;
//    the dense-start-only figures are printed alongside for reference.
Outcome c3_spca_oracle() {
  std::mt19937_64 rng(303);
  int matched = 0, below = 0, plain_matched = 0, plain_below = 0;
  double worst_ratio = 1;
  double solver_secs = 0;
  for (int t = 0; t < 200; ++t) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 9);
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(rng() % 19);
    const Eigen::Index p = 1 + static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(std::min<Eigen::Index>(3, n)));
    const Eigen::MatrixXd x = oracle::random_matrix(rng, m, n);
    SpcaOptions opt;
    opt.restarts = static_cast<int>(n);
    opt.refine = true;
    const auto t0 = Clock::now();
    const auto f = spca_rank1(x, p, opt);
    solver_secs += seconds_since(t0);
    const auto o = spca_oracle(x, p);
    const double ratio = f.sigma / o.sigma;
    worst_ratio = std::min(worst_ratio, ratio);
    below += ratio < 0.99;
    matched += f.support == o.support;
    const auto plain = spca_rank1(x, p);
    plain_below += plain.sigma / o.sigma < 0.99;
    plain_matched += plain.support == o.support;
  }
  const bool ok = below == 0 && matched >= 180 && solver_secs < 30;
  return {ok, "support match " + std::to_string(matched) + "/200, min sigma ratio=" + fmt("%.6f", worst_ratio) +
                  ", below 0.99: " + std::to_string(below) + ", time=" + fmt("%.2f", solver_secs) +
                  "s (restarts=n, refine); dense start only: match " + std::to_string(plain_matched) +
                  "/200, below 0.99: " + std::to_string(plain_below)};
}

// 4. E-Var non-decreasing in k (fixed p) and in p (fixed k), tolerance 1e-10
Outcome c4_evar_monotone() {
  const std::vector<Eigen::Index> ks{1, 2, 3, 4, 5};
  const std::vector<Eigen::Index> ps{5, 10, 20, 40, 60};
  int violations = 0;
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = gen_blocs({4, {15, 15, 15, 15}, 60, {0.85}, 2, 1000 + seed});
    const auto x = standardize(encode(clean_dataset(s.dataset)));
    std::vector<std::vector<double>> ev(ks.size(), std::vector<double>(ps.size()));
    for (std::size_t b = 0; b < ps.size(); ++b) {
      const Eigen::Index p = std::min(ps[b], x.cols());
      const auto basis = spca_fit(x.values, ks.back(), p);
      for (std::size_t a = 0; a < ks.size(); ++a) {
        ComponentBasis<double> head = basis;
        head.directions = basis.directions.leftCols(ks[a]);
        head.singular_values = basis.singular_values.head(ks[a]);
        ev[a][b] = expressed_variance(x.values, head);
      }
    }
    for (std::size_t a = 0; a < ks.size(); ++a)
      for (std::size_t b = 0; b < ps.size(); ++b) {
        if (a > 0) {
          const double drop = ev[a - 1][b] - ev[a][b];
          worst = std::max(worst, drop);
          violations += drop > 1e-10;
        }
        if (b > 0) {
          const double drop = ev[a][b - 1] - ev[a][b];
          worst = std::max(worst, drop);
          violations += drop > 1e-10;
        }
      }
  }
  return {violations == 0, std::to_string(violations) + " decreases over 20 datasets (k=1..5, p in {5,10,20,40,60}); "
                               "largest drop=" + fmt("%.3e", worst)};
}

// 5. log-domain posterior vs direct density ratio (1e-9 relative), sums to 1 (1e-9)
Outcome c5_posterior() {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  double worst_rel = 0, worst_sum = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t ng = 2 + rng() % 5;
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(rng() % 5);
    std::vector<GaussianClass<double>> cls(ng);
    std::vector<double> priors;
    std::vector<Eigen::VectorXd> means;
    std::vector<Eigen::MatrixXd> covs;
    std::vector<std::string> ids;
    double total = 0;
    for (auto& c : cls) total += (c.prior = unif(rng));
    for (std::size_t g = 0; g < ng; ++g) {
      cls[g].prior /= total;
      cls[g].mean = oracle::random_matrix(rng, k, 1);
      cls[g].covariance = oracle::random_spd(rng, k, 1e4);
      priors.push_back(cls[g].prior);
      means.push_back(cls[g].mean);
      covs.push_back(cls[g].covariance);
      ids.push_back("g" + std::to_string(g));
    }
    const GmmModel<double> model(ids, cls, 0.0);
    const Eigen::VectorXd x = oracle::random_matrix(rng, k, 1);
    const Eigen::VectorXd got = dna_posterior(model, x).pi;
    const Eigen::VectorXd want = oracle::direct_posterior(priors, means, covs, x);
    for (Eigen::Index g = 0; g < got.size(); ++g) {
      const double denom = std::max(std::abs(want(g)), std::numeric_limits<double>::min());
      worst_rel = std::max(worst_rel, std::abs(got(g) - want(g)) / denom);
    }
    worst_sum = std::max(worst_sum, std::abs(got.sum() - 1));
  }
  return {worst_rel <= 1e-9 && worst_sum <= 1e-9,
          "max relative error=" + fmt("%.2e", worst_rel) + " max |sum-1|=" + fmt("%.2e", worst_sum)};
}

double argmax_accuracy(const SyntheticGmm& s) {
  const auto model = gmm_fit(s.points, s.labels, s.group_ids);
  std::size_t hit = 0;
  for (Eigen::Index i = 0; i < s.points.rows(); ++i) {
    Eigen::Index best;
    posterior(model, s.points.row(i).transpose()).maxCoeff(&best);
    hit += static_cast<std::size_t>(best) == s.labels[static_cast<std::size_t>(i)];
  }
  return static_cast<double>(hit) / static_cast<double>(s.points.rows());
}

// 6. separation 6 -> >= 99%; separation 0 -> within 5 points of chance
Outcome c6_classification() {
  const std::vector<std::size_t> sizes(4, 500);
  const double sep = argmax_accuracy(gen_gmm(4, 4, 6.0, sizes, 606));
  const double none = argmax_accuracy(gen_gmm(4, 4, 0.0, sizes, 607));
  return {sep >= 0.99 && std::abs(none - 0.25) <= 0.05,
          "separation 6: " + fmt("%.2f", 100 * sep) + "%, separation 0: " + fmt("%.2f", 100 * none) + "% (chance 25%)"};
}

// 7. planted outliers: both flagged in >= 9/10 seeds, <= 1 false positive per
//    run, flagged plants lean to the bloc they vote with, < 10 s per seed
Outcome c7_planted() {
  int full = 0, fp_runs = 0, dna_bad = 0;
  double slowest = 0;
  std::ostringstream per_seed;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto t0 = Clock::now();
    const auto s = gen_blocs({4, {20, 20, 20, 20}, 60, {0.95}, 2, seed});
    const auto d = clean_dataset(s.dataset);
    const auto a = outlier_pipeline(d, 4, 20);

    PipelineConfig cfg;
    cfg.reduction.k = static_cast<int>(d.num_groups()) - 1;
    const auto r = run_pipeline(cfg, d);

    std::set<std::string> planted, flagged;
    for (const auto& pl : s.planted) planted.insert(pl.voter_id);
    for (const auto& c : a.components)
      for (const auto& o : c.outliers) flagged.insert(o.voter_id);
    std::size_t hits = 0, fps = 0;
    for (const auto& id : flagged) (planted.count(id) ? hits : fps)++;
    full += hits == planted.size();
    fp_runs += fps > 1;

    for (const auto& pl : s.planted) {
      if (!flagged.count(pl.voter_id)) continue;
      const auto i = *r.dataset.find_voter(pl.voter_id);
      const auto& gids = r.model.group_ids();
      const auto at = [&](const std::string& g) {
        return r.dna[i].pi(static_cast<Eigen::Index>(std::find(gids.begin(), gids.end(), g) - gids.begin()));
      };
      dna_bad += !(at(pl.voted_group) > at(pl.nominal_group));
    }
    const double secs = seconds_since(t0);
    slowest = std::max(slowest, secs);
    per_seed << ' ' << seed << ':' << hits << '/' << planted.size() << (fps ? "+" + std::to_string(fps) + "fp" : "");
  }
  const bool ok = full >= 9 && fp_runs == 0 && dna_bad == 0 && slowest < 10;
  return {ok, "both plants flagged in " + std::to_string(full) + "/10 seeds, runs with >1 false positive: " +
                  std::to_string(fp_runs) + ", DNA violations: " + std::to_string(dna_bad) +
                  ", slowest seed " + fmt("%.2f", slowest) + "s; per seed:" + per_seed.str()};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PDNA_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 8. two identical CLI runs -> byte-identical artifacts
Outcome c8_determinism() {
  const auto root = std::filesystem::temp_directory_path() / ("pdna-accept-" + std::to_string(std::random_device{}()));
  std::filesystem::create_directories(root);
  struct Cleanup {
    std::filesystem::path p;
    ~Cleanup() {
      std::error_code ec;
      std::filesystem::remove_all(p, ec);
    }
  } cleanup{root};

  const auto data = root / "data";
  if (run_cli("synth --groups 4 --sizes 12,12,12,12 --bills 50 --cohesion 0.9 --outliers 2 --seed 8 --out " +
              data.string()) != 0)
    return {false, "synth failed"};
  // the run directory is the only thing that differs, so run from inside each
  const std::string in = "--votes " + (data / "votes.csv").string() + " --voters " + (data / "voters.csv").string() +
                         " --bills " + (data / "bills.csv").string();
  std::size_t compared = 0, differing = 0;
  for (const char* method : {"--reduce pca --k 3", "--reduce spca --k 3 --p 12"}) {
    const auto a = root / "a", b = root / "b";
    std::filesystem::remove_all(a);
    std::filesystem::remove_all(b);
    if (run_cli(std::string("fit ") + in + " " + method + " --out " + a.string()) != 0 ||
        run_cli(std::string("fit ") + in + " " + method + " --out " + b.string()) != 0)
      return {false, std::string("fit failed for ") + method};
    for (const auto& e : std::filesystem::directory_iterator(a)) {
      ++compared;
      differing += slurp(e.path()) != slurp(b / e.path().filename());
    }
  }
  return {compared == 12 && differing == 0,
          std::to_string(compared) + " artifacts compared across pca and spca runs, " + std::to_string(differing) +
              " differ"};
}

// 9. conditional on the real dataset being supplied
void c9_conditional() {
  const char* dir = std::getenv("PDNA_SENATE_DATA");
  if (!dir || !*dir) {
    std::printf("SKIP C9 Senate XVII reproduction: set PDNA_SENATE_DATA to a directory with votes.csv, voters.csv, "
                "bills.csv (or to a dataset .json) to run\n");
    return;
  }
  report("C9", "Senate XVII reproduction", [&]() -> Outcome {
    const std::filesystem::path p(dir);
    const VoteDataset raw = p.extension() == ".json" ? parse_json(p) : parse_dataset(p, InputFormat::Csv);
    const auto d = clean_dataset(raw);
    const auto x = standardize(encode(d));
    const double ev2 = expressed_variance(x, pca_fit(x, 2));
    const double ev10 = expressed_variance(x, pca_fit(x, 10));
    bool ok = d.num_voters() == 335 && d.num_bills() == 155;
    ok &= std::abs(100 * ev2 - 63.38) <= 0.5 && std::abs(100 * ev10 - 78.79) <= 0.5;

    // first three sparse components should be dominated by the three largest groups
    std::vector<std::pair<std::size_t, std::string>> sizes;
    for (std::size_t g = 0; g < d.num_groups(); ++g) {
      std::size_t n = 0;
      for (const auto& v : d.voters()) n += v.group == g;
      sizes.emplace_back(n, d.groups()[g]);
    }
    std::sort(sizes.rbegin(), sizes.rend());
    const auto a = outlier_pipeline(d, 3, 50);
    std::set<std::string> dominant, largest;
    for (const auto& c : a.components) dominant.insert(c.dominant_group);
    for (std::size_t i = 0; i < 3 && i < sizes.size(); ++i) largest.insert(sizes[i].second);
    ok &= dominant == largest;
    return {ok, "m=" + std::to_string(d.num_voters()) + " n=" + std::to_string(d.num_bills()) +
                    " E-Var(k=2)=" + fmt("%.2f", 100 * ev2) + "% E-Var(k=10)=" + fmt("%.2f", 100 * ev10) + "%"};
  });
}

}  // namespace

int main() {
  report("C1", "standardization", c1_standardization);
  report("C2", "PCA correctness", c2_pca);
  report("C3", "sparse PCA oracle equivalence", c3_spca_oracle);
  report("C4", "E-Var monotonicity", c4_evar_monotone);
  report("C5", "posterior fidelity", c5_posterior);
  report("C6", "classification sanity", c6_classification);
  report("C7", "planted-outlier recovery", c7_planted);
  report("C8", "CLI determinism", c8_determinism);
  c9_conditional();
  return failures == 0 ? 0 : 1;
}
