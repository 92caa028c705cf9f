// End-to-end acceptance run: one PASS/FAIL line per criterion, plus
// indented detail lines. Exit status is 0 only when every criterion passes.
//
//   acceptance [--only N[,M...]] [--threads T]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "newton_oracle.hpp"
#include "rlctfa/evidence.hpp"
#include "rlctfa/factor_model.hpp"
#include "rlctfa/learning_table.hpp"
#include "rlctfa/newton.hpp"
#include "rlctfa/parallel.hpp"
#include "rlctfa/rlct.hpp"
#include "rlctfa/scenarios.hpp"
#include "rlctfa/selection.hpp"
#include "rlctfa/volume.hpp"

using namespace rlctfa;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects failures and detail lines for one criterion.
class Report {
 public:
  void fail(const std::string& what) {
    if (failures_ < 20) detail("FAILED: " + what);
    ++failures_;
  }
  void check(bool ok, const std::string& what) {
    if (!ok) fail(what);
  }
  void detail(const std::string& line) { lines_.push_back(line); }
  bool ok() const { return failures_ == 0; }
  const std::vector<std::string>& lines() const { return lines_; }

 private:
  int failures_ = 0;
  std::vector<std::string> lines_;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

template <class... A>
std::string fmtn(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

unsigned g_threads = 1;

// ---------------------------------------------------------------- 1

void closed_forms(Report& rep) {
  const auto t0 = Clock::now();
  int cells = 0;
  for (int p = 1; p <= 12; ++p) {
    const long full = static_cast<long>(p) * (p + 1) / 2;
    for (int k = 0; k <= p; ++k) {
      for (int r = 0; r <= k; ++r) {
        ++cells;
        const long dr = static_cast<long>(r + 1) * p - static_cast<long>(r) * (r - 1) / 2;
        const long dk = static_cast<long>(k + 1) * p - static_cast<long>(k) * (k - 1) / 2;
        LearningCoefficient want = LearningCoefficient::upper_bound(Rational(1));
        if (dr > full) {
          want = LearningCoefficient::exact(Rational(p * (p + 1), 4), 1);
        } else if (r == k) {
          want = LearningCoefficient::exact(Rational(dk, 2), 1);
        } else if (r == 0 && k == p) {
          want = LearningCoefficient::exact(Rational(p * p + p + 1, 4), 1);
        } else if (r == 0) {
          want = LearningCoefficient::exact(Rational(p * (k + 2), 4), k == p - 1 ? p - 1 : 1);
        } else if (r == 1 && (k == p - 1 || k == p)) {
          want = LearningCoefficient::exact(Rational(p * (p + 1), 4), 1);
        } else if (r == 1) {
          want = LearningCoefficient::exact(Rational(p * k + 3 * p - k + 1, 4), 1);
        } else {
          want = LearningCoefficient::upper_bound(Rational(p * (k + 2) + r * (p - k + 1), 4));
        }
        const auto got = learning_coefficient(p, k, r);
        rep.check(got == want, fmtn("cell p=%d k=%d r=%d", p, k, r));
      }
    }
    if (p >= 2) {
      rep.check(learning_coefficient(p, 1, 0) == LearningCoefficient::exact(Rational(3 * p, 4), 1),
                fmtn("l_10 = 3p/4 at p=%d", p));
    }
  }
  const double secs = seconds_since(t0);
  rep.check(secs < 1.0, "runtime under 1 s");
  rep.detail(fmtn("%d cells, %.3f s", cells, secs));
}

// ---------------------------------------------------------------- 2

void identities(Report& rep) {
  int checks = 0;
  for (int p = 1; p <= 12; ++p) {
    const long full = static_cast<long>(p) * (p + 1) / 2;
    for (int k = 1; k <= p; ++k) {
      const auto dim = model_dimension(p, k);
      if (k < p && dim.d <= full) {
        rep.check(bound(p, k, k) == Rational(dim.d, 2), fmtn("bound(p,k,k) = d_k/2 at p=%d k=%d", p, k));
        ++checks;
      }
      if (k <= p - 1) {
        rep.check(learning_coefficient(p, k, 0).value() == bound(p, k, 0), fmtn("tight r=0 p=%d k=%d", p, k));
        ++checks;
      }
      if (k <= p - 2) {
        rep.check(learning_coefficient(p, k, 1).value() == bound(p, k, 1), fmtn("tight r=1 p=%d k=%d", p, k));
        ++checks;
      }
    }
    // (p^2+p+1)/4 < p(p+2)/4 exactly when p > 1; they meet at p = 1.
    if (p == 1) {
      rep.check(learning_coefficient(p, p, 0).value() == bound(p, p, 0), "k=p equals bound at p=1");
    } else {
      rep.check(learning_coefficient(p, p, 0).value() < bound(p, p, 0), fmtn("k=p strictly below bound p=%d", p));
    }
    ++checks;
    if (p >= 2 && model_dimension(p, 1).d <= full) {
      for (int k : {p - 1, p}) {
        if (k >= 1) {
          rep.check(learning_coefficient(p, k, 1).value() <= bound(p, k, 1), fmtn("r=1 below bound p=%d k=%d", p, k));
          ++checks;
        }
      }
    }
  }
  rep.check(learning_coefficient(2, 2, 1).value() == Rational(3, 2), "k=2, r=1 at p=2 is 3/2");
  rep.check(learning_coefficient(3, 2, 1).value() == Rational(3), "k=2, r=1 at p=3 is 3");
  for (int p = 4; p <= 12; ++p) {
    rep.check(learning_coefficient(p, 2, 1).value() == Rational(5 * p - 1, 4), fmtn("k=2, r=1 at p=%d", p));
  }
  rep.detail(fmtn("%d identities plus the k=2, r=1 specials", checks));
}

// ---------------------------------------------------------------- 3

void newton_cases(Report& rep) {
  double slowest = 0.0;
  auto timed = [&](const std::function<RlctPair()>& f) {
    const auto t0 = Clock::now();
    const RlctPair out = f();
    slowest = std::max(slowest, seconds_since(t0));
    return out;
  };
  int cases = 0;
  for (int d = 1; d <= 8; ++d) {
    for (int c = 1; c <= std::min(d, 6); ++c) {
      std::vector<ExponentVector> gens;
      for (int i = 0; i < c; ++i) {
        ExponentVector g(static_cast<std::size_t>(d), 0);
        g[static_cast<std::size_t>(i)] = 1;
        gens.push_back(g);
      }
      const MonomialIdeal ideal(d, gens);
      const auto got = timed([&] { return rlct_monomial(ideal, AmplitudeExponent::zero(d)); });
      rep.check(got == RlctPair(Rational(c), 1), fmtn("linear space c=%d d=%d", c, d));
      ++cases;
    }
  }
  for (int p = 2; p <= 7; ++p) {
    std::vector<ExponentVector> gens;
    for (int i = 0; i < p; ++i) {
      for (int j = i + 1; j < p; ++j) {
        ExponentVector g(static_cast<std::size_t>(p), 0);
        g[static_cast<std::size_t>(i)] = g[static_cast<std::size_t>(j)] = 1;
        gens.push_back(g);
      }
    }
    const MonomialIdeal ideal(p, gens);
    const auto got = timed([&] { return rlct_monomial(ideal, AmplitudeExponent::zero(p)); });
    // At p = 2 the ideal is the single monomial w1 w2 and the exact
    // multiplicity is 2; the threshold is p/2 throughout.
    const int mult = p == 2 ? 2 : 1;
    rep.check(got == RlctPair(Rational(p, 2), mult), fmtn("pairwise products p=%d", p));
    ++cases;
  }
  const MonomialIdeal square(1, {{2}});
  for (int p = 1; p <= 8; ++p) {
    for (int k = 1; k <= p; ++k) {
      const auto got = timed([&] { return rlct_monomial(square, AmplitudeExponent{{p * k - 1}}); });
      rep.check(got == RlctPair(Rational(p * k, 2), 1), fmtn("square with amplitude p=%d k=%d", p, k));
      ++cases;
    }
  }
  rep.check(slowest < 1.0, "each case under 1 s");
  rep.detail(fmtn("%d cases, slowest %.4f s", cases, slowest));
}

// ---------------------------------------------------------------- 4

void monomial_oracle(Report& rep) {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(20240917);
  std::uniform_int_distribution<int> dim(1, 4);
  int d2 = 0;
  double worst_width = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int d = trial % 4 == 0 ? 2 : dim(gen);
    const auto ideal = oracle::random_ideal(gen, d);
    const auto tau = oracle::random_tau(gen, d);
    const Rational delta = tau_distance(ideal, AmplitudeExponent{tau});
    const auto [lo, hi] = oracle::bisect_distance(ideal, tau);
    worst_width = std::max(worst_width, hi - lo);
    // The bracket is built with a 1e-9 feasibility tolerance.
    const double v = delta.to_double();
    rep.check(v >= lo - 1e-9 && v <= hi + 1e-9,
              fmtn("trial %d: %s outside [%.9f, %.9f]", trial, delta.str().c_str(), lo, hi));
    if (d == 2) {
      ++d2;
      bool at_vertex = false;
      const Rational x0 = delta * Rational(tau[0] + 1), x1 = delta * Rational(tau[1] + 1);
      for (const auto& [a, b] : oracle::polygon_vertices(ideal.generators())) {
        at_vertex = at_vertex || (x0 == Rational(a) && x1 == Rational(b));
      }
      rep.check(tau_multiplicity(ideal, AmplitudeExponent{tau}) == (at_vertex ? 2 : 1),
                fmtn("trial %d: d=2 multiplicity", trial));
    }
  }
  const double secs = seconds_since(t0);
  rep.check(secs < 60.0, "runtime under 1 min");
  rep.check(worst_width < 1e-6, "bracket width under 1e-6");
  rep.detail(fmtn("200 ideals (%d with d=2), widest bracket %.2e, %.2f s", d2, worst_width, secs));
}

// ---------------------------------------------------------------- 5

void strata(Report& rep) {
  struct Case {
    const char* name;
    double fiber, fiber_tol, learning;
  };
  const Case cases[] = {{"diag3", 1.5, 0.2, 2.25}, {"two3", 2.0, 0.25, 2.5}, {"generic3", 3.0, 0.3, 3.0}};
  for (const auto& c : cases) {
    const auto t0 = Clock::now();
    const auto point = builtin_scenario(c.name);
    const auto cfg = default_volume_config(point, 1, 10'000'000, 1, g_threads);
    const auto est = estimate_fiber_rlct(point, 1, cfg);
    const bool fiber_ok = std::abs(est.fit.ell_hat - c.fiber) <= c.fiber_tol;
    const bool learn_ok = std::abs(est.learning_hat - c.learning) <= c.fiber_tol / 2.0;
    rep.check(fiber_ok, fmtn("%s fiber exponent %.4f not within %.2f of %.2f", c.name, est.fit.ell_hat, c.fiber_tol, c.fiber));
    rep.check(learn_ok, fmtn("%s learning coefficient %.4f not within %.3f of %.2f", c.name, est.learning_hat,
                             c.fiber_tol / 2.0, c.learning));
    rep.check(cfg.eps_grid.size() == 6, "six eps levels");
    rep.detail(fmtn("%-8s fiber %.4f +- %.4f (target %.2f +- %.2f), learning %.4f (target %.2f +- %.3f), %zu levels, %.1f s",
                    c.name, est.fit.ell_hat, est.fit.std_error, c.fiber, c.fiber_tol, est.learning_hat, c.learning,
                    c.fiber_tol / 2.0, est.fit.points_used, seconds_since(t0)));
  }
}

// ---------------------------------------------------------------- 6

void torus(Report& rep) {
  const auto base = builtin_scenario("generic3");
  Vector gamma(3);
  gamma << 2.0, 1.0, 0.5;
  const auto scaled = torus_rescale(base, gamma);
  const long long samples = 1'000'000'000;
  const double radius = default_box_radius(base);

  auto run = [&](const FactorModelPoint& point, double r) {
    VolumeConfig cfg;
    cfg.box_radius = r;
    cfg.samples = samples;
    cfg.seed = 1;
    cfg.threads = g_threads;
    cfg.eps_grid = calibrate_eps_grid(point, 1, r, cfg.seed, samples, 0.003, 6, 2000);
    return fit_exponent(estimate_levelset_volumes(point, 1, cfg));
  };
  const auto t0 = Clock::now();
  const auto a = run(base, radius);
  const auto b = run(scaled, radius * gamma.cwiseAbs().maxCoeff());
  const double combined = std::hypot(a.std_error, b.std_error);
  const double gap = std::abs(a.ell_hat - b.ell_hat);
  rep.check(gap <= 2.0 * combined, fmtn("gap %.4f exceeds 2 combined SE %.4f", gap, 2.0 * combined));
  rep.detail(fmtn("Sigma0 %.4f +- %.4f, Gamma Sigma0 Gamma %.4f +- %.4f, gap %.4f <= %.4f, %.0f s",
                  a.ell_hat, a.std_error, b.ell_hat, b.std_error, gap, 2.0 * combined, seconds_since(t0)));
}

// ---------------------------------------------------------------- 7

void evidence_slopes(Report& rep) {
  EvidenceOptions opts;
  opts.method = EvidenceMethod::Importance;
  opts.threads = g_threads;
  const std::vector<long> grid{50, 100, 200, 400, 800};
  struct Case {
    const char* name;
    bool prefer_singular;
  };
  for (const Case c : {Case{"diag3", true}, Case{"generic3", false}}) {
    const auto t0 = Clock::now();
    const auto exp = run_evidence_experiment(builtin_scenario(c.name), 1, PriorSpec{}, grid, 20, 100'000, 1, opts);
    int preferred = 0;
    double mean = 0.0;
    for (const auto& f : exp.fits) {
      const bool closer_singular = std::abs(f.ell_hat - 2.25) < std::abs(f.ell_hat - 3.0);
      if (closer_singular == c.prefer_singular) ++preferred;
      mean += f.ell_hat / static_cast<double>(exp.fits.size());
    }
    std::vector<std::pair<long, double>> pooled;
    for (const auto& pt : exp.points) pooled.emplace_back(pt.n, pt.f_n);
    const auto pooled_fit = fit_learning_coefficient(pooled);
    rep.check(preferred >= 16, fmtn("%s: only %d/20 replicates prefer the expected value", c.name, preferred));
    rep.detail(fmtn("%-8s %2d/20 closer to %s, mean slope %.3f, pooled slope %.3f +- %.3f, %.0f s", c.name, preferred,
                    c.prefer_singular ? "2.25" : "3.0", mean, pooled_fit.ell_hat, pooled_fit.std_error,
                    seconds_since(t0)));
  }
}

// ---------------------------------------------------------------- 8

void sbic(Report& rep) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(-3000.0, -50.0);
  double worst = 0.0;
  int cases = 0;
  for (int trial = 0; trial < 5000; ++trial) {
    const int p = 1 + trial % 10;
    const int k_max = trial % (p + 1);
    const long n = 10 + 3 * trial;
    std::vector<double> ll(static_cast<std::size_t>(k_max) + 1);
    for (auto& v : ll) v = u(gen);
    const auto s = sbic_scores(ll, p, n, regular_penalties(p, k_max));
    for (int k = 0; k <= k_max; ++k) {
      worst = std::max(worst, std::abs(s[static_cast<std::size_t>(k)] - bic_score(ll[static_cast<std::size_t>(k)], p, k, n)));
      ++cases;
    }
  }
  rep.check(worst <= 1e-9, fmt("reduction error %.3e", worst));
  rep.detail(fmtn("reduction: %d scores, max |sBIC - BIC| = %.2e", cases, worst));

  const auto t0 = Clock::now();
  SelectionConfig cfg;
  cfg.p = 5;
  cfg.k_max = 2;
  cfg.true_r = 0;
  cfg.n = 200;
  cfg.replicates = 200;
  cfg.seed = 1;
  cfg.threads = g_threads;
  const auto res = run_selection_experiment(cfg);
  const double fb = res.bic_frequency(0), fs = res.sbic_frequency(0);
  rep.check(fs >= fb - 0.05, fmtn("sBIC picks M0 %.3f vs BIC %.3f", fs, fb));
  rep.detail(fmtn("selection p=5 k_max=2 r=0 n=200: M0 chosen by BIC %.3f, by sBIC %.3f (gate: sBIC >= BIC - 0.05), %.1f s",
                  fb, fs, seconds_since(t0)));
}

// ---------------------------------------------------------------- 9

void properties(Report& rep) {
  const auto t0 = Clock::now();
  const int n_cases = 10000;
  std::mt19937_64 gen(9);
  std::uniform_int_distribution<int> num(1, 12), den(1, 4), mult(1, 4);
  auto pair = [&] { return RlctPair(Rational(num(gen), den(gen)), mult(gen)); };
  int order_bad = 0, algebra_bad = 0;
  for (int i = 0; i < n_cases; ++i) {
    const auto a = pair(), b = pair(), c = pair();
    const auto ab = compare(a, b);
    if ((ab < 0) != (compare(b, a) > 0) || (ab == 0) != (a == b)) ++order_bad;
    if (ab <= 0 && compare(b, c) <= 0 && compare(a, c) > 0) ++order_bad;
    if (!(sum_rule(a, b) == sum_rule(b, a)) || !(sum_rule(sum_rule(a, b), c) == sum_rule(a, sum_rule(b, c))) ||
        sum_rule(a, RlctPair(b.lambda(), 1)).mult() != a.mult() || !(product_rule(a, b) == product_rule(b, a)) ||
        !(product_rule(product_rule(a, b), c) == product_rule(a, product_rule(b, c))) ||
        !(product_rule(a, a) == RlctPair(a.lambda(), 2 * a.mult())) ||
        (a.lambda() != b.lambda() && !(product_rule(a, b) == rlct_min(a, b)))) {
      ++algebra_bad;
    }
  }
  rep.check(order_bad == 0, fmtn("%d order violations", order_bad));
  rep.check(algebra_bad == 0, fmtn("%d sum/product rule violations", algebra_bad));

  std::normal_distribution<double> z;
  int rotation_bad = 0;
  for (int i = 0; i < n_cases; ++i) {
    const int p = 2 + i % 5, k = 1 + i % 3;
    Matrix a(p, p), lam(p, k), q(k, k);
    for (int r = 0; r < p; ++r) {
      for (int c = 0; c < p; ++c) a(r, c) = z(gen);
      for (int c = 0; c < k; ++c) lam(r, c) = z(gen);
    }
    for (int r = 0; r < k; ++r) {
      for (int c = 0; c < k; ++c) q(r, c) = z(gen);
    }
    const FactorModelPoint point(a * a.transpose() + Matrix::Identity(p, p));
    const Matrix rot = Eigen::HouseholderQR<Matrix>(q).householderQ();
    const double base = fiber_sos(point, lam);
    if (std::abs(fiber_sos(point, lam * rot) - base) > 1e-9 * (1.0 + base)) ++rotation_bad;
  }
  rep.check(rotation_bad == 0, fmtn("%d rotation-invariance violations", rotation_bad));

  // Seed determinism: the same configuration on 1 and on T > 1 workers.
  const char* names[] = {"diag3", "two3", "generic3"};
  std::uniform_int_distribution<int> threads(2, 8), chunk(1, 8);
  int volume_bad = 0;
  for (int i = 0; i < n_cases; ++i) {
    const auto point = builtin_scenario(names[i % 3]);
    VolumeConfig cfg;
    cfg.box_radius = 2.0;
    cfg.eps_grid = {1.0, 0.3, 0.1};
    cfg.samples = 10'000;
    cfg.chunk_size = static_cast<std::size_t>(chunk(gen)) * 512;
    cfg.seed = gen();
    cfg.threads = 1;
    const auto one = estimate_levelset_volumes(point, 1, cfg);
    cfg.threads = static_cast<unsigned>(threads(gen));
    const auto many = estimate_levelset_volumes(point, 1, cfg);
    if (one.counts != many.counts) ++volume_bad;
  }
  rep.check(volume_bad == 0, fmtn("%d volume runs depend on the thread count", volume_bad));

  int evidence_bad = 0;
  const auto s = sample_data(builtin_scenario("generic3"), 100, 3);
  for (int i = 0; i < 200; ++i) {
    EvidenceOptions opts;
    opts.method = i % 2 == 0 ? EvidenceMethod::PriorSampling : EvidenceMethod::Importance;
    opts.chunk_size = 1000;
    const std::uint64_t seed = gen();
    const auto one = log_marginal_likelihood(s, 1, PriorSpec{}, 5000, seed, opts);
    opts.threads = static_cast<unsigned>(threads(gen));
    const auto many = log_marginal_likelihood(s, 1, PriorSpec{}, 5000, seed, opts);
    if (one.log_marginal != many.log_marginal || one.mc_std_error != many.mc_std_error) ++evidence_bad;
  }
  rep.check(evidence_bad == 0, fmtn("%d evidence runs depend on the thread count", evidence_bad));

  const double secs = seconds_since(t0);
  rep.check(secs < 60.0, "runtime under 1 min");
  rep.detail(fmtn("%d cases each: order, sum/product algebra, rotation invariance, volume determinism; "
                  "200 evidence determinism cases; %.1f s",
                  n_cases, secs));
}

struct Criterion {
  int id;
  const char* title;
  void (*run)(Report&);
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  g_threads = default_threads();
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string tok;
      while (std::getline(ss, tok, ',')) only.insert(std::stoi(tok));
    } else if (arg == "--threads" && i + 1 < argc) {
      g_threads = static_cast<unsigned>(std::stoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: acceptance [--only N[,M...]] [--threads T]\n");
      return 2;
    }
  }

  const Criterion criteria[] = {
      {1, "closed-form learning coefficients", closed_forms},
      {2, "algebraic identities", identities},
      {3, "Newton-polyhedron calculator", newton_cases},
      {4, "monomial oracle equivalence", monomial_oracle},
      {5, "volume-oracle strata", strata},
      {6, "torus invariance", torus},
      {7, "evidence-slope discrimination", evidence_slopes},
      {8, "sBIC reduction and selection", sbic},
      {9, "property suites", properties},
  };

  bool all = true;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    Report rep;
    try {
      c.run(rep);
    } catch (const std::exception& e) {
      rep.fail(std::string("exception: ") + e.what());
    }
    std::printf("%s criterion %d: %s\n", rep.ok() ? "PASS" : "FAIL", c.id, c.title);
    for (const auto& line : rep.lines()) std::printf("    %s\n", line.c_str());
    std::fflush(stdout);
    all = all && rep.ok();
  }
  return all ? 0 : 1;
}
