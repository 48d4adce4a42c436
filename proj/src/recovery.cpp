#include "branched/recovery.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

#include "branched/errors.hpp"
#include "branched/operators.hpp"

namespace branched {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Conditioning above this flags the least-squares design as unreliable.
constexpr double kConditionCap = 1e12;

long integer_ratio(double num, double den, const char* what) {
  const double q = num / den;
  const double r = std::round(q);
  if (std::abs(q - r) > 1e-9 * std::max(1.0, std::abs(q)))
    throw IncommensurateMap(std::string(what) +
                            " must be an integer multiple of the grid step");
  return static_cast<long>(r);
}

double cardinal(double u) {
  const double p = kPi * u;
  if (std::abs(p) < 1e-6) return 1.0 - p * p / 6.0;
  return std::sin(p) / p;
}

double diff_norm(const SampledSignal& a, const SampledSignal& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.v.size(); ++i) {
    const cplx d = a.v[i] - b.v[i];
    acc += std::norm(d);
  }
  return std::sqrt(acc * a.grid.dt);
}

}  // namespace

void SamplingSpec::validate() const {
  if (!(omega > 0.0))
    throw std::invalid_argument("band half-width must be positive");
  if (!(tau > 0.0))
    throw std::invalid_argument("sample spacing must be positive");
  // The critical spacing pi/omega is admitted; it is the textbook edge case
  // and the conditioning report is the tool that flags it.
  if (tau * omega > kPi * (1.0 + 1e-12))
    throw std::invalid_argument(
        "sample spacing exceeds the critical value pi over the band half-width");
}

SampleSeq take_samples(const SampledSignal& x, double tau, std::optional<long> s) {
  x.grid.validate();
  if (!(tau > 0.0))
    throw std::invalid_argument("sample spacing must be positive");
  const long stride = integer_ratio(tau, x.grid.dt, "sample spacing");
  if (stride <= 0)
    throw IncommensurateMap("sample spacing lies below the grid step");
  const long m0 = integer_ratio(x.grid.t0, x.grid.dt, "window origin");

  SampleSeq out;
  const long first = ((-m0) % stride + stride) % stride;
  for (long i = first; i < x.grid.n; i += stride) {
    const long k = (m0 + i) / stride;
    if (s && k > *s) break;
    out.emplace_back(k, x.v[static_cast<size_t>(i)]);
  }
  return out;
}

SampledSignal sinc_reconstruct(const GridSpec& g, const SamplingSpec& spec,
                               const SampleSeq& samples) {
  g.validate();
  spec.validate();
  if (spec.s)
    throw std::invalid_argument(
        "cardinal series needs the two-sided sample sequence; clear s");

  SampledSignal out = zero_signal(g);
  for (int i = 0; i < g.n; ++i) {
    const double u = g.t(i) / spec.tau;
    cplx acc(0.0, 0.0);
    for (const auto& [k, v] : samples) acc += v * cardinal(u - static_cast<double>(k));
    out.v[static_cast<size_t>(i)] = acc;
  }
  return out;
}

OneSidedReport one_sided_reconstruct(const GridSpec& g, const SamplingSpec& spec,
                                     const SampleSeq& samples) {
  g.validate();
  spec.validate();
  if (!spec.s)
    throw std::invalid_argument("one-sided reconstruction needs the cutoff s");
  if (samples.empty()) throw std::invalid_argument("sample sequence is empty");
  for (const auto& [k, v] : samples)
    if (k > *spec.s)
      throw std::invalid_argument("sample index lies beyond the one-sided cutoff");

  std::vector<int> bins;
  for (int j = 0; j < g.n; ++j)
    if (std::abs(g.omega(j)) <= spec.omega * (1.0 + 1e-12)) bins.push_back(j);
  if (bins.empty()) throw std::invalid_argument("band holds no grid bins");

  // Model x(t) = (domega/2pi) sum_j c_j exp(i w_j t) over the band bins, the
  // inverse transform restricted to the band. Tikhonov weight 1e-10 sigma_max
  // keeps the solve defined across the conditioning collapse at tau = pi/omega.
  const double scale = g.domega() / (2.0 * kPi);
  const Eigen::Index rows = static_cast<Eigen::Index>(samples.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(bins.size());
  Eigen::MatrixXcd A(rows, cols);
  Eigen::VectorXcd b(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double t = spec.tau * static_cast<double>(samples[static_cast<size_t>(r)].first);
    b(r) = samples[static_cast<size_t>(r)].second;
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double w = g.omega(bins[static_cast<size_t>(c)]);
      A(r, c) = scale * std::exp(cplx(0.0, w * t));
    }
  }

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);

  OneSidedReport rep;
  rep.equations = static_cast<int>(rows);
  rep.unknowns = static_cast<int>(cols);
  rep.condition = smin > 0.0 ? smax / smin : kInf;
  if (static_cast<int>(rows) < static_cast<int>(cols)) rep.condition = kInf;
  rep.ill_conditioned = !(rep.condition <= kConditionCap);

  const double lam = 1e-10 * smax;
  Eigen::VectorXcd ub = svd.matrixU().adjoint() * b;
  Eigen::VectorXcd f(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    f(i) = ub(i) * (sv(i) / (sv(i) * sv(i) + lam * lam));
  Eigen::VectorXcd coef = svd.matrixV() * f;

  Spectrum X{g, std::vector<cplx>(static_cast<size_t>(g.n), cplx(0.0, 0.0))};
  for (Eigen::Index c = 0; c < cols; ++c)
    X.v[static_cast<size_t>(bins[static_cast<size_t>(c)])] = coef(c);
  rep.x = idft(X);
  return rep;
}

GapRecovery gap_extrapolate(const SampledSignal& observed, const ObservationSpec& obs,
                            const PocsOptions& opt) {
  observed.grid.validate();
  if (observed.v.size() != static_cast<size_t>(observed.grid.n))
    throw std::invalid_argument("signal length disagrees with its grid");
  if (opt.max_iterations < 1)
    throw std::invalid_argument("iteration cap must be positive");
  if (!(opt.tolerance >= 0.0))
    throw std::invalid_argument("tolerance must be non-negative");
  if (!(opt.relaxation > 0.0) || opt.relaxation > 2.0)
    throw std::invalid_argument("relaxation must lie in (0, 2]");

  const GridSpec& g = observed.grid;
  const std::vector<int> obs_idx = clip_to_grid(obs.observed, g.t0, g.dt, g.n);
  if (obs_idx.empty())
    throw std::invalid_argument("observed set misses every grid point");
  const std::vector<int> gap_bins = freq_bins(obs.gap, g);

  // Distances can only be trusted to FFT roundoff, which scales with the data.
  const double slack = 1e-13 * std::max(1.0, l2_norm(observed));
  const bool pure = opt.relaxation == 1.0;

  GapRecovery rec;
  rec.x = observed;  // trusted on the observed set, initial guess elsewhere
  double prev = kInf;
  for (int it = 0; it < opt.max_iterations; ++it) {
    Spectrum X = dft(rec.x);
    for (int j : gap_bins) X.v[static_cast<size_t>(j)] = cplx(0.0, 0.0);
    SampledSignal y = idft(X);
    const double dgap = diff_norm(rec.x, y);

    SampledSignal next = y;
    for (int i : obs_idx) next.v[static_cast<size_t>(i)] = observed.v[static_cast<size_t>(i)];
    const double dobs = diff_norm(y, next);

    rec.dist_gap.push_back(dgap);
    rec.dist_obs.push_back(dobs);
    if (pure) {
      // Alternating projections contract both gauges; an increase beyond
      // roundoff means the projections are wrong.
      if (dgap > prev * (1.0 + 1e-9) + slack || dobs > dgap * (1.0 + 1e-9) + slack)
        throw NumericalFailure("projection distance increased at iteration " +
                               std::to_string(it));
      prev = dobs;
    }

    if (!pure)
      for (size_t i = 0; i < next.v.size(); ++i)
        next.v[i] = rec.x.v[i] + opt.relaxation * (next.v[i] - rec.x.v[i]);

    const double update = diff_norm(next, rec.x);
    rec.x = std::move(next);
    rec.iterations = it + 1;
    rec.final_update = update / std::max(l2_norm(rec.x), 1e-300);
    if (rec.final_update <= opt.tolerance) {
      rec.converged = true;
      break;
    }
  }
  return rec;
}

namespace {

// Backward transport across a stored pair (v, prev): values of x_prev pin
// x_v through the inverted operator on the image of the glue set.
struct BackTransport {
  OperatorSpec op;
  IntervalSet pinned;
};

BackTransport invert_transport(const OperatorSpec& op, const IntervalSet& glue) {
  if (std::holds_alternative<Identity>(op)) return {Identity{}, glue};
  if (const auto* r = std::get_if<TimeReversal>(&op))
    return {*r, glue.reflect(r->tau)};
  if (const auto* f = std::get_if<Affine>(&op)) {
    if ((f->b != 1.0 && f->b != -1.0) || std::abs(f->a) < kInvertibilityFloor)
      throw ChainUnavailable("affine glue cannot transport values backward");
    const IntervalSet image =
        f->b == 1.0 ? glue.translate(f->c) : glue.reflect(f->c);
    return {Affine{1.0 / f->a, f->b, -f->b * f->c}, image};
  }
  throw ChainUnavailable("glue operator cannot transport values backward");
}

}  // namespace

BranchRecovery propagate_branches(const TopologySpec& t, const GapSpec& g,
                                  const SampledSignal& x1_observed,
                                  const IntervalSet& observed,
                                  const PocsOptions& opt) {
  t.validate();
  x1_observed.grid.validate();
  const GridSpec& grid = x1_observed.grid;

  ChainReport chains = check_thm1_chain_condition(t, g);
  if (!chains.all_ok) {
    std::string msg = "recovery chains missing:";
    for (const std::string& note : chains.notes) msg += " " + note + ";";
    msg.pop_back();
    throw ChainUnavailable(msg);
  }

  const std::vector<int> obs_idx = clip_to_grid(observed, grid.t0, grid.dt, grid.n);
  if (static_cast<int>(obs_idx.size()) < grid.n && freq_bins(g.gap(1), grid).empty())
    throw ConditionViolated(
        "branch 1 observation is incomplete and its gap holds no grid bins to "
        "extrapolate across");

  BranchRecovery out;
  out.xs.assign(static_cast<size_t>(t.m), zero_signal(grid));
  out.chains.resize(static_cast<size_t>(t.m));
  out.iterations.assign(static_cast<size_t>(t.m), 0);
  out.converged.assign(static_cast<size_t>(t.m), false);

  GapRecovery r1 = gap_extrapolate(x1_observed, {observed, g.gap(1)}, opt);
  out.xs[0] = std::move(r1.x);
  out.chains[0] = {1};
  out.iterations[0] = r1.iterations;
  out.converged[0] = r1.converged;

  // Chains are BFS-shortest, so ascending length makes every predecessor
  // ready before its successors.
  std::vector<int> order;
  for (int b = 2; b <= t.m; ++b) order.push_back(b);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return chains.chains[static_cast<size_t>(a - 1)]->size() <
           chains.chains[static_cast<size_t>(b - 1)]->size();
  });

  for (int b : order) {
    const std::vector<int>& chain = *chains.chains[static_cast<size_t>(b - 1)];
    const int prev = chain[chain.size() - 2];
    const GluePair* p = t.find(prev, b);
    const SampledSignal& source = out.xs[static_cast<size_t>(prev - 1)];

    SampledSignal seed;
    IntervalSet pinned;
    if (p->d == prev) {
      seed = apply_operator(p->op, source);
      pinned = p->set;
    } else {
      BackTransport back = invert_transport(p->op, p->set);
      seed = apply_operator(back.op, source);
      pinned = std::move(back.pinned);
    }

    GapRecovery rb = gap_extrapolate(seed, {pinned, g.gap(b)}, opt);
    out.xs[static_cast<size_t>(b - 1)] = std::move(rb.x);
    out.chains[static_cast<size_t>(b - 1)] = chain;
    out.iterations[static_cast<size_t>(b - 1)] = rb.iterations;
    out.converged[static_cast<size_t>(b - 1)] = rb.converged;
  }

  out.residuals = residual_all(t, out.xs);
  for (int d = 1; d <= t.m; ++d)
    out.gap_energies.push_back(
        gap_energy(dft(out.xs[static_cast<size_t>(d - 1)]), g.gap(d)));
  return out;
}

SampleRecovery sample_and_recover(const TopologySpec& t, const GapSpec& g,
                                  const SampledSignal& x1, const SamplingSpec& spec,
                                  const PocsOptions& opt) {
  spec.validate();
  if (!spec.s)
    throw std::invalid_argument("one-sided recovery needs the cutoff s");
  // The critical spacing loses uniqueness: band edge bins alias onto each
  // other, so recovery demands strictly denser samples.
  if (spec.tau * spec.omega >= kPi * (1.0 - 1e-12))
    throw std::invalid_argument(
        "one-sided recovery needs tau * omega strictly below pi");
  x1.grid.validate();
  const GridSpec& grid = x1.grid;
  for (int j = 0; j < grid.n; ++j) {
    const double w = grid.omega(j);
    if (std::abs(w) > spec.omega && !g.gap(1).contains(w))
      throw ConditionViolated(
          "branch 1 gap must cover every grid bin outside the sampling band");
  }

  SampleRecovery out;
  out.head = one_sided_reconstruct(grid, spec, take_samples(x1, spec.tau, spec.s));
  out.branches = propagate_branches(
      t, g, out.head.x, IntervalSet::of(grid.t0, grid.window_end()), opt);
  return out;
}

UniquenessVerdict uniqueness_oracle(int n, const std::vector<int>& observed,
                                    const std::vector<int>& gap) {
  if (n < 1 || n > 64)
    throw std::invalid_argument("oracle handles n between 1 and 64");
  for (int i : observed)
    if (i < 0 || i >= n) throw std::invalid_argument("observed index out of range");
  for (int j : gap)
    if (j < 0 || j >= n) throw std::invalid_argument("gap bin out of range");

  std::vector<int> obs(observed), gp(gap);
  std::sort(obs.begin(), obs.end());
  obs.erase(std::unique(obs.begin(), obs.end()), obs.end());
  std::sort(gp.begin(), gp.end());
  gp.erase(std::unique(gp.begin(), gp.end()), gp.end());

  UniquenessVerdict v;
  const Eigen::Index rows = static_cast<Eigen::Index>(obs.size() + gp.size());
  if (rows == 0) {
    v.nullspace_dim = n;
    return v;
  }

  // Vanishing on the observed samples is an identity row per index; a zero
  // spectrum bin is a DFT row. Unique recovery means the stack has rank n.
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(rows, n);
  Eigen::Index r = 0;
  for (int i : obs) A(r++, i) = cplx(1.0, 0.0);
  const double isq = 1.0 / std::sqrt(static_cast<double>(n));
  for (int j : gp) {
    for (int k = 0; k < n; ++k) {
      const double ph = -2.0 * kPi * static_cast<double>(j) * static_cast<double>(k) /
                        static_cast<double>(n);
      A(r, k) = isq * cplx(std::cos(ph), std::sin(ph));
    }
    ++r;
  }

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv(0);
  int rank = 0;
  if (smax > 0.0)
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > 1e-10 * smax) ++rank;
  v.nullspace_dim = n - rank;
  v.unique = v.nullspace_dim == 0;
  v.sigma_ratio = (rows >= n && smax > 0.0) ? sv(n - 1) / smax : 0.0;
  return v;
}

}  // namespace branched
