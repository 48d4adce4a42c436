#include "branched/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <utility>

#include <json.hpp>

#include "branched/errors.hpp"
#include "branched/fixtures.hpp"
#include "branched/generators.hpp"
#include "json_support.hpp"

namespace branched {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double rel_l2_error(const SampledSignal& got, const SampledSignal& want) {
  SampledSignal diff{got.grid, got.v};
  for (size_t i = 0; i < diff.v.size(); ++i) diff.v[i] -= want.v[i];
  const double den = l2_norm(want);
  const double num = l2_norm(diff);
  return den > 0.0 ? num / den : num;
}

// --- CSV ---------------------------------------------------------------

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_for_write(const std::string& path) {
  FilePtr f{std::fopen(path.c_str(), "w")};
  if (!f) throw ParseError("cannot open '" + path + "' for writing");
  return f;
}

std::string csv_cell(const std::string& line, size_t& pos, const std::string& path,
                     int lineno) {
  if (pos > line.size())
    throw ParseError(path + ":" + std::to_string(lineno) + ": missing column");
  size_t comma = line.find(',', pos);
  std::string cell = line.substr(pos, comma == std::string::npos ? comma : comma - pos);
  pos = comma == std::string::npos ? line.size() + 1 : comma + 1;
  return cell;
}

double csv_number(const std::string& line, size_t& pos, const std::string& path,
                  int lineno) {
  const std::string cell = csv_cell(line, pos, path, lineno);
  try {
    size_t used = 0;
    double v = std::stod(cell, &used);
    while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used])))
      ++used;
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw ParseError(path + ":" + std::to_string(lineno) + ": bad number '" + cell +
                     "'");
  }
}

// --- scenario JSON -----------------------------------------------------

IntervalSet set_from_json(const json& j) {
  if (j.is_string()) return IntervalSet::parse(j.get<std::string>());
  return interval_set_from_json(j);
}

json set_to_json(const IntervalSet& s) { return s.format(); }

std::vector<std::pair<double, cplx>> read_factor_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw ParseError(path + ":1: empty factor table");
  std::vector<std::pair<double, cplx>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t pos = 0;
    double w = csv_number(line, pos, path, lineno);
    double re = csv_number(line, pos, path, lineno);
    double im = csv_number(line, pos, path, lineno);
    if (!rows.empty() && !(w > rows.back().first))
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": omega column must increase strictly");
    rows.push_back({w, cplx{re, im}});
  }
  if (rows.empty()) throw ParseError(path + ": factor table has no rows");
  return rows;
}

OperatorSpec op_from_json(const json& j, const GridSpec& g, const fs::path& base,
                          bool allow_piecewise);

OperatorSpec basic_op_from_json(const json& j, const GridSpec& g,
                                const fs::path& base) {
  return op_from_json(j, g, base, false);
}

OperatorSpec op_from_json(const json& j, const GridSpec& g, const fs::path& base,
                          bool allow_piecewise) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "identity") return Identity{};
  if (kind == "reverse") return TimeReversal{j.at("tau").get<double>()};
  if (kind == "affine")
    return Affine{j.at("a").get<double>(), j.at("b").get<double>(),
                  j.at("c").get<double>()};
  if (kind == "conv") {
    const std::string rel = j.at("kernel").get<std::string>();
    return Convolution{read_signal_csv((base / rel).string(), g)};
  }
  if (kind == "freqmul") {
    const std::string rel = j.at("table").get<std::string>();
    auto rows = read_factor_table((base / rel).string());
    auto h = [rows](double w) -> cplx {
      if (w <= rows.front().first) return rows.front().second;
      if (w >= rows.back().first) return rows.back().second;
      auto hi = std::upper_bound(rows.begin(), rows.end(), w,
                                 [](double v, const auto& r) { return v < r.first; });
      auto lo = hi - 1;
      const double f = (w - lo->first) / (hi->first - lo->first);
      return lo->second + f * (hi->second - lo->second);
    };
    return FreqMultiplier{std::move(h), "table:" + rel};
  }
  if (kind == "piecewise") {
    if (!allow_piecewise)
      throw std::invalid_argument("piecewise glue cannot nest");
    Piecewise pw;
    for (const json& piece : j.at("pieces")) {
      OperatorSpec sub = basic_op_from_json(piece.at("op"), g, base);
      BasicOperator op = std::visit(
          [](auto&& v) -> BasicOperator {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Piecewise>)
              throw std::invalid_argument("piecewise glue cannot nest");
            else
              return BasicOperator{std::move(v)};
          },
          std::move(sub));
      pw.pieces.push_back({set_from_json(piece.at("set")), std::move(op)});
    }
    return pw;
  }
  throw std::invalid_argument("unknown operator kind '" + kind + "'");
}

SampledSignal input_from_json(const json& j, const GridSpec& g, const fs::path& base,
                              unsigned default_seed, std::string& note) {
  const std::string kind = j.at("kind").get<std::string>();
  note = kind;
  if (kind == "zero") return zero_signal(g);
  if (kind == "csv") {
    const std::string rel = j.at("path").get<std::string>();
    note += ":" + rel;
    return read_signal_csv((base / rel).string(), g);
  }
  if (kind == "indicator") {
    SampledSignal x =
        indicator_signal(g, j.at("lo").get<double>(), j.at("hi").get<double>());
    const cplx amp{j.value("re", 1.0), j.value("im", 0.0)};
    const double carrier = j.value("carrier", 0.0);
    if (amp != cplx{1.0, 0.0} || carrier != 0.0)
      for (int i = 0; i < g.n; ++i)
        x.v[static_cast<size_t>(i)] *=
            amp * std::polar(1.0, carrier * (g.t0 + i * g.dt));
    return x;
  }
  if (kind == "sinc")
    return sinc_pulse(g, j.at("bandwidth").get<double>(), j.value("center", 0.0),
                      j.value("amp", 1.0));
  if (kind == "smooth-bump")
    return smooth_bump(g, j.at("center").get<double>(),
                       j.at("halfwidth").get<double>(),
                       cplx{j.value("re", 1.0), j.value("im", 0.0)},
                       j.value("carrier", 0.0));
  if (kind == "gaussian-mixture") {
    std::vector<GaussComponent> parts;
    for (const json& c : j.at("components"))
      parts.push_back({c.at("amp").get<double>(), c.at("center").get<double>(),
                       c.at("width").get<double>(), c.value("carrier", 0.0)});
    return gaussian_mixture(g, parts);
  }
  if (kind == "random-bandlimited") {
    const unsigned seed = j.value("seed", default_seed);
    note += "(seed=" + std::to_string(seed) + ")";
    return random_bandlimited(g, j.at("omega_max").get<double>(), seed,
                              j.value("scale", 1.0));
  }
  if (kind == "pulse-train") {
    const unsigned seed = j.value("seed", default_seed);
    note += "(seed=" + std::to_string(seed) + ")";
    std::vector<PulseAtom> anchors;
    if (j.contains("anchors"))
      for (const json& a : j.at("anchors"))
        anchors.push_back({cplx{a.value("re", 1.0), a.value("im", 0.0)},
                           a.at("center").get<double>(), a.at("sigma").get<double>(),
                           a.value("carrier", 0.0)});
    return bandlimited_pulse_train(
        g, j.at("omega_max").get<double>(), seed, j.at("count").get<int>(),
        j.at("t_lo").get<double>(), j.at("t_hi").get<double>(),
        j.at("sigma_lo").get<double>(), j.at("sigma_hi").get<double>(),
        j.at("carrier_max").get<double>(), anchors, j.value("scale", 1.0));
  }
  throw std::invalid_argument("unknown input kind '" + kind + "'");
}

GapPlan plan_from_json(const json& j) {
  GapPlan plan;
  plan.delta = j.value("delta", 0.1);
  if (j.contains("centers")) {
    const json& c = j.at("centers");
    if (c.is_object()) {
      for (auto it = c.begin(); it != c.end(); ++it)
        plan.centers[std::stoi(it.key())] = it.value().get<double>();
    } else {
      for (const json& pair : c) {
        if (!pair.is_array() || pair.size() != 2)
          throw std::invalid_argument("plan center must be a [branch, omega] pair");
        plan.centers[pair[0].get<int>()] = pair[1].get<double>();
      }
    }
  }
  if (j.contains("fixed_g1") && !j.at("fixed_g1").is_null())
    plan.fixed_g1 = set_from_json(j.at("fixed_g1"));
  return plan;
}

Scenario from_fixture(Fixture f, const RunOptions& opt) {
  Scenario sc;
  sc.name = f.name;
  sc.grid = f.grid;
  sc.topology = std::move(f.topology);
  sc.plan = std::move(f.plan);
  sc.inputs = std::move(f.inputs);
  sc.input_notes.assign(sc.inputs.size(), "bundled:" + sc.name);
  sc.sampling = f.sampling;
  sc.pocs = f.pocs;
  sc.widen_gaps_with_g1 = f.widen_gaps_with_g1;
  sc.outputs = "runs/" + sc.name;
  sc.base_seed = opt.seed;
  return sc;
}

Scenario from_json_file(const std::string& path, const RunOptions& opt) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  const fs::path base = fs::path(path).parent_path();

  Scenario sc;
  sc.base_seed = opt.seed;
  sc.name = j.value("name", fs::path(path).stem().string());
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    sc.grid.t0 = g.value("t0", sc.grid.t0);
    sc.grid.dt = g.value("dt", sc.grid.dt);
    sc.grid.n = g.value("n", sc.grid.n);
  }
  sc.grid.validate();

  const json& t = j.at("topology");
  sc.topology.m = t.at("m").get<int>();
  if (t.contains("pairs"))
    for (const json& p : t.at("pairs"))
      sc.topology.pairs.push_back({p.at("d").get<int>(), p.at("k").get<int>(),
                                   set_from_json(p.at("set")),
                                   op_from_json(p.at("op"), sc.grid, base, true)});
  sc.topology.validate();

  const json& inputs = j.at("inputs");
  if (static_cast<int>(inputs.size()) != sc.topology.m)
    throw std::invalid_argument("scenario has " + std::to_string(inputs.size()) +
                                " inputs for " + std::to_string(sc.topology.m) +
                                " branches");
  for (size_t d = 0; d < inputs.size(); ++d) {
    std::string note;
    sc.inputs.push_back(input_from_json(inputs[d], sc.grid, base,
                                        opt.seed + static_cast<unsigned>(d), note));
    sc.input_notes.push_back(std::move(note));
  }

  if (j.contains("plan")) sc.plan = plan_from_json(j.at("plan"));
  if (j.contains("deltas"))
    for (const json& d : j.at("deltas")) sc.deltas.push_back(d.get<double>());
  if (j.contains("sampling")) {
    const json& s = j.at("sampling");
    SamplingSpec spec;
    spec.omega = s.at("omega").get<double>();
    spec.tau = s.at("tau").get<double>();
    if (s.contains("s") && !s.at("s").is_null()) spec.s = s.at("s").get<long>();
    sc.sampling = spec;
  }
  if (j.contains("observation")) {
    const json& o = j.at("observation");
    ObservationSpec obs;
    obs.observed = set_from_json(o.at("observed"));
    if (o.contains("gap")) obs.gap = set_from_json(o.at("gap"));
    sc.observation = std::move(obs);
  }
  if (j.contains("recovery")) {
    const json& r = j.at("recovery");
    sc.pocs.max_iterations = r.value("max_iterations", sc.pocs.max_iterations);
    sc.pocs.tolerance = r.value("tolerance", sc.pocs.tolerance);
    sc.pocs.relaxation = r.value("relaxation", sc.pocs.relaxation);
    sc.widen_gaps_with_g1 = r.value("widen_gaps_with_g1", sc.widen_gaps_with_g1);
  }
  sc.outputs = j.value("outputs", "runs/" + sc.name);
  return sc;
}

// --- reports -----------------------------------------------------------

std::string resolve_out_dir(const Scenario& sc, const RunOptions& opt) {
  const std::string dir = opt.out_dir.empty() ? sc.outputs : opt.out_dir;
  fs::create_directories(dir);
  return dir;
}

void write_report(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
}

json finite_or_tag(double v) {
  return std::isfinite(v) ? json(v) : json(fmt17(v));
}

json base_report(const Scenario& sc) {
  json j;
  j["name"] = sc.name;
  j["seed"] = sc.base_seed;
  j["inputs"] = sc.input_notes;
  return j;
}

json residual_list(const TopologySpec& t, const std::vector<double>& values) {
  json arr = json::array();
  for (size_t i = 0; i < t.pairs.size(); ++i)
    arr.push_back({{"d", t.pairs[i].d}, {"k", t.pairs[i].k}, {"value", values[i]}});
  return arr;
}

const char* kind_name(PairwiseKind k) {
  switch (k) {
    case PairwiseKind::Determined: return "determined";
    case PairwiseKind::Coincide: return "coincide";
    case PairwiseKind::Redundant: return "redundant";
  }
  return "?";
}

json findings_list(const std::vector<PairwiseFinding>& fs) {
  json arr = json::array();
  for (const PairwiseFinding& f : fs)
    arr.push_back(
        {{"d", f.d}, {"k", f.k}, {"kind", kind_name(f.kind)}, {"text", f.text}});
  return arr;
}

// Recovery gap declarations: the constructed gaps, widened per scenario, with
// an explicit observation gap joining branch 1's.
GapSpec recovery_gaps(const Scenario& sc, const GapSpec& constructed) {
  GapSpec gaps = constructed;
  if (sc.widen_gaps_with_g1 && sc.plan.fixed_g1)
    for (int d = 2; d <= sc.topology.m; ++d)
      gaps.set_gap(d, gaps.gap(d).unite(*sc.plan.fixed_g1));
  if (sc.observation && !sc.observation->gap.empty())
    gaps.set_gap(1, gaps.gap(1).unite(sc.observation->gap));
  return gaps;
}

IntervalSet whole_window(const GridSpec& g) {
  return IntervalSet::of(g.t0, g.window_end());
}

json branch_results(const Scenario& sc, const Construction& c,
                    const BranchRecovery& out, std::vector<double>& errors) {
  json arr = json::array();
  for (int d = 1; d <= sc.topology.m; ++d) {
    const size_t i = static_cast<size_t>(d - 1);
    const double err = rel_l2_error(out.xs[i], c.xs[i]);
    errors.push_back(err);
    arr.push_back({{"branch", d},
                   {"chain", out.chains[i]},
                   {"iterations", out.iterations[i]},
                   {"converged", static_cast<bool>(out.converged[i])},
                   {"rel_l2_error", err},
                   {"gap_energy", out.gap_energies[i]}});
  }
  return arr;
}

void write_recovered(const std::string& dir, const BranchRecovery& out) {
  for (size_t i = 0; i < out.xs.size(); ++i)
    write_signal_csv(dir + "/recovered_" + std::to_string(i + 1) + ".csv",
                     out.xs[i]);
}

void print_branches(const Scenario& sc, const BranchRecovery& out,
                    const std::vector<double>& errors) {
  for (int d = 1; d <= sc.topology.m; ++d) {
    const size_t i = static_cast<size_t>(d - 1);
    std::printf("  branch %d: iterations=%d converged=%s rel_error=%.3e\n", d,
                out.iterations[i], out.converged[i] ? "yes" : "no", errors[i]);
  }
}

}  // namespace

// --- CSV entry points ----------------------------------------------------

void write_signal_csv(const std::string& path, const SampledSignal& x) {
  FilePtr f = open_for_write(path);
  std::fprintf(f.get(), "t,re,im\n");
  for (int i = 0; i < x.grid.n; ++i) {
    const cplx v = x.v[static_cast<size_t>(i)];
    std::fprintf(f.get(), "%.17g,%.17g,%.17g\n", x.grid.t(i), v.real(), v.imag());
  }
}

void write_spectrum_csv(const std::string& path, const Spectrum& X) {
  FilePtr f = open_for_write(path);
  std::fprintf(f.get(), "omega,re,im\n");
  // Ascending frequency: negative bins live in the upper half of storage.
  for (int row = 0; row < X.grid.n; ++row) {
    const int j = (row + X.grid.n / 2) % X.grid.n;
    const cplx v = X.v[static_cast<size_t>(j)];
    std::fprintf(f.get(), "%.17g,%.17g,%.17g\n", X.grid.omega(j), v.real(),
                 v.imag());
  }
}

SampledSignal read_signal_csv(const std::string& path, const GridSpec& g) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ":1: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,re,im")
    throw ParseError(path + ":1: expected header 't,re,im', got '" + line + "'");

  SampledSignal x = zero_signal(g);
  int i = 0, lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (i >= g.n)
      throw ParseError(path + ":" + std::to_string(lineno) + ": more rows than " +
                       std::to_string(g.n) + " grid points");
    size_t pos = 0;
    const double tv = csv_number(line, pos, path, lineno);
    const double re = csv_number(line, pos, path, lineno);
    const double im = csv_number(line, pos, path, lineno);
    if (std::abs(tv - g.t(i)) > 1e-9 * std::max(1.0, std::abs(g.t(i))))
      throw ParseError(path + ":" + std::to_string(lineno) + ": time " +
                       fmt17(tv) + " is off the grid point " + fmt17(g.t(i)));
    x.v[static_cast<size_t>(i++)] = cplx{re, im};
  }
  if (i != g.n)
    throw ParseError(path + ": has " + std::to_string(i) + " rows, grid needs " +
                     std::to_string(g.n));
  return x;
}

// --- scenario loading ------------------------------------------------------

Scenario load_scenario(const std::string& target, const RunOptions& opt) {
  const auto names = fixture_names();
  if (std::find(names.begin(), names.end(), target) != names.end())
    return from_fixture(make_fixture(target), opt);
  if (!fs::exists(target)) {
    std::string all;
    for (const std::string& n : names) all += (all.empty() ? "" : ", ") + n;
    throw ParseError("'" + target + "' is neither a bundled fixture (" + all +
                     ") nor a scenario file");
  }
  return from_json_file(target, opt);
}

// --- commands ---------------------------------------------------------------

int cmd_validate(const Scenario& sc, const RunOptions& opt) {
  const std::string dir = resolve_out_dir(sc, opt);
  const bool c1 = check_condition1(sc.topology);
  const ConditionReport rep = check_condition2(sc.topology, sc.grid);

  json j = base_report(sc);
  j["condition1"] = c1;
  j["condition2"] = rep.condition2;
  if (!rep.condition2) {
    j["failed_clause"] = rep.failed_clause;
    j["detail"] = rep.detail;
  } else {
    j["domain"] = set_to_json(rep.domain);
    json groups = json::array();
    for (const WitnessGroup& g : rep.groups)
      groups.push_back({{"members", g.members},
                        {"closure", g.closure},
                        {"op", op_label(g.op)},
                        {"points_to_root", g.op_points_to_root},
                        {"inverse_bound", finite_or_tag(g.inv_bound)}});
    j["groups"] = groups;
  }

  // Chains are evaluated against the gaps the plan will realize; a plan that
  // cannot even place gaps reports why instead.
  json jchains;
  try {
    const ChainReport cr =
        check_thm1_chain_condition(sc.topology, planned_gaps(sc.topology, sc.plan));
    jchains["all_ok"] = cr.all_ok;
    json list = json::array();
    for (const auto& chain : cr.chains)
      list.push_back(chain ? json(*chain) : json());
    jchains["chains"] = list;
    jchains["notes"] = cr.notes;
  } catch (const std::exception& e) {
    jchains["note"] = e.what();
  }
  j["recovery_chains"] = jchains;
  j["pairwise"] = findings_list(
      check_pairwise_implications(sc.topology, planned_gaps(sc.topology, sc.plan)));

  const bool ok = c1 || rep.condition2;
  j["constructible"] = ok;
  write_report(dir + "/validate.json", j);

  if (!opt.quiet) {
    std::printf("validate %s: condition1=%s condition2=%s\n", sc.name.c_str(),
                c1 ? "yes" : "no", rep.condition2 ? "yes" : "no");
    if (!rep.condition2)
      std::printf("  clause %s: %s\n", rep.failed_clause.c_str(),
                  rep.detail.c_str());
    for (const WitnessGroup& g : rep.groups) {
      std::string members, closure;
      for (int d : g.members) members += (members.empty() ? "" : ",") + std::to_string(d);
      for (int d : g.closure) closure += (closure.empty() ? "" : ",") + std::to_string(d);
      std::printf("  group op=%s members={%s} closure={%s}\n", op_label(g.op).c_str(),
                  members.c_str(), closure.c_str());
    }
    std::printf("  report: %s/validate.json\n", dir.c_str());
  }
  return ok ? 0 : 2;
}

int cmd_construct(const Scenario& sc, const RunOptions& opt) {
  const std::string dir = resolve_out_dir(sc, opt);
  const Construction c = construct(sc.topology, sc.inputs, sc.plan);

  for (int d = 1; d <= sc.topology.m; ++d) {
    const SampledSignal& x = c.xs[static_cast<size_t>(d - 1)];
    write_signal_csv(dir + "/constructed_" + std::to_string(d) + ".csv", x);
    write_spectrum_csv(dir + "/spectrum_" + std::to_string(d) + ".csv", dft(x));
  }

  json j = base_report(sc);
  j["used_grouping"] = c.report.used_grouping;
  j["gap_energies"] = c.report.gap_energies;
  j["residuals_in"] = residual_list(sc.topology, c.report.residuals_in);
  j["residuals_out"] = residual_list(sc.topology, c.report.residuals_out);
  j["l2_errors"] = c.report.l2_errors;
  j["rel_l2_errors"] = c.report.rel_l2_errors;
  j["sup_errors"] = c.report.sup_errors;
  j["sup_bounds"] = c.report.sup_bounds;
  j["warnings"] = findings_list(c.report.warnings);
  json gaps = json::array();
  for (int d = 1; d <= sc.topology.m; ++d) gaps.push_back(c.gaps.gap(d).format());
  j["gaps"] = gaps;

  if (!sc.deltas.empty()) {
    const ConvergenceTable table =
        convergence_study(sc.topology, sc.inputs, sc.plan, sc.deltas);
    json rows = json::array();
    FilePtr f = open_for_write(dir + "/convergence.csv");
    std::fprintf(f.get(), "delta,max_l2_error\n");
    for (const ConvergenceRow& r : table.rows) {
      rows.push_back({{"delta", r.delta},
                      {"max_l2_error", r.max_l2_error},
                      {"l2_errors", r.l2_errors}});
      std::fprintf(f.get(), "%.17g,%.17g\n", r.delta, r.max_l2_error);
    }
    j["convergence"] = {{"monotone", table.monotone}, {"rows", rows}};
  }
  write_report(dir + "/construct.json", j);

  double worst_gap = 0.0, worst_res = 0.0;
  for (double e : c.report.gap_energies) worst_gap = std::max(worst_gap, e);
  for (double r : c.report.residuals_out) worst_res = std::max(worst_res, r);
  if (!opt.quiet)
    std::printf(
        "construct %s: branches=%d grouped=%s max_gap_energy=%.3e "
        "max_residual=%.3e -> %s\n",
        sc.name.c_str(), sc.topology.m, c.report.used_grouping ? "yes" : "no",
        worst_gap, worst_res, dir.c_str());
  return 0;
}

int cmd_recover(const Scenario& sc, const RunOptions& opt) {
  const std::string dir = resolve_out_dir(sc, opt);
  const Construction c = construct(sc.topology, sc.inputs, sc.plan);
  const GapSpec gaps = recovery_gaps(sc, c.gaps);
  const IntervalSet observed =
      sc.observation ? sc.observation->observed : whole_window(sc.grid);

  const BranchRecovery out =
      propagate_branches(sc.topology, gaps, c.xs[0], observed, sc.pocs);
  write_recovered(dir, out);

  std::vector<double> errors;
  json j = base_report(sc);
  j["observed"] = set_to_json(observed);
  j["branches"] = branch_results(sc, c, out, errors);
  j["residuals"] = residual_list(sc.topology, out.residuals);
  write_report(dir + "/recover.json", j);

  bool all = true;
  for (bool b : out.converged) all = all && b;
  if (!opt.quiet) {
    std::printf("recover %s: observed=%s\n", sc.name.c_str(),
                observed.format().c_str());
    print_branches(sc, out, errors);
    std::printf("  report: %s/recover.json\n", dir.c_str());
  }
  return all ? 0 : 3;
}

int cmd_sample_recover(const Scenario& sc, const RunOptions& opt) {
  if (!sc.sampling)
    throw std::invalid_argument("scenario lacks a sampling section");
  const std::string dir = resolve_out_dir(sc, opt);
  const Construction c = construct(sc.topology, sc.inputs, sc.plan);
  const GapSpec gaps = recovery_gaps(sc, c.gaps);

  const SampleRecovery r =
      sample_and_recover(sc.topology, gaps, c.xs[0], *sc.sampling, sc.pocs);

  {
    const SampleSeq samples =
        take_samples(c.xs[0], sc.sampling->tau, sc.sampling->s);
    FilePtr f = open_for_write(dir + "/samples.csv");
    std::fprintf(f.get(), "k,re,im\n");
    for (const auto& [k, v] : samples)
      std::fprintf(f.get(), "%ld,%.17g,%.17g\n", k, v.real(), v.imag());
  }
  write_signal_csv(dir + "/head.csv", r.head.x);
  write_recovered(dir, r.branches);

  std::vector<double> errors;
  json j = base_report(sc);
  j["sampling"] = {{"omega", sc.sampling->omega},
                   {"tau", sc.sampling->tau},
                   {"s", sc.sampling->s ? json(*sc.sampling->s) : json()}};
  j["head"] = {{"equations", r.head.equations},
               {"unknowns", r.head.unknowns},
               {"condition", finite_or_tag(r.head.condition)},
               {"ill_conditioned", r.head.ill_conditioned},
               {"rel_l2_error", rel_l2_error(r.head.x, c.xs[0])}};
  j["branches"] = branch_results(sc, c, r.branches, errors);
  j["residuals"] = residual_list(sc.topology, r.branches.residuals);
  write_report(dir + "/sample_recover.json", j);

  bool all = !r.head.ill_conditioned;
  for (bool b : r.branches.converged) all = all && b;
  if (!opt.quiet) {
    std::printf("sample-recover %s: equations=%d unknowns=%d ill_conditioned=%s\n",
                sc.name.c_str(), r.head.equations, r.head.unknowns,
                r.head.ill_conditioned ? "yes" : "no");
    print_branches(sc, r.branches, errors);
    std::printf("  report: %s/sample_recover.json\n", dir.c_str());
  }
  return all ? 0 : 3;
}

// --- oracle and dispatch ------------------------------------------------

std::vector<int> parse_index_spec(const std::string& text, int n) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string token;
  bool saw_token = false;
  while (std::getline(ss, token, ',')) {
    token.erase(std::remove_if(token.begin(), token.end(),
                               [](unsigned char c) { return std::isspace(c); }),
                token.end());
    if (token.empty()) continue;
    saw_token = true;
    if (token == "none") continue;
    const size_t dash = token.find('-', 1);
    try {
      if (dash == std::string::npos) {
        out.push_back(std::stoi(token));
      } else {
        const int lo = std::stoi(token.substr(0, dash));
        const int hi = std::stoi(token.substr(dash + 1));
        if (hi < lo)
          throw std::invalid_argument("empty range '" + token + "'");
        for (int i = lo; i <= hi; ++i) out.push_back(i);
      }
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument("bad index token '" + token + "'");
    } catch (const std::out_of_range&) {
      throw std::invalid_argument("bad index token '" + token + "'");
    }
  }
  if (!saw_token)
    throw std::invalid_argument("empty index spec; use 'none' for the empty set");
  for (int i : out)
    if (i < 0 || i >= n)
      throw std::invalid_argument("index " + std::to_string(i) +
                                  " outside 0.." + std::to_string(n - 1));
  return out;
}

namespace {

int dispatch(const std::string& command, const Scenario& sc, const RunOptions& opt) {
  if (command == "validate") return cmd_validate(sc, opt);
  if (command == "construct") return cmd_construct(sc, opt);
  if (command == "recover") return cmd_recover(sc, opt);
  if (command == "sample-recover") return cmd_sample_recover(sc, opt);
  throw std::invalid_argument("unknown command '" + command + "'");
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const NotConverged& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const NumericalFailure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ConditionViolated& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const DisjointnessViolated& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ChainUnavailable& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const IncommensurateMap& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NonInvertible& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
}

}  // namespace

int run_scenario_command(const std::string& command, const std::string& target,
                         const RunOptions& opt) {
  return guarded([&] { return dispatch(command, load_scenario(target, opt), opt); });
}

int run_oracle_command(int n, const std::string& observed_spec,
                       const std::string& gap_spec, const RunOptions& opt) {
  return guarded([&] {
    const std::vector<int> observed = parse_index_spec(observed_spec, n);
    const std::vector<int> gap = parse_index_spec(gap_spec, n);
    const UniquenessVerdict v = uniqueness_oracle(n, observed, gap);
    json j = {{"n", n},
              {"observed", observed},
              {"gap", gap},
              {"unique", v.unique},
              {"nullspace_dim", v.nullspace_dim},
              {"sigma_ratio", v.sigma_ratio}};
    std::printf("%s\n", j.dump().c_str());
    if (!opt.out_dir.empty()) {
      fs::create_directories(opt.out_dir);
      write_report(opt.out_dir + "/oracle.json", j);
    }
    return 0;
  });
}

}  // namespace branched
