#pragma once

// Command dispatch shared by the `tfa` executable and the tests: a flat run
// configuration, one handler per module command, JSON reports and CSV plot
// data.

#include "tfa/amalgam.hpp"
#include "tfa/catalog.hpp"
#include "tfa/diag.hpp"
#include "tfa/errors.hpp"
#include "tfa/frames.hpp"
#include "tfa/hmetric.hpp"
#include "tfa/io.hpp"
#include "tfa/seqspace.hpp"
#include "tfa/tfcore.hpp"
#include "tfa/weights.hpp"
#include "tfa/weyl.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace tfa::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

inline constexpr const char *tool_name = "tfa";
inline constexpr const char *tool_version = "0.3.0";

enum class FieldType { Int, Real, Text, RealList, Flag };

struct FieldSpec {
  const char *key;
  FieldType type;
  const char *help;
};

/// Every configurable field. Command-line flags are `--<key>` with '_' -> '-'.
inline const std::vector<FieldSpec> &field_specs() {
  static const std::vector<FieldSpec> specs = {
      {"N", FieldType::Int, "grid size (power of two)"},
      {"delta", FieldType::Real, "sample spacing (default 1/sqrt(N))"},
      {"a", FieldType::Int, "lattice time step in samples"},
      {"b", FieldType::Int, "lattice frequency step in bins"},
      {"r", FieldType::Real, "weight rate r"},
      {"s", FieldType::Real, "Gevrey / weight exponent s"},
      {"alpha", FieldType::Real, "cell width in x"},
      {"beta", FieldType::Real, "cell width in xi"},
      {"symbol", FieldType::Text, "catalog symbol id or file:<path.arr.json>"},
      {"window", FieldType::Text, "catalog window id or file:<path.arr.json>"},
      {"metric", FieldType::Text, "euclidean | split:<rho>"},
      {"M", FieldType::Text, "weight 'one' or a,b,c,t"},
      {"kind", FieldType::Text, "sub | subconv | moderate"},
      {"params", FieldType::RealList, "weight parameters a,b,c,t"},
      {"vparams", FieldType::RealList, "moderating weight parameters a,b,c,t"},
      {"box", FieldType::Real, "half width of the sampled box"},
      {"n", FieldType::Int, "samples per axis"},
      {"in", FieldType::Text, "input file"},
      {"in2", FieldType::Text, "second input file"},
      {"out", FieldType::Text, "report path (JSON); arrays and CSV are written beside it"},
      {"N_power", FieldType::Int, "polynomial exponent N"},
      {"order", FieldType::Int, "seminorm order k (0..3)"},
      {"fd", FieldType::Flag, "allow finite differences"},
      {"pairs", FieldType::Int, "number of random pairs"},
      {"seed", FieldType::Int, "seed for randomized suites"},
      {"radius", FieldType::Real, "pair radius"},
      {"step", FieldType::Real, "pair spacing"},
      {"allow_uncertified", FieldType::Flag, "run verify on symbols without a Gevrey entry"},
  };
  return specs;
}

inline const std::vector<std::pair<std::string, std::vector<std::string>>> &command_table() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> t = {
      {"weights", {"check"}},
      {"seq", {"norm", "convolve", "verify"}},
      {"amalgam", {"norm", "verify"}},
      {"frame", {"bounds", "dual", "reconstruct"}},
      {"weyl", {"apply", "kernel", "gabor-matrix", "magic-check"}},
      {"diag", {"envelope", "fit", "membership", "verify"}},
      {"hm", {"check-metric", "diag-check", "seminorm"}},
  };
  return t;
}

struct RunConfig {
  std::string module;
  std::string command;
  json values = json::object(); // only fields that were given

  bool has(const std::string &k) const { return values.contains(k); }

  long integer(const std::string &k, long fallback) const {
    return has(k) ? values.at(k).get<long>() : fallback;
  }
  long required_integer(const std::string &k) const {
    if (!has(k))
      throw ConfigError("config." + k + ": required for " + module + " " + command);
    return values.at(k).get<long>();
  }
  double real(const std::string &k, double fallback) const {
    return has(k) ? values.at(k).get<double>() : fallback;
  }
  std::string text(const std::string &k, const std::string &fallback = {}) const {
    return has(k) ? values.at(k).get<std::string>() : fallback;
  }
  std::string required_text(const std::string &k) const {
    if (!has(k))
      throw ConfigError("config." + k + ": required for " + module + " " + command);
    return values.at(k).get<std::string>();
  }
  bool flag(const std::string &k) const { return has(k) && values.at(k).get<bool>(); }
  std::vector<double> list(const std::string &k) const {
    return has(k) ? values.at(k).get<std::vector<double>>() : std::vector<double>{};
  }

  json to_json() const {
    json j = values;
    j["module"] = module;
    j["command"] = command;
    return j;
  }

  /// Validates names and types; errors carry the offending field path.
  static RunConfig from_json(const json &j) {
    if (!j.is_object())
      throw ConfigError("config: expected a JSON object");
    RunConfig c;
    for (const auto &[k, v] : j.items()) {
      const std::string path = "config." + k;
      if (k == "module" || k == "command") {
        if (!v.is_string())
          throw ConfigError(path + ": expected a string");
        (k == "module" ? c.module : c.command) = v.get<std::string>();
        continue;
      }
      const auto &specs = field_specs();
      auto it = std::find_if(specs.begin(), specs.end(),
                             [&](const FieldSpec &f) { return f.key == k; });
      if (it == specs.end())
        throw ConfigError(path + ": unknown field");
      switch (it->type) {
      case FieldType::Int:
        if (!v.is_number_integer())
          throw ConfigError(path + ": expected an integer");
        break;
      case FieldType::Real:
        if (!v.is_number())
          throw ConfigError(path + ": expected a number");
        break;
      case FieldType::Text:
        if (!v.is_string())
          throw ConfigError(path + ": expected a string");
        break;
      case FieldType::Flag:
        if (!v.is_boolean())
          throw ConfigError(path + ": expected true or false");
        break;
      case FieldType::RealList:
        if (!v.is_array() || !std::all_of(v.begin(), v.end(),
                                          [](const json &e) { return e.is_number(); }))
          throw ConfigError(path + ": expected an array of numbers");
        break;
      }
      c.values[k] = v;
    }
    const auto &table = command_table();
    auto mod = std::find_if(table.begin(), table.end(),
                            [&](const auto &e) { return e.first == c.module; });
    if (mod == table.end())
      throw ConfigError("config.module: unknown module '" + c.module + "'");
    if (std::find(mod->second.begin(), mod->second.end(), c.command) == mod->second.end())
      throw ConfigError("config.command: '" + c.command + "' is not a " + c.module + " command");
    return c;
  }
};

// ---------------------------------------------------------------------------
// Plot data

/// Columns abs_z,H,bound sorted by |z|; bound is empty without a fit.
inline std::string envelope_csv(const Envelope &H, const DecayFit *fit = nullptr) {
  std::vector<std::size_t> order(H.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return H.z[x].norm() < H.z[y].norm();
  });
  std::ostringstream os;
  os.precision(17);
  os << "abs_z,H,bound\n";
  for (auto i : order) {
    os << H.z[i].norm() << "," << H.H[i] << ",";
    if (fit)
      os << fit->bound(H.z[i]);
    os << "\n";
  }
  return os.str();
}

/// Columns x,xi,abs_V over the whole array.
inline std::string heatmap_csv(const PhaseArray &F) {
  std::ostringstream os;
  os.precision(17);
  os << "x,xi,abs_V\n";
  for (std::size_t i = 0; i < F.rows(); ++i)
    for (std::size_t k = 0; k < F.cols(); ++k)
      os << F.axes().time.point(static_cast<long>(i)) << ","
         << F.axes().freq.point(static_cast<long>(k)) << "," << std::abs(F(i, k)) << "\n";
  return os.str();
}

inline void emit_plotdata(const fs::path &p, const Envelope &H, const DecayFit *fit = nullptr) {
  io::write_text(p, envelope_csv(H, fit));
}

inline void emit_plotdata(const fs::path &p, const PhaseArray &F) {
  io::write_text(p, heatmap_csv(F));
}

// ---------------------------------------------------------------------------
// Reports

inline json weight_json(const WeightParams &p) { return json::array({p.a, p.b, p.c, p.t}); }

inline json window_meta(const WindowEntry &w) {
  return {{"id", w.id}, {"l2_norm", w.l2_norm}, {"description", w.description}};
}

inline json symbol_meta(const SymbolEntry &e) {
  json j = {{"id", e.id}, {"description", e.description}, {"real", e.real},
            {"max_order", e.max_order}};
  if (e.gevrey)
    j["gevrey"] = {{"s_known", e.gevrey->s_known},
                   {"C_known", e.gevrey->C_known},
                   {"m", weight_json(e.gevrey->m)}};
  else
    j["gevrey"] = nullptr;
  return j;
}

inline json fit_json(const DecayFit &f) {
  return {{"s", f.s},         {"epsilon", f.epsilon}, {"C", f.C},
          {"C_fit", f.C_fit}, {"max_violation", f.max_violation},
          {"r2", f.r2},       {"slope_t", f.slope_t}, {"n_used", f.n_used},
          {"floor", f.floor}, {"certified", f.certified}};
}

inline json bounds_json(const FrameBounds &b) {
  return {{"c1", b.c1}, {"c2", b.c2}, {"ratio", b.ratio()}, {"method", b.method},
          {"is_tight", b.is_tight()}};
}

/// Outcome of one run.
struct RunResult {
  int exit_code = 0; // 0 ok, 1 usage/IO, 2 certification failure
  json report;
  std::string message;
  std::vector<std::string> files; // written besides the report
};

namespace detail {

struct Context {
  const RunConfig &cfg;
  json result = json::object();
  json catalog = json::object();
  bool certified = true;
  std::vector<std::string> files;

  /// Sibling path of the report: out.json -> out<suffix>. Empty without --out.
  std::optional<fs::path> sibling(const std::string &suffix) const {
    if (!cfg.has("out"))
      return std::nullopt;
    fs::path p = cfg.text("out");
    std::string stem = p.filename().string();
    if (stem.size() > 5 && stem.ends_with(".json"))
      stem = stem.substr(0, stem.size() - 5);
    return p.parent_path() / (stem + suffix);
  }
  void note_file(const fs::path &p) { files.push_back(p.string()); }
};

inline WeightParams weight_from_list(const std::vector<double> &v, const std::string &path) {
  if (v.size() != 4)
    throw ConfigError(path + ": expected four numbers a,b,c,t");
  WeightParams p{v[0], v[1], v[2], v[3]};
  p.validate();
  return p;
}

inline WeightParams weight_from_text(const std::string &s, const std::string &path) {
  if (s.empty() || s == "one")
    return WeightParams::one();
  std::vector<double> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      v.push_back(std::stod(tok));
    } catch (const std::exception &) {
      throw ConfigError(path + ": '" + tok + "' is not a number");
    }
  }
  return weight_from_list(v, path);
}

inline Grid grid_of(const RunConfig &c, std::size_t default_n) {
  const auto n = static_cast<std::size_t>(c.integer("N", static_cast<long>(default_n)));
  const double d = c.real("delta", 1.0 / std::sqrt(static_cast<double>(n)));
  try {
    return Grid(n, d);
  } catch (const InvalidArgument &e) {
    throw ConfigError(std::string("config.N / config.delta: ") + e.what());
  }
}

inline Lattice lattice_of(const RunConfig &c, const Grid &g) {
  try {
    return Lattice(g, static_cast<std::size_t>(c.integer("a", 8)),
                   static_cast<std::size_t>(c.integer("b", 8)));
  } catch (const InvalidArgument &e) {
    throw ConfigError(std::string("config.a / config.b: ") + e.what());
  }
}

inline bool is_file_ref(const std::string &id) { return id.rfind("file:", 0) == 0; }

inline SampledSignal window_of(Context &ctx, const Grid &g, const std::string &fallback = "gaussian") {
  const std::string id = ctx.cfg.text("window", fallback);
  if (is_file_ref(id)) {
    SampledSignal w = io::read_signal(id.substr(5), &g);
    if (!(w.grid() == g))
      throw ConfigError("config.window: file grid differs from N/delta");
    ctx.catalog["window"] = {{"id", id}};
    return w;
  }
  try {
    ctx.catalog["window"] = window_meta(find_window(id));
  } catch (const NotInCatalog &e) {
    throw ConfigError(std::string("config.window: ") + e.what());
  }
  return make_window(id, g);
}

inline SymbolGrid symbol_of(Context &ctx, const Grid &g, const std::string &fallback = "constant") {
  const std::string id = ctx.cfg.text("symbol", fallback);
  if (is_file_ref(id)) {
    PhaseArray a = io::read_phase(id.substr(5));
    if (!(a.axes() == symbol_axes(g)))
      throw ConfigError("config.symbol: file axes do not match the symbol layout of N/delta");
    ctx.catalog["symbol"] = {{"id", id}};
    return a;
  }
  try {
    ctx.catalog["symbol"] = symbol_meta(find_symbol(id));
  } catch (const NotInCatalog &e) {
    throw ConfigError(std::string("config.symbol: ") + e.what());
  }
  return make_symbol(id, g);
}

inline std::mt19937_64 seeded(const RunConfig &c) {
  if (!c.has("seed"))
    throw ConfigError("config.seed: required for randomized runs");
  return std::mt19937_64(static_cast<std::uint64_t>(c.values.at("seed").get<long>()));
}

// ---- weights ---------------------------------------------------------------

inline void run_weights(Context &ctx) {
  const auto &c = ctx.cfg;
  const std::string kind = c.text("kind", "sub");
  const WeightParams p = weight_from_list(c.list("params"), "config.params");
  ClassReport rep{WeightClass::Submultiplicative};
  if (kind == "sub") {
    rep = check_submultiplicative(p, c.real("box", 12.0),
                                  static_cast<std::size_t>(c.integer("n", 481)));
  } else if (kind == "moderate") {
    const WeightParams v = weight_from_list(c.list("vparams"), "config.vparams");
    rep = check_moderate(p, v, c.real("box", 12.0),
                         static_cast<std::size_t>(c.integer("n", 481)));
  } else if (kind == "subconv") {
    const auto n = static_cast<std::size_t>(c.integer("n", 1024));
    const double box = c.real("box", 128.0);
    Grid g(2, 1.0);
    try {
      g = Grid(n, 2.0 * box / static_cast<double>(n));
    } catch (const InvalidArgument &e) {
      throw ConfigError(std::string("config.n: ") + e.what());
    }
    try {
      rep = check_subconvolutive(p, g);
    } catch (const NotIntegrable &e) {
      ctx.result = {{"kind", "subconvolutive"}, {"holds", false}, {"note", e.what()}};
      ctx.certified = false;
      return;
    }
  } else {
    throw ConfigError("config.kind: expected sub, subconv or moderate");
  }
  ctx.result = {{"kind", to_string(rep.kind)},
                {"holds", rep.holds},
                {"constant", rep.constant},
                {"witness", rep.witness},
                {"constant_refined", rep.constant_refined},
                {"constant_expanded", rep.constant_expanded},
                {"params", weight_json(p)}};
  if (rep.kind == WeightClass::Subconvolutive)
    ctx.result["target_a"] = rep.target_a;
  ctx.certified = rep.holds;
}

// ---- seq -------------------------------------------------------------------

inline void run_seq(Context &ctx) {
  const auto &c = ctx.cfg;
  const LatticeSeq a = io::read_sequence(c.required_text("in"));
  const SeqNormParams p{c.real("r", 1.0), c.real("s", 1.0)};
  if (c.command == "norm") {
    p.validate();
    ctx.result = {{"norm", seq_norm(a, p)}, {"l1", l1_norm(a)}, {"support", a.support_size()}};
    return;
  }
  const LatticeSeq b = io::read_sequence(c.required_text("in2"));
  if (c.command == "convolve") {
    const LatticeSeq ab = seq_convolve(a, b);
    ctx.result = {{"support", ab.support_size()}, {"sequence", io::sequence_json(ab)}};
    if (auto f = ctx.sibling(".seq.json")) {
      io::write_sequence(*f, ab);
      ctx.note_file(*f);
    }
    return;
  }
  const ConvolutionReport r = verify_convolution_inequality(a, b, p);
  ctx.result = {{"lhs", r.lhs},       {"rhs", r.rhs},       {"ratio", r.ratio},
                {"c_used", r.c_used}, {"K_used", r.K_used}, {"K_box", r.K_box},
                {"K_exact", r.K_exact}};
  ctx.certified = r.ratio <= 1.0;
}

// ---- amalgam ---------------------------------------------------------------

inline void run_amalgam(Context &ctx) {
  const auto &c = ctx.cfg;
  const PhaseArray F = io::read_phase(c.required_text("in"));
  const CellCover cover{{c.real("alpha", 1.0), c.real("beta", 1.0)}};
  const SeqNormParams p{c.real("r", 1.0), c.real("s", 1.0)};
  p.validate();
  if (c.command == "norm") {
    ctx.result = {{"norm", wiener_norm(F, cover, p)},
                  {"points_per_cell", max_points_per_cell(F.axes(), cover)}};
    return;
  }
  const PhaseArray G = io::read_phase(c.required_text("in2"));
  const WienerConvolutionReport r = verify_wiener_convolution(F, G, cover, p);
  ctx.result = {{"lhs", r.lhs},         {"rhs", r.rhs},       {"ratio", r.ratio},
                {"K_prime", r.K_prime}, {"c_used", r.c_used}, {"points_per_cell", r.points_per_cell}};
  ctx.certified = r.ratio <= 1.0;
}

// ---- frame -----------------------------------------------------------------

/// (N, a, b, delta) for the two coarser levels N/4, N/2 and N itself: going
/// up one level doubles a, the next doubles b, and delta shrinks by sqrt 2.
struct Level {
  std::size_t n, a, b;
  double delta;
};

inline std::vector<Level> refinement_levels(std::size_t n, std::size_t a, std::size_t b,
                                            double delta) {
  std::vector<Level> lv{{n, a, b, delta}};
  const Level &top = lv.front();
  if (top.n >= 8 && top.b % 2 == 0 && top.a % 2 == 0) {
    const Level half{top.n / 2, top.a, top.b / 2, top.delta * std::sqrt(2.0)};
    const Level quarter{top.n / 4, top.a / 2, top.b / 2, top.delta * 2.0};
    lv = {quarter, half, top};
  }
  return lv;
}

inline void run_frame(Context &ctx) {
  const auto &c = ctx.cfg;
  const Grid g = grid_of(c, 128);
  const Lattice L = lattice_of(c, g);
  const SampledSignal w = window_of(ctx, g);
  ctx.result["lattice"] = {{"a", L.a()},          {"b", L.b()},
                           {"alpha", L.alpha()},  {"beta", L.beta()},
                           {"density", L.density()}};
  if (c.command == "bounds") {
    const FrameBounds fb = frame_bounds(w, L);
    ctx.result["bounds"] = bounds_json(fb);
    std::vector<FrameBounds> seq;
    json trend = json::array();
    const std::string wid = c.text("window", "gaussian");
    const auto levels = is_file_ref(wid) ? std::vector<Level>{{g.size(), L.a(), L.b(), g.delta()}}
                                         : refinement_levels(g.size(), L.a(), L.b(), g.delta());
    for (const auto &lv : levels) {
      const Grid gl(lv.n, lv.delta);
      const Lattice Ll(gl, lv.a, lv.b);
      const FrameBounds b = lv.n == g.size() ? fb : frame_bounds(make_window(wid, gl), Ll);
      seq.push_back(b);
      trend.push_back({{"N", lv.n}, {"a", lv.a}, {"b", lv.b}, {"delta", lv.delta},
                       {"c1", b.c1}, {"c2", b.c2}, {"ratio", b.ratio()}});
    }
    const FrameTrend t = frame_trend(seq);
    ctx.result["trend"] = trend;
    ctx.result["nonincreasing"] = t.nonincreasing;
    ctx.result["is_frame_trend"] = t.is_frame_trend;
    return;
  }
  std::optional<DualWindowResult> dr;
  try {
    dr = dual_window(w, L);
  } catch (const NotAFrame &e) {
    ctx.result["note"] = e.what();
    ctx.certified = false;
    return;
  }
  const DualWindowResult &d = *dr;
  ctx.result["dual"] = {{"residual", d.residual}, {"iterations", d.iterations}};
  ctx.certified = d.residual <= 1e-10;
  if (c.command == "dual") {
    if (auto f = ctx.sibling(".dual.arr.json")) {
      io::write_signal(*f, d.gamma);
      ctx.note_file(*f);
    }
    return;
  }
  SampledSignal f(g);
  if (c.has("in")) {
    f = io::read_signal(c.text("in"), &g);
    if (!(f.grid() == g))
      throw ConfigError("config.in: signal grid differs from N/delta");
  } else {
    auto rng = seeded(c);
    std::normal_distribution<double> nd;
    for (std::size_t j = 0; j < g.size(); ++j)
      f[j] = cplx(nd(rng), nd(rng));
  }
  const SampledSignal back = reconstruct(gabor_coefficients(f, w, L), d.gamma, L);
  const double err = (back - f).norm() / f.norm();
  ctx.result["reconstruction_error"] = err;
  ctx.certified = ctx.certified && err <= 1e-8;
  if (auto p = ctx.sibling(".reconstructed.arr.json")) {
    io::write_signal(*p, back);
    ctx.note_file(*p);
  }
}

// ---- weyl ------------------------------------------------------------------

inline json lattice_meta(const Lattice &L) {
  json idx = json::array();
  for (const auto &l : L.indices())
    idx.push_back({l.k, l.i});
  return {{"a", L.a()}, {"b", L.b()}, {"alpha", L.alpha()}, {"beta", L.beta()}, {"indices", idx}};
}

inline void run_weyl(Context &ctx) {
  const auto &c = ctx.cfg;
  const Grid g = grid_of(c, 128);
  const SymbolGrid a = symbol_of(ctx, g);
  if (c.command == "apply") {
    const SampledSignal f = c.has("in") ? io::read_signal(c.text("in"), &g) : window_of(ctx, g);
    const SampledSignal out = weyl_apply(a, f);
    ctx.result = {{"norm_in", f.norm()}, {"norm_out", out.norm()}};
    if (auto p = ctx.sibling(".out.arr.json")) {
      io::write_signal(*p, out);
      ctx.note_file(*p);
    }
    return;
  }
  if (c.command == "kernel") {
    const Eigen::MatrixXcd K = weyl_kernel(a);
    ctx.result = {{"N", g.size()}, {"max_abs", K.cwiseAbs().maxCoeff()}};
    if (auto p = ctx.sibling(".kernel.arr.json")) {
      io::ArrayData arr{io::DType::C128, {g.size(), g.size()}, {}, {{"grid", io::grid_json(g)}}};
      arr.values.resize(g.size() * g.size());
      for (std::size_t j = 0; j < g.size(); ++j)
        for (std::size_t k = 0; k < g.size(); ++k)
          arr.values[j * g.size() + k] = K(static_cast<long>(j), static_cast<long>(k));
      io::write_array(*p, arr);
      ctx.note_file(*p);
    }
    return;
  }
  const SampledSignal w = window_of(ctx, g);
  if (c.command == "gabor-matrix") {
    const Lattice L = lattice_of(c, g);
    const GaborMatrix M = gabor_matrix(a, w, L);
    ctx.result = {{"size", M.indices.size()}, {"max_abs", M.entries.cwiseAbs().maxCoeff()}};
    if (auto p = ctx.sibling(".gabor.arr.json")) {
      const std::size_t m = M.indices.size();
      io::ArrayData arr{io::DType::C128, {m, m}, std::vector<cplx>(m * m),
                        {{"lattice", lattice_meta(L)}, {"grid", io::grid_json(g)}}};
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t q = 0; q < m; ++q)
          arr.values[r * m + q] = M.entries(static_cast<long>(r), static_cast<long>(q));
      io::write_array(*p, arr);
      ctx.note_file(*p);
      io::write_magnitude_csv(*ctx.sibling(".gabor.csv"), m, m, arr.values);
      ctx.note_file(*ctx.sibling(".gabor.csv"));
    }
    return;
  }
  // magic-check
  auto rng = seeded(c);
  const auto pairs = random_magic_pairs(g, static_cast<std::size_t>(c.integer("pairs", 100)),
                                        static_cast<unsigned>(rng()));
  const MagicReport r = magic_formula_check(a, w, pairs);
  ctx.result = {{"pairs", pairs.size()}, {"max_deviation", r.max_deviation}, {"tolerance", 1e-6}};
  ctx.certified = r.max_deviation <= 1e-6;
}

// ---- diag ------------------------------------------------------------------

inline void run_diag(Context &ctx) {
  const auto &c = ctx.cfg;
  const Grid g = grid_of(c, 128);
  const SampledSignal w = window_of(ctx, g);
  const double s = c.real("s", 0.5);
  const WeightParams m = weight_from_text(c.text("M", "one"), "config.M");
  if (c.command == "membership") {
    const SymbolGrid a = symbol_of(ctx, g);
    const MembershipReport r = mtilde_membership(a, w, c.real("r", 0.5), s);
    ctx.result = {{"norm_value", r.norm_value},
                  {"norm_half", r.norm_half},
                  {"grows_with_box", r.grows_with_box}};
    ctx.certified = !r.grows_with_box;
    if (auto p = ctx.sibling(".G.csv")) {
      emit_plotdata(*p, g_of_a_composed_j(a, w, {}));
      ctx.note_file(*p);
    }
    return;
  }
  const Lattice L = lattice_of(c, g);
  if (c.command == "verify") {
    const std::string id = c.text("symbol", "constant");
    try {
      ctx.catalog["symbol"] = symbol_meta(find_symbol(id));
    } catch (const NotInCatalog &e) {
      throw ConfigError(std::string("config.symbol: ") + e.what());
    }
    EquivalenceOptions opt;
    opt.allow_uncertified = c.flag("allow_uncertified");
    const EquivalenceReport r = verify_equivalence(id, w, L, s, m, opt);
    auto part = [](const PartReport &p) {
      return json{{"name", p.name},           {"certified", p.certified},
                  {"fit", fit_json(p.fit)},   {"C_inner", p.C_inner},
                  {"norm_full", p.norm_full}, {"norm_inner", p.norm_inner},
                  {"stable", p.stable},       {"pairs", p.pairs},
                  {"note", p.note}};
    };
    ctx.result = {{"symbol", r.symbol_id},
                  {"s", r.s},
                  {"radius_full", r.radius_full},
                  {"radius_inner", r.radius_inner},
                  {"continuous", part(r.continuous)},
                  {"lattice", part(r.lattice)},
                  {"envelope", part(r.envelope_part)},
                  {"certified", r.certified}};
    ctx.certified = r.certified;
    return;
  }
  const SymbolGrid a = symbol_of(ctx, g);
  const GaborMatrix M = gabor_matrix(a, w, L);
  const Envelope H = envelope(M, m.is_one() ? std::nullopt : std::optional<WeightParams>(m));
  std::optional<DecayFit> fit;
  std::string note;
  try {
    fit = fit_decay(H, s);
  } catch (const Error &e) {
    note = e.what();
  }
  ctx.result = {{"points", H.size()}, {"max", tfa::detail::max_of(H)}};
  if (fit)
    ctx.result["fit"] = fit_json(*fit);
  if (!note.empty())
    ctx.result["note"] = note;
  if (c.command == "fit")
    ctx.certified = fit && fit->certified;
  if (auto p = ctx.sibling(".envelope.csv")) {
    emit_plotdata(*p, H, fit ? &*fit : nullptr);
    ctx.note_file(*p);
  }
}

// ---- hm --------------------------------------------------------------------

inline void run_hm(Context &ctx) {
  const auto &c = ctx.cfg;
  MetricSpec spec;
  try {
    spec = parse_metric(c.text("metric", "euclidean"));
  } catch (const std::exception &e) {
    throw ConfigError(std::string("config.metric: ") + e.what());
  }
  spec.M = weight_from_text(c.text("M", "one"), "config.M");
  ctx.result["metric"] = {{"id", spec.id}, {"rho", spec.rho}, {"M", weight_json(spec.M)}};
  if (c.command == "check-metric") {
    const auto pts = square_points(c.real("box", 12.0), static_cast<std::size_t>(c.integer("n", 61)));
    const AdmissibilityReport r = check_metric_admissible(spec, pts, c.real("radius", 1.0));
    ctx.result["slow_variation"] = {{"holds", r.slow_variation.holds},
                                    {"C0", r.slow_variation.C0},
                                    {"r0", r.slow_variation.r0},
                                    {"C0_doubled", r.slow_variation.C0_doubled}};
    ctx.result["temperance"] = {{"holds", r.temperance.holds},
                                {"C0", r.temperance.C0},
                                {"N0", r.temperance.N0},
                                {"N0_doubled", r.temperance.N0_doubled},
                                {"N_int", r.temperance.N_int},
                                {"C_int", r.temperance.C_int},
                                {"C_int_doubled", r.temperance.C_int_doubled}};
    ctx.result["uncertainty"] = {{"holds", r.uncertainty.holds},
                                 {"worst_ratio", r.uncertainty.worst_ratio}};
    ctx.result["sample"] = r.description;
    ctx.certified = r.slow_variation.holds && r.temperance.holds && r.uncertainty.holds;
    return;
  }
  if (c.command == "seminorm") {
    const std::string id = c.text("symbol", "constant");
    const SymbolEntry *e = nullptr;
    try {
      e = &find_symbol(id);
    } catch (const NotInCatalog &ex) {
      throw ConfigError(std::string("config.symbol: ") + ex.what());
    }
    ctx.catalog["symbol"] = symbol_meta(*e);
    SeminormOptions opt;
    opt.box = c.real("box", 12.0);
    opt.n = static_cast<std::size_t>(c.integer("n", 61));
    opt.allow_fd = c.flag("fd");
    const auto k = static_cast<int>(c.integer("order", 2));
    const SeminormReport r = sg_seminorm(*e, spec, k, opt);
    ctx.result["order"] = k;
    ctx.result["value"] = r.value;
    ctx.result["value_doubled"] = r.value_doubled;
    ctx.result["grows"] = r.grows;
    ctx.result["used_fd"] = r.used_fd;
    ctx.certified = !r.grows;
    return;
  }
  // diag-check
  const Grid g = grid_of(c, 256);
  const SymbolGrid a = symbol_of(ctx, g);
  const SampledSignal chi = window_of(ctx, g);
  const auto pairs = hm_grid_pairs(g, c.real("radius", 4.0), c.real("step", 0.5));
  const auto npow = static_cast<unsigned>(c.integer("N_power", 0));
  const HmDiagReport r = hm_diag_check(a, chi, spec, npow, pairs);
  ctx.result["N_power"] = npow;
  ctx.result["pairs"] = pairs.size();
  ctx.result["sup_value"] = r.sup_value;
  ctx.result["sup_half"] = r.sup_half;
  ctx.result["stable"] = r.stable;
  ctx.certified = r.stable;
}

} // namespace detail

/// Dispatches one command. Library errors raised by invalid input map to
/// exit code 1; a negative mathematical verdict maps to 2.
inline RunResult run(const RunConfig &cfg) {
  detail::Context ctx{cfg};
  RunResult out;
  try {
    if (cfg.module == "weights")
      detail::run_weights(ctx);
    else if (cfg.module == "seq")
      detail::run_seq(ctx);
    else if (cfg.module == "amalgam")
      detail::run_amalgam(ctx);
    else if (cfg.module == "frame")
      detail::run_frame(ctx);
    else if (cfg.module == "weyl")
      detail::run_weyl(ctx);
    else if (cfg.module == "diag")
      detail::run_diag(ctx);
    else if (cfg.module == "hm")
      detail::run_hm(ctx);
    else
      throw ConfigError("config.module: unknown module '" + cfg.module + "'");
  } catch (const std::exception &e) {
    out.exit_code = 1;
    out.message = e.what();
    return out;
  }
  out.exit_code = ctx.certified ? 0 : 2;
  out.report = {{"tool", {{"name", tool_name}, {"version", tool_version}}},
                {"config", cfg.to_json()},
                {"catalog", ctx.catalog},
                {"result", ctx.result},
                {"status", ctx.certified ? "ok" : "certification_failed"}};
  out.files = std::move(ctx.files);
  if (cfg.has("out")) {
    try {
      io::write_json(cfg.text("out"), out.report);
    } catch (const std::exception &e) {
      out.exit_code = 1;
      out.message = e.what();
    }
  }
  return out;
}

} // namespace tfa::cli
