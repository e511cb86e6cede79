#pragma once

// Array files (JSON header + raw little-endian payload), sequence JSON and
// CSV exports.

#include "tfa/errors.hpp"
#include "tfa/seqspace.hpp"
#include "tfa/tfcore.hpp"

#include "json.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace tfa::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little,
              "array payloads are written in native (little-endian) order");

enum class DType { C128, F64 };

inline std::string to_string(DType d) { return d == DType::C128 ? "c128" : "f64"; }

struct ArrayData {
  DType dtype = DType::C128;
  std::vector<std::size_t> shape;
  std::vector<cplx> values; // f64 arrays are widened to complex
  json meta = json::object();

  std::size_t count() const {
    std::size_t n = 1;
    for (auto s : shape)
      n *= s;
    return n;
  }
};

/// "out/foo.arr.json" -> "out/foo.bin"; other names get ".bin" appended.
inline fs::path payload_path(const fs::path &header) {
  std::string name = header.filename().string();
  const std::string suffix = ".arr.json";
  if (name.size() > suffix.size() &&
      name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
    name = name.substr(0, name.size() - suffix.size());
  return header.parent_path() / (name + ".bin");
}

inline void ensure_parent(const fs::path &p) {
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    if (ec)
      throw IoError("cannot create directory " + p.parent_path().string());
  }
}

inline void write_text(const fs::path &p, const std::string &text) {
  ensure_parent(p);
  std::ofstream os(p, std::ios::binary);
  if (!os)
    throw IoError("cannot open " + p.string() + " for writing");
  os << text;
  if (!os)
    throw IoError("write failed: " + p.string());
}

inline std::string read_text(const fs::path &p) {
  std::ifstream is(p, std::ios::binary);
  if (!is)
    throw IoError("cannot open " + p.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline json read_json(const fs::path &p) {
  try {
    return json::parse(read_text(p));
  } catch (const json::parse_error &e) {
    throw IoError(p.string() + ": " + e.what());
  }
}

inline void write_json(const fs::path &p, const json &j) { write_text(p, j.dump(2) + "\n"); }

/// Writes header and payload; `meta` keys are merged into the header.
inline void write_array(const fs::path &header, const ArrayData &a) {
  if (a.values.size() != a.count())
    throw ShapeMismatch("array shape does not match its value count");
  const fs::path bin = payload_path(header);
  json h = a.meta.is_object() ? a.meta : json::object();
  h["dtype"] = to_string(a.dtype);
  h["shape"] = a.shape;
  h["order"] = "row-major";
  h["data"] = bin.filename().string();
  write_json(header, h);

  std::vector<double> raw;
  raw.reserve(a.values.size() * (a.dtype == DType::C128 ? 2 : 1));
  for (const auto &v : a.values) {
    raw.push_back(v.real());
    if (a.dtype == DType::C128)
      raw.push_back(v.imag());
  }
  std::ofstream os(bin, std::ios::binary);
  if (!os)
    throw IoError("cannot open " + bin.string() + " for writing");
  os.write(reinterpret_cast<const char *>(raw.data()),
           static_cast<std::streamsize>(raw.size() * sizeof(double)));
  if (!os)
    throw IoError("write failed: " + bin.string());
}

inline ArrayData read_array(const fs::path &header) {
  const json h = read_json(header);
  auto field = [&](const char *key) -> const json & {
    if (!h.contains(key))
      throw IoError(header.string() + ": missing field '" + key + "'");
    return h.at(key);
  };
  ArrayData a;
  const std::string dt = field("dtype").get<std::string>();
  if (dt == "c128")
    a.dtype = DType::C128;
  else if (dt == "f64")
    a.dtype = DType::F64;
  else
    throw IoError(header.string() + ": field 'dtype' must be c128 or f64");
  a.shape = field("shape").get<std::vector<std::size_t>>();
  if (field("order").get<std::string>() != "row-major")
    throw IoError(header.string() + ": field 'order' must be row-major");
  const fs::path bin = header.parent_path() / field("data").get<std::string>();
  const std::string raw = read_text(bin);
  const std::size_t per = a.dtype == DType::C128 ? 2 : 1;
  if (raw.size() != a.count() * per * sizeof(double))
    throw IoError(bin.string() + ": payload has " + std::to_string(raw.size()) +
                  " bytes, expected " + std::to_string(a.count() * per * sizeof(double)));
  std::vector<double> d(a.count() * per);
  std::memcpy(d.data(), raw.data(), raw.size());
  a.values.resize(a.count());
  for (std::size_t i = 0; i < a.count(); ++i)
    a.values[i] = per == 2 ? cplx(d[2 * i], d[2 * i + 1]) : cplx(d[i]);
  a.meta = h;
  for (const char *k : {"dtype", "shape", "order", "data"})
    a.meta.erase(k);
  return a;
}

// ---------------------------------------------------------------------------
// Typed wrappers

inline json grid_json(const Grid &g) { return {{"N", g.size()}, {"delta", g.delta()}}; }

inline Grid grid_from_json(const json &j, const std::string &path) {
  if (!j.is_object() || !j.contains("N") || !j.contains("delta"))
    throw IoError(path + ": expected {\"N\":..., \"delta\":...}");
  return Grid(j.at("N").get<std::size_t>(), j.at("delta").get<double>());
}

inline void write_signal(const fs::path &header, const SampledSignal &f, json meta = {}) {
  ArrayData a{DType::C128, {f.size()}, std::vector<cplx>(f.samples().begin(), f.samples().end()),
              meta.is_null() ? json::object() : std::move(meta)};
  a.meta["grid"] = grid_json(f.grid());
  write_array(header, a);
}

/// 1-D array; the grid comes from the header or, failing that, `fallback`.
inline SampledSignal read_signal(const fs::path &header, const Grid *fallback = nullptr) {
  ArrayData a = read_array(header);
  if (a.shape.size() != 1)
    throw IoError(header.string() + ": field 'shape' must be one-dimensional");
  const Grid g = a.meta.contains("grid")
                     ? grid_from_json(a.meta["grid"], header.string() + ": grid")
                     : fallback ? *fallback
                                : throw IoError(header.string() + ": missing field 'grid'");
  if (g.size() != a.shape[0])
    throw IoError(header.string() + ": grid.N does not match shape[0]");
  return SampledSignal(g, std::move(a.values));
}

inline void write_phase(const fs::path &header, const PhaseArray &F, json meta = {}) {
  ArrayData a{DType::C128, {F.rows(), F.cols()},
              std::vector<cplx>(F.values().begin(), F.values().end()),
              meta.is_null() ? json::object() : std::move(meta)};
  a.meta["axes"] = {{"time", grid_json(F.axes().time)}, {"freq", grid_json(F.axes().freq)}};
  write_array(header, a);
}

inline PhaseArray read_phase(const fs::path &header) {
  ArrayData a = read_array(header);
  if (a.shape.size() != 2)
    throw IoError(header.string() + ": field 'shape' must be two-dimensional");
  if (!a.meta.contains("axes"))
    throw IoError(header.string() + ": missing field 'axes'");
  const std::string where = header.string() + ": axes";
  const TFGrid ax{grid_from_json(a.meta["axes"].value("time", json()), where + ".time"),
                  grid_from_json(a.meta["axes"].value("freq", json()), where + ".freq")};
  if (ax.time.size() != a.shape[0] || ax.freq.size() != a.shape[1])
    throw IoError(where + " does not match shape");
  return PhaseArray(ax, std::move(a.values));
}

/// Row-major matrix of |values|, one row per line.
inline void write_magnitude_csv(const fs::path &p, std::size_t rows, std::size_t cols,
                                std::span<const cplx> v) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = 0; k < cols; ++k)
      os << (k ? "," : "") << std::abs(v[i * cols + k]);
    os << "\n";
  }
  write_text(p, os.str());
}

// ---------------------------------------------------------------------------
// Sequences: {"lattice":{"alpha":..,"beta":..},"entries":[[[k,i],re,im],...]}

inline json sequence_json(const LatticeSeq &a) {
  json e = json::array();
  for (const auto &[l, v] : a.values())
    e.push_back({{l.k, l.i}, v.real(), v.imag()});
  return {{"lattice", {{"alpha", a.geometry().alpha}, {"beta", a.geometry().beta}}},
          {"entries", e}};
}

inline LatticeSeq sequence_from_json(const json &j, const std::string &src) {
  if (!j.contains("lattice"))
    throw IoError(src + ": missing field 'lattice'");
  const json &lat = j.at("lattice");
  if (!lat.contains("alpha") || !lat.contains("beta"))
    throw IoError(src + ": lattice needs 'alpha' and 'beta'");
  LatticeSeq out({lat.at("alpha").get<double>(), lat.at("beta").get<double>()});
  if (!j.contains("entries") || !j.at("entries").is_array())
    throw IoError(src + ": missing array field 'entries'");
  std::size_t n = 0;
  for (const auto &e : j.at("entries")) {
    const std::string at = src + ": entries[" + std::to_string(n++) + "]";
    if (!e.is_array() || e.size() < 2 || !e[0].is_array() || e[0].size() != 2)
      throw IoError(at + " must be [[k, i], re, im]");
    const LatticeIndex l{e[0][0].get<long>(), e[0][1].get<long>()};
    const double im = e.size() > 2 ? e[2].get<double>() : 0.0;
    out.add(l, cplx(e[1].get<double>(), im));
  }
  return out;
}

inline LatticeSeq read_sequence(const fs::path &p) {
  return sequence_from_json(read_json(p), p.string());
}

inline void write_sequence(const fs::path &p, const LatticeSeq &a) {
  write_json(p, sequence_json(a));
}

} // namespace tfa::io
