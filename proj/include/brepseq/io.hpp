#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <json.hpp>

#include "brepseq/brep.hpp"
#include "brepseq/grammar.hpp"
#include "brepseq/ngram.hpp"
#include "brepseq/rq.hpp"
#include "brepseq/tokenizer.hpp"
#include "brepseq/vhp.hpp"

namespace brepseq {

using Json = nlohmann::json;

/// Writes to a sibling temp file and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kFormat, "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error(ErrorKind::kFormat, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kFormat, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace detail {

inline Json point_json(Point3 p) { return Json::array({p.x, p.y, p.z}); }

inline Point3 json_point(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorKind::kFormat, "expected a 3-vector");
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

inline Json curve_json(const CurveGeom& c) {
  return std::visit(
      [](const auto& g) -> Json {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, LineSegment>) {
          return {{"type", "line"}, {"start", point_json(g.start)}, {"end", point_json(g.end)}};
        } else if constexpr (std::is_same_v<T, CircularArc>) {
          return {{"type", "arc"},
                  {"center", point_json(g.center)},
                  {"radius", g.radius},
                  {"x_axis", point_json(g.x_axis)},
                  {"y_axis", point_json(g.y_axis)},
                  {"span", g.span}};
        } else if constexpr (std::is_same_v<T, CubicBezier>) {
          Json cp = Json::array();
          for (const Point3& p : g.control) cp.push_back(point_json(p));
          return {{"type", "bezier"}, {"control", cp}};
        } else {
          Json pts = Json::array();
          for (const Point3& p : g.points) pts.push_back(point_json(p));
          return {{"type", "polyline"}, {"points", pts}};
        }
      },
      c);
}

inline CurveGeom json_curve(const Json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "line") return LineSegment{json_point(j.at("start")), json_point(j.at("end"))};
  if (type == "arc") {
    return CircularArc{json_point(j.at("center")), j.at("radius").get<double>(), json_point(j.at("x_axis")), json_point(j.at("y_axis")),
                       j.at("span").get<double>()};
  }
  if (type == "bezier") {
    CubicBezier b;
    if (j.at("control").size() != 4) throw Error(ErrorKind::kFormat, "bezier needs 4 control points");
    for (int i = 0; i < 4; ++i) b.control[i] = json_point(j.at("control").at(i));
    return b;
  }
  if (type == "polyline") {
    Polyline p;
    for (const Json& q : j.at("points")) p.points.push_back(json_point(q));
    if (p.points.size() < 2) throw Error(ErrorKind::kFormat, "polyline needs at least 2 points");
    return p;
  }
  throw Error(ErrorKind::kFormat, "unknown curve type '" + type + "'");
}

inline Json surface_json(const SurfaceGeom& s) {
  Json j = std::visit(
      [](const auto& g) -> Json {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Plane>) {
          return {{"type", "plane"}, {"origin", point_json(g.origin)}, {"u_axis", point_json(g.u_axis)}, {"v_axis", point_json(g.v_axis)}};
        } else if constexpr (std::is_same_v<T, CylinderPatch>) {
          return {{"type", "cylinder"}, {"base", point_json(g.base)}, {"axis", point_json(g.axis)}, {"x_axis", point_json(g.x_axis)}, {"radius", g.radius}};
        } else if constexpr (std::is_same_v<T, SpherePatch>) {
          return {{"type", "sphere"}, {"center", point_json(g.center)}, {"z_axis", point_json(g.z_axis)}, {"x_axis", point_json(g.x_axis)}, {"radius", g.radius}};
        } else {
          Json cp = Json::array();
          for (const Point3& p : g.control) cp.push_back(point_json(p));
          return {{"type", "bicubic"}, {"control", cp}};
        }
      },
      s.shape);
  j["domain"] = {s.domain.u0, s.domain.u1, s.domain.v0, s.domain.v1};
  j["reversed"] = s.reversed;
  return j;
}

inline SurfaceGeom json_surface(const Json& j) {
  SurfaceGeom s;
  const std::string type = j.at("type").get<std::string>();
  if (type == "plane") {
    s.shape = Plane{json_point(j.at("origin")), json_point(j.at("u_axis")), json_point(j.at("v_axis"))};
  } else if (type == "cylinder") {
    s.shape = CylinderPatch{json_point(j.at("base")), json_point(j.at("axis")), json_point(j.at("x_axis")), j.at("radius").get<double>()};
  } else if (type == "sphere") {
    s.shape = SpherePatch{json_point(j.at("center")), json_point(j.at("z_axis")), json_point(j.at("x_axis")), j.at("radius").get<double>()};
  } else if (type == "bicubic") {
    BicubicPatch b;
    if (j.at("control").size() != 16) throw Error(ErrorKind::kFormat, "bicubic needs 16 control points");
    for (int i = 0; i < 16; ++i) b.control[i] = json_point(j.at("control").at(i));
    s.shape = b;
  } else {
    throw Error(ErrorKind::kFormat, "unknown surface type '" + type + "'");
  }
  const Json& d = j.at("domain");
  if (d.size() != 4) throw Error(ErrorKind::kFormat, "domain needs 4 numbers");
  s.domain = {d.at(0).get<double>(), d.at(1).get<double>(), d.at(2).get<double>(), d.at(3).get<double>()};
  s.reversed = j.value("reversed", false);
  return s;
}

inline void check_id(int id, std::size_t n, bool allow_none, const char* what) {
  if ((allow_none && id == kNoId) || (id >= 0 && static_cast<std::size_t>(id) < n)) return;
  throw Error(ErrorKind::kFormat, std::string(what) + " id " + std::to_string(id) + " out of range");
}

}  // namespace detail

inline constexpr int kModelFormatVersion = 1;

inline Json model_to_json(const BrepModel& m, const Similarity& transform = {}) {
  Json j;
  j["format"] = "brepseq-model";
  j["version"] = kModelFormatVersion;
  j["units"] = "normalized";
  j["transform"] = {{"scale", transform.scale}, {"offset", detail::point_json(transform.offset)}};
  Json verts = Json::array();
  for (const Point3& p : m.vertices) verts.push_back(detail::point_json(p));
  j["vertices"] = verts;
  Json edges = Json::array();
  for (const Edge& e : m.edges) {
    edges.push_back({{"start", e.start}, {"end", e.end}, {"half_edges", {e.half_edges[0], e.half_edges[1]}}, {"curve", detail::curve_json(e.curve)}});
  }
  j["edges"] = edges;
  Json hes = Json::array();
  for (const HalfEdge& h : m.half_edges) {
    hes.push_back({{"origin", h.origin}, {"twin", h.twin}, {"loop", h.loop}, {"edge", h.edge}, {"forward", h.forward}});
  }
  j["half_edges"] = hes;
  Json loops = Json::array();
  for (const Loop& l : m.loops) {
    loops.push_back({{"kind", l.kind == LoopKind::kOuter ? "outer" : "inner"}, {"face", l.face}, {"half_edges", l.half_edges}});
  }
  j["loops"] = loops;
  Json faces = Json::array();
  for (const Face& f : m.faces) faces.push_back({{"outer", f.outer}, {"inner", f.inner}, {"surface", detail::surface_json(f.surface)}});
  j["faces"] = faces;
  j["shells"] = m.shells;
  return j;
}

/// Throws Error(kFormat) on any structural problem; never crashes on malformed input.
inline BrepModel model_from_json(const Json& j, Similarity* transform = nullptr) {
  try {
    if (j.at("format").get<std::string>() != "brepseq-model") throw Error(ErrorKind::kFormat, "not a brepseq model document");
    if (j.at("version").get<int>() != kModelFormatVersion) throw Error(ErrorKind::kFormat, "unsupported model format version");
    BrepModel m;
    for (const Json& v : j.at("vertices")) m.vertices.push_back(detail::json_point(v));
    for (const Json& e : j.at("edges")) {
      Edge edge;
      edge.start = e.at("start").get<int>();
      edge.end = e.at("end").get<int>();
      edge.half_edges = {e.at("half_edges").at(0).get<int>(), e.at("half_edges").at(1).get<int>()};
      edge.curve = detail::json_curve(e.at("curve"));
      m.edges.push_back(std::move(edge));
    }
    for (const Json& h : j.at("half_edges")) {
      m.half_edges.push_back(HalfEdge{h.at("origin").get<int>(), h.at("twin").get<int>(), h.at("loop").get<int>(), h.at("edge").get<int>(),
                                      h.at("forward").get<bool>()});
    }
    for (const Json& l : j.at("loops")) {
      Loop loop;
      const std::string kind = l.at("kind").get<std::string>();
      if (kind != "outer" && kind != "inner") throw Error(ErrorKind::kFormat, "unknown loop kind '" + kind + "'");
      loop.kind = kind == "outer" ? LoopKind::kOuter : LoopKind::kInner;
      loop.face = l.at("face").get<int>();
      loop.half_edges = l.at("half_edges").get<std::vector<int>>();
      m.loops.push_back(std::move(loop));
    }
    for (const Json& f : j.at("faces")) {
      Face face;
      face.outer = f.at("outer").get<int>();
      face.inner = f.at("inner").get<std::vector<int>>();
      face.surface = detail::json_surface(f.at("surface"));
      m.faces.push_back(std::move(face));
    }
    m.shells = j.at("shells").get<std::vector<std::vector<int>>>();
    // Range checks keep later stages from indexing out of bounds; semantic defects are left to validate().
    const std::size_t nv = m.vertices.size(), ne = m.edges.size(), nh = m.half_edges.size(), nl = m.loops.size(), nf = m.faces.size();
    for (const Edge& e : m.edges) {
      detail::check_id(e.start, nv, false, "vertex");
      detail::check_id(e.end, nv, false, "vertex");
      for (int h : e.half_edges) detail::check_id(h, nh, true, "half-edge");
    }
    for (const HalfEdge& h : m.half_edges) {
      detail::check_id(h.origin, nv, false, "vertex");
      detail::check_id(h.twin, nh, true, "half-edge");
      detail::check_id(h.loop, nl, true, "loop");
      detail::check_id(h.edge, ne, false, "edge");
    }
    for (const Loop& l : m.loops) {
      detail::check_id(l.face, nf, true, "face");
      for (int h : l.half_edges) detail::check_id(h, nh, false, "half-edge");
    }
    for (const Face& f : m.faces) {
      detail::check_id(f.outer, nl, false, "loop");
      for (int l : f.inner) detail::check_id(l, nl, false, "loop");
    }
    for (const auto& s : m.shells) {
      for (int f : s) detail::check_id(f, nf, false, "face");
    }
    if (transform) {
      const Json& t = j.at("transform");
      *transform = Similarity{t.at("scale").get<double>(), detail::json_point(t.at("offset"))};
    }
    return m;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("malformed model document: ") + e.what());
  }
}

inline std::string dump_json(const Json& j) { return j.dump(1) + "\n"; }

inline Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorKind::kFormat, what + ": " + e.what());
  }
}

inline void save_model(const std::filesystem::path& p, const BrepModel& m, const Similarity& t = {}) { write_file_atomic(p, dump_json(model_to_json(m, t))); }

inline BrepModel load_model(const std::filesystem::path& p, Similarity* t = nullptr) {
  try {
    return model_from_json(parse_json(read_file(p), p.string()), t);
  } catch (const Error& e) {
    throw Error(e.kind(), p.string() + ": " + e.what());
  }
}

/// Codebook plus the sampling layout its descriptors came from.
struct CodebookFile {
  Codebook codebook;
  SamplingConfig sampling;
};

inline Json codebook_to_json(const CodebookFile& f) {
  const Codebook& cb = f.codebook;
  return {{"format", "brepseq-codebook"},
          {"version", 1},
          {"id", cb.id()},
          {"levels", cb.levels},
          {"entries", cb.entries},
          {"dimension", cb.dimension},
          {"sampling", {{"curve_samples", f.sampling.curve_samples}, {"surface_samples", f.sampling.surface_samples}, {"next_samples", f.sampling.next_samples}}},
          {"mean", cb.mean},
          {"scale", cb.scale},
          {"corpus_rms", cb.corpus_rms},
          {"centroids", cb.centroids}};
}

inline CodebookFile codebook_from_json(const Json& j) {
  try {
    if (j.at("format").get<std::string>() != "brepseq-codebook") throw Error(ErrorKind::kFormat, "not a codebook document");
    CodebookFile f;
    Codebook& cb = f.codebook;
    cb.levels = j.at("levels").get<int>();
    cb.entries = j.at("entries").get<int>();
    cb.dimension = j.at("dimension").get<int>();
    cb.mean = j.at("mean").get<std::vector<double>>();
    cb.scale = j.at("scale").get<std::vector<double>>();
    cb.corpus_rms = j.at("corpus_rms").get<double>();
    cb.centroids = j.at("centroids").get<std::vector<std::vector<double>>>();
    const Json& s = j.at("sampling");
    f.sampling.curve_samples = s.at("curve_samples").get<int>();
    f.sampling.surface_samples = s.at("surface_samples").get<int>();
    f.sampling.next_samples = s.at("next_samples").get<int>();
    if (cb.levels < 1 || cb.entries < 1 || cb.dimension != f.sampling.descriptor_length() || static_cast<int>(cb.mean.size()) != cb.dimension ||
        static_cast<int>(cb.scale.size()) != cb.dimension || static_cast<int>(cb.centroids.size()) != cb.levels) {
      throw Error(ErrorKind::kFormat, "codebook dimensions are inconsistent");
    }
    for (const auto& lvl : cb.centroids) {
      if (lvl.size() != static_cast<std::size_t>(cb.codes_per_level()) * cb.dimension) throw Error(ErrorKind::kFormat, "codebook level has the wrong size");
    }
    if (j.contains("id") && j.at("id").get<std::string>() != cb.id()) throw Error(ErrorKind::kFormat, "codebook content does not match its id");
    return f;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("malformed codebook document: ") + e.what());
  }
}

inline void save_codebook(const std::filesystem::path& p, const CodebookFile& f) { write_file_atomic(p, dump_json(codebook_to_json(f))); }
inline CodebookFile load_codebook(const std::filesystem::path& p) { return codebook_from_json(parse_json(read_file(p), p.string())); }

/// Token file:
///   vhptok 1 layout=<hash> codebook=<id> coord_bins=C max_pointers=P rq_levels=D rq_entries=K
///   # <name>              (optional, names the next sequence)
///   @ scale ox oy oz      (optional, normalization of the next sequence)
///   t0 t1 t2 ...          (one sequence per line)
struct TokenFile {
  VocabLayout layout;
  std::string codebook_id;
  std::vector<TokenSequence> sequences;
  std::vector<std::string> names;
};

inline std::string format_token_file(const TokenFile& f) {
  std::ostringstream os;
  const VocabLayout& v = f.layout;
  os << "vhptok 1 layout=" << v.hash() << " codebook=" << f.codebook_id << " coord_bins=" << v.coord_bins << " max_pointers=" << v.max_pointers
     << " rq_levels=" << v.rq_levels << " rq_entries=" << v.rq_entries << "\n";
  char buf[160];
  for (std::size_t i = 0; i < f.sequences.size(); ++i) {
    if (i < f.names.size() && !f.names[i].empty()) os << "# " << f.names[i] << "\n";
    const Similarity& t = f.sequences[i].transform;
    std::snprintf(buf, sizeof buf, "@ %.17g %.17g %.17g %.17g\n", t.scale, t.offset.x, t.offset.y, t.offset.z);
    os << buf;
    for (std::size_t k = 0; k < f.sequences[i].tokens.size(); ++k) os << (k ? " " : "") << f.sequences[i].tokens[k];
    os << "\n";
  }
  return os.str();
}

/// Parses and grammar-checks every sequence; errors name the line and token position.
inline TokenFile parse_token_file(const std::string& text, const std::string& source = "<tokens>") {
  TokenFile f;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) { throw Error(ErrorKind::kFormat, source + ":" + std::to_string(line_no) + ": " + msg); };
  if (!std::getline(in, line)) fail("empty token file");
  ++line_no;
  {
    std::istringstream hs(line);
    std::string magic, version;
    hs >> magic >> version;
    if (magic != "vhptok" || version != "1") fail("missing 'vhptok 1' header");
    std::string field, layout_hash;
    while (hs >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) fail("malformed header field '" + field + "'");
      const std::string key = field.substr(0, eq), val = field.substr(eq + 1);
      try {
        if (key == "layout") layout_hash = val;
        else if (key == "codebook") f.codebook_id = val;
        else if (key == "coord_bins") f.layout.coord_bins = std::stoi(val);
        else if (key == "max_pointers") f.layout.max_pointers = std::stoi(val);
        else if (key == "rq_levels") f.layout.rq_levels = std::stoi(val);
        else if (key == "rq_entries") f.layout.rq_entries = std::stoi(val);
      } catch (const std::exception&) {
        fail("bad header value '" + field + "'");
      }
    }
    if (f.layout.coord_bins != kCoordBins || f.layout.max_pointers < 1 || f.layout.rq_levels < 1 || f.layout.rq_entries < 1) fail("invalid vocabulary layout");
    if (layout_hash != f.layout.hash()) fail("layout hash does not match the header's layout fields");
  }
  Similarity pending_transform;
  std::string pending_name;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      pending_name = line.size() > 2 ? line.substr(2) : "";
      continue;
    }
    if (line[0] == '@') {
      std::istringstream ts(line.substr(1));
      if (!(ts >> pending_transform.scale >> pending_transform.offset.x >> pending_transform.offset.y >> pending_transform.offset.z)) {
        fail("malformed transform line");
      }
      continue;
    }
    TokenSequence seq;
    std::istringstream ls(line);
    std::string word;
    while (ls >> word) {
      std::size_t used = 0;
      int tok = 0;
      try {
        tok = std::stoi(word, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != word.size()) fail("position " + std::to_string(seq.tokens.size()) + ": '" + word + "' is not an integer token");
      seq.tokens.push_back(tok);
    }
    GrammarState s;
    for (std::size_t k = 0; k < seq.tokens.size(); ++k) {
      try {
        s = step(s, seq.tokens[k], f.layout);
      } catch (const GrammarError& e) {
        fail("position " + std::to_string(k) + ": " + e.what());
      }
    }
    if (s.phase != GrammarState::Phase::kDone) fail("position " + std::to_string(seq.tokens.size()) + ": sequence ends before <end>");
    seq.layout_hash = f.layout.hash();
    seq.codebook_id = f.codebook_id;
    seq.transform = pending_transform;
    f.sequences.push_back(std::move(seq));
    f.names.push_back(pending_name);
    pending_transform = {};
    pending_name.clear();
  }
  return f;
}

inline TokenFile load_token_file(const std::filesystem::path& p) { return parse_token_file(read_file(p), p.string()); }
inline void save_token_file(const std::filesystem::path& p, const TokenFile& f) { write_file_atomic(p, format_token_file(f)); }

inline Json ngram_to_json(const NGramModel& m) {
  Json tables = Json::array();
  // Sorted for byte-stable output.
  std::vector<std::tuple<int, std::uint64_t, int, std::int64_t>> rows;
  for (int k = 0; k < m.order(); ++k) {
    for (const auto& [key, cc] : m.tables()[k]) {
      for (std::size_t i = 0; i < cc.tokens.size(); ++i) rows.emplace_back(k, key, cc.tokens[i], cc.counts[i]);
    }
  }
  std::sort(rows.begin(), rows.end());
  for (const auto& [k, key, tok, c] : rows) {
    Json ctx = Json::array();
    for (int i = k - 1; i >= 0; --i) ctx.push_back(static_cast<int>((key >> (15 * i)) & 0x7fff));
    tables.push_back({k, ctx, tok, c});
  }
  const VocabLayout& v = m.layout();
  return {{"format", "brepseq-ngram"},
          {"version", 1},
          {"order", m.order()},
          {"alpha", m.alpha()},
          {"layout", {{"coord_bins", v.coord_bins}, {"max_pointers", v.max_pointers}, {"rq_levels", v.rq_levels}, {"rq_entries", v.rq_entries}}},
          {"counts", tables}};
}

inline NGramModel ngram_from_json(const Json& j) {
  try {
    if (j.at("format").get<std::string>() != "brepseq-ngram") throw Error(ErrorKind::kFormat, "not an n-gram document");
    const Json& l = j.at("layout");
    VocabLayout v{l.at("coord_bins").get<int>(), l.at("max_pointers").get<int>(), l.at("rq_levels").get<int>(), l.at("rq_entries").get<int>()};
    NGramModel m(j.at("order").get<int>(), j.at("alpha").get<double>(), v);
    for (const Json& row : j.at("counts")) {
      const int k = row.at(0).get<int>();
      if (k < 0 || k >= m.order() || static_cast<int>(row.at(1).size()) != k) throw Error(ErrorKind::kFormat, "bad n-gram count row");
      std::uint64_t key = 0;
      for (const Json& t : row.at(1)) key = (key << 15) | (static_cast<std::uint64_t>(t.get<int>()) & 0x7fff);
      const int tok = row.at(2).get<int>();
      if (tok < 0 || tok >= v.size()) throw Error(ErrorKind::kFormat, "n-gram token outside vocabulary");
      m.set_count(k, key, tok, row.at(3).get<std::int64_t>());
    }
    m.finalize();
    return m;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("malformed n-gram document: ") + e.what());
  }
}

/// Fixed 32x32 UV tessellation per face, triangles kept when their centroid is inside the trim.
inline std::string export_obj(const BrepModel& m, int resolution = 32) {
  std::ostringstream os;
  os.precision(17);
  os << "# brepseq tessellation " << resolution << "x" << resolution << " per face\n";
  std::size_t base = 1;
  for (FaceId f = 0; f < static_cast<FaceId>(m.faces.size()); ++f) {
    const SurfaceGeom& s = m.faces[f].surface;
    const FacePartition part(m, f, SamplingConfig{});
    const ParamDomain& d = s.domain;
    os << "o face" << f << "\n";
    for (int j = 0; j <= resolution; ++j) {
      for (int i = 0; i <= resolution; ++i) {
        const Point3 p = evaluate(s, {d.u0 + d.width() * i / resolution, d.v0 + d.height() * j / resolution});
        os << "v " << p.x << " " << p.y << " " << p.z << "\n";
      }
    }
    auto id = [&](int i, int j) { return base + static_cast<std::size_t>(j) * (resolution + 1) + i; };
    // Winding follows Su x Sv; reversed faces flip it.
    auto tri = [&](std::size_t a, std::size_t b, std::size_t c) {
      if (s.reversed) std::swap(b, c);
      os << "f " << a << " " << b << " " << c << "\n";
    };
    for (int j = 0; j < resolution; ++j) {
      for (int i = 0; i < resolution; ++i) {
        const Vec2 lo{d.u0 + d.width() * (i + 1.0 / 3) / resolution, d.v0 + d.height() * (j + 1.0 / 3) / resolution};
        const Vec2 hi{d.u0 + d.width() * (i + 2.0 / 3) / resolution, d.v0 + d.height() * (j + 2.0 / 3) / resolution};
        if (part.inside(part.chart().to_metric(lo))) tri(id(i, j), id(i + 1, j), id(i, j + 1));
        if (part.inside(part.chart().to_metric(hi))) tri(id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
      }
    }
    base += static_cast<std::size_t>(resolution + 1) * (resolution + 1);
  }
  return os.str();
}

/// Voronoi cell labels per face plus every half-edge's VHP samples.
inline Json export_vhp_debug(const BrepModel& m, const SamplingConfig& cfg = {}) {
  Json j;
  j["format"] = "brepseq-vhp-debug";
  Json faces = Json::array();
  for (FaceId f = 0; f < static_cast<FaceId>(m.faces.size()); ++f) {
    const VoronoiCellMap map = voronoi_assign(m, f, cfg);
    faces.push_back({{"face", f}, {"resolution", map.resolution}, {"domain", {map.domain.u0, map.domain.u1, map.domain.v0, map.domain.v1}}, {"labels", map.labels}});
  }
  j["faces"] = faces;
  const VhpExtraction vhp = extract_vhp(m, cfg);
  Json recs = Json::array();
  for (const VhpRecord& r : vhp.records) {
    Json patch = Json::array(), next = Json::array();
    for (const Point3& p : r.patch.samples) patch.push_back(detail::point_json(p));
    for (const Point3& p : r.next_samples) next.push_back(detail::point_json(p));
    recs.push_back({{"half_edge", r.half_edge}, {"face", m.face_of(r.half_edge)}, {"label", r.label}, {"patch", patch}, {"next", next}});
  }
  j["records"] = recs;
  j["warnings"] = vhp.warnings;
  return j;
}

}  // namespace brepseq
