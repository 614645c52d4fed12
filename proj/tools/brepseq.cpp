// brepseq command-line front end.
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "brepseq/brepseq.hpp"

namespace fs = std::filesystem;
using namespace brepseq;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitFormat = 2;
constexpr int kExitCapacity = 3;

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::kFormat:
    case ErrorKind::kGrammar: return kExitFormat;
    case ErrorKind::kCapacity: return kExitCapacity;
    default: return kExitValidation;
  }
}

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::kInvalidGeometry: return "invalid_geometry";
    case ErrorKind::kRange: return "range";
    case ErrorKind::kCapacity: return "capacity";
    case ErrorKind::kGrammar: return "grammar";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kPrecondition: return "precondition";
    case ErrorKind::kInfeasible: return "infeasible";
  }
  return "error";
}

std::string model_name(const fs::path& p) {
  std::string s = p.filename().string();
  for (const char* ext : {".brep.json", ".json"}) {
    const std::string e = ext;
    if (s.size() > e.size() && s.compare(s.size() - e.size(), e.size(), e) == 0) return s.substr(0, s.size() - e.size());
  }
  return s;
}

/// Model files of a directory, sorted by name.
std::vector<fs::path> model_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::kFormat, dir.string() + " is not a directory");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string n = e.path().filename().string();
    if (e.is_regular_file() && n.size() > 10 && n.compare(n.size() - 10, 10, ".brep.json") == 0) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string fmt_name(const char* prefix, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%05zu", prefix, i);
  return buf;
}

Json euler_json(const std::vector<ShellEuler>& shells) {
  Json a = Json::array();
  for (const auto& s : shells) {
    a.push_back({{"V", s.vertices}, {"E", s.edges}, {"F", s.faces}, {"H", s.inner_loops}, {"genus", s.genus}, {"integral_genus", s.integral_genus}});
  }
  return a;
}

Json validation_json(const ValidationReport& r) {
  Json d = Json::array();
  for (const Defect& x : r.defects) d.push_back({{"kind", defect_kind_name(x.kind)}, {"element", x.element}, {"location", x.location}, {"message", x.message}});
  return {{"watertight", r.watertight},
          {"twin_consistent", r.twin_consistent},
          {"loops_closed", r.loops_closed},
          {"manifold", r.manifold},
          {"shells", euler_json(r.shells)},
          {"defects", d}};
}

Json reconstruction_json(const ReconstructionReport& r) {
  return {{"success", r.success},
          {"total_cost", r.total_cost},
          {"infeasible_vertices", r.infeasible_vertices},
          {"elevated_cost_vertices", r.elevated_cost_vertices},
          {"loops", r.loops},
          {"outer_loops", r.outer_loops},
          {"inner_loops", r.inner_loops},
          {"faces_built", r.faces_built},
          {"inner_attached", r.inner_attached},
          {"planar_faces", r.planar_faces},
          {"underdetermined_faces", r.underdetermined_faces},
          {"errors", r.errors},
          {"validation", validation_json(r.validation)}};
}

CorpusSpec spec_from_json(const Json& j) {
  CorpusSpec s;
  try {
    if (j.contains("counts")) {
      s.counts.fill(0);
      for (const auto& [name, count] : j.at("counts").items()) {
        const PrimitiveFamily f = family_from_name(name);
        s.counts[static_cast<std::size_t>(f)] = count.get<int>();
      }
    }
    s.size_min = j.value("size_min", s.size_min);
    s.size_max = j.value("size_max", s.size_max);
    s.prism_sides_min = j.value("prism_sides_min", s.prism_sides_min);
    s.prism_sides_max = j.value("prism_sides_max", s.prism_sides_max);
    s.components_min = j.value("components_min", s.components_min);
    s.components_max = j.value("components_max", s.components_max);
    s.gap = j.value("gap", s.gap);
    s.placement_retries = j.value("placement_retries", s.placement_retries);
    s.seed = j.value("seed", s.seed);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("malformed corpus spec: ") + e.what());
  }
  return s;
}

struct LoadedModel {
  std::string name;
  BrepModel model;
  Similarity transform;
};

std::vector<LoadedModel> load_models(const std::vector<std::string>& paths) {
  std::vector<LoadedModel> out;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      for (const auto& f : model_files(p)) {
        LoadedModel lm{model_name(f), {}, {}};
        lm.model = load_model(f, &lm.transform);
        out.push_back(std::move(lm));
      }
    } else {
      LoadedModel lm{model_name(p), {}, {}};
      lm.model = load_model(p, &lm.transform);
      out.push_back(std::move(lm));
    }
  }
  return out;
}

bool is_token_file(const std::string& p) {
  if (fs::is_directory(p)) return false;
  std::ifstream in(p);
  std::string head(6, '\0');
  in.read(head.data(), 6);
  return head == "vhptok";
}

TokenizerConfig tokenizer_config(const CodebookFile& cb) {
  TokenizerConfig cfg;
  cfg.sampling = cb.sampling;
  return cfg;
}

void require_codebook_match(const TokenFile& tf, const CodebookFile& cb) {
  if (!tf.codebook_id.empty() && tf.codebook_id != cb.codebook.id()) {
    throw Error(ErrorKind::kFormat, "token file was written with codebook " + tf.codebook_id + ", not " + cb.codebook.id());
  }
  if (tf.layout != layout_for(cb.codebook, tf.layout.max_pointers)) throw Error(ErrorKind::kFormat, "token layout does not match the codebook");
}

/// Parses, reconstructs and stores every sequence; returns the per-sequence report entries.
Json detokenize_into(const TokenFile& tf, const CodebookFile& cb, const fs::path& out, const std::string& prefix, int* failures) {
  Json entries = Json::array();
  for (std::size_t i = 0; i < tf.sequences.size(); ++i) {
    const std::string name = i < tf.names.size() && !tf.names[i].empty() ? tf.names[i] : fmt_name(prefix.c_str(), i);
    Json e{{"index", i}, {"name", name}, {"tokens", tf.sequences[i].tokens.size()}};
    try {
      const VertexRecordSet rec = parse(tf.sequences[i].tokens, tf.layout, &cb.codebook, cb.sampling);
      const Reconstruction r = reconstruct(rec, cb.sampling);
      e["reconstruction"] = reconstruction_json(r.report);
      e["watertight"] = r.report.success;
      if (!r.report.success) ++*failures;
      save_model(out / (name + ".brep.json"), r.model, tf.sequences[i].transform);
    } catch (const Error& err) {
      e["watertight"] = false;
      e["error"] = {{"kind", kind_name(err.kind())}, {"message", err.what()}};
      ++*failures;
    }
    entries.push_back(e);
  }
  return entries;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"brepseq: B-rep <-> vertex token sequence codec"};
  app.require_subcommand(1);

  // synth
  std::string spec_path, out_path, report_path, codebook_path, lm_path, prefix_path, gen_dir, ref_dir;
  std::vector<std::string> inputs;
  std::uint64_t seed = 0;
  bool seed_set = false;
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("--spec", spec_path, "corpus spec (JSON)")->required();
  synth->add_option("--out", out_path, "output directory")->required();
  synth->add_option("--seed", seed, "overrides the spec's seed")->each([&](const std::string&) { seed_set = true; });

  auto* validate_cmd = app.add_subcommand("validate", "validate model files");
  validate_cmd->add_option("models", inputs, "model files or directories")->required();
  validate_cmd->add_option("--report", report_path, "report file (JSON)");

  auto* tokenize_cmd = app.add_subcommand("tokenize", "models -> token file");
  tokenize_cmd->add_option("models", inputs, "model files or directories")->required();
  tokenize_cmd->add_option("--codebook", codebook_path)->required();
  tokenize_cmd->add_option("--out", out_path)->required();

  int levels = 4, size = 256;
  auto* train = app.add_subcommand("train-codebook", "train an RQ codebook from models (or token files decoded with --codebook)");
  train->add_option("inputs", inputs, "model files/directories or token files")->required();
  train->add_option("--levels", levels, "RQ depth D");
  train->add_option("--size", size, "entries per level K");
  train->add_option("--out", out_path)->required();
  train->add_option("--codebook", codebook_path, "decoder for token-file inputs");
  train->add_option("--seed", seed);

  auto* detok = app.add_subcommand("detokenize", "token file -> reconstructed models");
  detok->add_option("tokens", prefix_path)->required();
  detok->add_option("--codebook", codebook_path)->required();
  detok->add_option("--out", out_path)->required();
  detok->add_option("--report", report_path);

  auto* rt = app.add_subcommand("roundtrip", "tokenize -> parse -> reconstruct -> compare");
  rt->add_option("models", inputs)->required();
  rt->add_option("--codebook", codebook_path, "codebook (trained on the inputs when omitted)");
  rt->add_option("--report", report_path);
  rt->add_option("--seed", seed);

  int order = 4;
  double alpha = 0.1;
  auto* fit = app.add_subcommand("fit-lm", "fit an n-gram model on token files");
  fit->add_option("tokens", inputs)->required();
  fit->add_option("--order", order);
  fit->add_option("--alpha", alpha, "additive smoothing");
  fit->add_option("--out", out_path)->required();

  int count = 1;
  double temperature = 1.0;
  int max_length = 3072;
  int keep_components = 1;
  auto* gen = app.add_subcommand("generate", "sample sequences under validity masks and reconstruct them");
  gen->add_option("--lm", lm_path)->required();
  gen->add_option("--codebook", codebook_path)->required();
  gen->add_option("-n,--count", count);
  gen->add_option("--seed", seed);
  gen->add_option("--temperature", temperature);
  gen->add_option("--max-length", max_length);
  gen->add_option("--out", out_path)->required();

  auto* ac = app.add_subcommand("autocomplete", "continue component prefixes of existing sequences");
  ac->add_option("--lm", lm_path)->required();
  ac->add_option("--prefix", prefix_path, "token file; each sequence is cut after --keep components")->required();
  ac->add_option("--keep", keep_components, "components kept from each sequence");
  ac->add_option("--codebook", codebook_path, "reconstruct outputs when given");
  ac->add_option("-n,--count", count, "continuations per prefix");
  ac->add_option("--seed", seed);
  ac->add_option("--temperature", temperature);
  ac->add_option("--max-length", max_length);
  ac->add_option("--out", out_path)->required();

  int points = 2000;
  std::string train_tokens;
  auto* ev = app.add_subcommand("eval", "distribution and CAD metrics of a generated set against a reference set");
  ev->add_option("--gen", gen_dir)->required();
  ev->add_option("--ref", ref_dir)->required();
  ev->add_option("--report", report_path)->required();
  ev->add_option("--points", points);
  ev->add_option("--seed", seed);
  ev->add_option("--codebook", codebook_path, "canonical tokenization for Novel/Unique");
  ev->add_option("--train", train_tokens, "training directory for Novel (defaults to --ref)");

  auto* obj = app.add_subcommand("export-obj", "tessellate a model for viewing");
  obj->add_option("model", prefix_path)->required();
  obj->add_option("--out", out_path)->required();

  auto* dbg = app.add_subcommand("export-vhp-debug", "Voronoi cells and VHP samples as JSON");
  dbg->add_option("model", prefix_path)->required();
  dbg->add_option("--out", out_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitFormat;
  }

  try {
    if (synth->parsed()) {
      CorpusSpec spec = spec_from_json(parse_json(read_file(spec_path), spec_path));
      if (seed_set) spec.seed = seed;
      const auto corpus = synth_corpus(spec);
      Json manifest = Json::array();
      for (const auto& cm : corpus) {
        save_model(fs::path(out_path) / (cm.name + ".brep.json"), cm.model, cm.transform);
        manifest.push_back({{"name", cm.name}, {"family", family_name(cm.family)}, {"components", cm.components}});
      }
      write_file_atomic(fs::path(out_path) / "manifest.json", dump_json({{"seed", spec.seed}, {"models", manifest}}));
      std::cout << "wrote " << corpus.size() << " models to " << out_path << "\n";
      return kExitOk;
    }

    if (validate_cmd->parsed()) {
      Json entries = Json::array();
      int bad = 0;
      for (const auto& lm : load_models(inputs)) {
        const ValidationReport r = validate(lm.model);
        bad += r.watertight ? 0 : 1;
        entries.push_back({{"name", lm.name}, {"report", validation_json(r)}});
        std::cout << lm.name << ": " << (r.watertight ? "watertight" : "INVALID") << "\n";
      }
      if (!report_path.empty()) write_file_atomic(report_path, dump_json({{"models", entries}, {"invalid", bad}}));
      return bad ? kExitValidation : kExitOk;
    }

    if (tokenize_cmd->parsed()) {
      const CodebookFile cb = load_codebook(codebook_path);
      const TokenizerConfig cfg = tokenizer_config(cb);
      TokenFile tf;
      tf.layout = layout_for(cb.codebook, cfg.max_pointers);
      tf.codebook_id = cb.codebook.id();
      for (const auto& lm : load_models(inputs)) {
        try {
          TokenSequence s = tokenize(lm.model, cb.codebook, cfg);
          s.transform = lm.transform;
          tf.sequences.push_back(std::move(s));
          tf.names.push_back(lm.name);
        } catch (const Error& e) {
          throw Error(e.kind(), lm.name + ": " + e.what());
        }
      }
      save_token_file(out_path, tf);
      std::cout << "wrote " << tf.sequences.size() << " sequences to " << out_path << "\n";
      return kExitOk;
    }

    if (train->parsed()) {
      std::vector<std::vector<double>> corpus;
      SamplingConfig sampling;
      std::vector<std::string> model_inputs;
      for (const auto& p : inputs) {
        if (!is_token_file(p)) {
          model_inputs.push_back(p);
          continue;
        }
        if (codebook_path.empty()) throw Error(ErrorKind::kPrecondition, "token-file inputs need --codebook to decode descriptors");
        const CodebookFile dec = load_codebook(codebook_path);
        sampling = dec.sampling;
        const TokenFile tf = load_token_file(p);
        require_codebook_match(tf, dec);
        for (const auto& s : tf.sequences) {
          const VertexRecordSet rec = parse(s.tokens, tf.layout, &dec.codebook, dec.sampling);
          auto d = codec_descriptors(rec, dec.sampling);
          corpus.insert(corpus.end(), d.begin(), d.end());
        }
      }
      if (!model_inputs.empty()) {
        std::vector<BrepModel> models;
        for (auto& lm : load_models(model_inputs)) models.push_back(std::move(lm.model));
        TokenizerConfig cfg;
        cfg.sampling = sampling;
        auto d = collect_descriptors(models, cfg);
        corpus.insert(corpus.end(), d.begin(), d.end());
      }
      CodebookTraining opts;
      opts.levels = levels;
      opts.entries = size;
      opts.seed = seed;
      CodebookFile out{train_codebook(corpus, opts), sampling};
      save_codebook(out_path, out);
      std::cout << "codebook " << out.codebook.id() << " (" << corpus.size() << " descriptors, rms " << out.codebook.corpus_rms << ")\n";
      return kExitOk;
    }

    if (detok->parsed()) {
      const CodebookFile cb = load_codebook(codebook_path);
      TokenFile tf;
      try {
        tf = load_token_file(prefix_path);
        require_codebook_match(tf, cb);
      } catch (const Error& e) {
        if (!report_path.empty()) {
          write_file_atomic(report_path, dump_json({{"error", {{"kind", kind_name(e.kind())}, {"message", e.what()}}}}));
        }
        throw;
      }
      int failures = 0;
      const Json entries = detokenize_into(tf, cb, out_path, "model", &failures);
      if (!report_path.empty()) write_file_atomic(report_path, dump_json({{"sequences", entries}, {"failures", failures}}));
      std::cout << tf.sequences.size() - failures << "/" << tf.sequences.size() << " reconstructed watertight\n";
      return failures ? kExitValidation : kExitOk;
    }

    if (rt->parsed()) {
      auto models = load_models(inputs);
      CodebookFile cb;
      if (!codebook_path.empty()) {
        cb = load_codebook(codebook_path);
      } else {
        std::vector<BrepModel> ms;
        for (const auto& lm : models) ms.push_back(lm.model);
        const auto corpus = collect_descriptors(ms);
        CodebookTraining opts;
        opts.seed = seed;
        opts.entries = std::min<int>(opts.entries, static_cast<int>(corpus.size()));
        cb = CodebookFile{train_codebook(corpus, opts), SamplingConfig{}};
      }
      const TokenizerConfig cfg = tokenizer_config(cb);
      Json entries = Json::array();
      int bad = 0;
      for (const auto& lm : models) {
        Json e{{"name", lm.name}};
        try {
          const RoundtripResult r = roundtrip(lm.model, cb.codebook, cfg);
          e["ok"] = r.ok;
          e["tokens"] = r.tokens.tokens.size();
          e["max_vertex_error"] = r.comparison.max_vertex_error;
          e["mismatches"] = r.comparison.mismatches;
          e["reconstruction"] = reconstruction_json(r.reconstruction.report);
          if (!r.ok) {
            ++bad;
            std::cout << lm.name << ": MISMATCH";
            for (const auto& m : r.comparison.mismatches) std::cout << " [" << m << "]";
            std::cout << "\n";
          }
        } catch (const Error& err) {
          ++bad;
          e["ok"] = false;
          e["error"] = {{"kind", kind_name(err.kind())}, {"message", err.what()}};
          std::cout << lm.name << ": ERROR " << err.what() << "\n";
        }
        entries.push_back(e);
      }
      if (!report_path.empty()) write_file_atomic(report_path, dump_json({{"models", entries}, {"failures", bad}, {"codebook", cb.codebook.id()}}));
      std::cout << models.size() - bad << "/" << models.size() << " models round-tripped\n";
      return bad ? kExitValidation : kExitOk;
    }

    if (fit->parsed()) {
      std::vector<std::vector<int>> corpus;
      std::optional<VocabLayout> layout;
      for (const auto& p : inputs) {
        const TokenFile tf = load_token_file(p);
        if (layout && *layout != tf.layout) throw Error(ErrorKind::kFormat, p + ": vocabulary layout differs from earlier inputs");
        layout = tf.layout;
        for (const auto& s : tf.sequences) corpus.push_back(s.tokens);
      }
      if (!layout) throw Error(ErrorKind::kPrecondition, "no token files given");
      const NGramModel m = fit_ngram(corpus, order, alpha, *layout);
      write_file_atomic(out_path, dump_json(ngram_to_json(m)));
      std::cout << "fitted order-" << order << " model on " << corpus.size() << " sequences\n";
      return kExitOk;
    }

    if (gen->parsed() || ac->parsed()) {
      const NGramModel lm = ngram_from_json(parse_json(read_file(lm_path), lm_path));
      std::optional<CodebookFile> cb;
      if (!codebook_path.empty()) cb = load_codebook(codebook_path);
      if (cb && layout_for(cb->codebook, lm.layout().max_pointers) != lm.layout()) throw Error(ErrorKind::kFormat, "codebook does not match the model's layout");
      SamplerConfig scfg;
      scfg.temperature = temperature;
      scfg.max_length = max_length;
      std::vector<std::vector<int>> prefixes;
      if (ac->parsed()) {
        const TokenFile pf = load_token_file(prefix_path);
        if (pf.layout != lm.layout()) throw Error(ErrorKind::kFormat, "prefix layout does not match the model");
        for (const auto& s : pf.sequences) {
          std::vector<int> p;
          int seps = 0;
          for (int t : s.tokens) {
            if (t == lm.layout().end_token()) break;
            p.push_back(t);
            if (t == lm.layout().sep_token() && ++seps == keep_components) break;
          }
          // Sequences without enough components cannot be cut at a boundary; skip them.
          if (seps == keep_components) prefixes.push_back(std::move(p));
        }
        if (prefixes.empty()) {
          throw Error(ErrorKind::kPrecondition, "no prefix sequence has more than " + std::to_string(keep_components) + " component(s)");
        }
      } else {
        prefixes.push_back({});
      }
      TokenFile out;
      out.layout = lm.layout();
      out.codebook_id = cb ? cb->codebook.id() : "";
      Json log = Json::array();
      std::size_t index = 0;
      for (const auto& prefix : prefixes) {
        for (int i = 0; i < count; ++i, ++index) {
          scfg.seed = sequence_seed(seed, index);
          const SampledSequence s = prefix.empty() ? sample_sequence(lm, scfg) : autocomplete(lm, prefix, scfg);
          log.push_back({{"index", index}, {"seed", s.seed}, {"length", s.tokens.size()}, {"truncated", s.truncated}, {"forced_end", s.forced_end},
                         {"parseable", s.parseable}});
          if (!s.parseable) continue;
          TokenSequence ts;
          ts.tokens = s.tokens;
          out.sequences.push_back(ts);
          out.names.push_back(fmt_name(prefix.empty() ? "gen" : "completion", index));
        }
      }
      const fs::path dir(out_path);
      save_token_file(dir / "sequences.tok", out);
      Json summary{{"sampled", index}, {"parseable", out.sequences.size()}, {"seed", seed}, {"temperature", temperature}, {"log", log}};
      if (cb) {
        int failures = 0;
        summary["reconstruction"] = detokenize_into(out, *cb, dir, "gen", &failures);
        summary["watertight"] = static_cast<int>(out.sequences.size()) - failures;
        std::cout << out.sequences.size() - failures << "/" << index << " samples reconstructed watertight\n";
      }
      write_file_atomic(dir / "log.json", dump_json(summary));
      std::cout << out.sequences.size() << "/" << index << " samples parseable\n";
      return kExitOk;
    }

    if (ev->parsed()) {
      const auto gen_models = load_models({gen_dir});
      const auto ref_models = load_models({ref_dir});
      const auto train_models = train_tokens.empty() ? ref_models : load_models({train_tokens});
      if (gen_models.empty() || ref_models.empty()) throw Error(ErrorKind::kPrecondition, "both --gen and --ref need at least one model");
      std::optional<CodebookFile> cb;
      if (!codebook_path.empty()) cb = load_codebook(codebook_path);
      auto key = [&](const BrepModel& m) { return cb ? canonical_key(m, cb->codebook, tokenizer_config(*cb)) : geometry_key(m); };

      std::vector<PointCloud> gen_clouds, ref_clouds;
      std::vector<std::string> gen_keys, train_keys;
      std::vector<bool> watertight;
      // generate's log knows about reconstructions that only look watertight (twin fallback)
      std::map<std::string, bool> logged;
      const fs::path log_path = fs::path(gen_dir) / "log.json";
      if (fs::exists(log_path)) {
        const Json log = parse_json(read_file(log_path.string()), log_path.string());
        if (log.contains("reconstruction")) {
          for (const auto& e : log.at("reconstruction")) logged[e.value("name", std::string())] = e.value("watertight", false);
        }
      }
      Json per_model = Json::array();
      std::size_t i = 0;
      for (const auto& lm : gen_models) {
        const auto it = logged.find(lm.name);
        const bool wt = validate(lm.model).watertight && (it == logged.end() || it->second);
        watertight.push_back(wt);
        gen_keys.push_back(key(lm.model));
        Json e{{"name", lm.name}, {"watertight", wt}};
        if (wt) {
          try {
            gen_clouds.push_back(surface_sample(lm.model, points, sequence_seed(seed, i)));
            e["sampled"] = true;
          } catch (const Error& err) {
            e["sampled"] = false;
            e["error"] = err.what();
          }
        }
        per_model.push_back(e);
        ++i;
      }
      for (const auto& lm : ref_models) ref_clouds.push_back(surface_sample(lm.model, points, sequence_seed(seed, i++)));
      for (const auto& lm : train_models) train_keys.push_back(key(lm.model));
      const NovelUniqueValid nuv = novel_unique_valid(gen_keys, train_keys, watertight);
      Json report{{"novel", nuv.novel},
                  {"unique", nuv.unique},
                  {"valid", nuv.valid},
                  {"generated", gen_models.size()},
                  {"reference", ref_models.size()},
                  {"sampled_generated", gen_clouds.size()},
                  {"points", points},
                  {"voxel_resolution", kJsdResolution},
                  {"seed", seed},
                  {"duplicate_criterion", cb ? "canonical token sequence" : "geometry hash"}};
      std::string csv = "model,min_cd_to_ref,nearest_ref\n";
      if (!gen_clouds.empty()) {
        const auto table = chamfer_table(gen_clouds, ref_clouds);
        const CovMmd cm = cov_mmd_from_table(table, gen_clouds.size(), ref_clouds.size());
        report["cov"] = cm.cov;
        report["mmd"] = cm.mmd;
        report["jsd"] = jsd(gen_clouds, ref_clouds);
        std::size_t g = 0;
        for (std::size_t k = 0; k < gen_models.size(); ++k) {
          if (!per_model[k].value("sampled", false)) continue;
          std::size_t best = 0;
          for (std::size_t r = 1; r < ref_clouds.size(); ++r) {
            if (table[g * ref_clouds.size() + r] < table[g * ref_clouds.size() + best]) best = r;
          }
          char buf[256];
          std::snprintf(buf, sizeof buf, "%s,%.17g,%s\n", gen_models[k].name.c_str(), table[g * ref_clouds.size() + best], ref_models[best].name.c_str());
          csv += buf;
          ++g;
        }
      } else {
        report["cov"] = 0.0;
        report["mmd"] = nullptr;
        report["jsd"] = nullptr;
      }
      double ce = 0, cc = 0;
      int curves = 0;
      for (const auto& lm : ref_models) {
        const CurveError e = curve_error(lm.model);
        ce += e.sampled * e.curves;
        cc += e.chordal * e.curves;
        curves += e.curves;
      }
      report["curve_error_sampled"] = curves ? ce / curves : 0.0;
      report["curve_error_chordal32"] = curves ? cc / curves : 0.0;
      report["models"] = per_model;
      write_file_atomic(report_path, dump_json(report));
      write_file_atomic(report_path + ".csv", csv);
      std::cout << "COV " << report["cov"] << " MMD " << report["mmd"] << " JSD " << report["jsd"] << " Novel " << nuv.novel
                << " Unique " << nuv.unique << " Valid " << nuv.valid << "\n";
      return kExitOk;
    }

    if (obj->parsed()) {
      write_file_atomic(out_path, export_obj(load_model(prefix_path)));
      return kExitOk;
    }

    if (dbg->parsed()) {
      write_file_atomic(out_path, dump_json(export_vhp_debug(load_model(prefix_path))));
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error (" << kind_name(e.kind()) << "): " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
