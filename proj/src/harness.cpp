#include <omp.h>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <unordered_map>

#include "CLI11.hpp"
#include "tae/cli.hpp"
#include "tae/error.hpp"
#include "tae/util.hpp"

namespace tae::cli {
namespace {

using ojson = nlohmann::ordered_json;

std::string fmt_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::string variant_label(RepresentationMode mode, bool style, double temperature) {
  std::string s = std::string(to_string(mode)) + (style ? "+style" : "-style");
  if (temperature != 0.0) s += "@t=" + fmt_double(temperature);
  return s;
}

void require(const std::string& value, const char* field, const std::string& command) {
  if (value.empty()) throw ValidationError(command + ": --" + std::string(field) + " is required");
}

template <class T, class Parse>
std::vector<T> list_of(const nlohmann::json& v, Parse&& parse) {
  std::vector<T> out;
  if (v.is_array()) {
    for (const auto& x : v) out.push_back(parse(x));
  } else {
    out.push_back(parse(v));
  }
  return out;
}

std::string as_string(const nlohmann::json& v) {
  if (!v.is_string()) throw ValidationError("expected a string, got " + v.dump());
  return v.get<std::string>();
}

std::shared_ptr<EmbeddingProvider> make_embeddings(const RunConfig& cfg) {
  if (std::none_of(cfg.metrics.begin(), cfg.metrics.end(), needs_embeddings)) return nullptr;
  std::shared_ptr<EmbeddingProvider> inner;
  if (cfg.embedding_endpoint == "hashing") {
    inner = std::make_shared<HashingEmbeddingProvider>();
  } else {
    EmbeddingProviderConfig ec;
    ec.endpoint = cfg.embedding_endpoint;
    ec.model = cfg.model;
    ec.max_concurrent_requests = std::max<std::size_t>(1, cfg.jobs);
    inner = std::make_shared<HttpEmbeddingProvider>(ec);
  }
  std::optional<std::filesystem::path> cache;
  if (!cfg.embedding_cache.empty()) cache = cfg.embedding_cache;
  return std::make_shared<CachedEmbeddingProvider>(inner, cache);
}

ReportMetadata start_meta(const RunConfig& cfg) {
  ReportMetadata m;
  m.command = cfg.command;
  m.config_hash = cfg.hash();
  m.started_at = utc_timestamp();
  m.seed = cfg.seed;
  return m;
}

std::vector<GeneratedRecord> extracted(std::vector<GeneratedRecord> records, std::vector<std::string>* warnings) {
  for (auto& r : records) {
    if (r.panels) continue;
    auto ex = generated_panels(r);
    if (warnings)
      for (const auto& w : ex.warnings) warnings->push_back(r.id + ": " + w);
    std::vector<std::string> texts;
    for (const auto& p : ex.sequence.panels) texts.push_back(p.text);
    r.panels = std::move(texts);
  }
  return records;
}

// Reference/generated sequences matched by id, in corpus order.
std::vector<DocumentPair> pair_up(const std::vector<CorpusRecord>& corpus, const std::vector<GeneratedRecord>& gen,
                                  const std::string& gen_source) {
  std::unordered_map<std::string, const GeneratedRecord*> by_id;
  for (const auto& g : gen) by_id[g.id] = &g;
  std::vector<DocumentPair> pairs;
  pairs.reserve(corpus.size());
  for (const auto& c : corpus) {
    if (c.reference_panels.empty()) throw EmptyReference("corpus record '" + c.id + "' has no reference_panels");
    auto it = by_id.find(c.id);
    if (it == by_id.end()) throw ValidationError(gen_source + ": no generated record for id '" + c.id + "'");
    DocumentPair p;
    p.reference = make_sequence(c.reference_panels, Role::Reference, c.template_kind);
    p.generated = generated_panels(*it->second).sequence;
    pairs.push_back(std::move(p));
  }
  if (gen.size() > corpus.size()) {
    std::unordered_map<std::string, bool> known;
    for (const auto& c : corpus) known[c.id] = true;
    for (const auto& g : gen)
      if (!known.count(g.id)) throw ValidationError(gen_source + ": generated id '" + g.id + "' is not in the corpus");
  }
  return pairs;
}

void score_into(Report& report, const std::vector<CorpusRecord>& corpus, const std::vector<DocumentPair>& pairs,
                const RunConfig& cfg, const std::shared_ptr<EmbeddingProvider>& emb, const std::string& variant) {
  for (auto id : cfg.metrics) {
    const auto metric = make_metric(id, emb);
    const auto cs = corpus_score(pairs, *metric);
    for (std::size_t i = 0; i < corpus.size(); ++i)
      report.rows.push_back(ReportRow{corpus[i].id, std::string(to_string(id)), variant, cs.documents[i]});
  }
}

void emit(const std::string& text, const RunConfig& cfg, std::ostream& out) {
  if (cfg.out.empty()) out << text;
  else util::write_file_atomic(cfg.out, text);
}

std::string join_panels(const PanelSequence& s) {
  std::string out;
  for (const auto& p : s.panels) {
    if (p.text.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += p.text;
  }
  return out;
}

const std::vector<std::string>& synth_vocab() {
  static const std::vector<std::string> words = [] {
    std::vector<std::string> w;
    const char* stems[] = {"model", "data", "panel", "slide", "order", "score", "token", "layer", "graph", "text",
                           "input", "query", "table", "vector", "metric", "sample", "prompt", "output", "paper", "view"};
    const char* tails[] = {"", "s", "ing", "ed", "er"};
    for (const char* s : stems)
      for (const char* t : tails) w.push_back(std::string(s) + t);
    return w;
  }();
  return words;
}

std::string render_corpus(const std::vector<CorpusRecord>& recs) {
  std::ostringstream os;
  for (const auto& r : recs) {
    ojson j;
    j["id"] = r.id;
    j["template"] = r.template_kind.to_string();
    if (r.input_text) j["input_text"] = *r.input_text;
    j["reference_panels"] = r.reference_panels;
    os << j.dump() << '\n';
  }
  return os.str();
}

}  // namespace

void RunConfig::validate() const {
  if (metrics.empty()) throw ValidationError("metric: at least one metric is required");
  if (rep_modes.empty()) throw ValidationError("rep_mode: at least one mode is required");
  if (styles.empty()) throw ValidationError("style: at least one setting is required");
  if (temperatures.empty()) throw ValidationError("temperature: at least one value is required");
  for (double t : temperatures)
    if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("temperature: " + fmt_double(t) + " is outside [0, 1]");
  if (jobs < 1) throw ValidationError("jobs: must be >= 1");
  if (max_input_tokens < 1) throw ValidationError("max_input_tokens: must be >= 1");
  if (command == "generate" && (rep_modes.size() != 1 || styles.size() != 1 || temperatures.size() != 1))
    throw ValidationError("generate: rep_mode, style and temperature take a single value");
}

nlohmann::json RunConfig::canonical() const {
  nlohmann::json j;  // std::map-backed: keys come out sorted
  j["command"] = command;
  j["corpus"] = corpus;
  j["generated"] = generated;
  j["input"] = input;
  j["with"] = with_path;
  j["skip"] = skip_path;
  j["annotations"] = annotations;
  j["deltas"] = deltas;
  std::vector<std::string> m;
  for (auto id : metrics) m.emplace_back(to_string(id));
  j["metric"] = m;
  j["template"] = template_kind ? template_kind->to_string() : "";
  j["source_format"] = source_format ? std::string(to_string(*source_format)) : "";
  std::vector<std::string> modes;
  for (auto r : rep_modes) modes.emplace_back(to_string(r));
  j["rep_mode"] = modes;
  j["style"] = styles;
  j["style_description"] = style_description;
  j["temperature"] = temperatures;
  j["endpoint"] = endpoint;
  j["model"] = model;
  j["max_input_tokens"] = max_input_tokens;
  j["embedding_endpoint"] = embedding_endpoint;
  j["format"] = std::string(to_string(format));
  j["jobs"] = jobs;
  j["seed"] = seed;
  j["docs"] = docs;
  return j;
}

std::string RunConfig::hash() const { return util::hash_hex(canonical().dump()); }

GenerationConfig RunConfig::generation(RepresentationMode mode, bool style, double temperature,
                                       const TemplateKind& t) const {
  GenerationConfig g;
  g.model = model;
  g.temperature = temperature;
  g.max_input_tokens = max_input_tokens;
  g.mode = mode;
  g.style = style;
  g.style_description = style_description;
  g.template_kind = t;
  g.validate();
  return g;
}

void apply_config(RunConfig& cfg, const nlohmann::json& j, const std::string& source) {
  if (!j.is_object()) throw ValidationError(source + ": config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& key = it.key();
    const auto& v = *it;
    try {
      if (key == "corpus") cfg.corpus = as_string(v);
      else if (key == "generated") cfg.generated = as_string(v);
      else if (key == "input") cfg.input = as_string(v);
      else if (key == "with") cfg.with_path = as_string(v);
      else if (key == "skip") cfg.skip_path = as_string(v);
      else if (key == "annotations") cfg.annotations = as_string(v);
      else if (key == "deltas") cfg.deltas = as_string(v);
      else if (key == "dump_dir") cfg.dump_dir = as_string(v);
      else if (key == "trace") cfg.trace = as_string(v);
      else if (key == "metric") cfg.metrics = list_of<MetricId>(v, [](const auto& x) { return parse_metric(as_string(x)); });
      else if (key == "template") cfg.template_kind = TemplateKind::parse(as_string(v));
      else if (key == "source_format") cfg.source_format = parse_source_format(as_string(v));
      else if (key == "rep_mode")
        cfg.rep_modes = list_of<RepresentationMode>(v, [](const auto& x) { return parse_rep_mode(as_string(x)); });
      else if (key == "style")
        cfg.styles = list_of<bool>(v, [](const auto& x) {
          if (!x.is_boolean()) throw ValidationError("expected true or false, got " + x.dump());
          return x.template get<bool>();
        });
      else if (key == "style_description") cfg.style_description = as_string(v);
      else if (key == "temperature")
        cfg.temperatures = list_of<double>(v, [](const auto& x) {
          if (!x.is_number()) throw ValidationError("expected a number, got " + x.dump());
          return x.template get<double>();
        });
      else if (key == "endpoint") cfg.endpoint = as_string(v);
      else if (key == "model") cfg.model = as_string(v);
      else if (key == "max_input_tokens") {
        if (!v.is_number_unsigned()) throw ValidationError("expected a positive integer, got " + v.dump());
        cfg.max_input_tokens = v.get<std::size_t>();
      } else if (key == "embedding_endpoint") cfg.embedding_endpoint = as_string(v);
      else if (key == "embedding_cache") cfg.embedding_cache = as_string(v);
      else if (key == "out") cfg.out = as_string(v);
      else if (key == "format") cfg.format = parse_report_format(as_string(v));
      else if (key == "jobs" || key == "seed" || key == "docs") {
        if (!v.is_number_unsigned()) throw ValidationError("expected a non-negative integer, got " + v.dump());
        if (key == "jobs") cfg.jobs = v.get<std::size_t>();
        else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
        else cfg.docs = v.get<std::size_t>();
      } else {
        throw ValidationError("unknown field");
      }
    } catch (const ValidationError& e) {
      throw ValidationError(source + ": field '" + key + "': " + e.what());
    }
  }
}

SyntheticCorpus make_synthetic_corpus(std::uint64_t seed, std::size_t docs) {
  // Raw engine output reduced by modulo keeps the corpus identical across
  // standard libraries.
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  const auto& vocab = synth_vocab();
  SyntheticCorpus sc;
  for (std::size_t d = 0; d < docs; ++d) {
    CorpusRecord ref;
    ref.id = "doc-" + std::to_string(d + 1);
    ref.template_kind = TemplateKind::slides();
    const std::size_t n_panels = 3 + pick(5);
    std::string input;
    for (std::size_t p = 0; p < n_panels; ++p) {
      const std::size_t n_words = 8 + pick(13);
      std::string text;
      for (std::size_t w = 0; w < n_words; ++w) text += (w ? " " : "") + vocab[pick(vocab.size())];
      ref.reference_panels.push_back(text);
      input += text + ".\n\n";
    }
    ref.input_text = input;

    std::vector<std::string> frames;
    for (const auto& panel : ref.reference_panels) {
      if (pick(6) == 0) continue;
      std::istringstream words(panel);
      std::string w, edited;
      while (words >> w) {
        if (pick(5) == 0) w = vocab[pick(vocab.size())];
        edited += (edited.empty() ? "" : " ") + w;
      }
      frames.push_back(edited);
    }
    if (frames.size() >= 2 && pick(3) == 0) std::swap(frames[0], frames[1]);
    if (pick(3) == 0) frames.push_back(vocab[pick(vocab.size())] + " " + vocab[pick(vocab.size())]);

    std::ostringstream tex;
    tex << "\\documentclass{beamer}\n\\begin{document}\n";
    for (std::size_t f = 0; f < frames.size(); ++f)
      tex << "\\begin{frame}\n\\begin{itemize}\n\\item " << frames[f] << "\n\\end{itemize}\n\\end{frame}\n";
    tex << "\\end{document}\n";
    sc.generated.push_back(GeneratedRecord{ref.id, ref.template_kind, SourceFormat::LatexBeamer, tex.str(),
                                           std::nullopt, "synthetic"});
    sc.reference.push_back(std::move(ref));
  }
  return sc;
}

ExtractOutcome cmd_extract(const RunConfig& cfg) {
  ExtractOutcome outcome;
  if (!cfg.input.empty()) {
    if (!cfg.template_kind) throw ValidationError("extract: --template is required with --input");
    const auto fmt = cfg.source_format.value_or(default_format(*cfg.template_kind));
    GeneratedRecord rec{std::filesystem::path(cfg.input).stem().string(), *cfg.template_kind, fmt,
                        util::read_file(cfg.input), std::nullopt, ""};
    outcome.records.push_back(std::move(rec));
  } else {
    require(cfg.generated, "generated", "extract");
    outcome.records = load_generated(cfg.generated);
    for (auto& r : outcome.records) {
      if (cfg.template_kind) r.template_kind = *cfg.template_kind;
      if (cfg.source_format) r.format = *cfg.source_format;
    }
  }
  outcome.records = extracted(std::move(outcome.records), &outcome.warnings);
  if (!cfg.dump_dir.empty()) {
    std::filesystem::create_directories(cfg.dump_dir);
    for (const auto& r : outcome.records) {
      const auto seq = make_sequence(*r.panels, Role::Generated, r.template_kind);
      util::write_file_atomic(std::filesystem::path(cfg.dump_dir) / (r.id + ".txt"), panel_dump(seq) + "\n");
    }
  }
  if (!cfg.out.empty()) {
    if (!cfg.input.empty()) {
      const auto& r = outcome.records.front();
      save_panels(make_sequence(*r.panels, Role::Generated, r.template_kind), cfg.out);
    } else {
      save_generated(outcome.records, cfg.out);
    }
  }
  return outcome;
}

Report cmd_score(const RunConfig& cfg) {
  require(cfg.corpus, "corpus", "score");
  require(cfg.generated, "generated", "score");
  Report report;
  report.meta = start_meta(cfg);
  const auto corpus = load_corpus(cfg.corpus);
  if (corpus.empty()) throw EmptyCorpus(cfg.corpus + ": corpus has no records");
  const auto gen = load_generated(cfg.generated);
  const auto pairs = pair_up(corpus, gen, cfg.generated);
  omp_set_num_threads(static_cast<int>(cfg.jobs));
  score_into(report, corpus, pairs, cfg, make_embeddings(cfg), "");
  report.compute_aggregates();
  report.meta.finished_at = utc_timestamp();
  return report;
}

GenerateOutcome cmd_generate(const RunConfig& cfg) {
  require(cfg.corpus, "corpus", "generate");
  require(cfg.endpoint, "endpoint", "generate");
  const auto corpus = load_corpus(cfg.corpus);
  auto client = make_completion_client(cfg.endpoint);
  const auto mode = cfg.rep_modes.front();
  const bool style = cfg.styles.front();
  const double temperature = cfg.temperatures.front();

  // Group documents by effective template so each batch shares one config.
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!corpus[i].input_text || corpus[i].input_text->empty())
      throw ValidationError(cfg.corpus + ": record '" + corpus[i].id + "' has no input_text");
    groups[(cfg.template_kind ? *cfg.template_kind : corpus[i].template_kind).to_string()].push_back(i);
  }
  GenerateOutcome outcome;
  outcome.records.resize(corpus.size());
  outcome.traces.resize(corpus.size());
  for (const auto& [name, idx] : groups) {
    const auto tmpl = TemplateKind::parse(name);
    const auto gcfg = cfg.generation(mode, style, temperature, tmpl);
    std::vector<std::string> docs;
    for (auto i : idx) docs.push_back(*corpus[i].input_text);
    auto results = generate_batch(docs, gcfg, *client, cfg.jobs);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const auto i = idx[k];
      outcome.records[i] = GeneratedRecord{corpus[i].id, tmpl, default_format(tmpl), std::move(results[k].latex),
                                           std::nullopt, variant_label(mode, style, temperature)};
      outcome.traces[i] = std::move(results[k].trace);
    }
  }
  if (!cfg.out.empty()) save_generated(outcome.records, cfg.out);
  if (!cfg.trace.empty()) {
    std::ostringstream os;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      ojson j;
      j["id"] = corpus[i].id;
      auto& steps = j["steps"] = ojson::array();
      for (const auto& s : outcome.traces[i]) {
        ojson o;
        o["step"] = s.step;
        o["prompt_hash"] = util::hash_hex(s.prompt);
        o["prompt_tokens"] = s.prompt_tokens;
        o["output_tokens"] = s.output_tokens;
        o["attempts"] = s.attempts;
        o["duration_ms"] = s.duration_ms;
        steps.push_back(std::move(o));
      }
      os << j.dump() << '\n';
    }
    util::write_file_atomic(cfg.trace, os.str());
  }
  return outcome;
}

Report cmd_bench(const RunConfig& cfg) {
  require(cfg.corpus, "corpus", "bench");
  require(cfg.endpoint, "endpoint", "bench");
  Report report;
  report.meta = start_meta(cfg);
  const auto corpus = load_corpus(cfg.corpus);
  if (corpus.empty()) throw EmptyCorpus(cfg.corpus + ": corpus has no records");
  const auto emb = make_embeddings(cfg);
  omp_set_num_threads(static_cast<int>(cfg.jobs));
  for (auto mode : cfg.rep_modes) {
    for (bool style : cfg.styles) {
      for (double t : cfg.temperatures) {
        RunConfig one = cfg;
        one.command = "generate";
        one.rep_modes = {mode};
        one.styles = {style};
        one.temperatures = {t};
        one.out.clear();
        one.trace.clear();
        const auto gen = cmd_generate(one);
        const auto pairs = pair_up(corpus, gen.records, "bench");
        score_into(report, corpus, pairs, cfg, emb, variant_label(mode, style, t));
      }
    }
  }
  report.meta.extra["endpoint"] = cfg.endpoint;
  report.compute_aggregates();
  report.meta.finished_at = utc_timestamp();
  return report;
}

std::vector<CorrelationRow> cmd_correlate(const RunConfig& cfg) {
  require(cfg.annotations, "annotations", "correlate");
  const auto prefs = load_annotations(cfg.annotations);
  std::vector<CorrelationRow> rows;
  if (!cfg.deltas.empty()) {
    std::map<std::string, std::vector<MetricDelta>> by_metric;
    for (auto& d : load_deltas(cfg.deltas)) by_metric[d.metric].push_back(d);
    for (const auto& [metric, ds] : by_metric) rows.push_back({metric, "given", affinity(ds, prefs)});
    return rows;
  }
  require(cfg.corpus, "corpus", "correlate");
  require(cfg.with_path, "with", "correlate");
  require(cfg.skip_path, "skip", "correlate");
  const auto corpus = load_corpus(cfg.corpus);
  const auto with_pairs = pair_up(corpus, load_generated(cfg.with_path), cfg.with_path);
  const auto skip_pairs = pair_up(corpus, load_generated(cfg.skip_path), cfg.skip_path);
  const auto emb = make_embeddings(cfg);
  for (auto id : cfg.metrics) {
    const auto metric = make_metric(id, emb);
    const auto with_tae = corpus_score(with_pairs, *metric);
    const auto skip_tae = corpus_score(skip_pairs, *metric);
    std::vector<MetricDelta> plain, tae;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      auto whole = [&](const DocumentPair& p) {
        const auto ref = make_sequence({join_panels(p.reference)}, Role::Reference, p.reference.template_kind);
        const auto gen = make_sequence({join_panels(p.generated)}, Role::Generated, p.generated.template_kind);
        return metric->score(gen[0], ref[0]);
      };
      plain.push_back({corpus[i].id, std::string(to_string(id)), whole(with_pairs[i]) - whole(skip_pairs[i])});
      tae.push_back({corpus[i].id, std::string(to_string(id)), with_tae.documents[i].f1 - skip_tae.documents[i].f1});
    }
    rows.push_back({std::string(to_string(id)), "plain", affinity(plain, prefs)});
    rows.push_back({std::string(to_string(id)), "tae", affinity(tae, prefs)});
  }
  return rows;
}

AgreementSummary cmd_agreement(const RunConfig& cfg) {
  require(cfg.annotations, "annotations", "agreement");
  const auto prefs = load_annotations(cfg.annotations);
  AgreementSummary s;
  s.alpha = krippendorff_alpha(prefs);
  s.rates = preference_rate(prefs);
  s.annotations = prefs.size();
  return s;
}

SyntheticCorpus cmd_synth(const RunConfig& cfg) {
  require(cfg.out, "out", "synth");
  require(cfg.generated, "generated", "synth");
  auto sc = make_synthetic_corpus(cfg.seed, cfg.docs);
  util::write_file_atomic(cfg.out, render_corpus(sc.reference));
  save_generated(sc.generated, cfg.generated);
  return sc;
}

namespace {

struct Flags {
  std::string config, corpus, generated, input, with_path, skip_path, annotations, deltas, dump_dir, trace;
  std::vector<std::string> metric, rep_mode;
  std::vector<double> temperature;
  std::string template_kind, source_format, style_description, endpoint, model, embedding_endpoint,
      embedding_cache, out, format;
  bool style = false, no_style = false;
  std::size_t max_input_tokens = 0, jobs = 0, docs = 0;
  std::uint64_t seed = 0;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON config file; flags override its fields");
  sub->add_option("--out", f.out, "Output path (stdout when omitted)");
  sub->add_option("--jobs", f.jobs, "Parallelism bound")->check(CLI::PositiveNumber);
  sub->add_option("--seed", f.seed, "Seed recorded in run metadata");
}

void add_scoring(CLI::App* sub, Flags& f) {
  sub->add_option("--metric", f.metric, "rouge_l|bleu|meteor|embedding_cosine|token_greedy_embedding")
      ->delimiter(',');
  sub->add_option("--format", f.format, "Report format: json|csv");
  sub->add_option("--embedding-endpoint", f.embedding_endpoint, "hashing (offline) or an http(s) URL");
  sub->add_option("--embedding-cache", f.embedding_cache, "JSON-lines embedding cache file");
}

void add_generation(CLI::App* sub, Flags& f) {
  sub->add_option("--template", f.template_kind, "slides|poster|blog|custom:<name>:<rule>");
  sub->add_option("--rep-mode", f.rep_mode, "none|own|text|json")->delimiter(',');
  sub->add_flag("--style", f.style, "Include the style parameter");
  sub->add_flag("--no-style", f.no_style, "Leave the style parameter out");
  sub->add_option("--style-description", f.style_description, "Style text for custom templates");
  sub->add_option("--temperature", f.temperature, "Sampling temperature in [0, 1]")->delimiter(',');
  sub->add_option("--endpoint", f.endpoint, "stub:<dir>, synthetic, or an http(s) completion URL");
  sub->add_option("--model", f.model, "Model name sent to the endpoint");
  sub->add_option("--max-input-tokens", f.max_input_tokens, "Input window budget")->check(CLI::PositiveNumber);
}

bool given(const CLI::App* sub, const std::string& name) {
  try {
    return sub->count(name) > 0;
  } catch (const CLI::OptionNotFound&) {
    return false;
  }
}

RunConfig build_config(const CLI::App* sub, const Flags& f) {
  RunConfig cfg;
  cfg.command = sub->get_name();
  if (!f.config.empty()) {
    auto j = nlohmann::json::parse(util::read_file(f.config), nullptr, false);
    if (j.is_discarded()) throw ValidationError(f.config + ": config is not valid JSON");
    apply_config(cfg, j, f.config);
  }
  auto flag_error = [](const char* name, const ValidationError& e) {
    return ValidationError(std::string("--") + name + ": " + e.what());
  };
  if (given(sub, "--corpus")) cfg.corpus = f.corpus;
  if (given(sub, "--generated")) cfg.generated = f.generated;
  if (given(sub, "--input")) cfg.input = f.input;
  if (given(sub, "--with")) cfg.with_path = f.with_path;
  if (given(sub, "--skip")) cfg.skip_path = f.skip_path;
  if (given(sub, "--annotations")) cfg.annotations = f.annotations;
  if (given(sub, "--deltas")) cfg.deltas = f.deltas;
  if (given(sub, "--dump-dir")) cfg.dump_dir = f.dump_dir;
  if (given(sub, "--trace")) cfg.trace = f.trace;
  if (given(sub, "--out")) cfg.out = f.out;
  if (given(sub, "--jobs")) cfg.jobs = f.jobs;
  if (given(sub, "--seed")) cfg.seed = f.seed;
  if (given(sub, "--docs")) cfg.docs = f.docs;
  if (given(sub, "--endpoint")) cfg.endpoint = f.endpoint;
  if (given(sub, "--model")) cfg.model = f.model;
  if (given(sub, "--max-input-tokens")) cfg.max_input_tokens = f.max_input_tokens;
  if (given(sub, "--style-description")) cfg.style_description = f.style_description;
  if (given(sub, "--embedding-endpoint")) cfg.embedding_endpoint = f.embedding_endpoint;
  if (given(sub, "--embedding-cache")) cfg.embedding_cache = f.embedding_cache;
  if (given(sub, "--temperature")) cfg.temperatures = f.temperature;
  try {
    if (given(sub, "--metric")) {
      cfg.metrics.clear();
      for (const auto& m : f.metric) cfg.metrics.push_back(parse_metric(m));
    }
  } catch (const ValidationError& e) {
    throw flag_error("metric", e);
  }
  try {
    if (given(sub, "--rep-mode")) {
      cfg.rep_modes.clear();
      for (const auto& m : f.rep_mode) cfg.rep_modes.push_back(parse_rep_mode(m));
    }
  } catch (const ValidationError& e) {
    throw flag_error("rep-mode", e);
  }
  try {
    if (given(sub, "--template")) cfg.template_kind = TemplateKind::parse(f.template_kind);
  } catch (const ValidationError& e) {
    throw flag_error("template", e);
  }
  try {
    if (given(sub, "--source-format")) cfg.source_format = parse_source_format(f.source_format);
  } catch (const ValidationError& e) {
    throw flag_error("source-format", e);
  }
  try {
    if (given(sub, "--format")) cfg.format = parse_report_format(f.format);
  } catch (const ValidationError& e) {
    throw flag_error("format", e);
  }
  const bool style = given(sub, "--style") && f.style;
  const bool no_style = given(sub, "--no-style") && f.no_style;
  if (style && no_style) cfg.styles = {true, false};
  else if (style) cfg.styles = {true};
  else if (no_style) cfg.styles = {false};
  cfg.validate();
  return cfg;
}

void print_correlation(const std::vector<CorrelationRow>& rows, const RunConfig& cfg, std::ostream& out) {
  std::ostringstream os;
  if (cfg.format == ReportFormat::Csv) {
    os << "metric,scoring,r,n,t,p_value,p_note\n";
    for (const auto& r : rows)
      os << r.metric << ',' << r.scoring << ',' << r.affinity.r << ',' << r.affinity.n << ',' << r.affinity.t << ','
         << r.affinity.p_value << ",\"" << r.affinity.p_note << "\"\n";
  } else {
    ojson j = ojson::array();
    for (const auto& r : rows) {
      ojson o;
      o["metric"] = r.metric;
      o["scoring"] = r.scoring;
      o["r"] = r.affinity.r;
      o["n"] = r.affinity.n;
      o["t"] = std::isfinite(r.affinity.t) ? ojson(r.affinity.t) : ojson(nullptr);
      o["p_value"] = r.affinity.p_value;
      o["p_note"] = r.affinity.p_note;
      j.push_back(std::move(o));
    }
    os << j.dump(2) << '\n';
  }
  emit(os.str(), cfg, out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Template-adaptable evaluation of generated documents"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  Flags f;

  auto* extract = app.add_subcommand("extract", "Split generated documents into panels");
  add_common(extract, f);
  extract->add_option("--generated", f.generated, "Generated corpus (JSON lines)");
  extract->add_option("--input", f.input, "A single document");
  extract->add_option("--template", f.template_kind, "slides|poster|blog|custom:<name>:<rule>");
  extract->add_option("--source-format", f.source_format, "latex-beamer|latex|plain|markdown");
  extract->add_option("--dump-dir", f.dump_dir, "Write one panel dump per document here");

  auto* score = app.add_subcommand("score", "Score generated documents against references");
  add_common(score, f);
  add_scoring(score, f);
  score->add_option("--corpus", f.corpus, "Reference corpus (JSON lines)");
  score->add_option("--generated", f.generated, "Generated corpus (JSON lines)");

  auto* generate = app.add_subcommand("generate", "Run the two-step generation pipeline");
  add_common(generate, f);
  add_generation(generate, f);
  generate->add_option("--corpus", f.corpus, "Corpus whose records carry input_text");
  generate->add_option("--trace", f.trace, "Write per-step trace records here");

  auto* bench = app.add_subcommand("bench", "Sweep modes x styles x temperatures x metrics");
  add_common(bench, f);
  add_generation(bench, f);
  add_scoring(bench, f);
  bench->add_option("--corpus", f.corpus, "Corpus with input_text and reference_panels");

  auto* correlate = app.add_subcommand("correlate", "Affinity of metric deltas with human preferences");
  add_common(correlate, f);
  add_scoring(correlate, f);
  correlate->add_option("--annotations", f.annotations, "Preference annotations (JSON lines)");
  correlate->add_option("--deltas", f.deltas, "Precomputed deltas (CSV or JSON lines)");
  correlate->add_option("--corpus", f.corpus, "Reference corpus");
  correlate->add_option("--with", f.with_path, "Generated corpus with the representation");
  correlate->add_option("--skip", f.skip_path, "Generated corpus without the representation");

  auto* agreement = app.add_subcommand("agreement", "Krippendorff's alpha and preference rates");
  add_common(agreement, f);
  agreement->add_option("--annotations", f.annotations, "Preference annotations (JSON lines)");

  auto* synth = app.add_subcommand("synth", "Write a seeded synthetic corpus pair");
  add_common(synth, f);
  synth->add_option("--generated", f.generated, "Where to write the generated corpus");
  synth->add_option("--docs", f.docs, "Number of documents");

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    const CLI::App* sub = app.get_subcommands().front();
    const auto cfg = build_config(sub, f);
    if (sub == extract) {
      auto o = cmd_extract(cfg);
      for (const auto& w : o.warnings) err << "warning: " << w << '\n';
      if (cfg.out.empty()) out << serialize_generated(o.records);
    } else if (sub == score) {
      emit(render_report(cmd_score(cfg), cfg.format), cfg, out);
    } else if (sub == generate) {
      auto o = cmd_generate(cfg);
      if (cfg.out.empty()) out << serialize_generated(o.records);
    } else if (sub == bench) {
      emit(render_report(cmd_bench(cfg), cfg.format), cfg, out);
    } else if (sub == correlate) {
      print_correlation(cmd_correlate(cfg), cfg, out);
    } else if (sub == agreement) {
      const auto s = cmd_agreement(cfg);
      ojson j;
      j["alpha"] = s.alpha;
      j["majority_rate"] = s.rates.majority_rate;
      j["unanimous_rate"] = s.rates.unanimous_rate;
      j["documents"] = s.rates.documents;
      j["annotations"] = s.annotations;
      emit(j.dump(2) + "\n", cfg, out);
    } else if (sub == synth) {
      const auto sc = cmd_synth(cfg);
      err << "wrote " << sc.reference.size() << " documents\n";
    }
    return 0;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace tae::cli
