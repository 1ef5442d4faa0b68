#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cear/annotate.hpp"
#include "cear/candidates.hpp"
#include "cear/document.hpp"
#include "cear/error.hpp"
#include "cear/formats.hpp"
#include "cear/html.hpp"
#include "cear/kg.hpp"
#include "cear/lexicon.hpp"
#include "cear/obo.hpp"
#include "cear/parallel.hpp"
#include "cear/turtle.hpp"
#include "cear/validate.hpp"

namespace cear {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration: a flat TOML-style key/value file; every key can be
// overridden by a CLI flag. Secrets (bearer token) come from the
// environment only.

struct PipelineConfig {
  fs::path input;     // document JSON dir/file (or raw text) to ingest
  fs::path store;     // document store directory
  fs::path obo;       // ontology flat file
  fs::path external;  // optional standoff dir from an external annotator
  fs::path work = "work";  // intermediate outputs and stage stamps

  fs::path out_ttl = "cear.ttl";
  fs::path out_html;   // optional
  fs::path out_stats;  // stats JSON; defaults next to out_ttl
  bool rdf_star = false;

  size_t role_min_length = 4;  // annotation lexicon threshold
  size_t norm_min_length = 2;  // grouping threshold
  size_t min_ref = 2;          // released-KG default
  std::vector<size_t> stats_values = {1, 2, 5, 10, 20, 50};

  std::string validator = "stub";  // "stub" | "http"
  std::string endpoint;            // or CEAR_LLM_ENDPOINT
  std::string model;
  double temperature = 0.1;
  double top_p = 0.95;
  fs::path system_prompt_file;
  fs::path user_prompt_file;
  size_t max_inflight = 4;

  size_t jobs = 0;  // 0 = hardware concurrency

  fs::path lexicon_file() const { return work / "lexicon.json"; }
  fs::path annotations_dir() const { return work / "annotations"; }
  fs::path pairs_file() const { return work / "pairs.jsonl"; }
  fs::path cache_file() const { return work / "verdicts.jsonl"; }
  fs::path stats_file() const {
    if (!out_stats.empty()) return out_stats;
    fs::path p = out_ttl;
    p += ".stats.json";
    return p;
  }

  PromptTemplate prompt_template() const {
    PromptTemplate tmpl;
    if (!system_prompt_file.empty())
      tmpl.system = read_file(system_prompt_file);
    if (!user_prompt_file.empty()) tmpl.user = read_file(user_prompt_file);
    tmpl.check();
    return tmpl;
  }

  SamplingConfig sampling() const {
    SamplingConfig s;
    s.temperature = temperature;
    s.top_p = top_p;
    s.model_name = model;
    s.endpoint = endpoint;
    if (s.endpoint.empty()) {
      const char* env = std::getenv("CEAR_LLM_ENDPOINT");
      if (env) s.endpoint = env;
    }
    return s;
  }

  void validate() const {
    if (store.empty())
      throw Error(ErrorKind::BadConfig, "store directory not set");
    if (!input.empty() && !fs::exists(input))
      throw Error(ErrorKind::BadConfig,
                  "input path does not exist: " + input.string());
    if (obo.empty() || !fs::exists(obo))
      throw Error(ErrorKind::BadConfig,
                  "obo file does not exist: " + obo.string());
    if (!external.empty() && !fs::exists(external))
      throw Error(ErrorKind::BadConfig,
                  "external annotation dir does not exist: " +
                      external.string());
    if (validator != "stub" && validator != "http")
      throw Error(ErrorKind::BadConfig,
                  "validator must be \"stub\" or \"http\"");
    if (validator == "http" && sampling().endpoint.empty())
      throw Error(ErrorKind::BadConfig,
                  "http validator needs endpoint (or CEAR_LLM_ENDPOINT)");
    if (role_min_length < 1 || norm_min_length < 1 || min_ref < 1)
      throw Error(ErrorKind::BadConfig, "length/minRef settings must be >= 1");
  }
};

namespace detail {

inline std::string strip_config_comment(const std::string& line) {
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (c == '"') quoted = !quoted;
    if (c == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

inline std::string unquote(std::string value) {
  if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
    std::string out;
    for (size_t i = 1; i + 1 < value.size(); ++i) {
      if (value[i] == '\\' && i + 2 < value.size()) ++i;
      out.push_back(value[i]);
    }
    return out;
  }
  return value;
}

inline std::vector<size_t> parse_size_list(const std::string& text,
                                           const std::string& what) {
  std::vector<size_t> out;
  std::string token;
  std::istringstream ss(text);
  while (std::getline(ss, token, ',')) {
    token = std::string(trim_view(token));
    if (token.empty()) continue;
    try {
      out.push_back(std::stoull(token));
    } catch (...) {
      throw Error(ErrorKind::BadConfig, what + ": bad number \"" + token +
                                            "\"");
    }
  }
  if (out.empty())
    throw Error(ErrorKind::BadConfig, what + ": empty list");
  return out;
}

}  // namespace detail

/// Applies one key/value setting; shared by the config parser and CLI
/// overrides. Unknown keys are BadConfig.
inline void apply_config_entry(PipelineConfig& config, const std::string& key,
                               const std::string& raw_value) {
  const std::string value = detail::unquote(raw_value);
  auto as_size = [&](const std::string& v) -> size_t {
    try {
      return std::stoull(v);
    } catch (...) {
      throw Error(ErrorKind::BadConfig, key + ": bad number \"" + v + "\"");
    }
  };
  auto as_double = [&](const std::string& v) -> double {
    try {
      return std::stod(v);
    } catch (...) {
      throw Error(ErrorKind::BadConfig, key + ": bad number \"" + v + "\"");
    }
  };
  auto as_bool = [&](const std::string& v) -> bool {
    if (v == "true") return true;
    if (v == "false") return false;
    throw Error(ErrorKind::BadConfig, key + ": expected true/false");
  };

  if (key == "input") config.input = value;
  else if (key == "store") config.store = value;
  else if (key == "obo") config.obo = value;
  else if (key == "external") config.external = value;
  else if (key == "work") config.work = value;
  else if (key == "out_ttl") config.out_ttl = value;
  else if (key == "out_html") config.out_html = value;
  else if (key == "out_stats") config.out_stats = value;
  else if (key == "rdf_star") config.rdf_star = as_bool(value);
  else if (key == "role_min_length") config.role_min_length = as_size(value);
  else if (key == "norm_min_length") config.norm_min_length = as_size(value);
  else if (key == "min_ref") config.min_ref = as_size(value);
  else if (key == "stats")
    config.stats_values = detail::parse_size_list(value, key);
  else if (key == "validator") config.validator = value;
  else if (key == "endpoint") config.endpoint = value;
  else if (key == "model") config.model = value;
  else if (key == "temperature") config.temperature = as_double(value);
  else if (key == "top_p") config.top_p = as_double(value);
  else if (key == "system_prompt_file") config.system_prompt_file = value;
  else if (key == "user_prompt_file") config.user_prompt_file = value;
  else if (key == "max_inflight") config.max_inflight = as_size(value);
  else if (key == "jobs") config.jobs = as_size(value);
  else
    throw Error(ErrorKind::BadConfig, "unknown config key \"" + key + "\"");
}

inline PipelineConfig parse_config(const std::string& text) {
  PipelineConfig config;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string stripped = detail::strip_config_comment(line);
    std::string_view s = detail::trim_view(stripped);
    if (s.empty()) continue;
    size_t eq = s.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorKind::BadConfig,
                  "line " + std::to_string(line_no) + ": expected key = value");
    std::string key(detail::trim_view(s.substr(0, eq)));
    std::string value(detail::trim_view(s.substr(eq + 1)));
    apply_config_entry(config, key, value);
  }
  return config;
}

inline PipelineConfig load_config_file(const fs::path& path) {
  return parse_config(read_file(path));
}

// ---------------------------------------------------------------------------
// Stages. Each one is independently runnable from the CLI; run_pipeline
// chains them with content-hash-based up-to-date checks.

struct StageCounts {
  std::vector<std::pair<std::string, size_t>> values;

  void add(const std::string& name, size_t value) {
    values.emplace_back(name, value);
  }
  size_t get(const std::string& name) const {
    for (const auto& [n, v] : values)
      if (n == name) return v;
    return 0;
  }
};

struct IngestFileResult {
  std::string file;
  IngestResult result;
};

/// Ingests a document JSON file, or a raw text file split on form feeds.
inline IngestFileResult ingest_file(const fs::path& path, DocumentStore& store,
                                    const fs::path& store_dir) {
  IngestFileResult out;
  out.file = path.filename().string();
  if (path.extension() == ".json") {
    Document doc = load_document_file(path);
    out.result = store.insert(std::move(doc));
  } else {
    out.result = store.ingest_raw(read_file(path), path.filename().string());
  }
  if (out.result.added())
    save_document(*store.find(out.result.checksum), store_dir);
  return out;
}

inline std::vector<IngestFileResult> stage_ingest(const fs::path& input,
                                                  const fs::path& store_dir) {
  DocumentStore store = load_store(store_dir);
  std::vector<fs::path> files;
  if (fs::is_directory(input)) {
    for (const auto& entry : fs::directory_iterator(input))
      if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(input);
  }
  std::vector<IngestFileResult> results;
  results.reserve(files.size());
  for (const fs::path& f : files)
    results.push_back(ingest_file(f, store, store_dir));
  return results;
}

/// Builds the annotation lexicon (chemicals and roles) from the ontology.
inline Lexicon stage_lexicon(const Ontology& onto, size_t min_length) {
  const auto kinds = classify(onto);
  return build_lexicon(onto, kinds,
                       {TermKind::Chemical, TermKind::Role}, min_length);
}

struct AnnotateResult {
  size_t documents = 0;
  size_t mentions = 0;
};

/// Gazetteer-annotates every document; merges in external standoff files
/// (named <checksum>.json) when a directory is given; writes one merged
/// standoff file per document.
inline AnnotateResult stage_annotate(const DocumentStore& store,
                                     const Lexicon& lexicon,
                                     const fs::path& external_dir,
                                     const fs::path& out_dir, size_t jobs) {
  const std::vector<std::string> checksums = store.checksums();
  std::atomic<size_t> mention_count{0};
  fs::create_directories(out_dir);
  parallel_for(checksums.size(), jobs, [&](size_t i) {
    const Document& doc = *store.find(checksums[i]);
    std::vector<Mention> gazetteer;
    for (const Page& page : doc.pages)
      for (const Sentence& sentence : segment_sentences(page, doc.checksum))
        for (Mention& m : gazetteer_annotate(sentence, lexicon))
          gazetteer.push_back(std::move(m));

    std::vector<Mention> merged;
    fs::path external_file =
        external_dir.empty() ? fs::path()
                             : external_dir / (doc.checksum + ".json");
    if (!external_file.empty() && fs::exists(external_file)) {
      AnnotatedDocument external = load_standoff_file(external_file, store);
      merged = merge_annotations(gazetteer, external.mentions);
    } else {
      merged = gazetteer;
      std::sort(merged.begin(), merged.end());
    }
    AnnotatedDocument ann{doc.checksum, std::move(merged)};
    mention_count += ann.mentions.size();
    write_file(out_dir / (doc.checksum + ".json"),
               annotated_document_to_json(ann).dump(2) + "\n");
  });
  return AnnotateResult{checksums.size(), mention_count.load()};
}

struct CandidatesResult {
  size_t candidate_sentences = 0;
  size_t pairs = 0;
};

inline CandidatesResult stage_candidates(const DocumentStore& store,
                                         const fs::path& ann_dir,
                                         const fs::path& out_file) {
  CandidatesResult result;
  std::string jsonl;
  for (const std::string& checksum : store.checksums()) {
    fs::path ann_file = ann_dir / (checksum + ".json");
    if (!fs::exists(ann_file)) continue;
    AnnotatedDocument ann = load_standoff_file(ann_file, store);
    for (const CandidateSentence& c : extract_candidates(ann, store)) {
      ++result.candidate_sentences;
      for (const CandidatePair& pair : enumerate_pairs(c)) {
        jsonl += pair_to_json(pair).dump();
        jsonl += '\n';
        ++result.pairs;
      }
    }
  }
  write_file(out_file, jsonl);
  return result;
}

struct ValidateResult {
  size_t pairs = 0;
  size_t confirmed = 0;
  size_t rejected = 0;
  size_t ambiguous = 0;
  size_t failed = 0;       // transport failures, retryable next run
  size_t cache_hits = 0;
  size_t validator_calls = 0;
};

/// Validates every pair through the cache. Workers are capped by
/// max_inflight to respect rate limits; record order in the cache file is
/// arrival order, which is fine because KG construction sorts.
inline ValidateResult stage_validate(const std::vector<CandidatePair>& pairs,
                                     VerdictCache& cache, bool use_stub,
                                     ChatClient* client,
                                     const PromptTemplate& tmpl,
                                     const SamplingConfig& sampling,
                                     size_t max_inflight, size_t jobs) {
  ValidateResult result;
  result.pairs = pairs.size();
  std::atomic<size_t> confirmed{0}, rejected{0}, ambiguous{0}, failed{0},
      cache_hits{0}, calls{0};
  const std::string validator_id = use_stub ? "stub" : client->id();
  const std::string template_hash = use_stub ? "" : tmpl.hash();

  size_t workers = std::min(effective_jobs(jobs), std::max<size_t>(
                                                      max_inflight, 1));
  parallel_for(pairs.size(), workers, [&](size_t i) {
    const CandidatePair& pair = pairs[i];
    const std::string key =
        VerdictCache::key_of(pair, validator_id, template_hash);
    const VerdictRecord* record = cache.find(key);
    if (record) {
      ++cache_hits;
    } else {
      ++calls;
      try {
        record = use_stub
                     ? &cache.put(key, stub_validate(pair))
                     : &validate_pair(pair, *client, cache, tmpl, sampling);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::TransportError) throw;
        ++failed;
        return;
      }
    }
    switch (record->verdict) {
      case Verdict::Confirmed: ++confirmed; break;
      case Verdict::Rejected: ++rejected; break;
      case Verdict::Ambiguous: ++ambiguous; break;
    }
  });
  result.confirmed = confirmed;
  result.rejected = rejected;
  result.ambiguous = ambiguous;
  result.failed = failed;
  result.cache_hits = cache_hits;
  result.validator_calls = calls;
  return result;
}

struct BuildResult {
  size_t confirmed_records = 0;
  size_t relations = 0;        // before minRef
  size_t relations_kept = 0;   // after minRef
  KgStats stats_table;
  std::vector<Relation> all_relations;  // canonical order, before minRef
};

/// Normalizes confirmed verdicts against the ontology, applies minRef and
/// writes the Turtle (or RDF-star), optional HTML and the stats outputs.
inline BuildResult stage_build(const std::vector<VerdictRecord>& records,
                               const Ontology& onto, size_t norm_min_length,
                               size_t min_ref,
                               const std::vector<size_t>& stats_values,
                               const fs::path& out_ttl, bool rdf_star,
                               const fs::path& out_html,
                               const fs::path& out_stats) {
  BuildResult result;
  std::vector<VerdictRecord> confirmed;
  for (const VerdictRecord& r : records)
    if (r.verdict == Verdict::Confirmed) confirmed.push_back(r);
  result.confirmed_records = confirmed.size();

  const auto kinds = classify(onto);
  const Lexicon lexicon = build_lexicon(
      onto, kinds, {TermKind::Chemical, TermKind::Role}, norm_min_length);

  result.all_relations = aggregate(std::move(confirmed), lexicon);
  result.relations = result.all_relations.size();

  const KnowledgeGraph kg = apply_min_ref(result.all_relations, min_ref);
  result.relations_kept = kg.relations.size();

  write_file(out_ttl, rdf_star ? emit_rdf_star(kg) : emit_turtle(kg));
  if (!out_html.empty()) write_file(out_html, emit_html(kg));
  result.stats_table = stats(result.all_relations, stats_values);
  if (!out_stats.empty())
    write_file(out_stats, stats_to_json(result.stats_table).dump(2) + "\n");
  return result;
}

// ---------------------------------------------------------------------------
// Whole-pipeline driver with up-to-date detection. A stage is skipped when
// its input signature (content hashes of everything it reads plus its
// parameters) matches the stamp of the previous run and its outputs exist.

struct StageResult {
  std::string name;
  bool skipped = false;
  StageCounts counts;
};

struct PipelineReport {
  std::vector<StageResult> stages;

  const StageResult* stage(const std::string& name) const {
    for (const StageResult& s : stages)
      if (s.name == name) return &s;
    return nullptr;
  }
};

namespace detail {

class SignatureBuilder {
 public:
  void add(std::string_view label, std::string_view value) {
    hash_.update(label);
    hash_.update("\x1f", 1);
    hash_.update(value);
    hash_.update("\x1e", 1);
  }
  void add_number(std::string_view label, size_t value) {
    add(label, std::to_string(value));
  }
  void add_file(const fs::path& path) {
    if (fs::exists(path) && fs::is_regular_file(path))
      add(path.string(), sha256_hex(read_file(path)));
    else
      add(path.string(), "<absent>");
  }
  void add_dir(const fs::path& dir, const std::string& extension) {
    std::vector<fs::path> files;
    if (fs::exists(dir))
      for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() &&
            (extension.empty() || entry.path().extension() == extension))
          files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files) add_file(f);
  }
  std::string finish() { return to_hex(hash_.digest()); }

 private:
  Sha256 hash_;
};

struct Stamp {
  std::string signature;
  std::vector<fs::path> outputs;
  StageCounts counts;
};

inline fs::path stamp_path(const PipelineConfig& config,
                           const std::string& stage) {
  return config.work / ".stamps" / (stage + ".json");
}

inline bool stamp_matches(const PipelineConfig& config,
                          const std::string& stage,
                          const std::string& signature, StageCounts& counts) {
  const fs::path path = stamp_path(config, stage);
  if (!fs::exists(path)) return false;
  nlohmann::ordered_json j =
      nlohmann::ordered_json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) return false;
  if (j.value("signature", std::string()) != signature) return false;
  for (const auto& out : j.value("outputs", std::vector<std::string>()))
    if (!fs::exists(out)) return false;
  counts = StageCounts{};
  if (j.contains("counts"))
    for (const auto& [key, value] : j.at("counts").items())
      counts.add(key, value.get<size_t>());
  return true;
}

inline void write_stamp(const PipelineConfig& config, const std::string& stage,
                        const Stamp& stamp) {
  nlohmann::ordered_json j;
  j["signature"] = stamp.signature;
  std::vector<std::string> outputs;
  for (const fs::path& p : stamp.outputs) outputs.push_back(p.string());
  j["outputs"] = outputs;
  nlohmann::ordered_json counts;
  for (const auto& [name, value] : stamp.counts.values) counts[name] = value;
  j["counts"] = std::move(counts);
  write_file(stamp_path(config, stage), j.dump(2) + "\n");
}

inline std::string store_signature(const DocumentStore& store) {
  SignatureBuilder sig;
  for (const std::string& checksum : store.checksums())
    sig.add("doc", checksum);
  return sig.finish();
}

}  // namespace detail

/// Runs ingest → lexicon → annotate → candidates → validate → build,
/// skipping stages whose inputs are unchanged since the previous run. Throws
/// the first stage failure with the stage name prefixed.
inline PipelineReport run_pipeline(const PipelineConfig& config,
                                   ChatClient* client_override = nullptr) {
  config.validate();
  fs::create_directories(config.work);
  PipelineReport report;

  auto run_stage = [&](const std::string& name, const std::string& signature,
                       const std::vector<fs::path>& outputs,
                       auto&& body) -> const StageCounts& {
    StageResult result;
    result.name = name;
    StageCounts cached;
    if (detail::stamp_matches(config, name, signature, cached)) {
      result.skipped = true;
      result.counts = cached;
    } else {
      try {
        result.counts = body();
      } catch (const Error& e) {
        throw Error(e.kind(), "stage " + name + ": " + e.message());
      } catch (const std::exception& e) {
        throw Error(ErrorKind::IoError, "stage " + name + ": " + e.what());
      }
      detail::write_stamp(config, name,
                          detail::Stamp{signature, outputs, result.counts});
    }
    report.stages.push_back(std::move(result));
    return report.stages.back().counts;
  };

  // ingest
  {
    detail::SignatureBuilder sig;
    sig.add("stage", "ingest");
    if (!config.input.empty()) {
      if (fs::is_directory(config.input))
        sig.add_dir(config.input, "");
      else
        sig.add_file(config.input);
    }
    sig.add("store", config.store.string());
    run_stage("ingest", sig.finish(), {config.store}, [&] {
      StageCounts counts;
      size_t added = 0, duplicates = 0;
      if (!config.input.empty()) {
        for (const IngestFileResult& r :
             stage_ingest(config.input, config.store))
          (r.result.added() ? added : duplicates)++;
      }
      fs::create_directories(config.store);
      counts.add("added", added);
      counts.add("duplicates", duplicates);
      counts.add("documents", load_store(config.store).size());
      return counts;
    });
  }

  const DocumentStore store = load_store(config.store);
  const std::string store_sig = detail::store_signature(store);

  // lexicon
  {
    detail::SignatureBuilder sig;
    sig.add("stage", "lexicon");
    sig.add_file(config.obo);
    sig.add_number("min_length", config.role_min_length);
    run_stage("lexicon", sig.finish(), {config.lexicon_file()}, [&] {
      std::ifstream in(config.obo);
      Ontology onto = parse_obo(in);
      Lexicon lexicon = stage_lexicon(onto, config.role_min_length);
      write_file(config.lexicon_file(),
                 lexicon_to_json(lexicon).dump(2) + "\n");
      StageCounts counts;
      counts.add("terms", onto.terms.size());
      counts.add("entries", lexicon.entries.size());
      counts.add("diagnostics", lexicon.diagnostics.size());
      return counts;
    });
  }

  // annotate
  {
    detail::SignatureBuilder sig;
    sig.add("stage", "annotate");
    sig.add("store", store_sig);
    sig.add_file(config.lexicon_file());
    if (!config.external.empty()) sig.add_dir(config.external, ".json");
    run_stage("annotate", sig.finish(), {config.annotations_dir()}, [&] {
      Lexicon lexicon = load_lexicon_file(config.lexicon_file());
      AnnotateResult r = stage_annotate(store, lexicon, config.external,
                                        config.annotations_dir(), config.jobs);
      StageCounts counts;
      counts.add("documents", r.documents);
      counts.add("mentions", r.mentions);
      return counts;
    });
  }

  // candidates
  {
    detail::SignatureBuilder sig;
    sig.add("stage", "candidates");
    sig.add("store", store_sig);
    sig.add_dir(config.annotations_dir(), ".json");
    run_stage("candidates", sig.finish(), {config.pairs_file()}, [&] {
      CandidatesResult r =
          stage_candidates(store, config.annotations_dir(),
                           config.pairs_file());
      StageCounts counts;
      counts.add("candidate_sentences", r.candidate_sentences);
      counts.add("pairs", r.pairs);
      return counts;
    });
  }

  // validate
  {
    const PromptTemplate tmpl = config.prompt_template();
    const SamplingConfig sampling = config.sampling();
    const bool use_stub = config.validator == "stub" && !client_override;
    detail::SignatureBuilder sig;
    sig.add("stage", "validate");
    sig.add_file(config.pairs_file());
    sig.add("validator",
            client_override ? client_override->id()
                            : (use_stub ? "stub" : sampling.model_name));
    sig.add("template", tmpl.hash());
    if (!use_stub && !client_override)
      throw Error(ErrorKind::BadConfig,
                  "http validator requires a chat client (the cear tool "
                  "constructs one from endpoint/model)");
    run_stage("validate", sig.finish(), {config.cache_file()}, [&] {
      std::vector<CandidatePair> pairs = load_pairs_file(config.pairs_file());
      VerdictCache cache(config.cache_file());
      ValidateResult r =
          stage_validate(pairs, cache, use_stub, client_override, tmpl,
                         sampling, config.max_inflight, config.jobs);
      if (r.failed > 0)
        throw Error(ErrorKind::TransportError,
                    std::to_string(r.failed) +
                        " pairs failed transport; rerun to retry");
      StageCounts counts;
      counts.add("pairs", r.pairs);
      counts.add("confirmed", r.confirmed);
      counts.add("rejected", r.rejected);
      counts.add("ambiguous", r.ambiguous);
      counts.add("cache_hits", r.cache_hits);
      counts.add("validator_calls", r.validator_calls);
      return counts;
    });
  }

  // build
  {
    detail::SignatureBuilder sig;
    sig.add("stage", "build");
    sig.add_file(config.cache_file());
    sig.add_file(config.obo);
    sig.add_number("norm_min_length", config.norm_min_length);
    sig.add_number("min_ref", config.min_ref);
    sig.add("rdf_star", config.rdf_star ? "true" : "false");
    for (size_t v : config.stats_values) sig.add_number("stats", v);
    sig.add("out_html", config.out_html.string());
    std::vector<fs::path> outputs = {config.out_ttl, config.stats_file()};
    if (!config.out_html.empty()) outputs.push_back(config.out_html);
    run_stage("build", sig.finish(), outputs, [&] {
      VerdictCache cache(config.cache_file());
      std::ifstream in(config.obo);
      Ontology onto = parse_obo(in);
      BuildResult r = stage_build(cache.all(), onto, config.norm_min_length,
                                  config.min_ref, config.stats_values,
                                  config.out_ttl, config.rdf_star,
                                  config.out_html, config.stats_file());
      StageCounts counts;
      counts.add("confirmed_records", r.confirmed_records);
      counts.add("relations", r.relations);
      counts.add("relations_kept", r.relations_kept);
      return counts;
    });
  }

  return report;
}

/// Human-readable per-stage summary.
inline std::string render_report(const PipelineReport& report) {
  std::ostringstream out;
  for (const StageResult& stage : report.stages) {
    out << "stage " << stage.name << ":";
    if (stage.skipped) {
      out << " skipped (up-to-date)";
      for (const auto& [name, value] : stage.counts.values)
        out << "  " << name << "=" << value;
    } else {
      for (const auto& [name, value] : stage.counts.values)
        out << "  " << name << "=" << value;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace cear
