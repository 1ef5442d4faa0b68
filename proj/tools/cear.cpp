// cear — chemical entities and roles: ontology-driven extraction of a
// knowledge graph from page-wise paper text.
//
// Subcommands mirror the pipeline stages (ingest, lexicon, annotate,
// candidates, validate, build), plus eval for strict-span scoring, compact
// for cache maintenance and run for the whole chain.

#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cear/formats.hpp"
#include "cear/http_client.hpp"
#include "cear/ner_eval.hpp"
#include "cear/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

cear::Ontology load_ontology(const fs::path& path) {
  std::ifstream in(path);
  if (!in)
    throw cear::Error(cear::ErrorKind::IoError, "cannot read " + path.string());
  return cear::parse_obo(in);
}

/// Standoff loader for scoring: no store at hand, so spans are taken as
/// declared. Returns mentions plus the set of referenced documents.
std::pair<std::vector<cear::Mention>, std::set<std::string>> load_mention_dir(
    const fs::path& dir, cear::Provenance default_provenance) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<cear::Mention> mentions;
  std::set<std::string> docs;
  for (const fs::path& file : files) {
    nlohmann::json j =
        cear::parse_json(cear::read_file(file), file.string());
    const std::string checksum = j.at("doc_checksum").get<std::string>();
    docs.insert(checksum);
    cear::Provenance file_provenance = default_provenance;
    if (j.contains("provenance"))
      file_provenance = cear::provenance_from_string(
          j.at("provenance").get<std::string>(), file.string());
    for (const auto& mj : j.at("mentions")) {
      cear::Mention m;
      m.location.doc_checksum = checksum;
      m.location.page = mj.at("page").get<int>();
      m.location.offset = mj.at("start").get<size_t>();
      m.end = mj.at("end").get<size_t>();
      m.kind = cear::mention_kind_from_string(
          mj.at("kind").get<std::string>(), file.string());
      m.surface = mj.at("surface").get<std::string>();
      m.provenance = mj.contains("provenance")
                         ? cear::provenance_from_string(
                               mj.at("provenance").get<std::string>(),
                               file.string())
                         : file_provenance;
      mentions.push_back(std::move(m));
    }
  }
  return {std::move(mentions), std::move(docs)};
}

void print_metrics_block(const std::string& name, const cear::Metrics& m) {
  std::printf("%-8s  P %6.3f  R %6.3f  F1 %6.3f   (tp %zu  fp %zu  fn %zu)\n",
              name.c_str(), m.precision, m.recall, m.f1, m.tp, m.fp, m.fn);
}

nlohmann::ordered_json metrics_json(const cear::Metrics& m) {
  return {{"tp", m.tp},           {"fp", m.fp},
          {"fn", m.fn},           {"precision", m.precision},
          {"recall", m.recall},   {"f1", m.f1}};
}

int run_eval(const fs::path& gold_dir, const fs::path& pred_dir, size_t top_k,
             const fs::path& json_out) {
  auto [gold, gold_docs] = load_mention_dir(gold_dir, cear::Provenance::Gold);
  auto [pred, pred_docs] =
      load_mention_dir(pred_dir, cear::Provenance::External);
  (void)pred_docs;
  cear::EvalReport report = cear::score_strict(gold, pred, gold_docs);
  cear::ErrorTable errors = cear::error_table(gold, pred, top_k);

  std::printf("strict-span scoring over %zu gold / %zu predicted mentions\n",
              gold.size(), pred.size());
  print_metrics_block("chem", report.chemical);
  print_metrics_block("role", report.role);
  print_metrics_block("overall", report.overall);

  auto print_errors = [&](const char* title,
                          const std::vector<std::pair<std::string, size_t>>&
                              rows) {
    std::printf("\n%s (top %zu)\n", title, top_k);
    if (rows.empty()) std::printf("  none\n");
    for (const auto& [surface, count] : rows)
      std::printf("  %-40s %zu\n", surface.c_str(), count);
  };
  print_errors("most frequent false positives", errors.false_positives);
  print_errors("most frequent false negatives", errors.false_negatives);

  nlohmann::ordered_json j{
      {"chemical", metrics_json(report.chemical)},
      {"role", metrics_json(report.role)},
      {"overall", metrics_json(report.overall)},
      {"false_positives", nlohmann::ordered_json::array()},
      {"false_negatives", nlohmann::ordered_json::array()}};
  for (const auto& [surface, count] : errors.false_positives)
    j["false_positives"].push_back({{"surface", surface}, {"count", count}});
  for (const auto& [surface, count] : errors.false_negatives)
    j["false_negatives"].push_back({{"surface", surface}, {"count", count}});
  if (json_out.empty())
    std::printf("\n%s\n", j.dump(2).c_str());
  else
    cear::write_file(json_out, j.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "cear: build a knowledge graph of chemical entities and roles from "
      "extracted paper text"};
  app.require_subcommand(1);

  // --- ingest ---------------------------------------------------------------
  std::string in_path, store_dir;
  auto* cmd_ingest =
      app.add_subcommand("ingest", "load documents into the store");
  cmd_ingest->add_option("--in", in_path, "document JSON file or directory")
      ->required();
  cmd_ingest->add_option("--store", store_dir, "document store directory")
      ->required();

  // --- lexicon --------------------------------------------------------------
  std::string obo_path, lex_kind = "role", lex_out;
  size_t lex_min_len = 4;
  auto* cmd_lexicon =
      app.add_subcommand("lexicon", "compile a surface-form lexicon");
  cmd_lexicon->add_option("--obo", obo_path, "OBO ontology file")->required();
  cmd_lexicon->add_option("--kind", lex_kind, "role|chemical|both")
      ->check(CLI::IsMember({"role", "chemical", "both"}));
  cmd_lexicon->add_option("--min-len", lex_min_len,
                          "minimum surface length in scalars");
  cmd_lexicon->add_option("--out", lex_out, "lexicon JSON output")->required();

  // --- annotate ---------------------------------------------------------
  std::string ann_store, ann_lexicon, ann_external, ann_out;
  size_t ann_jobs = 0;
  auto* cmd_annotate = app.add_subcommand(
      "annotate", "gazetteer-annotate the store, merging external mentions");
  cmd_annotate->add_option("--store", ann_store, "document store")->required();
  cmd_annotate->add_option("--lexicon", ann_lexicon, "lexicon JSON")
      ->required();
  cmd_annotate->add_option("--external", ann_external,
                           "directory of external standoff files");
  cmd_annotate->add_option("--out", ann_out, "output directory")->required();
  cmd_annotate->add_option("--jobs", ann_jobs, "worker threads (0 = auto)");

  // --- candidates -------------------------------------------------------
  std::string cand_store, cand_ann, cand_out;
  auto* cmd_candidates = app.add_subcommand(
      "candidates", "select sentences with both kinds and enumerate pairs");
  cmd_candidates->add_option("--store", cand_store, "document store")
      ->required();
  cmd_candidates->add_option("--ann", cand_ann, "annotation directory")
      ->required();
  cmd_candidates->add_option("--out", cand_out, "pairs JSONL output")
      ->required();

  // --- validate ---------------------------------------------------------
  std::string val_pairs, val_cache, val_endpoint, val_model, val_system,
      val_user;
  bool val_stub = false;
  double val_temperature = 0.1, val_top_p = 0.95;
  size_t val_jobs = 0, val_inflight = 4;
  auto* cmd_validate =
      app.add_subcommand("validate", "confirm or reject candidate pairs");
  cmd_validate->add_option("--pairs", val_pairs, "pairs JSONL")->required();
  cmd_validate->add_option("--cache", val_cache, "verdict cache JSONL")
      ->required();
  cmd_validate->add_flag("--stub", val_stub, "deterministic offline validator");
  cmd_validate->add_option("--endpoint", val_endpoint,
                           "chat endpoint URL (or CEAR_LLM_ENDPOINT)");
  cmd_validate->add_option("--model", val_model, "model name");
  cmd_validate->add_option("--temperature", val_temperature, "sampling");
  cmd_validate->add_option("--top-p", val_top_p, "sampling");
  cmd_validate->add_option("--system", val_system, "system prompt file");
  cmd_validate->add_option("--user", val_user, "user prompt template file");
  cmd_validate->add_option("--jobs", val_jobs, "worker threads");
  cmd_validate->add_option("--max-inflight", val_inflight,
                           "bound on concurrent requests");

  // --- build --------------------------------------------------------------
  std::string build_cache, build_obo, build_out, build_html, build_stats_arg;
  size_t build_min_ref = 2, build_norm_len = 2;
  bool build_rdf_star = false;
  auto* cmd_build =
      app.add_subcommand("build", "aggregate verdicts and emit the KG");
  cmd_build->add_option("--cache", build_cache, "verdict cache JSONL")
      ->required();
  cmd_build->add_option("--obo", build_obo, "OBO ontology file")->required();
  cmd_build->add_option("--min-ref", build_min_ref,
                        "minimum supporting references");
  cmd_build->add_option("--out", build_out, "Turtle output")->required();
  cmd_build->add_flag("--rdf-star", build_rdf_star,
                      "annotate triples with text locations");
  cmd_build->add_option("--html", build_html, "self-contained HTML graph");
  cmd_build->add_option("--stats", build_stats_arg,
                        "comma-separated minRef values (default "
                        "1,2,5,10,20,50)");
  cmd_build->add_option("--norm-min-len", build_norm_len,
                        "grouping length threshold");
  size_t build_rank = 0;
  cmd_build->add_option("--rank", build_rank,
                        "print the k most and least frequent relations");

  // --- eval ---------------------------------------------------------------
  std::string eval_gold, eval_pred, eval_json;
  size_t eval_top_k = 8;
  auto* cmd_eval =
      app.add_subcommand("eval", "strict-span scoring against gold standoff");
  cmd_eval->add_option("--gold", eval_gold, "gold standoff directory")
      ->required();
  cmd_eval->add_option("--pred", eval_pred, "predicted standoff directory")
      ->required();
  cmd_eval->add_option("--top-k", eval_top_k, "error table depth");
  cmd_eval->add_option("--json", eval_json,
                       "write the JSON report here instead of stdout");

  // --- compact --------------------------------------------------------------
  std::string compact_cache;
  auto* cmd_compact =
      app.add_subcommand("compact", "deduplicate a verdict cache by key");
  cmd_compact->add_option("--cache", compact_cache, "verdict cache JSONL")
      ->required();

  // --- run --------------------------------------------------------------
  std::string run_config;
  std::vector<std::string> run_sets;
  size_t run_jobs = 0;
  bool run_jobs_set = false;
  auto* cmd_run = app.add_subcommand("run", "execute the whole pipeline");
  cmd_run->add_option("--config", run_config, "TOML-style key/value file");
  cmd_run->add_option("--set", run_sets,
                      "override a config key, e.g. --set min_ref=5");
  cmd_run->add_option("--jobs", run_jobs, "worker threads (0 = auto)")
      ->each([&](const std::string&) { run_jobs_set = true; });

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_ingest->parsed()) {
      auto results = cear::stage_ingest(in_path, store_dir);
      size_t added = 0;
      for (const auto& r : results) {
        std::printf("%-40s %s %s\n", r.file.c_str(),
                    r.result.added() ? "Added" : "Duplicate",
                    r.result.checksum.c_str());
        if (r.result.added()) ++added;
      }
      std::printf("%zu added, %zu duplicates, %zu files\n", added,
                  results.size() - added, results.size());
    } else if (cmd_lexicon->parsed()) {
      cear::Ontology onto = load_ontology(obo_path);
      auto kinds = cear::classify(onto);
      std::set<cear::TermKind> include;
      if (lex_kind == "role" || lex_kind == "both")
        include.insert(cear::TermKind::Role);
      if (lex_kind == "chemical" || lex_kind == "both")
        include.insert(cear::TermKind::Chemical);
      cear::Lexicon lex =
          cear::build_lexicon(onto, kinds, include, lex_min_len);
      cear::write_file(lex_out, cear::lexicon_to_json(lex).dump(2) + "\n");
      std::printf("%zu terms, %zu entries, min length %zu\n",
                  onto.terms.size(), lex.entries.size(), lex.min_length);
      size_t shown = 0;
      for (const cear::Diagnostic& d : lex.diagnostics) {
        if (++shown > 20) {
          std::printf("  ... %zu more diagnostics\n",
                      lex.diagnostics.size() - 20);
          break;
        }
        std::printf("  %s %s: %s\n", d.code.c_str(), d.term_id.c_str(),
                    d.detail.c_str());
      }
    } else if (cmd_annotate->parsed()) {
      cear::DocumentStore store = cear::load_store(ann_store);
      cear::Lexicon lex = cear::load_lexicon_file(ann_lexicon);
      auto r = cear::stage_annotate(store, lex, ann_external, ann_out,
                                    ann_jobs);
      std::printf("%zu documents, %zu mentions\n", r.documents, r.mentions);
    } else if (cmd_candidates->parsed()) {
      cear::DocumentStore store = cear::load_store(cand_store);
      auto r = cear::stage_candidates(store, cand_ann, cand_out);
      std::printf("%zu candidate sentences, %zu pairs\n",
                  r.candidate_sentences, r.pairs);
    } else if (cmd_validate->parsed()) {
      if (!val_stub && val_endpoint.empty()) {
        const char* env = std::getenv("CEAR_LLM_ENDPOINT");
        if (env) val_endpoint = env;
      }
      if (!val_stub && val_endpoint.empty())
        throw cear::Error(cear::ErrorKind::BadConfig,
                          "either --stub or --endpoint/--model is required");
      cear::PromptTemplate tmpl;
      if (!val_system.empty()) tmpl.system = cear::read_file(val_system);
      if (!val_user.empty()) tmpl.user = cear::read_file(val_user);
      tmpl.check();
      cear::SamplingConfig sampling;
      sampling.temperature = val_temperature;
      sampling.top_p = val_top_p;
      sampling.model_name = val_model;
      sampling.endpoint = val_endpoint;
      auto pairs = cear::load_pairs_file(val_pairs);
      cear::VerdictCache cache((fs::path(val_cache)));
      std::optional<cear::HttpChatClient> client;
      if (!val_stub)
        client.emplace(val_endpoint, val_model);
      auto r = cear::stage_validate(pairs, cache, val_stub,
                                    client ? &*client : nullptr, tmpl,
                                    sampling, val_inflight, val_jobs);
      std::printf(
          "%zu pairs: %zu confirmed, %zu rejected, %zu ambiguous, %zu failed "
          "(%zu cache hits, %zu validator calls)\n",
          r.pairs, r.confirmed, r.rejected, r.ambiguous, r.failed,
          r.cache_hits, r.validator_calls);
      if (r.failed > 0) return 1;
    } else if (cmd_build->parsed()) {
      cear::VerdictCache cache((fs::path(build_cache)));
      cear::Ontology onto = load_ontology(build_obo);
      std::vector<size_t> stats_values = {1, 2, 5, 10, 20, 50};
      if (!build_stats_arg.empty())
        stats_values =
            cear::detail::parse_size_list(build_stats_arg, "--stats");
      fs::path stats_path = fs::path(build_out);
      stats_path += ".stats.json";
      auto r = cear::stage_build(cache.all(), onto, build_norm_len,
                                 build_min_ref, stats_values, build_out,
                                 build_rdf_star, build_html, stats_path);
      std::printf("%zu confirmed records, %zu relations, %zu kept at "
                  "minRef=%zu\n",
                  r.confirmed_records, r.relations, r.relations_kept,
                  build_min_ref);
      std::printf("%s", cear::stats_to_table(r.stats_table).c_str());
      if (build_rank > 0) {
        cear::RelationRanking ranking =
            cear::rank_relations(r.all_relations, build_rank);
        auto print_rows = [](const char* title,
                             const std::vector<cear::RelationRow>& rows) {
          std::printf("%s\n", title);
          for (const cear::RelationRow& row : rows)
            std::printf("  %-6s %-40s %-6s %-25s %zu\n",
                        row.entity_source.c_str(), row.entity_label.c_str(),
                        row.role_source.c_str(), row.role_label.c_str(),
                        row.count);
        };
        print_rows("most frequent relations", ranking.most_frequent);
        print_rows("least frequent relations", ranking.least_frequent);
      }
    } else if (cmd_eval->parsed()) {
      return run_eval(eval_gold, eval_pred, eval_top_k, eval_json);
    } else if (cmd_compact->parsed()) {
      cear::VerdictCache cache((fs::path(compact_cache)));
      size_t dropped = cache.compact();
      std::printf("%zu records, %zu duplicate lines dropped\n", cache.size(),
                  dropped);
    } else if (cmd_run->parsed()) {
      cear::PipelineConfig config;
      if (!run_config.empty()) config = cear::load_config_file(run_config);
      for (const std::string& kv : run_sets) {
        size_t eq = kv.find('=');
        if (eq == std::string::npos)
          throw cear::Error(cear::ErrorKind::BadConfig,
                            "--set expects key=value, got \"" + kv + "\"");
        cear::apply_config_entry(config, kv.substr(0, eq), kv.substr(eq + 1));
      }
      if (run_jobs_set) config.jobs = run_jobs;
      std::optional<cear::HttpChatClient> client;
      if (config.validator == "http")
        client.emplace(config.sampling().endpoint, config.model);
      cear::PipelineReport report =
          cear::run_pipeline(config, client ? &*client : nullptr);
      std::printf("%s", cear::render_report(report).c_str());
    }
  } catch (const cear::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
