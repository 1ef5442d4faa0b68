#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cear/annotate.hpp"
#include "cear/candidates.hpp"
#include "cear/document.hpp"
#include "cear/error.hpp"
#include "cear/kg.hpp"
#include "cear/lexicon.hpp"

// File formats of the pipeline: document JSON, standoff annotations, the
// serialized lexicon, candidate-pair JSONL and the stats table. Offsets in
// every format count Unicode scalar values relative to the page text.

namespace cear {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path,
                       std::string_view content) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

inline nlohmann::json parse_json(std::string_view text,
                                 const std::string& what) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded())
    throw Error(ErrorKind::IoError, what + ": invalid JSON");
  return j;
}

// --- Document files --------------------------------------------------------
// {"checksum": hex|null, "source_name": string,
//  "pages": [{"number": int, "text": string}]}
// A null checksum is computed on ingest; a provided one is verified.

inline nlohmann::ordered_json document_to_json(const Document& doc) {
  nlohmann::ordered_json pages = nlohmann::ordered_json::array();
  for (const Page& p : doc.pages)
    pages.push_back({{"number", p.number}, {"text", p.text}});
  nlohmann::ordered_json j{{"checksum", doc.checksum},
                           {"source_name", doc.source_name},
                           {"pages", std::move(pages)}};
  if (doc.checksum_of == Document::ChecksumOf::SourceBytes)
    j["checksum_of"] = "source_bytes";
  return j;
}

inline Document document_from_json(const nlohmann::json& j,
                                   const std::string& what) {
  Document doc;
  doc.source_name = j.value("source_name", std::string());
  if (!j.contains("pages") || !j.at("pages").is_array())
    throw Error(ErrorKind::IoError, what + ": missing pages array");
  for (const auto& pj : j.at("pages")) {
    Page page;
    page.number = pj.at("number").get<int>();
    page.text = pj.at("text").get<std::string>();
    doc.pages.push_back(std::move(page));
  }
  validate_pages(doc.pages);
  doc.checksum_of = j.value("checksum_of", std::string("pages")) ==
                            "source_bytes"
                        ? Document::ChecksumOf::SourceBytes
                        : Document::ChecksumOf::Pages;
  const std::string computed = canonical_page_checksum(doc.pages);
  if (j.contains("checksum") && !j.at("checksum").is_null()) {
    doc.checksum = j.at("checksum").get<std::string>();
    if (doc.checksum_of == Document::ChecksumOf::Pages &&
        doc.checksum != computed)
      throw Error(ErrorKind::VerificationFailed,
                  what + ": declared checksum " + doc.checksum +
                      " does not match content " + computed);
  } else {
    doc.checksum = computed;
    doc.checksum_of = Document::ChecksumOf::Pages;
  }
  return doc;
}

inline Document load_document_file(const std::filesystem::path& path) {
  return document_from_json(parse_json(read_file(path), path.string()),
                            path.string());
}

inline void save_document(const Document& doc,
                          const std::filesystem::path& store_dir) {
  write_file(store_dir / (doc.checksum + ".json"),
             document_to_json(doc).dump(2) + "\n");
}

/// Loads every *.json document in a store directory. The directory scan is
/// authoritative; file names are expected to be <checksum>.json.
inline DocumentStore load_store(const std::filesystem::path& store_dir) {
  DocumentStore store;
  if (!std::filesystem::exists(store_dir)) return store;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(store_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& path : files) store.insert(load_document_file(path));
  return store;
}

// --- Standoff annotations ---------------------------------------------------
// {"doc_checksum": hex, "provenance": "external"|"gold",
//  "mentions": [{"page": int, "start": int, "end": int,
//                "kind": "chemical"|"role", "surface": string}]}
// Mentions may carry their own "provenance"; files this tool writes do, so
// merged gazetteer+external annotations survive a round trip.

inline Provenance provenance_from_string(const std::string& s,
                                         const std::string& what) {
  if (s == "gazetteer") return Provenance::Gazetteer;
  if (s == "external") return Provenance::External;
  if (s == "gold") return Provenance::Gold;
  throw Error(ErrorKind::IoError, what + ": unknown provenance \"" + s + "\"");
}

inline MentionKind mention_kind_from_string(const std::string& s,
                                            const std::string& what) {
  if (s == "chemical") return MentionKind::Chemical;
  if (s == "role") return MentionKind::Role;
  throw Error(ErrorKind::IoError, what + ": unknown kind \"" + s + "\"");
}

inline nlohmann::ordered_json annotated_document_to_json(
    const AnnotatedDocument& ann) {
  nlohmann::ordered_json mentions = nlohmann::ordered_json::array();
  for (const Mention& m : ann.mentions)
    mentions.push_back({{"page", m.location.page},
                        {"start", m.location.offset},
                        {"end", m.end},
                        {"kind", to_string(m.kind)},
                        {"surface", m.surface},
                        {"provenance", to_string(m.provenance)}});
  return nlohmann::ordered_json{{"doc_checksum", ann.doc_checksum},
                                {"mentions", std::move(mentions)}};
}

/// Parses a standoff file and validates every span against the store:
/// unknown documents, out-of-range spans and surface mismatches are errors.
inline AnnotatedDocument load_standoff(const nlohmann::json& j,
                                       const DocumentStore& store,
                                       const std::string& what) {
  AnnotatedDocument ann;
  ann.doc_checksum = j.at("doc_checksum").get<std::string>();
  if (!store.find(ann.doc_checksum))
    throw Error(ErrorKind::UnknownDocument, what + ": " + ann.doc_checksum);
  std::optional<Provenance> file_provenance;
  if (j.contains("provenance"))
    file_provenance =
        provenance_from_string(j.at("provenance").get<std::string>(), what);
  for (const auto& mj : j.at("mentions")) {
    Mention m;
    m.location.doc_checksum = ann.doc_checksum;
    m.location.page = mj.at("page").get<int>();
    m.location.offset = mj.at("start").get<size_t>();
    m.end = mj.at("end").get<size_t>();
    m.kind = mention_kind_from_string(mj.at("kind").get<std::string>(), what);
    m.surface = mj.at("surface").get<std::string>();
    if (mj.contains("provenance"))
      m.provenance =
          provenance_from_string(mj.at("provenance").get<std::string>(), what);
    else if (file_provenance)
      m.provenance = *file_provenance;
    else
      m.provenance = Provenance::External;
    validate_mention(m, store);
    ann.mentions.push_back(std::move(m));
  }
  std::sort(ann.mentions.begin(), ann.mentions.end());
  return ann;
}

inline AnnotatedDocument load_standoff_file(const std::filesystem::path& path,
                                            const DocumentStore& store) {
  return load_standoff(parse_json(read_file(path), path.string()), store,
                       path.string());
}

// --- Serialized lexicon -----------------------------------------------------
// {"min_length": n, "entries": [{"key":…, "id":…, "kind":…}]}

inline nlohmann::ordered_json lexicon_to_json(const Lexicon& lex) {
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (const auto& [key, entry] : lex.entries)
    entries.push_back({{"key", key},
                       {"id", entry.term_id},
                       {"kind", to_string(entry.kind)}});
  return nlohmann::ordered_json{{"min_length", lex.min_length},
                                {"entries", std::move(entries)}};
}

inline Lexicon lexicon_from_json(const nlohmann::json& j,
                                 const std::string& what) {
  Lexicon lex;
  lex.min_length = j.at("min_length").get<size_t>();
  for (const auto& ej : j.at("entries")) {
    LexiconEntry entry;
    entry.key = ej.at("key").get<std::string>();
    entry.term_id = ej.at("id").get<std::string>();
    const std::string kind = ej.at("kind").get<std::string>();
    if (kind == "chemical")
      entry.kind = TermKind::Chemical;
    else if (kind == "role")
      entry.kind = TermKind::Role;
    else
      throw Error(ErrorKind::IoError, what + ": unknown kind \"" + kind +
                                          "\"");
    entry.surface_kind = SurfaceKind::Label;
    lex.entries.emplace(entry.key, std::move(entry));
  }
  lex.compile();
  return lex;
}

inline Lexicon load_lexicon_file(const std::filesystem::path& path) {
  return lexicon_from_json(parse_json(read_file(path), path.string()),
                           path.string());
}

// --- Candidate pairs (JSONL) ------------------------------------------------

inline nlohmann::ordered_json pair_to_json(const CandidatePair& pair) {
  return nlohmann::ordered_json{{"doc", pair.location.doc_checksum},
                                {"page", pair.location.page},
                                {"offset", pair.location.offset},
                                {"sentence", pair.sentence_text},
                                {"chemical", pair.chemical_surface},
                                {"role", pair.role_surface}};
}

inline CandidatePair pair_from_json(const nlohmann::json& j) {
  CandidatePair pair;
  pair.location.doc_checksum = j.at("doc").get<std::string>();
  pair.location.page = j.at("page").get<int>();
  pair.location.offset = j.at("offset").get<size_t>();
  pair.sentence_text = j.at("sentence").get<std::string>();
  pair.chemical_surface = j.at("chemical").get<std::string>();
  pair.role_surface = j.at("role").get<std::string>();
  return pair;
}

inline std::vector<CandidatePair> load_pairs_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  std::vector<CandidatePair> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    out.push_back(pair_from_json(
        parse_json(line, path.string() + ":" + std::to_string(line_no))));
  }
  return out;
}

// --- minRef statistics ------------------------------------------------------

inline nlohmann::ordered_json stats_to_json(const KgStats& s) {
  nlohmann::ordered_json j;
  j["min_ref"] = s.min_ref_values;
  j["number_of_relations"] = s.relations;
  j["number_of_relevant_text_positions"] = s.positions;
  j["distinct_chemical_entities_chebi"] = s.chem_chebi;
  j["distinct_chemical_entities_cear"] = s.chem_cear;
  j["distinct_chemical_roles_chebi"] = s.role_chebi;
  j["distinct_chemical_roles_cear"] = s.role_cear;
  return j;
}

/// Aligned text table, one column per minRef setting.
inline std::string stats_to_table(const KgStats& s) {
  const std::vector<std::pair<std::string, const std::vector<size_t>*>> rows =
      {{"number of relations", &s.relations},
       {"number of relevant text positions", &s.positions},
       {"distinct chemical entities (ChEBI)", &s.chem_chebi},
       {"distinct chemical entities (CEAR)", &s.chem_cear},
       {"distinct chemical roles (ChEBI)", &s.role_chebi},
       {"distinct chemical roles (CEAR)", &s.role_cear}};
  size_t name_width = std::string("minRef").size();
  for (const auto& [name, values] : rows)
    name_width = std::max(name_width, name.size());
  std::vector<size_t> widths;
  for (size_t c = 0; c < s.min_ref_values.size(); ++c) {
    size_t w = std::to_string(s.min_ref_values[c]).size();
    for (const auto& [name, values] : rows)
      w = std::max(w, std::to_string((*values)[c]).size());
    widths.push_back(w);
  }
  std::ostringstream out;
  auto emit_row = [&](const std::string& name,
                      const std::vector<size_t>& values) {
    out << name << std::string(name_width - name.size(), ' ');
    for (size_t c = 0; c < values.size(); ++c) {
      std::string v = std::to_string(values[c]);
      out << "  " << std::string(widths[c] - v.size(), ' ') << v;
    }
    out << '\n';
  };
  emit_row("minRef", s.min_ref_values);
  for (const auto& [name, values] : rows) emit_row(name, *values);
  return out.str();
}

}  // namespace cear
