#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cear/candidates.hpp"
#include "cear/error.hpp"
#include "cear/sha256.hpp"
#include "cear/utf8.hpp"

namespace cear {

/// Chat prompt pair used for link validation. The defaults are the exact
/// strings the pipeline was tuned with; phrasing changes swing the confirmed
/// set hard, so they are pinned here rather than scattered through callers.
struct PromptTemplate {
  std::string system =
      "Do you agree with the provided question? Please answer with one word, "
      "either 'yes' or 'no'.";
  std::string user =
      "In the sentence '{sentence}': Is {chemical} explicitly described as "
      "{role}?";

  /// The user prompt must contain each of {sentence}, {chemical} and {role}
  /// exactly once. Checked when a template is loaded, not at render time.
  void check() const {
    for (const char* placeholder : {"{sentence}", "{chemical}", "{role}"}) {
      size_t first = user.find(placeholder);
      if (first == std::string::npos)
        throw Error(ErrorKind::MissingPlaceholder,
                    std::string(placeholder) + " missing from user prompt");
      if (user.find(placeholder, first + 1) != std::string::npos)
        throw Error(ErrorKind::MissingPlaceholder,
                    std::string(placeholder) + " appears more than once");
    }
  }

  std::string hash() const {
    return sha256_hex(system + '\x1f' + user).substr(0, 16);
  }
};

struct SamplingConfig {
  double temperature = 0.1;
  double top_p = 0.95;
  std::string model_name;
  std::string endpoint;
};

enum class Verdict { Confirmed, Rejected, Ambiguous };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Confirmed: return "confirmed";
    case Verdict::Rejected: return "rejected";
    case Verdict::Ambiguous: return "ambiguous";
  }
  return "?";
}

struct VerdictRecord {
  CandidatePair pair;
  Verdict verdict = Verdict::Ambiguous;
  std::string raw_answer;
  std::string validator_id;  // model name or "stub"
  std::string template_hash;
};

/// Substitutes the three placeholders into the user prompt in one pass over
/// the template, so placeholder-looking text inside the sentence is never
/// re-substituted. The system prompt is returned verbatim.
inline std::pair<std::string, std::string> render_prompts(
    const CandidatePair& pair, const PromptTemplate& tmpl) {
  const std::string& t = tmpl.user;
  std::string user;
  user.reserve(t.size() + pair.sentence_text.size() +
               pair.chemical_surface.size() + pair.role_surface.size());
  size_t pos = 0;
  while (pos < t.size()) {
    size_t open = t.find('{', pos);
    if (open == std::string::npos) {
      user.append(t, pos, std::string::npos);
      break;
    }
    user.append(t, pos, open - pos);
    if (t.compare(open, 10, "{sentence}") == 0) {
      user += pair.sentence_text;
      pos = open + 10;
    } else if (t.compare(open, 10, "{chemical}") == 0) {
      user += pair.chemical_surface;
      pos = open + 10;
    } else if (t.compare(open, 6, "{role}") == 0) {
      user += pair.role_surface;
      pos = open + 6;
    } else {
      user.push_back('{');
      pos = open + 1;
    }
  }
  return {tmpl.system, user};
}

/// Maps a raw chat reply to a verdict: first word "yes" confirms, "no"
/// rejects, anything else (including replies that bury the answer in an
/// explanation) is ambiguous. Total over arbitrary text.
inline Verdict parse_answer(std::string_view raw) {
  const std::u32string cps = decode_utf8(raw);
  size_t i = 0;
  while (i < cps.size() && !is_letter_scalar(cps[i]) && !is_ascii_digit(cps[i]))
    ++i;
  std::u32string word;
  while (i < cps.size() &&
         (is_letter_scalar(cps[i]) || is_ascii_digit(cps[i])))
    word.push_back(fold_scalar(cps[i++]));
  if (word == U"yes") return Verdict::Confirmed;
  if (word == U"no") return Verdict::Rejected;
  return Verdict::Ambiguous;
}

/// Abstract chat transport. chat() returns the raw reply text or throws
/// Error(TransportError) once retries are exhausted.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string chat(const std::string& system, const std::string& user,
                           const SamplingConfig& config) = 0;
  virtual std::string id() const = 0;
};

/// Deterministic offline validator: a pair is confirmed when a cue token
/// ("as", "is", "are", "was", "used") stands as a whole token between the
/// first occurrences of the two surfaces, in either order. Pairs whose
/// surfaces do not occur in the sentence are rejected.
inline VerdictRecord stub_validate(const CandidatePair& pair) {
  static const std::set<std::u32string> cues = {U"as", U"is", U"are", U"was",
                                                U"used"};
  const std::u32string sentence = decode_utf8(pair.sentence_text);
  const std::u32string chem = decode_utf8(pair.chemical_surface);
  const std::u32string role = decode_utf8(pair.role_surface);

  bool confirmed = false;
  size_t chem_at = chem.empty() ? std::u32string::npos : sentence.find(chem);
  size_t role_at = role.empty() ? std::u32string::npos : sentence.find(role);
  if (chem_at != std::u32string::npos && role_at != std::u32string::npos) {
    size_t between_start, between_end;
    if (chem_at <= role_at) {
      between_start = chem_at + chem.size();
      between_end = role_at;
    } else {
      between_start = role_at + role.size();
      between_end = chem_at;
    }
    size_t i = between_start;
    // A word continuing across the region edge is a partial token; skip it.
    if (i > 0 && i < sentence.size() && is_word_scalar(sentence[i - 1]))
      while (i < sentence.size() && is_word_scalar(sentence[i])) ++i;
    while (i < between_end && i < sentence.size() && !confirmed) {
      if (!is_word_scalar(sentence[i])) {
        ++i;
        continue;
      }
      std::u32string token;
      while (i < sentence.size() && is_word_scalar(sentence[i]))
        token.push_back(fold_scalar(sentence[i++]));
      // Whole token inside the between-region only.
      if (i <= between_end && cues.count(token)) confirmed = true;
    }
  }

  VerdictRecord record;
  record.pair = pair;
  record.raw_answer = confirmed ? "yes" : "no";
  record.verdict = parse_answer(record.raw_answer);
  record.validator_id = "stub";
  record.template_hash = "";
  return record;
}

// ---------------------------------------------------------------------------
// Verdict persistence: append-only JSONL, one record per line. The cache key
// covers the pair identity, the validator and the prompt template, so prompt
// experiments never mix verdicts.

inline nlohmann::ordered_json verdict_record_to_json(const VerdictRecord& r) {
  return nlohmann::ordered_json{{"doc", r.pair.location.doc_checksum},
                                {"page", r.pair.location.page},
                                {"offset", r.pair.location.offset},
                                {"sentence", r.pair.sentence_text},
                                {"chemical", r.pair.chemical_surface},
                                {"role", r.pair.role_surface},
                                {"verdict", to_string(r.verdict)},
                                {"raw_answer", r.raw_answer},
                                {"validator_id", r.validator_id},
                                {"template_hash", r.template_hash}};
}

inline VerdictRecord verdict_record_from_json(const nlohmann::json& j) {
  VerdictRecord r;
  r.pair.location.doc_checksum = j.at("doc").get<std::string>();
  r.pair.location.page = j.at("page").get<int>();
  r.pair.location.offset = j.at("offset").get<size_t>();
  r.pair.sentence_text = j.at("sentence").get<std::string>();
  r.pair.chemical_surface = j.at("chemical").get<std::string>();
  r.pair.role_surface = j.at("role").get<std::string>();
  std::string v = j.at("verdict").get<std::string>();
  r.verdict = v == "confirmed"  ? Verdict::Confirmed
              : v == "rejected" ? Verdict::Rejected
                                : Verdict::Ambiguous;
  r.raw_answer = j.at("raw_answer").get<std::string>();
  r.validator_id = j.at("validator_id").get<std::string>();
  r.template_hash = j.value("template_hash", std::string());
  return r;
}

class VerdictCache {
 public:
  VerdictCache() = default;

  /// Opens (and loads) a JSONL cache file; the file is created on first
  /// append. On duplicate keys in the file, the first record wins.
  explicit VerdictCache(std::filesystem::path file) : file_(std::move(file)) {
    if (!std::filesystem::exists(file_)) return;
    std::ifstream in(file_);
    if (!in)
      throw Error(ErrorKind::IoError, "cannot read " + file_.string());
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded())
        throw Error(ErrorKind::IoError, file_.string() + ":" +
                                            std::to_string(line_no) +
                                            ": bad JSON line");
      VerdictRecord r = verdict_record_from_json(j);
      std::string key = key_of(r.pair, r.validator_id, r.template_hash);
      if (records_.emplace(key, std::move(r)).second)
        insertion_order_.push_back(key);
    }
  }

  static std::string key_of(const CandidatePair& pair,
                            const std::string& validator_id,
                            const std::string& template_hash) {
    return pair.location.doc_checksum + '|' +
           std::to_string(pair.location.page) + '|' +
           std::to_string(pair.location.offset) + '|' +
           normalize_surface(pair.chemical_surface) + '|' +
           normalize_surface(pair.role_surface) + '|' + validator_id + '|' +
           template_hash;
  }

  const VerdictRecord* find(const std::string& key) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = records_.find(key);
    return it == records_.end() ? nullptr : &it->second;
  }

  /// First write wins: a later record under an existing key is dropped and
  /// the stored one returned.
  const VerdictRecord& put(const std::string& key, VerdictRecord record) {
    std::lock_guard<std::mutex> lock(mu_);
    auto [it, inserted] = records_.emplace(key, std::move(record));
    if (inserted) {
      insertion_order_.push_back(key);
      append_line(verdict_record_to_json(it->second).dump());
    }
    return it->second;
  }

  size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return records_.size();
  }

  std::vector<VerdictRecord> all() const {
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<VerdictRecord> out;
    out.reserve(insertion_order_.size());
    for (const std::string& key : insertion_order_)
      out.push_back(records_.at(key));
    return out;
  }

  /// Rewrites the backing file with one line per key, first occurrence
  /// order. Returns the number of dropped duplicate lines.
  size_t compact() {
    std::lock_guard<std::mutex> lock(mu_);
    if (file_.empty()) return 0;
    size_t kept = 0, total = 0;
    {
      std::ifstream in(file_);
      std::string line;
      while (std::getline(in, line))
        if (!line.empty()) ++total;
    }
    std::filesystem::path tmp = file_;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      if (!out)
        throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
      for (const std::string& key : insertion_order_) {
        out << verdict_record_to_json(records_.at(key)).dump() << '\n';
        ++kept;
      }
    }
    std::filesystem::rename(tmp, file_);
    return total - kept;
  }

 private:
  void append_line(const std::string& line) {
    if (file_.empty()) return;
    std::ofstream out(file_, std::ios::app);
    if (!out)
      throw Error(ErrorKind::IoError, "cannot append to " + file_.string());
    out << line << '\n';
  }

  std::filesystem::path file_;
  mutable std::mutex mu_;
  std::map<std::string, VerdictRecord> records_;
  std::vector<std::string> insertion_order_;
};

/// One validation with caching: returns the cached record when the
/// (pair, validator, template) key is present, otherwise performs a single
/// chat call, parses, persists and returns. TransportError propagates and
/// leaves no record, so the pair is retried on the next run.
inline const VerdictRecord& validate_pair(const CandidatePair& pair,
                                          ChatClient& client,
                                          VerdictCache& cache,
                                          const PromptTemplate& tmpl,
                                          const SamplingConfig& config) {
  const std::string key = VerdictCache::key_of(pair, client.id(), tmpl.hash());
  if (const VerdictRecord* cached = cache.find(key)) return *cached;
  auto [system, user] = render_prompts(pair, tmpl);
  std::string raw = client.chat(system, user, config);
  VerdictRecord record;
  record.pair = pair;
  record.raw_answer = raw;
  record.verdict = parse_answer(raw);
  record.validator_id = client.id();
  record.template_hash = tmpl.hash();
  return cache.put(key, std::move(record));
}

/// Cached stub validation, same contract as validate_pair.
inline const VerdictRecord& validate_pair_stub(const CandidatePair& pair,
                                               VerdictCache& cache) {
  const std::string key = VerdictCache::key_of(pair, "stub", "");
  if (const VerdictRecord* cached = cache.find(key)) return *cached;
  return cache.put(key, stub_validate(pair));
}

}  // namespace cear
