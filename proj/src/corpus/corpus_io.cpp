#include "vulcan/corpus/corpus_io.hpp"

#include <json.hpp>

#include "vulcan/io.hpp"

namespace vulcan::corpus {

using nlohmann::json;

FormatError::FormatError(int line, const std::string& message)
    : Error(ErrorCategory::Data, "corpus line " + std::to_string(line) + ": " + message), line_(line) {}

namespace {

json record_to_json(const CorpusRecord& r) {
  json labels = json::array();
  for (const auto& l : r.labels) {
    labels.push_back({{"line", l.line},
                      {"label", l.label},
                      {"vuln", l.vuln ? json(std::string(to_string(*l.vuln))) : json(nullptr)}});
  }
  return {{"id", r.program.id}, {"source", r.program.source}, {"labels", labels}, {"split", to_string(r.split)}};
}

CorpusRecord record_from_json(const json& j, int line) {
  const auto fail = [line](const std::string& m) { return FormatError(line, m); };
  if (!j.is_object()) throw fail("expected a JSON object");
  for (const char* key : {"id", "source", "labels", "split"}) {
    if (!j.contains(key)) throw fail(std::string("missing field '") + key + "'");
  }
  if (!j["id"].is_string() || !j["source"].is_string()) throw fail("id and source must be strings");
  CorpusRecord r;
  r.program = SourceProgram::from_text(j["id"].get<std::string>(), j["source"].get<std::string>());
  if (!j["split"].is_string()) throw fail("split must be a string");
  const auto split = split_from_string(j["split"].get<std::string>());
  if (!split) throw fail("unknown split '" + j["split"].get<std::string>() + "'");
  r.split = *split;
  if (!j["labels"].is_array()) throw fail("labels must be an array");
  for (const auto& l : j["labels"]) {
    if (!l.is_object() || !l.contains("line") || !l.contains("label") || !l["line"].is_number_integer() ||
        !l["label"].is_number_integer()) {
      throw fail("label entries need integer 'line' and 'label'");
    }
    LabeledLine ll;
    ll.line = l["line"].get<int>();
    ll.label = l["label"].get<int>();
    if (ll.line < 1 || ll.line > r.program.line_count()) {
      throw fail("label line " + std::to_string(ll.line) + " outside program '" + r.program.id + "'");
    }
    if (ll.label != 0 && ll.label != 1) throw fail("label must be 0 or 1");
    if (l.contains("vuln") && !l["vuln"].is_null()) {
      if (!l["vuln"].is_string()) throw fail("vuln must be a string or null");
      ll.vuln = vuln_class_from_string(l["vuln"].get<std::string>());
      if (!ll.vuln) throw fail("unknown vulnerability class '" + l["vuln"].get<std::string>() + "'");
    }
    if ((ll.label == 1) != ll.vuln.has_value()) throw fail("label 1 requires a vuln class and label 0 forbids one");
    r.labels.push_back(ll);
  }
  return r;
}

template <class F>
void for_each_json_line(std::string_view text, F&& f) {
  int line = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line;
    const std::string_view raw = text.substr(pos, end - pos);
    pos = end + 1;
    if (raw.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    json j;
    try {
      j = json::parse(raw);
    } catch (const json::parse_error& e) {
      throw FormatError(line, std::string("invalid JSON: ") + e.what());
    }
    f(j, line);
  }
}

}  // namespace

std::string write_corpus_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& r : corpus) out += record_to_json(r).dump() + "\n";
  return out;
}

Corpus read_corpus_jsonl(std::string_view text) {
  Corpus out;
  for_each_json_line(text, [&](const json& j, int line) {
    try {
      out.push_back(record_from_json(j, line));
    } catch (const json::exception& e) {
      throw FormatError(line, e.what());
    }
  });
  return out;
}

void save_corpus(const std::string& path, const Corpus& corpus) {
  write_file_atomically(path, write_corpus_jsonl(corpus));
}

Corpus load_corpus(const std::string& path) { return read_corpus_jsonl(read_file(path)); }

std::string write_triplets_jsonl(const std::vector<SimilarityTriplet>& triplets) {
  std::string out;
  for (const auto& t : triplets) {
    const json j = {{"base", t.base.source},
                    {"mod_dep", t.mod_dep.source},
                    {"no_mod_dep", t.no_mod_dep.source},
                    {"id", t.base.id},
                    {"line_of_interest", {{"base", t.base_line}, {"mod_dep", t.mod_dep_line}, {"no_mod_dep", t.no_mod_dep_line}}}};
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<SimilarityTriplet> read_triplets_jsonl(std::string_view text) {
  std::vector<SimilarityTriplet> out;
  for_each_json_line(text, [&](const json& j, int line) {
    try {
      SimilarityTriplet t;
      const std::string id = j.value("id", "t" + std::to_string(line));
      t.base = SourceProgram::from_text(id, j.at("base").get<std::string>());
      t.mod_dep = SourceProgram::from_text(id + ".mod", j.at("mod_dep").get<std::string>());
      t.no_mod_dep = SourceProgram::from_text(id + ".nomod", j.at("no_mod_dep").get<std::string>());
      const json& loi = j.at("line_of_interest");
      t.base_line = loi.at("base").get<int>();
      t.mod_dep_line = loi.at("mod_dep").get<int>();
      t.no_mod_dep_line = loi.at("no_mod_dep").get<int>();
      out.push_back(std::move(t));
    } catch (const json::exception& e) {
      throw FormatError(line, e.what());
    }
  });
  return out;
}

Corpus select_split(const Corpus& corpus, Split split) {
  Corpus out;
  for (const auto& r : corpus) {
    if (r.split == split) out.push_back(r);
  }
  return out;
}

}  // namespace vulcan::corpus
