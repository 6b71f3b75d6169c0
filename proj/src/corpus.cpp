#include "xsslab/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "xsslab/rng.hpp"

namespace xsslab {

using json = nlohmann::json;

std::string_view label_name(Label label) { return label == Label::xss ? "xss" : "benign"; }

std::optional<Label> parse_label(std::string_view text) {
  std::string lower;
  lower.reserve(text.size());
  for (char c : text) lower.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
  if (lower == "benign" || lower == "0") return Label::benign;
  if (lower == "xss" || lower == "malicious" || lower == "1") return Label::xss;
  return std::nullopt;
}

size_t Corpus::count(Label label) const {
  size_t n = 0;
  for (const auto& s : samples)
    if (s.label == label) ++n;
  return n;
}

namespace {

Label require_label(std::string_view raw, const std::string& path, size_t line_no) {
  auto label = parse_label(raw);
  if (!label) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": unknown label value '" +
                             std::string(raw) + "'");
  }
  return *label;
}

// RFC 4180 style reader: quoted fields may contain commas, doubled quotes and
// embedded newlines. Returns false at end of stream.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields, size_t& line_no) {
  fields.clear();
  int c = in.peek();
  if (c == EOF) return false;

  std::string field;
  bool in_quotes = false;
  bool any = false;
  ++line_no;
  while ((c = in.get()) != EOF) {
    any = true;
    char ch = static_cast<char>(c);
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line_no;
        field.push_back(ch);
      }
    } else if (ch == '"') {
      in_quotes = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch == '\n') {
      break;
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

IngestResult ingest_csv(std::ifstream& in, const std::string& path, const LabelPolicy& policy) {
  IngestResult result;
  std::vector<std::string> fields;
  size_t line_no = 0;

  if (!read_csv_record(in, fields, line_no)) {
    throw std::runtime_error(path + ": missing CSV header row");
  }
  long text_idx = -1;
  long label_idx = -1;
  for (size_t i = 0; i < fields.size(); ++i) {
    if (fields[i] == policy.text_column) text_idx = static_cast<long>(i);
    if (fields[i] == policy.label_column) label_idx = static_cast<long>(i);
  }
  if (text_idx < 0) {
    throw std::runtime_error(path + ": text column '" + policy.text_column + "' not in header");
  }
  if (!policy.fixed && label_idx < 0) {
    throw std::runtime_error(path + ": label column '" + policy.label_column + "' not in header");
  }

  const size_t ncols = fields.size();
  while (read_csv_record(in, fields, line_no)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != ncols) {
      ++result.skipped;
      result.diagnostics.push_back(path + ":" + std::to_string(line_no) + ": expected " +
                                   std::to_string(ncols) + " fields, got " +
                                   std::to_string(fields.size()));
      continue;
    }
    Payload p;
    p.text = fields[static_cast<size_t>(text_idx)];
    p.label = policy.fixed ? *policy.fixed
                           : require_label(fields[static_cast<size_t>(label_idx)], path, line_no);
    p.origin = path;
    result.corpus.samples.push_back(std::move(p));
  }
  return result;
}

IngestResult ingest_jsonl(std::ifstream& in, const std::string& path, const LabelPolicy& policy) {
  IngestResult result;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
      ++result.skipped;
      result.diagnostics.push_back(path + ":" + std::to_string(line_no) + ": malformed JSON record");
      continue;
    }
    auto text_it = record.find("text");
    if (text_it == record.end() || !text_it->is_string()) {
      ++result.skipped;
      result.diagnostics.push_back(path + ":" + std::to_string(line_no) + ": missing 'text' field");
      continue;
    }
    Payload p;
    p.text = text_it->get<std::string>();
    if (policy.fixed) {
      p.label = *policy.fixed;
    } else {
      auto label_it = record.find(policy.label_column);
      if (label_it == record.end() || !label_it->is_string()) {
        ++result.skipped;
        result.diagnostics.push_back(path + ":" + std::to_string(line_no) + ": missing '" +
                                     policy.label_column + "' field");
        continue;
      }
      p.label = require_label(label_it->get<std::string>(), path, line_no);
    }
    if (auto it = record.find("origin"); it != record.end() && it->is_string()) {
      p.origin = it->get<std::string>();
    } else {
      p.origin = path;
    }
    result.corpus.samples.push_back(std::move(p));
  }
  return result;
}

IngestResult ingest_plain(std::ifstream& in, const std::string& path, const LabelPolicy& policy) {
  if (!policy.fixed) {
    throw std::runtime_error(path + ": plain_lines format requires a fixed label");
  }
  IngestResult result;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      ++result.skipped;
      result.diagnostics.push_back(path + ":" + std::to_string(line_no) + ": empty line");
      continue;
    }
    result.corpus.samples.push_back({line, *policy.fixed, path});
  }
  return result;
}

}  // namespace

IngestResult ingest(const std::string& path, IngestFormat format, const LabelPolicy& policy) {
  std::ifstream in(path, std::ios::binary);
  if (!in.is_open()) {
    throw std::runtime_error("cannot open input file: " + path);
  }
  switch (format) {
    case IngestFormat::csv: return ingest_csv(in, path, policy);
    case IngestFormat::jsonl: return ingest_jsonl(in, path, policy);
    case IngestFormat::plain_lines: return ingest_plain(in, path, policy);
  }
  throw std::logic_error("unhandled ingest format");
}

std::string normalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_space = false;
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      in_space = !out.empty();  // leading whitespace is trimmed outright
      continue;
    }
    if (in_space) {
      out.push_back(' ');
      in_space = false;
    }
    out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
  }
  return out;
}

Corpus normalize_corpus(Corpus corpus, size_t* dropped_empty) {
  size_t dropped = 0;
  std::vector<Payload> kept;
  kept.reserve(corpus.samples.size());
  for (auto& s : corpus.samples) {
    s.text = normalize(s.text);
    if (s.text.empty()) {
      ++dropped;
      continue;
    }
    kept.push_back(std::move(s));
  }
  corpus.samples = std::move(kept);
  corpus.normalized = true;
  if (dropped_empty) *dropped_empty = dropped;
  return corpus;
}

Corpus apply_filters(Corpus corpus, const FilterConfig& config, size_t* dropped_count) {
  size_t dropped = 0;
  std::vector<Payload> kept;
  kept.reserve(corpus.samples.size());
  for (auto& s : corpus.samples) {
    bool keep = s.text.size() >= config.min_length;
    if (keep && !s.text.empty()) {
      size_t printable = 0;
      for (unsigned char c : s.text)
        if (c >= 0x20 && c != 0x7f) ++printable;
      keep = static_cast<double>(printable) / static_cast<double>(s.text.size()) >=
             config.min_printable_ratio;
    }
    if (keep) {
      kept.push_back(std::move(s));
    } else {
      ++dropped;
    }
  }
  corpus.samples = std::move(kept);
  if (dropped_count) *dropped_count = dropped;
  return corpus;
}

Corpus dedup(const Corpus& corpus, DedupStats* stats) {
  Corpus out;
  out.normalized = corpus.normalized;
  out.dedup_applied = true;
  out.samples.reserve(corpus.samples.size());

  DedupStats local;
  std::unordered_map<std::string, size_t> first_index;  // text -> index in out.samples
  for (const auto& s : corpus.samples) {
    auto it = first_index.find(s.text);
    if (it == first_index.end()) {
      out.samples.push_back(s);
      first_index.emplace(out.samples.back().text, out.samples.size() - 1);
      continue;
    }
    ++local.removed;
    Payload& survivor = out.samples[it->second];
    if (survivor.label != s.label) {
      ++local.label_conflicts;
      survivor.label = Label::xss;
    }
  }
  if (stats) *stats = local;
  return out;
}

std::pair<Corpus, Corpus> split(const Corpus& corpus, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must be strictly between 0 and 1");
  }
  const size_t n = corpus.samples.size();
  const size_t n_train =
      static_cast<size_t>(std::floor(spec.train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train == n) {
    throw std::runtime_error("corpus too small to give both partitions at least one sample");
  }

  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(spec.seed);
  for (size_t i = n - 1; i > 0; --i) {
    size_t j = rng.below(i + 1);
    std::swap(order[i], order[j]);
  }

  Corpus train, test;
  train.normalized = test.normalized = corpus.normalized;
  train.dedup_applied = test.dedup_applied = corpus.dedup_applied;
  train.samples.reserve(n_train);
  test.samples.reserve(n - n_train);
  for (size_t i = 0; i < n; ++i) {
    (i < n_train ? train : test).samples.push_back(corpus.samples[order[i]]);
  }
  return {std::move(train), std::move(test)};
}

std::string payload_to_jsonl(const Payload& payload) {
  nlohmann::ordered_json record;
  record["text"] = payload.text;
  record["label"] = std::string(label_name(payload.label));
  record["origin"] = payload.origin;
  return record.dump();
}

void write_jsonl(const std::string& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out.is_open()) {
    throw std::runtime_error("cannot open output file: " + path);
  }
  for (const auto& s : corpus.samples) {
    out << payload_to_jsonl(s) << '\n';
  }
}

}  // namespace xsslab
