#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace xsslab {

enum class Label { benign, xss };

std::string_view label_name(Label label);
std::optional<Label> parse_label(std::string_view text);

// One labeled text sample. origin tags the source file or the transform that
// produced the sample.
struct Payload {
  std::string text;
  Label label = Label::benign;
  std::string origin;

  bool operator==(const Payload&) const = default;
};

struct Corpus {
  std::vector<Payload> samples;
  bool normalized = false;
  bool dedup_applied = false;

  size_t size() const { return samples.size(); }
  size_t count(Label label) const;
};

enum class IngestFormat { csv, jsonl, plain_lines };

// Either a fixed label for every record or the name of the column/field that
// carries it. text_column applies to csv only.
struct LabelPolicy {
  std::optional<Label> fixed;
  std::string label_column = "label";
  std::string text_column = "text";

  static LabelPolicy fixed_label(Label label) {
    LabelPolicy p;
    p.fixed = label;
    return p;
  }
};

struct IngestResult {
  Corpus corpus;
  size_t skipped = 0;
  std::vector<std::string> diagnostics;  // one line-numbered message per skipped record
};

// Reads one source file. Malformed records are skipped and counted; an
// unreadable file or an unknown label value throws std::runtime_error.
IngestResult ingest(const std::string& path, IngestFormat format, const LabelPolicy& policy);

// Lowercases ASCII letters, collapses whitespace runs to a single space and
// trims the ends. Newlines and carriage returns disappear with the collapse.
// Total and idempotent; bytes >= 0x80 pass through untouched.
std::string normalize(std::string_view text);

// Normalizes every sample; samples that come out empty are dropped.
Corpus normalize_corpus(Corpus corpus, size_t* dropped_empty = nullptr);

// Stand-in for the unspecified benign-source filters: a minimum normalized
// length and a printable-byte ratio, both configurable.
struct FilterConfig {
  size_t min_length = 8;
  double min_printable_ratio = 0.9;
};

Corpus apply_filters(Corpus corpus, const FilterConfig& config, size_t* dropped = nullptr);

struct DedupStats {
  size_t removed = 0;
  size_t label_conflicts = 0;
};

// Keeps the first occurrence of each text, preserving order. When duplicates
// carry both labels the survivor is marked xss (fail-safe for a detector) and
// the conflict counted.
Corpus dedup(const Corpus& corpus, DedupStats* stats = nullptr);

struct SplitSpec {
  double train_fraction = 0.8;
  uint64_t seed = 42;
};

// Seeded uniform shuffle, then train = first floor(fraction * N) samples.
// Throws if either side would be empty.
std::pair<Corpus, Corpus> split(const Corpus& corpus, const SplitSpec& spec);

// JSONL record schema: {"text": string, "label": "benign"|"xss", "origin": string}.
std::string payload_to_jsonl(const Payload& payload);
void write_jsonl(const std::string& path, const Corpus& corpus);

}  // namespace xsslab
