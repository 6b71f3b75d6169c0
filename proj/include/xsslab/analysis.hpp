#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "xsslab/corpus.hpp"

namespace xsslab {

// Shannon entropy over byte frequencies, in bits per symbol. H("") = 0.
double shannon_entropy(std::string_view bytes);

struct EntropyReport {
  std::vector<std::pair<size_t, double>> per_sample_a;  // (sample index, bits/char)
  std::vector<std::pair<size_t, double>> per_sample_b;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double uplift_percent = 0.0;
  bool uplift_defined = false;  // false when mean_a == 0
};

// Mean per-sample entropies of b over a, as a percentage uplift. Entropy is
// taken on the raw sample bytes. Throws when either corpus is empty.
EntropyReport entropy_uplift(const Corpus& corpus_a, const Corpus& corpus_b);

std::string entropy_report_to_json(const EntropyReport& report);

enum class CanonicalForm { js, opaque };

struct CanonicalAction {
  CanonicalForm form = CanonicalForm::opaque;
  std::string text;  // fully decoded JS, or the verbatim payload for opaque
  std::string note;  // decoder diagnostics, empty when clean
};

// Locates the JS slice and unwraps eval(atob(..)), eval(decodeURIComponent(..))
// and eval('..'+'..') to fixpoint, resolving string-literal escapes. Renames
// from js_rewrite are left alone (see check_equivalence). A malformed
// encoding inside a recognized wrapper reports and returns the payload as
// opaque.
CanonicalAction canonicalize(std::string_view payload);

enum class Equivalence { equivalent, alpha_equivalent, not_equivalent, undecidable };

std::string_view equivalence_name(Equivalence e);

// equivalent: canonical forms textually identical. alpha_equivalent:
// identical up to a consistent bijective renaming of _0x-form identifiers,
// ignoring ";void 0;" no-ops and whitespace. undecidable when either side
// canonicalizes to opaque.
Equivalence check_equivalence(std::string_view original, std::string_view obfuscated);

}  // namespace xsslab
