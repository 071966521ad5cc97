#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sirl {

/// Fixed-length integer vector searched by the evolutionary outer loop.
using Genotype = std::vector<std::uint32_t>;

/// Outcome of decoding a genotype. An incomplete decode (genes ran out with
/// placeholders left) is a value, not an error; the evolution layer assigns
/// it a sentinel fitness.
struct TranslationResult {
  bool complete = false;
  std::string text;            // expression; partially expanded when incomplete
  std::size_t genes_used = 0;  // one gene per rule expansion
  int unexpanded = 0;          // placeholders remaining (0 when complete)
};

/// BNF-style rewrite rules. Nonterminals are written `<name>` inside
/// production strings; `name` is lowercase alphanumeric, so the comparison
/// operator " < " in emitted conditions can never be mistaken for one.
class Grammar {
 public:
  using Rule = std::pair<std::string, std::vector<std::string>>;

  Grammar(std::string start_symbol, std::vector<Rule> rules, int n_inputs = 0);

  const std::string& start_symbol() const { return start_; }
  const std::vector<std::string>& options(std::string_view rule) const;
  bool has_rule(std::string_view name) const;
  std::size_t rule_count() const { return rules_.size(); }

  /// Observation dimension this grammar was built for (0 if not applicable).
  int n_inputs() const { return n_inputs_; }

 private:
  std::string start_;
  std::vector<Rule> rules_;  // option order is part of the contract
  int n_inputs_ = 0;
};

/// The oblique-split grammar over `n_inputs` observation variables:
///   start     -> <if>
///   if        -> Node(<condition>, <action>, <action>)
///   condition -> <const>*x1 + ... + <const>*xN < <const>
///   action    -> Leaf | <if>
///   const     -> 0.0 | <nonzero>
///   nonzero   -> -10.0 | -9.9 | ... | 10.0   (201 options, 0.1 steps)
///
/// Coefficients are exact tenths so option index <-> value is exact.
Grammar default_oblique_grammar(int n_inputs);

/// Decode a genotype: repeatedly replace the first placeholder in the working
/// string with options[gene % options.size()], consuming one gene per
/// expansion, until no placeholder remains or genes run out.
///
/// Pure: equal inputs give byte-identical output.
TranslationResult translate(const Genotype& genotype, const Grammar& grammar);

}  // namespace sirl
