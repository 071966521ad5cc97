#include "sirl/grammar.hpp"

#include <cctype>
#include <optional>
#include <stdexcept>

namespace sirl {

namespace {

struct NonterminalRef {
  std::size_t pos = 0;  // position of '<'
  std::size_t len = 0;  // including both brackets
  std::string_view name;
};

bool name_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

// First `<name>` occurrence at or after `from`. A '<' not immediately
// followed by a well-formed name (e.g. the " < " comparator) is skipped.
std::optional<NonterminalRef> find_nonterminal(std::string_view text, std::size_t from) {
  for (std::size_t i = text.find('<', from); i != std::string_view::npos;
       i = text.find('<', i + 1)) {
    std::size_t j = i + 1;
    while (j < text.size() && name_char(text[j])) ++j;
    if (j > i + 1 && j < text.size() && text[j] == '>') {
      return NonterminalRef{i, j - i + 1, text.substr(i + 1, j - i - 1)};
    }
  }
  return std::nullopt;
}

int count_nonterminals(std::string_view text, std::size_t from) {
  int n = 0;
  while (auto ref = find_nonterminal(text, from)) {
    ++n;
    from = ref->pos + ref->len;
  }
  return n;
}

}  // namespace

Grammar::Grammar(std::string start_symbol, std::vector<Rule> rules, int n_inputs)
    : start_(std::move(start_symbol)), rules_(std::move(rules)), n_inputs_(n_inputs) {
  if (!has_rule(start_)) {
    throw std::invalid_argument("grammar: start symbol <" + start_ + "> has no rule");
  }
  for (const auto& [name, options] : rules_) {
    if (options.empty()) {
      throw std::invalid_argument("grammar: rule <" + name + "> has no options");
    }
    for (const auto& production : options) {
      std::size_t from = 0;
      while (auto ref = find_nonterminal(production, from)) {
        if (!has_rule(ref->name)) {
          throw std::invalid_argument("grammar: rule <" + name + "> references undefined <" +
                                      std::string(ref->name) + ">");
        }
        from = ref->pos + ref->len;
      }
    }
  }
}

const std::vector<std::string>& Grammar::options(std::string_view rule) const {
  for (const auto& [name, opts] : rules_) {
    if (name == rule) return opts;
  }
  throw std::invalid_argument("grammar: no rule <" + std::string(rule) + ">");
}

bool Grammar::has_rule(std::string_view name) const {
  for (const auto& [rule, opts] : rules_) {
    if (rule == name) return true;
  }
  return false;
}

Grammar default_oblique_grammar(int n_inputs) {
  if (n_inputs < 1) {
    throw std::invalid_argument("default_oblique_grammar: n_inputs must be >= 1");
  }

  std::string condition;
  for (int i = 1; i <= n_inputs; ++i) {
    if (i > 1) condition += " + ";
    condition += "<const>*x" + std::to_string(i);
  }
  condition += " < <const>";

  // 201 grid points; option index k is (k - 100) tenths, so index 0 is -10.0.
  std::vector<std::string> nonzero;
  nonzero.reserve(201);
  for (int tenths = -100; tenths <= 100; ++tenths) {
    int whole = std::abs(tenths) / 10;
    int frac = std::abs(tenths) % 10;
    std::string v = tenths < 0 ? "-" : "";
    v += std::to_string(whole) + "." + std::to_string(frac);
    nonzero.push_back(std::move(v));
  }

  std::vector<Grammar::Rule> rules;
  rules.push_back({"start", {"<if>"}});
  rules.push_back({"if", {"Node(<condition>, <action>, <action>)"}});
  rules.push_back({"condition", {condition}});
  rules.push_back({"action", {"Leaf", "<if>"}});
  rules.push_back({"const", {"0.0", "<nonzero>"}});
  rules.push_back({"nonzero", std::move(nonzero)});
  return Grammar("start", std::move(rules), n_inputs);
}

TranslationResult translate(const Genotype& genotype, const Grammar& grammar) {
  TranslationResult result;
  result.text = "<" + grammar.start_symbol() + ">";

  // Expansions never introduce a placeholder before the replacement point,
  // so the scan position only moves forward.
  std::size_t scan = 0;
  for (std::uint32_t gene : genotype) {
    auto ref = find_nonterminal(result.text, scan);
    if (!ref) break;
    const auto& options = grammar.options(ref->name);
    const std::string& choice = options[gene % options.size()];
    result.text.replace(ref->pos, ref->len, choice);
    scan = ref->pos;
    ++result.genes_used;
  }

  result.unexpanded = count_nonterminals(result.text, scan);
  result.complete = result.unexpanded == 0;
  return result;
}

}  // namespace sirl
