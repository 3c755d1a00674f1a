#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "simtac/errors.hpp"
#include "simtac/fmtnum.hpp"
#include "simtac/hierarchy.hpp"
#include "simtac/iact.hpp"
#include "simtac/perfo.hpp"
#include "simtac/taf.hpp"

namespace simtac {

enum class Technique { kTaf, kIact, kPerfo };

inline std::string technique_name(Technique t) {
  switch (t) {
    case Technique::kTaf: return "taf";
    case Technique::kIact: return "iact";
    case Technique::kPerfo: return "perfo";
  }
  return "?";
}

/// A length or stride that is either a positive integer literal or a
/// symbol (e.g. N) bound by the host program.
struct SectionDim {
  long long value = 1;
  std::string symbol;  // nonempty -> symbolic

  bool is_symbolic() const { return !symbol.empty(); }
  bool operator==(const SectionDim&) const = default;

  static SectionDim literal(long long v) { return {v, {}}; }
  static SectionDim sym(std::string s) { return {0, std::move(s)}; }
};

/// Start index restricted to the affine form a*i + b in the loop variable i.
struct AffineIndex {
  long long coef = 0;
  long long offset = 0;
  bool operator==(const AffineIndex&) const = default;
};

/// One array section base[start:length:stride].
struct ArraySection {
  std::string base;
  AffineIndex start;
  SectionDim length = SectionDim::literal(1);
  SectionDim stride = SectionDim::literal(1);
  bool operator==(const ArraySection&) const = default;
};

/// Parsed, validated description of one approximation directive.
struct ApproxSpec {
  Technique technique = Technique::kTaf;
  std::optional<TafConfig> taf;
  std::optional<IactConfig> iact;
  std::optional<PerfoConfig> perfo;
  Level level = Level::kThread;
  std::vector<ArraySection> inputs;
  std::vector<ArraySection> outputs;

  bool operator==(const ApproxSpec&) const = default;

  void validate() const {
    int payloads = (taf ? 1 : 0) + (iact ? 1 : 0) + (perfo ? 1 : 0);
    if (payloads != 1) throw ConfigError("ApproxSpec must carry exactly one technique payload");
    if (technique == Technique::kTaf && !taf) throw ConfigError("TAF spec without TAF payload");
    if (technique == Technique::kIact && !iact) throw ConfigError("iACT spec without iACT payload");
    if (technique == Technique::kPerfo && !perfo) throw ConfigError("perfo spec without perfo payload");
    if (taf) taf->validate();
    if (iact) iact->validate();
    if (perfo) perfo->validate();
    if (technique == Technique::kIact && inputs.empty())
      throw ConfigError("iACT requires at least one input section");
    if ((technique == Technique::kIact || technique == Technique::kTaf) && outputs.empty())
      throw ConfigError("memoization requires at least one output section");
  }
};

enum class ParseErrorCode {
  kEmptyDirective,
  kUnknownClause,
  kUnexpectedChar,
  kArityMismatch,
  kNonNumeric,
  kDuplicateClause,
  kBadMemoKind,
  kBadPerfoKind,
  kBadLevel,
  kBadSection,
  kOutOfRange,
  kMissingInput,
  kMissingOutput,
};

inline const char* parse_error_code_name(ParseErrorCode c) {
  switch (c) {
    case ParseErrorCode::kEmptyDirective: return "empty-directive";
    case ParseErrorCode::kUnknownClause: return "unknown-clause";
    case ParseErrorCode::kUnexpectedChar: return "unexpected-char";
    case ParseErrorCode::kArityMismatch: return "arity-mismatch";
    case ParseErrorCode::kNonNumeric: return "non-numeric";
    case ParseErrorCode::kDuplicateClause: return "duplicate-clause";
    case ParseErrorCode::kBadMemoKind: return "bad-memo-kind";
    case ParseErrorCode::kBadPerfoKind: return "bad-perfo-kind";
    case ParseErrorCode::kBadLevel: return "bad-level";
    case ParseErrorCode::kBadSection: return "bad-section";
    case ParseErrorCode::kOutOfRange: return "out-of-range";
    case ParseErrorCode::kMissingInput: return "missing-input";
    case ParseErrorCode::kMissingOutput: return "missing-output";
  }
  return "?";
}

/// Parse failure with the error class and the byte offset it was found at.
class DirectiveError : public SimtError {
 public:
  DirectiveError(ParseErrorCode code, std::size_t offset, const std::string& message)
      : SimtError("directive error at byte " + std::to_string(offset) + " [" +
                  parse_error_code_name(code) + "]: " + message),
        code(code),
        offset(offset) {}

  ParseErrorCode code;
  std::size_t offset;
};

namespace detail {

class DirectiveParser {
 public:
  explicit DirectiveParser(std::string_view text) : text_(text) {}

  ApproxSpec parse() {
    skip_ws();
    if (at_end()) fail(ParseErrorCode::kEmptyDirective, pos_, "directive is empty");
    // Optional "approx" introducer, as the pragma would carry.
    std::size_t mark = pos_;
    std::string head = peek_ident();
    if (head == "approx") ident();
    (void)mark;

    while (skip_ws(), !at_end()) clause();

    if (!seen_technique_)
      fail(ParseErrorCode::kUnknownClause, 0, "directive has no memo or perfo clause");
    if (spec_.technique == Technique::kIact && spec_.inputs.empty())
      fail(ParseErrorCode::kMissingInput, technique_offset_,
           "memo(in:...) requires an in(...) clause");
    if ((spec_.technique == Technique::kIact || spec_.technique == Technique::kTaf) &&
        spec_.outputs.empty())
      fail(ParseErrorCode::kMissingOutput, technique_offset_,
           "memoization requires an out(...) clause");
    spec_.validate();
    return spec_;
  }

 private:
  [[noreturn]] void fail(ParseErrorCode code, std::size_t offset, const std::string& msg) {
    throw DirectiveError(code, offset, msg);
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char cur() const { return text_[pos_]; }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(cur()))) ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (at_end() || cur() != c)
      fail(ParseErrorCode::kUnexpectedChar, pos_,
           std::string("expected '") + c + "'");
    ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (!at_end() && cur() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  // Argument-tuple separators: a ')' where ':' belongs (or vice versa)
  // is an arity error, not a generic syntax error.
  void expect_sep(const std::string& clause) {
    skip_ws();
    if (!at_end() && cur() == ':') {
      ++pos_;
      return;
    }
    if (!at_end() && cur() == ')')
      fail(ParseErrorCode::kArityMismatch, pos_, clause + " has too few arguments");
    fail(ParseErrorCode::kUnexpectedChar, pos_, "expected ':'");
  }

  void expect_close(const std::string& clause) {
    skip_ws();
    if (!at_end() && cur() == ')') {
      ++pos_;
      return;
    }
    if (!at_end() && cur() == ':')
      fail(ParseErrorCode::kArityMismatch, pos_, clause + " has too many arguments");
    fail(ParseErrorCode::kUnexpectedChar, pos_, "expected ')'");
  }

  std::string peek_ident() {
    std::size_t p = pos_;
    std::string s;
    while (p < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[p])) || text_[p] == '_'))
      s += text_[p++];
    return s;
  }

  std::string ident() {
    skip_ws();
    std::size_t start = pos_;
    std::string s = peek_ident();
    if (s.empty() || std::isdigit(static_cast<unsigned char>(text_[pos_])))
      fail(ParseErrorCode::kUnexpectedChar, start, "expected identifier");
    pos_ += s.size();
    return s;
  }

  long long integer(const std::string& what) {
    skip_ws();
    std::size_t start = pos_;
    bool neg = accept('-');
    if (at_end() || !std::isdigit(static_cast<unsigned char>(cur())))
      fail(ParseErrorCode::kNonNumeric, start, what + " must be an integer");
    long long v = 0;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(cur()))) {
      v = v * 10 + (cur() - '0');
      ++pos_;
    }
    return neg ? -v : v;
  }

  double real(const std::string& what) {
    skip_ws();
    std::size_t start = pos_;
    std::size_t end = pos_;
    while (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) ||
                                  text_[end] == '.' || text_[end] == '+' ||
                                  text_[end] == '-' || text_[end] == '_'))
      ++end;
    double v;
    if (end == pos_ || !parse_double(text_.substr(pos_, end - pos_), v))
      fail(ParseErrorCode::kNonNumeric, start, what + " must be numeric");
    pos_ = end;
    return v;
  }

  void clause() {
    skip_ws();
    std::size_t start = pos_;
    std::string name = ident();
    if (name == "memo")
      memo_clause(start);
    else if (name == "perfo")
      perfo_clause(start);
    else if (name == "level")
      level_clause(start);
    else if (name == "in")
      section_clause(start, spec_.inputs, seen_in_);
    else if (name == "out")
      section_clause(start, spec_.outputs, seen_out_);
    else
      fail(ParseErrorCode::kUnknownClause, start, "unknown clause '" + name + "'");
  }

  void technique_guard(std::size_t start) {
    if (seen_technique_)
      fail(ParseErrorCode::kDuplicateClause, start,
           "directive already has a technique clause");
    seen_technique_ = true;
    technique_offset_ = start;
  }

  void memo_clause(std::size_t start) {
    technique_guard(start);
    expect('(');
    std::size_t kind_at = pos_;
    std::string kind = ident();
    if (kind == "in") {
      IactConfig cfg;
      expect_sep("memo(in)");
      cfg.table_size = checked_int(integer("table size"), 1, kind_at, "table size");
      expect_sep("memo(in)");
      cfg.threshold = checked_real(real("distance threshold"), kind_at, "distance threshold");
      if (accept(':'))
        cfg.tables_per_warp =
            checked_int(integer("tables per warp"), 1, kind_at, "tables per warp");
      expect_close("memo(in)");
      spec_.technique = Technique::kIact;
      spec_.iact = cfg;
    } else if (kind == "out") {
      TafConfig cfg;
      expect_sep("memo(out)");
      cfg.h_size = checked_int(integer("history size"), 1, kind_at, "history size");
      expect_sep("memo(out)");
      cfg.p_size = checked_int(integer("prediction size"), 1, kind_at, "prediction size");
      expect_sep("memo(out)");
      cfg.threshold = checked_real(real("RSD threshold"), kind_at, "RSD threshold");
      expect_close("memo(out)");
      spec_.technique = Technique::kTaf;
      spec_.taf = cfg;
    } else {
      fail(ParseErrorCode::kBadMemoKind, kind_at,
           "memo kind must be 'in' or 'out', got '" + kind + "'");
    }
  }

  void perfo_clause(std::size_t start) {
    technique_guard(start);
    expect('(');
    std::size_t kind_at = pos_;
    std::string kind = ident();
    PerfoConfig cfg;
    if (kind == "small")
      cfg.kind = PerfoKind::kSmall;
    else if (kind == "large")
      cfg.kind = PerfoKind::kLarge;
    else if (kind == "ini")
      cfg.kind = PerfoKind::kIni;
    else if (kind == "fini")
      cfg.kind = PerfoKind::kFini;
    else if (kind == "herded_small")
      cfg.kind = PerfoKind::kHerdedSmall;
    else if (kind == "herded_large")
      cfg.kind = PerfoKind::kHerdedLarge;
    else
      fail(ParseErrorCode::kBadPerfoKind, kind_at, "unknown perforation kind '" + kind + "'");
    expect_sep("perfo");
    if (perfo_kind_uses_modulus(cfg.kind))
      cfg.modulus = checked_int(integer("skip modulus"), 2, kind_at, "skip modulus");
    else {
      long long p = integer("skip percent");
      if (p < 1 || p > 99)
        fail(ParseErrorCode::kOutOfRange, kind_at, "skip percent must be in [1, 99]");
      cfg.skip_percent = static_cast<int>(p);
    }
    expect_close("perfo");
    spec_.technique = Technique::kPerfo;
    spec_.perfo = cfg;
  }

  void level_clause(std::size_t start) {
    if (seen_level_)
      fail(ParseErrorCode::kDuplicateClause, start, "duplicate level clause");
    seen_level_ = true;
    expect('(');
    std::size_t at = pos_;
    std::string name = ident();
    if (name == "thread")
      spec_.level = Level::kThread;
    else if (name == "warp")
      spec_.level = Level::kWarp;
    else if (name == "team" || name == "block")
      spec_.level = Level::kTeam;
    else
      fail(ParseErrorCode::kBadLevel, at,
           "level must be thread, warp, or team; got '" + name + "'");
    expect(')');
  }

  // Multiple in()/out() clauses are accepted and merged; unparse
  // canonicalizes them back into one clause each.
  void section_clause(std::size_t start, std::vector<ArraySection>& into, bool& seen) {
    (void)start;
    seen = true;
    expect('(');
    do {
      into.push_back(section());
    } while (accept(','));
    expect(')');
  }

  ArraySection section() {
    skip_ws();
    std::size_t at = pos_;
    ArraySection s;
    s.base = ident();
    expect('[');
    s.start = affine_index(at);
    if (accept(':')) {
      s.length = dim("section length", at);
      if (accept(':')) s.stride = dim("section stride", at);
    }
    expect(']');
    if (!s.length.is_symbolic() && s.length.value < 1)
      fail(ParseErrorCode::kOutOfRange, at, "section length must be >= 1");
    if (!s.stride.is_symbolic() && s.stride.value < 1)
      fail(ParseErrorCode::kOutOfRange, at, "section stride must be >= 1");
    return s;
  }

  // a*i + b with integer a, b; the loop variable is spelled i.
  AffineIndex affine_index(std::size_t at) {
    AffineIndex idx;
    bool first = true;
    for (;;) {
      skip_ws();
      long long sign = 1;
      if (accept('+')) sign = 1;
      else if (accept('-')) sign = -1;
      else if (!first) break;
      skip_ws();
      if (at_end()) fail(ParseErrorCode::kBadSection, at, "unterminated index expression");
      if (std::isdigit(static_cast<unsigned char>(cur()))) {
        long long v = integer("index term");
        if (accept('*')) {
          std::string var = ident();
          if (var != "i")
            fail(ParseErrorCode::kBadSection, at, "index must be affine in i");
          idx.coef += sign * v;
        } else {
          idx.offset += sign * v;
        }
      } else {
        std::string var = ident();
        if (var != "i") fail(ParseErrorCode::kBadSection, at, "index must be affine in i");
        if (accept('*')) {
          skip_ws();
          if (at_end() || !std::isdigit(static_cast<unsigned char>(cur())))
            fail(ParseErrorCode::kBadSection, at, "index must be affine in i");
          long long v = integer("index coefficient");
          idx.coef += sign * v;
        } else {
          idx.coef += sign;
        }
      }
      first = false;
      skip_ws();
      if (at_end() || (cur() != '+' && cur() != '-')) break;
    }
    return idx;
  }

  SectionDim dim(const std::string& what, std::size_t at) {
    skip_ws();
    if (!at_end() && std::isdigit(static_cast<unsigned char>(cur())))
      return SectionDim::literal(integer(what));
    std::string sym = peek_ident();
    if (sym.empty()) fail(ParseErrorCode::kBadSection, at, what + " must be an integer or symbol");
    if (sym == "i") fail(ParseErrorCode::kBadSection, at, what + " cannot be the loop variable");
    pos_ += sym.size();
    return SectionDim::sym(sym);
  }

  int checked_int(long long v, long long min, std::size_t at, const std::string& what) {
    if (v < min)
      fail(ParseErrorCode::kOutOfRange, at, what + " must be >= " + std::to_string(min));
    return static_cast<int>(v);
  }

  double checked_real(double v, std::size_t at, const std::string& what) {
    if (!(v >= 0.0)) fail(ParseErrorCode::kOutOfRange, at, what + " must be >= 0");
    return v;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  ApproxSpec spec_;
  bool seen_technique_ = false;
  bool seen_level_ = false;
  bool seen_in_ = false;
  bool seen_out_ = false;
  std::size_t technique_offset_ = 0;
};

inline std::string render_affine(const AffineIndex& idx) {
  std::string s;
  if (idx.coef == 0) return std::to_string(idx.offset);
  if (idx.coef == 1)
    s = "i";
  else
    s = "i*" + std::to_string(idx.coef);
  if (idx.offset > 0) s += "+" + std::to_string(idx.offset);
  if (idx.offset < 0) s += std::to_string(idx.offset);
  return s;
}

inline std::string render_dim(const SectionDim& d) {
  return d.is_symbolic() ? d.symbol : std::to_string(d.value);
}

inline std::string render_section(const ArraySection& s) {
  std::string out = s.base + "[" + render_affine(s.start);
  bool default_len = !s.length.is_symbolic() && s.length.value == 1;
  bool default_stride = !s.stride.is_symbolic() && s.stride.value == 1;
  if (!default_len || !default_stride) {
    out += ":" + render_dim(s.length);
    if (!default_stride) out += ":" + render_dim(s.stride);
  }
  return out + "]";
}

inline std::string render_sections(const std::vector<ArraySection>& sections) {
  std::string out;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    if (i) out += ",";
    out += render_section(sections[i]);
  }
  return out;
}

}  // namespace detail

/// Parse one approx directive (clauses in any order) into a validated spec.
inline ApproxSpec parse_directive(std::string_view text) {
  return detail::DirectiveParser(text).parse();
}

/// Canonical directive string: technique clause, then level when not the
/// thread default, then merged in/out clauses; defaults elided.
inline std::string unparse(const ApproxSpec& spec) {
  spec.validate();
  std::string out;
  switch (spec.technique) {
    case Technique::kTaf:
      out = "memo(out:" + std::to_string(spec.taf->h_size) + ":" +
            std::to_string(spec.taf->p_size) + ":" + format_double(spec.taf->threshold) + ")";
      break;
    case Technique::kIact:
      out = "memo(in:" + std::to_string(spec.iact->table_size) + ":" +
            format_double(spec.iact->threshold);
      if (spec.iact->tables_per_warp)
        out += ":" + std::to_string(*spec.iact->tables_per_warp);
      out += ")";
      break;
    case Technique::kPerfo: {
      int arg = perfo_kind_uses_modulus(spec.perfo->kind) ? spec.perfo->modulus
                                                          : spec.perfo->skip_percent;
      out = "perfo(" + perfo_kind_name(spec.perfo->kind) + ":" + std::to_string(arg) + ")";
      break;
    }
  }
  if (spec.level != Level::kThread) out += " level(" + level_name(spec.level) + ")";
  if (!spec.inputs.empty()) out += " in(" + detail::render_sections(spec.inputs) + ")";
  if (!spec.outputs.empty()) out += " out(" + detail::render_sections(spec.outputs) + ")";
  return out;
}

}  // namespace simtac
