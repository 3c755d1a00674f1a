#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "simtac/directive.hpp"

using namespace simtac;

TEST_CASE("iACT directive with warp level and strided section") {
  ApproxSpec spec =
      parse_directive("memo(in:2:0.5f:4) level(warp) in(input[i*5:5:N]) out(output1[i])");
  CHECK(spec.technique == Technique::kIact);
  REQUIRE(spec.iact.has_value());
  CHECK(spec.iact->table_size == 2);
  CHECK(spec.iact->threshold == 0.5);
  REQUIRE(spec.iact->tables_per_warp.has_value());
  CHECK(*spec.iact->tables_per_warp == 4);
  CHECK(spec.level == Level::kWarp);
  REQUIRE(spec.inputs.size() == 1);
  const ArraySection& in = spec.inputs[0];
  CHECK(in.base == "input");
  CHECK(in.start == AffineIndex{5, 0});
  CHECK(in.length == SectionDim::literal(5));
  CHECK(in.stride == SectionDim::sym("N"));
  REQUIRE(spec.outputs.size() == 1);
  CHECK(spec.outputs[0].base == "output1");
  CHECK(spec.outputs[0].start == AffineIndex{1, 0});
  CHECK(spec.outputs[0].length == SectionDim::literal(1));
}

TEST_CASE("TAF directive with thread level") {
  ApproxSpec spec = parse_directive("memo(out:3:5:1.5f) level(thread) out(output2[i])");
  CHECK(spec.technique == Technique::kTaf);
  REQUIRE(spec.taf.has_value());
  CHECK(spec.taf->h_size == 3);
  CHECK(spec.taf->p_size == 5);
  CHECK(spec.taf->threshold == 1.5);
  CHECK(spec.level == Level::kThread);
  CHECK(spec.inputs.empty());
}

TEST_CASE("perforation directive defaults to thread level") {
  ApproxSpec spec = parse_directive("perfo(small:4)");
  CHECK(spec.technique == Technique::kPerfo);
  REQUIRE(spec.perfo.has_value());
  CHECK(spec.perfo->kind == PerfoKind::kSmall);
  CHECK(spec.perfo->modulus == 4);
  CHECK(spec.level == Level::kThread);
}

TEST_CASE("clauses parse in any order, approx introducer allowed") {
  ApproxSpec a = parse_directive("out(y[i]) level(team) memo(out:1:2:0.5)");
  ApproxSpec b = parse_directive("approx memo(out:1:2:0.5) level(block) out(y[i])");
  CHECK(a == b);
  CHECK(a.level == Level::kTeam);
}

TEST_CASE("numeric suffix tolerance") {
  ApproxSpec a = parse_directive("memo(out:1:2:0.5f) out(y[i])");
  ApproxSpec b = parse_directive("memo(out:1:2:0.5) out(y[i])");
  ApproxSpec c = parse_directive("memo(out:1:2:5) out(y[i])");
  CHECK(a.taf->threshold == 0.5);
  CHECK(b.taf->threshold == 0.5);
  CHECK(c.taf->threshold == 5.0);
  ApproxSpec d = parse_directive("memo(out:1:2:inf) out(y[i])");
  CHECK(std::isinf(d.taf->threshold));
}

TEST_CASE("unparse canonicalizes and round-trips the worked examples") {
  const char* texts[] = {
      "memo(in:2:0.5f:4) level(warp) in(input[i*5:5:N]) out(output1[i])",
      "memo(out:3:5:1.5f) level(thread) out(output2[i])",
      "perfo(small:4)",
  };
  for (const char* text : texts) {
    ApproxSpec spec = parse_directive(text);
    std::string canonical = unparse(spec);
    ApproxSpec again = parse_directive(canonical);
    CHECK(again == spec);
    CHECK(unparse(again) == canonical);  // idempotent on canonical form
  }
  // Default elision: thread level and f suffixes disappear.
  CHECK(unparse(parse_directive("memo(out:3:5:1.5f) level(thread) out(output2[i])")) ==
        "memo(out:3:5:1.5) out(output2[i])");
}

TEST_CASE("multiple in clauses merge and canonicalize to one") {
  ApproxSpec a = parse_directive("memo(in:2:0.5) in(a[i],b[i*2+1:3]) out(y[i])");
  ApproxSpec b = parse_directive("memo(in:2:0.5) in(a[i]) in(b[i*2+1:3]) out(y[i])");
  CHECK(a == b);
  CHECK(unparse(a) == "memo(in:2:0.5) in(a[i],b[i*2+1:3]) out(y[i])");
}

namespace {

ApproxSpec random_spec(std::mt19937_64& rng) {
  auto random_section = [&](const char* base) {
    ArraySection s;
    s.base = std::string(base) + std::to_string(rng() % 3);
    switch (rng() % 4) {
      case 0: s.start = {1, 0}; break;
      case 1: s.start = {static_cast<long long>(2 + rng() % 7), 0}; break;
      case 2: s.start = {1, static_cast<long long>(rng() % 5)}; break;
      default: s.start = {0, static_cast<long long>(rng() % 9)}; break;
    }
    if (rng() % 2) s.length = SectionDim::literal(1 + rng() % 8);
    switch (rng() % 3) {
      case 0: break;
      case 1: s.stride = SectionDim::literal(1 + rng() % 5); break;
      default: s.stride = SectionDim::sym("N"); break;
    }
    return s;
  };

  ApproxSpec spec;
  spec.level = static_cast<Level>(rng() % 3);
  double thresholds[] = {0.0, 0.3, 0.5, 1.5, 5.0, 20.0,
                         std::numeric_limits<double>::infinity()};
  switch (rng() % 3) {
    case 0: {
      spec.technique = Technique::kTaf;
      spec.taf = TafConfig{1 + static_cast<int>(rng() % 5), 1 + static_cast<int>(rng() % 512),
                           thresholds[rng() % 7]};
      break;
    }
    case 1: {
      spec.technique = Technique::kIact;
      IactConfig cfg;
      cfg.table_size = 1 + static_cast<int>(rng() % 8);
      cfg.threshold = thresholds[rng() % 6];
      if (rng() % 2) cfg.tables_per_warp = 1 << (rng() % 6);
      spec.iact = cfg;
      spec.inputs.push_back(random_section("in"));
      if (rng() % 2) spec.inputs.push_back(random_section("in"));
      break;
    }
    default: {
      spec.technique = Technique::kPerfo;
      PerfoConfig cfg;
      PerfoKind kinds[] = {PerfoKind::kSmall,       PerfoKind::kLarge,
                           PerfoKind::kIni,         PerfoKind::kFini,
                           PerfoKind::kHerdedSmall, PerfoKind::kHerdedLarge};
      cfg.kind = kinds[rng() % 6];
      if (perfo_kind_uses_modulus(cfg.kind))
        cfg.modulus = 2 + static_cast<int>(rng() % 63);
      else
        cfg.skip_percent = 1 + static_cast<int>(rng() % 99);
      spec.perfo = cfg;
      break;
    }
  }
  if (spec.technique != Technique::kPerfo || rng() % 2)
    spec.outputs.push_back(random_section("out"));
  return spec;
}

}  // namespace

TEST_CASE("parse-unparse identity on 1000 generated specs") {
  std::mt19937_64 rng(31337);
  for (int iter = 0; iter < 1000; ++iter) {
    ApproxSpec spec = random_spec(rng);
    std::string canonical = unparse(spec);
    INFO(canonical);
    ApproxSpec parsed = parse_directive(canonical);
    CHECK(parsed == spec);
    CHECK(unparse(parsed) == canonical);
  }
}

TEST_CASE("each malformed-input class yields its designated diagnostic") {
  auto code_of = [](const std::string& text) {
    try {
      parse_directive(text);
    } catch (const DirectiveError& e) {
      return e.code;
    }
    throw std::runtime_error("expected parse failure: " + text);
  };

  CHECK(code_of("") == ParseErrorCode::kEmptyDirective);
  CHECK(code_of("frobnicate(3)") == ParseErrorCode::kUnknownClause);
  CHECK(code_of("memo(out:1:2) out(y[i])") == ParseErrorCode::kArityMismatch);
  CHECK(code_of("memo(out:1:2:3:4) out(y[i])") == ParseErrorCode::kArityMismatch);
  CHECK(code_of("memo(in:x:0.5) in(a[i]) out(y[i])") == ParseErrorCode::kNonNumeric);
  CHECK(code_of("memo(out:1:2:zz) out(y[i])") == ParseErrorCode::kNonNumeric);
  CHECK(code_of("memo(out:1:2:3) perfo(small:4) out(y[i])") ==
        ParseErrorCode::kDuplicateClause);
  CHECK(code_of("level(warp) level(team) perfo(small:4)") == ParseErrorCode::kDuplicateClause);
  CHECK(code_of("memo(inout:1:2) out(y[i])") == ParseErrorCode::kBadMemoKind);
  CHECK(code_of("perfo(tiny:4)") == ParseErrorCode::kBadPerfoKind);
  CHECK(code_of("perfo(small:4) level(grid)") == ParseErrorCode::kBadLevel);
  CHECK(code_of("memo(in:2:0.5) in(a[i*i:2]) out(y[i])") == ParseErrorCode::kBadSection);
  CHECK(code_of("memo(in:2:0.5) in(a[j]) out(y[i])") == ParseErrorCode::kBadSection);
  CHECK(code_of("perfo(ini:0)") == ParseErrorCode::kOutOfRange);
  CHECK(code_of("perfo(small:1)") == ParseErrorCode::kOutOfRange);
  CHECK(code_of("memo(in:0:0.5) in(a[i]) out(y[i])") == ParseErrorCode::kOutOfRange);
  CHECK(code_of("memo(in:2:0.5:4) out(y[i])") == ParseErrorCode::kMissingInput);
  CHECK(code_of("memo(out:1:2:3)") == ParseErrorCode::kMissingOutput);
  CHECK(code_of("memo(out:1:2:0.5") == ParseErrorCode::kUnexpectedChar);
}

TEST_CASE("every diagnostic carries a byte offset") {
  try {
    parse_directive("memo(out:1:2:3) out(y[i]) level(grid)");
    FAIL("expected failure");
  } catch (const DirectiveError& e) {
    CHECK(e.code == ParseErrorCode::kBadLevel);
    CHECK(e.offset == 32);  // points at "grid"
  }
  try {
    parse_directive("memo(in:2:q) in(a[i]) out(y[i])");
    FAIL("expected failure");
  } catch (const DirectiveError& e) {
    CHECK(e.code == ParseErrorCode::kNonNumeric);
    CHECK(e.offset == 10);  // points at "q"
  }
}

TEST_CASE("spec-level validation rejects inconsistent payloads") {
  ApproxSpec spec;
  spec.technique = Technique::kIact;
  IactConfig cfg;
  cfg.table_size = 2;
  cfg.threshold = 0.5;
  spec.iact = cfg;
  spec.outputs.push_back(ArraySection{"y", {1, 0}, SectionDim::literal(1), SectionDim::literal(1)});
  CHECK_THROWS_AS(spec.validate(), ConfigError);  // no inputs
  spec.inputs.push_back(ArraySection{"x", {1, 0}, SectionDim::literal(1), SectionDim::literal(1)});
  CHECK_NOTHROW(spec.validate());
  spec.taf = TafConfig{1, 1, 0.0};
  CHECK_THROWS_AS(spec.validate(), ConfigError);  // two payloads
}
