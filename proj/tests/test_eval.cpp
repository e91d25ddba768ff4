#include <catch2/catch_amalgamated.hpp>

#include "mrbf/eval.hpp"

using namespace mrbf;

namespace {

ConfusionMatrix diag_confusion(long per_class) {
  ConfusionMatrix cm;
  for (int i = 0; i < 26; ++i) cm.counts[i][i] = per_class;
  return cm;
}

}  // namespace

TEST_CASE("accuracy") {
  SECTION("250 correct of 260") {
    ConfusionMatrix cm = diag_confusion(0);
    for (int i = 0; i < 26; ++i) cm.counts[i][i] = i < 24 ? 10 : 5;  // 250 on the diagonal
    cm.counts[24][0] = 5;
    cm.counts[25][1] = 5;
    REQUIRE(cm.total() == 260);
    REQUIRE(cm.trace() == 250);
    REQUIRE(accuracy(cm) == 96.15);
  }
  SECTION("diagonal matrix scores 100.00") { REQUIRE(accuracy(diag_confusion(4)) == 100.0); }
  SECTION("empty matrix rejected") {
    REQUIRE_THROWS_AS(accuracy(ConfusionMatrix{}), std::domain_error);
  }
  SECTION("accuracy plus error rate is 100 to formatting precision") {
    ConfusionMatrix cm = diag_confusion(3);
    cm.counts['a' - 'a']['o' - 'a'] = 7;
    cm.counts['x' - 'a']['z' - 'a'] = 2;
    const double acc = accuracy(cm);
    const double err = std::round(10000.0 * (cm.total() - cm.trace()) / cm.total()) / 100.0;
    REQUIRE(std::abs(acc + err - 100.0) <= 0.01);
  }
}

TEST_CASE("within_group_errors") {
  const GroupTable table = GroupTable::defaults();
  SECTION("a predicted as o counts, a predicted as x does not") {
    ConfusionMatrix cm;
    cm.counts['a' - 'a']['o' - 'a'] = 3;
    cm.counts['a' - 'a']['x' - 'a'] = 5;
    REQUIRE(within_group_errors(cm, table) == 3);
  }
  SECTION("diagonal-only matrix has none") {
    REQUIRE(within_group_errors(diag_confusion(9), table) == 0);
  }
  SECTION("bounded by the total off-diagonal count") {
    ConfusionMatrix cm;
    cm.counts['c' - 'a']['e' - 'a'] = 2;
    cm.counts['c' - 'a']['s' - 'a'] = 1;
    cm.counts['b' - 'a']['q' - 'a'] = 4;
    cm.counts['m' - 'a']['m' - 'a'] = 10;
    const long off_diag = cm.total() - cm.trace();
    REQUIRE(within_group_errors(cm, table) <= off_diag);
    REQUIRE(within_group_errors(cm, table) == 3);
  }
}

TEST_CASE("error_reduction") {
  SECTION("baseline 10, method 2 gives 80%") { REQUIRE(error_reduction(10, 2) == 80.0); }
  SECTION("no change gives 0%") { REQUIRE(error_reduction(6, 6) == 0.0); }
  SECTION("zero baseline is not applicable") { REQUIRE(!error_reduction(0, 3).has_value()); }
  SECTION("swapping arguments flips the sign") {
    const double fwd = *error_reduction(10, 2);
    const double bwd = *error_reduction(2, 10);
    REQUIRE(fwd > 0.0);
    REQUIRE(bwd < 0.0);
    REQUIRE(*error_reduction(5, 5) == 0.0);
  }
  SECTION("negative counts rejected") {
    REQUIRE_THROWS_AS(error_reduction(-1, 0), std::invalid_argument);
  }
}

TEST_CASE("make_report") {
  const GroupTable table = GroupTable::defaults();
  ConfusionMatrix cm = diag_confusion(2);
  cm.counts['a' - 'a']['o' - 'a'] = 1;  // within-group error
  cm.counts['b' - 'a']['y' - 'a'] = 1;  // cross-group error
  const EvalReport r = make_report(cm, table, 42, "deadbeef");

  REQUIRE(r.accuracy_percent == accuracy(cm));
  REQUIRE(r.within_group_error_count == 1);
  REQUIRE(r.seed == 42);
  REQUIRE(r.per_category.at("central") < 100.0);
  REQUIRE(r.per_group.at("ao") < 100.0);
  REQUIRE(r.per_group.at("xz") == 100.0);
}

TEST_CASE("report rendering") {
  const GroupTable table = GroupTable::defaults();
  ConfusionMatrix cm = diag_confusion(3);
  cm.counts['c' - 'a']['e' - 'a'] = 2;
  EvalReport r = make_report(cm, table, 7, "cafe");
  r.extra["baseline_knn_accuracy"] = "80.00";

  SECTION("plain table is a header plus one line per row") {
    const std::string text = render_report(r, ReportFormat::plain_table);
    const long lines = std::count(text.begin(), text.end(), '\n');
    const long expected_rows = 2  // accuracy + within-group errors
                               + static_cast<long>(r.per_category.size()) +
                               static_cast<long>(r.per_group.size()) +
                               static_cast<long>(r.extra.size());
    REQUIRE(lines == 1 + expected_rows);
    REQUIRE(text.rfind("Measure", 0) == 0);
  }
  SECTION("accuracy is printed with exactly two decimals in both formats") {
    for (ReportFormat f : {ReportFormat::plain_table, ReportFormat::machine}) {
      const std::string text = render_report(r, f);
      const std::string needle = f == ReportFormat::machine ? "accuracy=" : "[%]";
      const auto pos = text.find(needle);
      REQUIRE(pos != std::string::npos);
      const auto digits = text.substr(text.find_first_of("0123456789", pos));
      const auto dot = digits.find('.');
      REQUIRE(dot != std::string::npos);
      REQUIRE(std::isdigit(static_cast<unsigned char>(digits[dot + 1])));
      REQUIRE(std::isdigit(static_cast<unsigned char>(digits[dot + 2])));
      REQUIRE(!std::isdigit(static_cast<unsigned char>(digits[dot + 3])));
    }
  }
  SECTION("machine output round-trips to identical fields") {
    const std::string text = render_report(r, ReportFormat::machine);
    const EvalReport back = parse_report(text);
    REQUIRE(back.accuracy_percent == r.accuracy_percent);
    REQUIRE(back.within_group_error_count == r.within_group_error_count);
    REQUIRE(back.per_category == r.per_category);
    REQUIRE(back.per_group == r.per_group);
    REQUIRE(back.extra == r.extra);
    REQUIRE(back.seed == r.seed);
    REQUIRE(back.config_hash == r.config_hash);
    REQUIRE(back.confusion.counts == r.confusion.counts);
  }
  SECTION("unknown keys rejected when parsing") {
    REQUIRE_THROWS_AS(parse_report("nonsense=1\n"), std::runtime_error);
  }
}
