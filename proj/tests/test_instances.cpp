#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <string>

#include "qopt/instances.hpp"

using namespace qopt;

namespace {

const std::string kData = QOPT_DATA_DIR;

const std::vector<InstanceDescriptor>& catalog() {
  static const auto c = read_catalog(kData + "/catalog.txt");
  return c;
}

std::size_t parse_error_line(const std::function<void()>& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.line();
  }
  ADD_FAILURE() << "no ParseError";
  return 0;
}

const char* kTiny = R"(NAME : tiny
TYPE : TSP
DIMENSION : 4
EDGE_WEIGHT_TYPE : EXPLICIT
EDGE_WEIGHT_FORMAT : %s
EDGE_WEIGHT_SECTION
%s
EOF
)";

TspInstance tiny(const std::string& format, const std::string& body) {
  char buf[512];
  std::snprintf(buf, sizeof buf, kTiny, format.c_str(), body.c_str());
  return parse_tsplib(buf);
}

// Symmetric 4-city matrix used by the explicit-format tests.
const Matrix kFour = {{0, 1, 2, 3}, {1, 0, 4, 5}, {2, 4, 0, 6}, {3, 5, 6, 0}};

}  // namespace

TEST(Tsplib, ExplicitFormatsAgree) {
  EXPECT_EQ(tiny("FULL_MATRIX", "0 1 2 3\n1 0 4 5\n2 4 0 6\n3 5 6 0").distance, kFour);
  EXPECT_EQ(tiny("UPPER_ROW", "1 2 3\n4 5\n6").distance, kFour);
  EXPECT_EQ(tiny("UPPER_DIAG_ROW", "0 1 2 3 0 4 5 0 6 0").distance, kFour);
  EXPECT_EQ(tiny("LOWER_DIAG_ROW", "0\n1 0\n2 4 0\n3 5 6 0").distance, kFour);
  EXPECT_EQ(tiny("lower_diag_row", "0 1 0 2 4 0 3 5 6 0").name, "tiny");
}

TEST(Tsplib, EuclideanRoundsToNearest) {
  const auto t = parse_tsplib(
      "NAME: tri\nTYPE: TSP\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n"
      "1 0 0\n3 3 4\n2 0 2.5\nEOF\n");
  EXPECT_EQ(t.distance[0][2], 5);
  EXPECT_EQ(t.distance[0][1], 3);  // 2.5 rounds up
  EXPECT_EQ(t.distance[1][2], 3);  // hypot(3, 1.5) = 3.354
  EXPECT_EQ(t.distance[2][0], 5);
}

TEST(Tsplib, Errors) {
  EXPECT_EQ(parse_error_line([] { tiny("FULL_MATRIX", "0 1 2 3\n1 0 4 5\n2 4 0 6"); }), 6u);
  EXPECT_EQ(parse_error_line([] { tiny("UPPER_ROW", "1 2 x\n4 5\n6"); }), 7u);
  EXPECT_THROW(tiny("FUNCTION", "1"), ParseError);
  EXPECT_THROW(parse_tsplib("NAME: a\nTYPE: ATSP\nDIMENSION: 2\n"), ParseError);
  EXPECT_THROW(parse_tsplib("NAME: a\nTYPE: TSP\n"), ParseError);
  EXPECT_THROW(parse_tsplib("NAME: a\nTYPE: TSP\nDIMENSION: 2\nEDGE_WEIGHT_TYPE: GEO\n"), ParseError);
  EXPECT_EQ(parse_error_line([] { parse_tsplib("NAME: a\n1 2 3\n"); }), 2u);
  EXPECT_EQ(parse_error_line([] {
              parse_tsplib("TYPE: TSP\nDIMENSION: 2\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n1 0 0\n1 1 1\n");
            }),
            6u);
  // Nonzero diagonal is rejected by instance validation.
  EXPECT_THROW(tiny("FULL_MATRIX", "1 1 2 3\n1 0 4 5\n2 4 0 6\n3 5 6 0"), SizeError);
}

TEST(Tours, ParsesSectionAndBareLists) {
  EXPECT_EQ(parse_tour("TYPE : TOUR\nTOUR_SECTION\n1\n3\n2\n-1\nEOF\n").order(), (std::vector<int>{1, 3, 2}));
  EXPECT_EQ(parse_tour("# comment\n2 1 3\n").order(), (std::vector<int>{2, 1, 3}));
  EXPECT_EQ(read_tour_ids("1 2 2"), (std::vector<int>{1, 2, 2}));
  EXPECT_THROW(parse_tour("1 2 2"), ParseError);
  EXPECT_THROW(parse_tour("1 two 3"), ParseError);
}

TEST(Qaplib, ParsesAndChecksCount) {
  const auto q = parse_qaplib("2\n\n0 3\n3 0\n\n0 5\n5 0\n");
  EXPECT_EQ(q.flow, (Matrix{{0, 3}, {3, 0}}));
  EXPECT_EQ(q.distance, (Matrix{{0, 5}, {5, 0}}));
  EXPECT_EQ(qap_objective(q, Permutation::identity(2)), 30);
  EXPECT_THROW(parse_qaplib("2\n0 3 3 0\n0 5 5\n"), ParseError);
  EXPECT_THROW(parse_qaplib(""), ParseError);
  EXPECT_EQ(parse_error_line([] { parse_qaplib("0\n"); }), 1u);
  EXPECT_EQ(parse_error_line([] { parse_qaplib("2\n0 3 3 0\n0 5 q 0\n"); }), 3u);
}

TEST(Mknap, ParsesSeveralInstancesAndComments) {
  const char* text =
      "Two toy instances\n"
      "2 3 7 // K n optimum\n"
      "4 3 2\n"
      "1 1 1\n2 0 3\n"
      "2 3\n"
      "1 2\n"
      "5 6\n"
      "4 4\n"
      "9\n"
      "# trailing comment\n";
  const auto all = parse_orlib_mknap(text);
  ASSERT_EQ(all.size(), 2u);
  EXPECT_EQ(all[0].profits, (std::vector<std::int64_t>{4, 3, 2}));
  EXPECT_EQ(all[0].weights, (Matrix{{1, 2}, {1, 0}, {1, 3}}));
  EXPECT_EQ(all[0].capacities, (std::vector<std::int64_t>{2, 3}));
  EXPECT_EQ(all[0].known_optimum, 7);
  EXPECT_EQ(all[1].profits, (std::vector<std::int64_t>{5, 6}));
  EXPECT_EQ(all[1].weights, (Matrix{{4}, {4}}));
  EXPECT_EQ(all[1].capacities, (std::vector<std::int64_t>{9}));
  EXPECT_FALSE(all[1].known_optimum);
}

TEST(Mknap, Errors) {
  EXPECT_THROW(parse_orlib_mknap("1 3\n1 2 3\n1 1\n"), ParseError);
  EXPECT_EQ(parse_error_line([] { parse_orlib_mknap("1 2\n1 2\n1 1\n-4\n"); }), 4u);
  EXPECT_EQ(parse_error_line([] { parse_orlib_mknap("1 2\n1 2\n1 z\n4\n"); }), 3u);
  EXPECT_THROW(parse_orlib_mknap("0 2\n"), ParseError);
  EXPECT_THROW(load_problem_text("1 1\n1\n1\n1\n", Family::mkp, 1), ParseError);
}

TEST(Selection, Parses) {
  EXPECT_EQ(parse_selection("1 0\n# x\n1\n", 3), (BinaryState{1, 0, 1}));
  EXPECT_THROW(parse_selection("1 0 2", 3), ParseError);
  EXPECT_THROW(parse_selection("1 0", 3), ParseError);
}

TEST(Catalog, ParsesColumnsAndErrors) {
  const auto c = parse_catalog(
      "# header\na tsp upper_row x/a.tsp 4 16 10\nb mkp MKNAP m.txt 3 5 -\nc mkp MKNAP m.txt 3 5\n", "/base");
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0].format, "UPPER_ROW");
  EXPECT_EQ(c[0].path, std::filesystem::path("/base/x/a.tsp"));
  EXPECT_EQ(c[0].optimum, 10);
  EXPECT_FALSE(c[1].optimum);
  EXPECT_EQ(c[1].file_index, 0u);
  EXPECT_EQ(c[2].file_index, 1u);
  EXPECT_EQ(parse_error_line([] { parse_catalog("a tsp F p 1\n", "."); }), 1u);
  EXPECT_EQ(parse_error_line([] { parse_catalog("\na vrp F p 1 1\n", "."); }), 2u);
  EXPECT_EQ(parse_error_line([] { parse_catalog("a tsp F p one 1\n", "."); }), 1u);
  EXPECT_THROW(find_descriptor(c, "zzz"), std::out_of_range);
  EXPECT_THROW(load_problem_file(kData + "/missing.tsp", Family::tsp), std::runtime_error);
}

TEST(Catalog, ListsEveryTableInstance) {
  EXPECT_EQ(catalog().size(), 28u);
  std::size_t mkp = 0, qap = 0, tsp = 0;
  for (const auto& d : catalog()) {
    mkp += d.family == Family::mkp;
    qap += d.family == Family::qap;
    tsp += d.family == Family::tsp;
    EXPECT_TRUE(d.optimum) << d.name;
  }
  EXPECT_EQ(mkp, 8u);
  EXPECT_EQ(qap, 10u);
  EXPECT_EQ(tsp, 10u);
}

// Every vendored file loads, has the catalogued size, and passes validation.
TEST(Catalog, VendoredInstancesLoad) {
  std::size_t loaded = 0;
  for (const auto& d : catalog()) {
    std::optional<ProblemInstance> p;
    try {
      p = load_instance(d);
    } catch (const ParseError&) {
      // Only the weing5..8 instances are not vendored.
      EXPECT_EQ(d.family, Family::mkp) << d.name;
      EXPECT_GE(d.file_index, 4u) << d.name;
      continue;
    }
    ++loaded;
    EXPECT_EQ(natural_size(*p), d.n) << d.name;
    EXPECT_EQ(instance_name(*p), d.name);
    EXPECT_EQ(known_optimum(*p), d.optimum);
    std::visit([](const auto& inst) { inst.validate(); }, *p);
  }
  EXPECT_EQ(loaded, 24u);
}

// Published optimal tours evaluate to the catalogued optimum.
TEST(Catalog, OptimalToursMatchOptima) {
  const std::vector<std::pair<std::string, std::string>> tours = {
      {"gr17", "solutions/gr17.opt.tour"},  {"bays29", "tsplib/bays29.opt.tour"},
      {"bayg29", "tsplib/bayg29.opt.tour"}, {"berlin52", "tsplib/berlin52.opt.tour"},
      {"fri26", "tsplib/fri26.opt.tour"},   {"gr24", "tsplib/gr24.opt.tour"},
      {"st70", "tsplib/st70.opt.tour"}};
  for (const auto& [name, file] : tours) {
    const auto& d = find_descriptor(catalog(), name);
    const auto inst = std::get<TspInstance>(load_instance(d));
    const auto tour = parse_tour(detail::read_text(kData + "/" + file));
    EXPECT_EQ(tsp_objective(inst, tour), *d.optimum) << name;
  }
}

TEST(Catalog, ReferenceSolutionsMatchOptima) {
  const auto had12 = std::get<QapInstance>(load_instance(find_descriptor(catalog(), "had12")));
  EXPECT_EQ(qap_objective(had12, parse_tour(detail::read_text(kData + "/solutions/had12.sln"))), 1652);
  const auto weing1 = std::get<MkpInstance>(load_instance(find_descriptor(catalog(), "weing1")));
  const auto x = parse_selection(detail::read_text(kData + "/solutions/weing1.sel"), weing1.items());
  EXPECT_TRUE(mkp_feasible(weing1, x));
  EXPECT_EQ(mkp_objective(weing1, x), -141278);
}

// Independent check of the EUC_2D rounding against a direct computation.
TEST(Catalog, Berlin52FirstEdge) {
  const auto inst = std::get<TspInstance>(load_instance(find_descriptor(catalog(), "berlin52")));
  // Nodes 1 and 2 of berlin52: (565, 575) and (25, 185).
  EXPECT_EQ(inst.distance[0][1], static_cast<std::int64_t>(std::floor(std::hypot(540.0, 390.0) + 0.5)));
}
