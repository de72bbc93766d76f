#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "strawkit/error.hpp"
#include "strawkit/synth.hpp"
#include "strawkit/tracking.hpp"
#include "support.hpp"

using namespace strawkit;
using namespace strawkit::track;
using std::chrono::day;
using std::chrono::month;
using std::chrono::year;
using std::chrono::year_month_day;

namespace {

io::LabeledPoint point(const Vec3& p, SemanticClass cls, std::uint32_t instance) {
  io::LabeledPoint out;
  out.position = p;
  out.cls = cls;
  out.instance = instance;
  return out;
}

Skeleton chain(const std::vector<Vec3>& pts) {
  Skeleton s;
  s.vertices = pts;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) s.edges.push_back({i, i + 1});
  return s;
}

year_month_day ymd(int y, unsigned m, unsigned d) { return year(y) / month(m) / day(d); }

SeriesEntry entry(year_month_day date, std::string trait, std::optional<double> value,
                  std::optional<std::uint32_t> id = std::nullopt) {
  SeriesEntry e;
  e.date = date;
  e.trait = std::move(trait);
  e.value = value;
  e.id = id;
  if (id) e.cls = 1;
  e.unit = "mm2";
  return e;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("organ counts") {
  LabeledPointCloud c;
  for (std::uint32_t i : {1u, 2u, 3u, 2u}) c.points.push_back(point(Vec3::Zero(), SemanticClass::Leaf, i));
  for (std::uint32_t i : {1u, 2u}) c.points.push_back(point(Vec3::Zero(), SemanticClass::Stem, i));
  c.points.push_back(point(Vec3::Zero(), SemanticClass::Background, 1));
  c.points.push_back(point(Vec3::Zero(), SemanticClass::ScanningTable, 4));
  const auto counts = organ_counts(c);
  CHECK(counts == std::map<SemanticClass, std::size_t>{{SemanticClass::Leaf, 3}, {SemanticClass::Stem, 2}});

  LabeledPointCloud only_table;
  only_table.points.push_back(point(Vec3::Zero(), SemanticClass::ScanningTable, 1));
  CHECK(organ_counts(only_table).empty());

  LabeledPointCloud single;
  single.points.push_back(point(Vec3::Zero(), SemanticClass::Berry, 9));
  CHECK(organ_counts(single) == std::map<SemanticClass, std::size_t>{{SemanticClass::Berry, 1}});

  LabeledPointCloud bare;
  bare.points.push_back(io::LabeledPoint{});
  CHECK(code_of([&] { organ_counts(bare); }) == ErrorCode::UnlabeledCloud);
}

TEST_CASE("property: organ counts sum to distinct (class, instance) pairs") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    LabeledPointCloud c;
    std::set<std::pair<int, std::uint32_t>> pairs;
    const int n = 1 + static_cast<int>(rng() % 60);
    for (int i = 0; i < n; ++i) {
      const auto cls = io::class_from_code(1 + static_cast<long long>(rng() % 9));
      const auto inst = static_cast<std::uint32_t>(rng() % 6);
      c.points.push_back(point(Vec3::Zero(), cls, inst));
      if (cls != SemanticClass::Background && cls != SemanticClass::ScanningTable) pairs.insert({io::class_code(cls), inst});
    }
    std::size_t sum = 0;
    for (const auto& [cls, count] : organ_counts(c)) sum += count;
    CHECK(sum == pairs.size());
  }
}

TEST_CASE("crown anchor") {
  LabeledPointCloud c;
  c.points.push_back(point({1, 0, 0}, SemanticClass::Crown, 1));
  c.points.push_back(point({-1, 0, 0}, SemanticClass::Crown, 1));
  c.points.push_back(point({50, 50, 50}, SemanticClass::Leaf, 1));
  CHECK(crown_anchor(c) == Vec3::Zero());
  LabeledPointCloud one;
  one.points.push_back(point({3, 4, 5}, SemanticClass::Crown, 1));
  CHECK(crown_anchor(one) == Vec3(3, 4, 5));
  LabeledPointCloud none;
  none.points.push_back(point({3, 4, 5}, SemanticClass::Leaf, 1));
  CHECK(code_of([&] { crown_anchor(none); }) == ErrorCode::NoCrownPoints);

  const auto scan = synth::plant_mini(3).scans.front();
  Vec3 sum = Vec3::Zero();
  std::size_t n = 0;
  for (const auto& p : scan.points)
    if (p.cls == SemanticClass::Crown) {
      sum += p.position;
      ++n;
    }
  CHECK((crown_anchor(scan) - sum / static_cast<double>(n)).norm() < 1e-12);
}

TEST_CASE("leaf junction points") {
  const Vec3 crown = Vec3::Zero();
  std::map<std::uint32_t, Skeleton> stems;
  stems[1] = chain({{2, 0, 0}, {20, 0, 0}, {50, 0, 0}});
  // Y with endpoints at distances 2, 30 and 40 from the crown
  Skeleton y;
  y.vertices = {{0, 2, 0}, {0, 10, 0}, {0, 30, 0}, {0, 10, 38.7298334620742}};
  y.edges = {{0, 1}, {1, 2}, {1, 3}};
  stems[2] = y;
  Skeleton loop;
  loop.vertices = {{0, 0, 1}, {1, 0, 1}, {1, 1, 1}};
  loop.edges = {{0, 1}, {1, 2}, {2, 0}};
  stems[3] = loop;

  const auto r = leaf_junction_points(stems, crown);
  REQUIRE(r.junctions.size() == 2);
  CHECK(r.junctions.at(1) == Vec3(50, 0, 0));
  CHECK(r.junctions.at(2) == y.vertices[3]);
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].rfind("SingleEndpoint: stem 3", 0) == 0);
}

TEST_CASE("petiole assignment examples") {
  const auto a = assign_petioles({{1, {0, 0, 0}}, {2, {10, 0, 0}}}, {{1, {1, 0, 0}}, {2, {9, 0, 0}}});
  REQUIRE(a.pairs.size() == 2);
  CHECK(a.pairs[0].stem == 1);
  CHECK(a.pairs[0].leaf == 1);
  CHECK(a.pairs[1].stem == 2);
  CHECK(a.pairs[1].leaf == 2);
  CHECK(a.total_cost() == 2.0);

  const std::map<std::uint32_t, Vec3> same{{4, {1, 2, 3}}, {7, {-5, 0, 2}}, {9, {8, 8, 8}}};
  const auto id = assign_petioles(same, same);
  CHECK(id.total_cost() == 0.0);
  for (const auto& p : id.pairs) CHECK(p.stem == p.leaf);

  const auto surplus = assign_petioles({{1, {0, 0, 0}}, {2, {10, 0, 0}}},
                                       {{1, {1, 0, 0}}, {2, {9, 0, 0}}, {3, {100, 0, 0}}});
  CHECK(surplus.pairs.size() == 2);
  CHECK(surplus.unassigned_leaves == std::vector<std::uint32_t>{3});
  CHECK(surplus.unassigned_stems.empty());

  CHECK(code_of([] { assign_petioles({}, {{1, Vec3::Zero()}}); }) == ErrorCode::EmptyInput);
  CHECK(code_of([] { assign_petioles({{1, Vec3::Zero()}}, {}); }) == ErrorCode::EmptyInput);
}

TEST_CASE("property: petiole assignment is minimal and consistent") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t ns = 1 + rng() % 6, nl = 1 + rng() % 6;
    std::map<std::uint32_t, Vec3> stems, leaves;
    for (std::size_t i = 0; i < ns; ++i)
      stems[static_cast<std::uint32_t>(10 + i)] = Vec3(testing::uniform(rng, 0, 50), testing::uniform(rng, 0, 50), 0);
    for (std::size_t i = 0; i < nl; ++i)
      leaves[static_cast<std::uint32_t>(100 + i)] = Vec3(testing::uniform(rng, 0, 50), testing::uniform(rng, 0, 50), 0);
    Eigen::MatrixXd cost(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(nl));
    for (std::size_t i = 0; i < ns; ++i)
      for (std::size_t j = 0; j < nl; ++j)
        cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            (stems.at(static_cast<std::uint32_t>(10 + i)) - leaves.at(static_cast<std::uint32_t>(100 + j))).norm();
    const auto a = assign_petioles(stems, leaves);
    CHECK(a.total_cost() == doctest::Approx(testing::brute_force_assignment(cost)).epsilon(1e-12));
    CHECK(a.pairs.size() == std::min(ns, nl));
    std::set<std::uint32_t> seen_s, seen_l;
    for (const auto& p : a.pairs) {
      CHECK(seen_s.insert(p.stem).second);
      CHECK(seen_l.insert(p.leaf).second);
      CHECK(p.cost == doctest::Approx((stems.at(p.stem) - leaves.at(p.leaf)).norm()).epsilon(1e-15));
    }
    for (auto s : a.unassigned_stems) CHECK(seen_s.insert(s).second);
    for (auto l : a.unassigned_leaves) CHECK(seen_l.insert(l).second);
    CHECK(seen_s.size() == ns);
    CHECK(seen_l.size() == nl);
  }
}

TEST_CASE("property: relabelling ids permutes the assignment") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t ns = 1 + rng() % 6, nl = 1 + rng() % 6;
    std::vector<Vec3> sp, lp;
    for (std::size_t i = 0; i < ns; ++i) sp.emplace_back(testing::uniform(rng, 0, 50), testing::uniform(rng, 0, 50), 0);
    for (std::size_t i = 0; i < nl; ++i) lp.emplace_back(testing::uniform(rng, 0, 50), testing::uniform(rng, 0, 50), 0);
    std::vector<std::uint32_t> sperm(ns), lperm(nl);
    std::iota(sperm.begin(), sperm.end(), 1u);
    std::iota(lperm.begin(), lperm.end(), 1u);
    std::shuffle(sperm.begin(), sperm.end(), rng);
    std::shuffle(lperm.begin(), lperm.end(), rng);
    std::map<std::uint32_t, Vec3> s0, l0, s1, l1;
    for (std::size_t i = 0; i < ns; ++i) {
      s0[static_cast<std::uint32_t>(i + 1)] = sp[i];
      s1[sperm[i]] = sp[i];
    }
    for (std::size_t j = 0; j < nl; ++j) {
      l0[static_cast<std::uint32_t>(j + 1)] = lp[j];
      l1[lperm[j]] = lp[j];
    }
    const auto a = assign_petioles(s0, l0);
    const auto b = assign_petioles(s1, l1);
    std::set<std::pair<std::uint32_t, std::uint32_t>> mapped, got;
    for (const auto& p : a.pairs) mapped.insert({sperm[p.stem - 1], lperm[p.leaf - 1]});
    for (const auto& p : b.pairs) got.insert({p.stem, p.leaf});
    CHECK(mapped == got);
  }
}

TEST_CASE("time series ordering and validation") {
  const auto d1 = ymd(2025, 3, 1), d2 = ymd(2025, 3, 15);
  const auto single = build_time_series("p", {entry(d1, "volume", 5.0)});
  CHECK(single.entries.size() == 1);

  const auto sorted = build_time_series("p", {entry(d2, "volume", 6.0), entry(d1, "volume", 5.0)});
  REQUIRE(sorted.entries.size() == 2);
  CHECK(sorted.entries[0].date == d1);
  CHECK(sorted.entries[1].date == d2);

  CHECK(code_of([&] { build_time_series("p", {entry(d1, "volume", 5.0), entry(d1, "volume", 6.0)}); }) ==
        ErrorCode::DuplicateDate);
  // same date is fine for different subjects
  CHECK_NOTHROW(build_time_series("p", {entry(d1, "leaf_area", 5.0, 1), entry(d1, "leaf_area", 6.0, 2)}));

  ScanTraits a, b;
  a.plant_id = "A1";
  a.date = d1;
  b.plant_id = "A2";
  b.date = d2;
  CHECK(code_of([&] { build_time_series(std::vector<ScanTraits>{a, b}); }) == ErrorCode::MixedPlants);
  b.plant_id = "A1";
  b.date = d1;
  CHECK(code_of([&] { build_time_series(std::vector<ScanTraits>{a, b}); }) == ErrorCode::DuplicateDate);
}

TEST_CASE("drop flags compare against the previous present value") {
  const std::vector<year_month_day> d{ymd(2025, 1, 1), ymd(2025, 1, 8), ymd(2025, 1, 15), ymd(2025, 1, 22),
                                      ymd(2025, 1, 29)};
  const auto s = build_time_series("p", {entry(d[0], "leaf_area", 10.0, 1), entry(d[1], "leaf_area", 8.5, 1),
                                         entry(d[2], "leaf_area", std::nullopt, 1), entry(d[3], "leaf_area", 6.0, 1),
                                         entry(d[4], "leaf_area", 6.5, 1)});
  std::vector<bool> flags;
  for (const auto& e : s.entries) flags.push_back(e.drop_flag);
  CHECK(flags == std::vector<bool>{false, false, false, true, false});
  // a drop of exactly 20% is not flagged
  const auto edge = build_time_series("p", {entry(d[0], "volume", 10.0), entry(d[1], "volume", 8.0)});
  CHECK_FALSE(edge.entries[1].drop_flag);
}

TEST_CASE("property: rebuilding a series reproduces it") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<SeriesEntry> entries;
    for (unsigned day_no = 1; day_no <= 10; ++day_no)
      for (std::uint32_t id = 1; id <= 3; ++id)
        if (rng() % 4 != 0) {
          std::optional<double> v;
          if (rng() % 5 != 0) v = testing::uniform(rng, 1, 100);
          auto e = entry(ymd(2025, 5, day_no), "leaf_area", v, id);
          e.drop_flag = rng() % 2 == 0;  // stale flags must be recomputed
          entries.push_back(e);
        }
    std::shuffle(entries.begin(), entries.end(), rng);
    const auto once = build_time_series("p", entries);
    const auto twice = build_time_series("p", once.entries);
    CHECK(once == twice);
    for (std::size_t i = 1; i < once.entries.size(); ++i) CHECK(!(once.entries[i].date < once.entries[i - 1].date &&
                                                                 once.entries[i].trait == once.entries[i - 1].trait &&
                                                                 once.entries[i].id == once.entries[i - 1].id));
  }
}

TEST_CASE("plant-mini scan traits against the generator truth") {
  const auto series = synth::plant_mini(7);
  std::vector<ScanTraits> traits;
  for (std::size_t i = 0; i < series.scans.size(); ++i) {
    const auto& truth = series.truth[i];
    const auto t = scan_traits(series.scans[i]);
    traits.push_back(t);
    CHECK(t.point_count == series.scans[i].size());
    CHECK(t.annotated == truth.annotated);
    if (!truth.annotated) {
      CHECK_FALSE(t.volume_cm3.has_value());
      CHECK(t.leaf_area_mm2.empty());
      continue;
    }
    const std::size_t n = truth.leaf_area.size();
    CHECK(t.organ_counts == std::map<SemanticClass, std::size_t>{
                                {SemanticClass::Leaf, n}, {SemanticClass::Stem, n}, {SemanticClass::Crown, 1}});
    REQUIRE(t.volume_cm3.has_value());
    CHECK(*t.volume_cm3 > 0.0);
    REQUIRE(t.leaf_area_mm2.size() == n);
    for (const auto& [id, area] : truth.leaf_area) CHECK(std::abs(t.leaf_area_mm2.at(id) - area) / area < 0.10);
    // every petiole ends up on its own leaf, measured within 5% of its length
    REQUIRE(t.petiole_length_mm.size() == n);
    for (const auto& [id, len] : truth.petiole_length) CHECK(std::abs(t.petiole_length_mm.at(id) - len) / len < 0.05);
  }

  const auto ts = build_time_series(traits);
  CHECK(ts.plant_id == "mini7");
  const auto last = series.scans.back().scan_date.value();
  std::size_t missing = 0;
  for (const auto& e : ts.entries) {
    if (e.date == last && e.trait != "point_count") {
      CHECK_FALSE(e.value.has_value());
      ++missing;
    }
    if (e.date != last) CHECK(e.value.has_value());
  }
  // volume, three organ counts, four leaf areas and four petiole lengths
  CHECK(missing == 1 + 3 + 4 + 4);
  CHECK(build_time_series(ts.plant_id, ts.entries) == ts);
}
