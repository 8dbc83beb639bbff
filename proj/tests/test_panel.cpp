#include <cstdio>
#include <fstream>
#include <random>

#include "doctest.h"
#include "riskpanel/errors.hpp"
#include "riskpanel/panel.hpp"
#include "riskpanel/util.hpp"
#include "support.hpp"

using namespace riskpanel;
using testsupport::day;
using testsupport::make_series;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const std::string path = "/tmp/riskpanel_test_" + name;
    std::ofstream out(path);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("load_panel builds series from long CSV") {
    const auto path = write_temp("panel_ok.csv",
                                 "date,country,variable,value\n"
                                 "2020-01-01,US,CDS,1.5\n"
                                 "2020-01-02,US,CDS,1.6\n"
                                 "2020-01-01,US,GPR,0.2\n"
                                 "2020-01-03,US,GPR,0.3\n");
    const Panel p = load_panel(path);
    CHECK(p.series().size() == 2);
    CHECK(p.countries().size() == 1);
    CHECK(p.span_begin() == Date::parse("2020-01-01"));
    CHECK(p.span_end() == Date::parse("2020-01-03"));
    CHECK(p.find("US", Variable::Cds)->size() == 2);
}

TEST_CASE("load_panel rejects duplicates naming the key") {
    const auto path = write_temp("panel_dup.csv",
                                 "date,country,variable,value\n"
                                 "2020-01-01,US,CDS,1.5\n"
                                 "2020-01-01,US,CDS,1.6\n");
    CHECK_THROWS_WITH_AS(load_panel(path),
                         doctest::Contains("duplicate observation for (2020-01-01, US, CDS)"),
                         ValidationError);
}

TEST_CASE("load_panel rejects unknown codes listing offenders") {
    const auto path = write_temp("panel_unknown.csv",
                                 "date,country,variable,value\n"
                                 "2020-01-01,XX,CDS,1.0\n"
                                 "2020-01-01,US,WAT,1.0\n");
    try {
        load_panel(path);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("country(XX)") != std::string::npos);
        CHECK(msg.find("variable(WAT)") != std::string::npos);
    }
}

TEST_CASE("regions sidecar extends the taxonomy") {
    const auto regions = write_temp("regions.csv", "country,region\nZZ,EMAsia\n");
    const auto path = write_temp("panel_sidecar.csv",
                                 "date,country,variable,value\n"
                                 "2020-01-01,ZZ,CDS,1.0\n"
                                 "2020-01-02,ZZ,CDS,1.1\n");
    const Panel p = load_panel(path, regions);
    CHECK(p.taxonomy().region_of("ZZ") == Region::EMAsia);
}

TEST_CASE("save then load is identity on the observation multiset") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal;
    Panel p;
    Series a = make_series("US", Variable::Cds, {});
    Series b = make_series("DE", Variable::Cds, {});
    for (int t = 0; t < 40; ++t) {
        if (t % 7 != 3) a.obs.push_back({day(t), normal(rng)});
        if (t % 5 != 1) b.obs.push_back({day(t), normal(rng)});
    }
    p.add_series(a);
    p.add_series(b);
    p.finalize();
    const auto path = "/tmp/riskpanel_test_roundtrip.csv";
    save_panel(p, path);
    const Panel q = load_panel(path);
    REQUIRE(q.series().size() == p.series().size());
    for (const auto& [key, s] : p.series()) {
        const Series* t = q.find(key.first, key.second);
        REQUIRE(t != nullptr);
        REQUIRE(t->size() == s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            CHECK(t->obs[i].date == s.obs[i].date);
            CHECK(t->obs[i].value == doctest::Approx(s.obs[i].value).epsilon(1e-14));
        }
    }
}

TEST_CASE("moving_average constants and 1..28 ramp") {
    Series c = make_series("US", Variable::Cds, {});
    for (int t = 0; t < 40; ++t) c.obs.push_back({day(t), 5.0});
    const Series ma = moving_average(c, 7);
    REQUIRE(ma.size() == 34);
    for (const auto& o : ma.obs) CHECK(o.value == doctest::Approx(5.0));

    Series ramp = make_series("US", Variable::Cds, {});
    for (int t = 0; t < 28; ++t) ramp.obs.push_back({day(t), static_cast<double>(t + 1)});
    const Series ma28 = moving_average(ramp, 28);
    REQUIRE(ma28.size() == 1);
    CHECK(ma28.obs[0].value == doctest::Approx(14.5));
    CHECK(ma28.obs[0].date == day(27));
}

TEST_CASE("moving_average with gaps matches explicit enumeration") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    Series s = make_series("US", Variable::Cds, {});
    for (int t = 0; t < 60; ++t) {
        if (t >= 20 && t <= 22) continue;  // 3-day gap
        if (t % 11 == 5) continue;
        s.obs.push_back({day(t), normal(rng)});
    }
    const int window = 10;
    const Series ma = moving_average(s, window);
    // Oracle: for each output observation, enumerate the window by hand.
    std::size_t out_idx = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i + 1 < static_cast<std::size_t>(window)) continue;
        double sum = 0.0;
        int count = 0;
        for (const auto& o : s.obs) {
            if (o.date <= s.obs[i].date && o.date >= s.obs[i].date - (window - 1)) {
                sum += o.value;
                ++count;
            }
        }
        REQUIRE(out_idx < ma.size());
        CHECK(ma.obs[out_idx].date == s.obs[i].date);
        CHECK(ma.obs[out_idx].value == doctest::Approx(sum / count).epsilon(1e-12));
        ++out_idx;
    }
    CHECK(out_idx == ma.size());
}

TEST_CASE("moving_average is shift equivariant") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> normal;
    Series s = make_series("US", Variable::Cds, {});
    for (int t = 0; t < 30; ++t)
        if (t % 4 != 2) s.obs.push_back({day(t), normal(rng)});
    Series shifted = s;
    for (auto& o : shifted.obs) o.date += 17;
    const Series ma = moving_average(s, 6);
    const Series ma_shifted = moving_average(shifted, 6);
    REQUIRE(ma.size() == ma_shifted.size());
    for (std::size_t i = 0; i < ma.size(); ++i) {
        CHECK(ma_shifted.obs[i].date == ma.obs[i].date + 17);
        CHECK(ma_shifted.obs[i].value == doctest::Approx(ma.obs[i].value).epsilon(1e-14));
    }
}

TEST_CASE("standardize yields zero mean unit sd and inverts") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> normal(3.0, 2.5);
    Series s = make_series("US", Variable::Cds, {});
    for (int t = 0; t < 100; ++t) s.obs.push_back({day(t), normal(rng)});
    PreprocessPolicy policy;
    const Standardization st = standardize(s, policy);
    const auto vals = st.series.values();
    CHECK(mean(vals) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(stdev(vals) == doctest::Approx(1.0).epsilon(1e-10));
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double recovered = st.series.obs[i].value * st.sd + st.mean;
        CHECK(recovered == doctest::Approx(s.obs[i].value).epsilon(1e-10));
    }
}

TEST_CASE("standardize rejects constant series") {
    Series s = make_series("US", Variable::Cds, {{0, 2.0}, {1, 2.0}, {2, 2.0}});
    PreprocessPolicy policy;
    CHECK_THROWS_AS(standardize(s, policy), NumericError);
}

TEST_CASE("standardize TrainOnly uses pre-cutoff statistics") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal(1.0, 2.0);
    Series s = make_series("US", Variable::Cds, {});
    for (int t = 0; t < 80; ++t) s.obs.push_back({day(t), normal(rng) + (t >= 40 ? 10.0 : 0.0)});
    PreprocessPolicy policy;
    policy.scope = PreprocessPolicy::Scope::TrainOnly;
    policy.train_cutoff = day(39);
    const Standardization st = standardize(s, policy);
    // Oracle: statistics from the first 40 observations only.
    std::vector<double> pre;
    for (int t = 0; t < 40; ++t) pre.push_back(s.obs[static_cast<std::size_t>(t)].value);
    const double m = mean(pre), sd = stdev(pre);
    CHECK(st.mean == doctest::Approx(m).epsilon(1e-12));
    CHECK(st.sd == doctest::Approx(sd).epsilon(1e-12));
    for (std::size_t i = 0; i < s.size(); ++i)
        CHECK(st.series.obs[i].value ==
              doctest::Approx((s.obs[i].value - m) / sd).epsilon(1e-12));
}

TEST_CASE("coverage examples and brute-force probe") {
    Series full = make_series("US", Variable::Cds, {});
    for (int t = 0; t <= 20; ++t) full.obs.push_back({day(t), 1.0});
    CHECK(coverage(full, day(10), 10) == doctest::Approx(1.0));

    Series half = make_series("US", Variable::Cds, {});
    for (int t = 0; t <= 20; t += 2) half.obs.push_back({day(t), 1.0});
    // 11 of 21 days present.
    CHECK(coverage(half, day(10), 10) == doctest::Approx(11.0 / 21.0));

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Series gappy = make_series("US", Variable::Cds, {});
    for (int t = -200; t <= 200; ++t)
        if (unit(rng) < 0.6) gappy.obs.push_back({day(t), 1.0});
    int count = 0;
    for (const auto& o : gappy.obs)
        if (o.date >= day(0) - 180 && o.date <= day(0) + 180) ++count;
    CHECK(coverage(gappy, day(0), 180) == doctest::Approx(count / 361.0).epsilon(1e-15));
}

TEST_CASE("coverage monotone in data density") {
    Series sparse = make_series("US", Variable::Cds, {});
    Series dense = make_series("US", Variable::Cds, {});
    for (int t = 0; t <= 30; ++t) {
        if (t % 3 == 0) sparse.obs.push_back({day(t), 1.0});
        if (t % 3 == 0 || t % 2 == 0) dense.obs.push_back({day(t), 1.0});
    }
    CHECK(coverage(dense, day(15), 15) >= coverage(sparse, day(15), 15));
}

TEST_CASE("interpolate_short_gaps fills and is idempotent") {
    Series s = make_series("US", Variable::Cds, {{0, 2.0}, {2, 4.0}, {10, 1.0}});
    const Series filled = interpolate_short_gaps(s, 3);
    REQUIRE(filled.size() == 4);  // gap of 1 filled, gap of 7 left alone
    CHECK(filled.obs[1].date == day(1));
    CHECK(filled.obs[1].value == doctest::Approx(3.0));
    CHECK(filled.obs[3].date == day(10));

    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Series random_gappy = make_series("US", Variable::Cds, {});
    for (int t = 0; t < 100; ++t)
        if (unit(rng) < 0.7) random_gappy.obs.push_back({day(t), unit(rng)});
    const Series once = interpolate_short_gaps(random_gappy, 5);
    const Series twice = interpolate_short_gaps(once, 5);
    REQUIRE(once.size() == twice.size());
    for (std::size_t i = 0; i < once.size(); ++i) {
        CHECK(once.obs[i].date == twice.obs[i].date);
        CHECK(once.obs[i].value == twice.obs[i].value);
    }
}

TEST_CASE("preprocess drops degenerate series and whole dead countries") {
    Panel p;
    Series good = make_series("US", Variable::Cds, {});
    Series flat = make_series("DE", Variable::Cds, {});
    Series de_news = make_series("DE", Variable::Gpr, {});
    std::mt19937_64 rng(8);
    std::normal_distribution<double> normal;
    for (int t = 0; t < 60; ++t) {
        good.obs.push_back({day(t), normal(rng)});
        flat.obs.push_back({day(t), 1.0});
        de_news.obs.push_back({day(t), normal(rng)});
    }
    p.add_series(good);
    p.add_series(flat);
    p.add_series(de_news);
    p.finalize();
    PreprocessPolicy policy;
    policy.ma_window = 5;
    const PreprocessedPanel out = preprocess(p, policy);
    CHECK(out.panel.countries().size() == 1);
    CHECK(out.panel.countries()[0].code == "US");
    REQUIRE(out.dropped.size() == 1);
    CHECK(out.dropped[0] == "DE/CDS");
}
