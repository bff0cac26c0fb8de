#include <doctest.h>

#include <sstream>

#include "evcs/data/scenario.hpp"
#include "evcs/error.hpp"
#include "temp_dir.hpp"

using namespace evcs;
using namespace evcs::data;

namespace {

std::string pv_rows(std::size_t stations, std::size_t hours) {
    std::ostringstream os;
    os << "timestamp,station_id,kwh\n";
    for (std::size_t h = 0; h < hours; ++h)
        for (std::size_t i = 0; i < stations; ++i)
            os << format_hour(parse_hour("2023-06-01T00:00") + static_cast<HourStamp>(h)) << ',' << i << ','
               << (h + i) * 0.5 << '\n';
    return os.str();
}

std::string price_rows(std::size_t hours, double base = 0.1) {
    std::ostringstream os;
    os << "timestamp,price_usd_per_kwh\n";
    for (std::size_t h = 0; h < hours; ++h)
        os << format_hour(parse_hour("2023-06-01T00:00") + static_cast<HourStamp>(h)) << ',' << base + 0.001 * h
           << '\n';
    return os.str();
}

std::size_t parse_error_line(const std::filesystem::path& p) {
    try {
        load_price_csv(p, {});
    } catch (const ParseError& e) {
        return e.line();
    }
    return 0;
}

DemandModel flat_model(double level) {
    DemandModel m;
    std::array<double, 24> prof{};
    prof.fill(level);
    m.profiles = {prof};
    return m;
}

}  // namespace

TEST_CASE("hour timestamps") {
    CHECK(format_hour(parse_hour("2023-06-01T00:00")) == "2023-06-01T00:00");
    CHECK(parse_hour("2023-06-01T05:00:00") - parse_hour("2023-06-01T00:00") == 5);
    CHECK(parse_hour("2023-07-01T00:00") - parse_hour("2023-06-01T00:00") == 720);
    CHECK(parse_hour("1970-01-01T00:00") == 0);
    CHECK_THROWS_AS(parse_hour("2023-06-01T00:30"), ConfigError);
    CHECK_THROWS_AS(parse_hour("2023-02-30T00:00"), ConfigError);
    CHECK_THROWS_AS(parse_hour("2023/06/01 00:00"), ConfigError);
    CHECK_THROWS_AS(parse_hour(""), ConfigError);
}

TEST_CASE("price csv") {
    TempDir dir;
    SUBCASE("quote from one row") {
        const auto p = dir.write("p.csv", "timestamp,price_usd_per_kwh\n2023-06-01T00:00,0.10\n");
        const auto s = load_price_csv(p, core::PriceMultipliers{1.2, 0.9, 0.8});
        REQUIRE(s.size() == 1);
        const auto q = s.quote(0);
        CHECK(q.utility == 0.10);
        CHECK(q.ev == doctest::Approx(0.12).epsilon(1e-15));
        CHECK(q.trade == doctest::Approx(0.09).epsilon(1e-15));
        CHECK(q.buyback == doctest::Approx(0.08).epsilon(1e-15));
    }
    SUBCASE("empty file") {
        const auto p = dir.write("e.csv", "");
        CHECK_THROWS_AS(load_price_csv(p, {}), ParseError);
    }
    SUBCASE("header only") {
        const auto p = dir.write("h.csv", "timestamp,price_usd_per_kwh\n");
        CHECK_THROWS_AS(load_price_csv(p, {}), ParseError);
    }
    SUBCASE("duplicated hour") {
        const auto p = dir.write("d.csv",
                                 "timestamp,price_usd_per_kwh\n2023-06-01T00:00,0.1\n2023-06-01T00:00,0.1\n");
        CHECK(parse_error_line(p) == 3);
    }
    SUBCASE("gap names the missing hour") {
        const auto p = dir.write("g.csv",
                                 "timestamp,price_usd_per_kwh\n2023-06-01T00:00,0.1\n2023-06-01T02:00,0.1\n");
        try {
            load_price_csv(p, {});
            FAIL("expected a gap error");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("2023-06-01T01:00") != std::string::npos);
            CHECK(e.line() == 3);
        }
    }
    SUBCASE("nonpositive price") {
        const auto p = dir.write("n.csv", "timestamp,price_usd_per_kwh\n2023-06-01T00:00,0\n");
        CHECK(parse_error_line(p) == 2);
    }
    SUBCASE("bad header and bad number") {
        CHECK_THROWS_AS(load_price_csv(dir.write("b1.csv", "time,price\n2023-06-01T00:00,0.1\n"), {}), ParseError);
        CHECK(parse_error_line(dir.write("b2.csv", "timestamp,price_usd_per_kwh\n2023-06-01T00:00,abc\n")) == 2);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_price_csv(dir.path() / "nope.csv", {}), IoError);
    }
    SUBCASE("slice") {
        const auto s = load_price_csv(dir.write("s.csv", price_rows(10)), {});
        const auto w = s.slice(3, 4);
        CHECK(w.size() == 4);
        CHECK(w.start == s.start + 3);
        CHECK(w.utility[0] == s.utility[3]);
        CHECK_THROWS_AS(s.slice(8, 4), ConfigError);
    }
}

TEST_CASE("pv csv") {
    TempDir dir;
    SUBCASE("complete table") {
        const auto s = load_pv_csv(dir.write("pv.csv", pv_rows(3, 24)), 3);
        CHECK(s.point_count() == 72);
        CHECK(s.size() == 24);
        CHECK(s.generation[5][2] == doctest::Approx(3.5));
    }
    SUBCASE("unknown station id") {
        const auto p = dir.write("u.csv", "timestamp,station_id,kwh\n2023-06-01T00:00,5,1.0\n");
        CHECK_THROWS_AS(load_pv_csv(p, 3), ParseError);
    }
    SUBCASE("negative generation") {
        const auto p = dir.write("n.csv", "timestamp,station_id,kwh\n2023-06-01T00:00,0,-1\n");
        CHECK_THROWS_AS(load_pv_csv(p, 1), ParseError);
    }
    SUBCASE("missing station hour") {
        const auto p = dir.write("m.csv", "timestamp,station_id,kwh\n2023-06-01T00:00,0,1\n2023-06-01T01:00,0,1\n"
                                          "2023-06-01T01:00,1,1\n");
        CHECK_THROWS_AS(load_pv_csv(p, 2), ParseError);
    }
    SUBCASE("missing hour") {
        const auto p = dir.write("h.csv", "timestamp,station_id,kwh\n2023-06-01T00:00,0,1\n2023-06-01T03:00,0,1\n");
        try {
            load_pv_csv(p, 1);
            FAIL("expected a missing-hour error");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("2023-06-01T01:00") != std::string::npos);
        }
    }
}

TEST_CASE("synthetic demand") {
    SUBCASE("zero noise reproduces the profile") {
        DemandModel m = flat_model(0.0);
        for (std::size_t h = 0; h < 24; ++h) m.profiles[0][h] = static_cast<double>(h);
        m.noise_sigma = 0.0;
        m.urgent_fraction = 0.25;
        const auto a = synth_demand(m, 30, 2, 5);
        for (std::size_t t = 0; t < 30; ++t)
            for (std::size_t i = 0; i < 2; ++i) {
                const double want = static_cast<double>((t + 5) % 24);
                CHECK(a[t][i].urgent + a[t][i].regular == doctest::Approx(want).epsilon(1e-14));
                CHECK(a[t][i].urgent == doctest::Approx(0.25 * want).epsilon(1e-14));
            }
    }
    SUBCASE("zero urgent fraction") {
        DemandModel m = flat_model(10.0);
        m.urgent_fraction = 0.0;
        for (const auto& row : synth_demand(m, 48, 3))
            for (const auto& a : row) CHECK(a.urgent == 0.0);
    }
    SUBCASE("same seed twice") {
        DemandModel m = flat_model(10.0);
        m.rng_seed = 99;
        CHECK(synth_demand(m, 48, 2) == synth_demand(m, 48, 2));
        DemandModel other = m;
        other.rng_seed = 100;
        CHECK(synth_demand(m, 48, 2) != synth_demand(other, 48, 2));
    }
    SUBCASE("never negative even with heavy noise") {
        DemandModel m = flat_model(1.0);
        m.noise_sigma = 10.0;
        for (const auto& row : synth_demand(m, 500, 2))
            for (const auto& a : row) {
                CHECK(a.urgent >= 0.0);
                CHECK(a.regular >= 0.0);
            }
    }
    SUBCASE("invalid models") {
        DemandModel m = flat_model(1.0);
        m.urgent_fraction = 1.5;
        CHECK_THROWS_AS(m.validate(), ConfigError);
        m = flat_model(-1.0);
        CHECK_THROWS_AS(m.validate(), ConfigError);
        m.profiles.clear();
        CHECK_THROWS_AS(m.validate(), ConfigError);
    }
}

TEST_CASE("episode assembly") {
    TempDir dir;
    const auto price = load_price_csv(dir.write("p.csv", price_rows(720)), {});
    const auto pv = load_pv_csv(dir.write("pv.csv", pv_rows(2, 720)), 2);
    const core::EssParams params;
    DemandModel m = flat_model(8.0);

    SUBCASE("a June month is 720 slots") {
        const auto ep = build_episode(price, pv, synth_demand(m, 720, 2), 0.5, params);
        CHECK(ep.length() == 720);
        CHECK(ep.station_count() == 2);
        CHECK(ep.initial[0].battery_kwh == 100.0);
        CHECK(ep.initial[1].battery_kwh == 100.0);
        for (const auto& q : ep.quotes) CHECK(q.ordered());
    }
    SUBCASE("initial demand is the first arrival") {
        const auto arr = synth_demand(m, 24, 2);
        const auto ep = build_episode(price.slice(0, 24), pv.slice(0, 24), arr, 0.5, params);
        CHECK(ep.initial[1].urgent_demand == arr[0][1].urgent);
        CHECK(ep.initial[1].regular_demand == arr[0][1].regular);
        CHECK(ep.next_arrivals(0)[1].urgent == arr[1][1].urgent);
        CHECK(ep.next_arrivals(23)[0].urgent == 0.0);
    }
    SUBCASE("mismatched lengths") {
        CHECK_THROWS_AS(build_episode(price.slice(0, 24), pv.slice(0, 23), synth_demand(m, 24, 2), 0.5, params),
                        ConfigError);
        CHECK_THROWS_AS(build_episode(price.slice(0, 24), pv.slice(0, 24), synth_demand(m, 12, 2), 0.5, params),
                        ConfigError);
        CHECK_THROWS_AS(build_episode(price.slice(0, 24), pv.slice(1, 24), synth_demand(m, 24, 2), 0.5, params),
                        ConfigError);
    }
    SUBCASE("initial soc outside bounds") {
        CHECK_THROWS_AS(build_episode(price.slice(0, 24), pv.slice(0, 24), synth_demand(m, 24, 2), 0.99, params),
                        ConfigError);
    }
    SUBCASE("identical inputs give identical episodes") {
        const auto a = build_episode(price.slice(0, 48), pv.slice(0, 48), synth_demand(m, 48, 2), 0.5, params);
        const auto b = build_episode(price.slice(0, 48), pv.slice(0, 48), synth_demand(m, 48, 2), 0.5, params);
        CHECK(a == b);
        CHECK(a.fingerprint() == b.fingerprint());
        auto c = a;
        c.renewables[3][1] += 1e-9;
        CHECK(c.fingerprint() != a.fingerprint());
    }
}

TEST_CASE("bundled sample data loads") {
    const std::filesystem::path root = EVCS_SOURCE_DIR;
    const auto wp = load_price_csv(root / "data/west_price.csv", {});
    const auto wv = load_pv_csv(root / "data/west_pv.csv", 2);
    CHECK(wp.size() == 720);
    CHECK(wv.size() == 720);
    CHECK(wp.start == wv.start);
    const auto ep = load_pv_csv(root / "data/east_pv.csv", 3);
    CHECK(ep.point_count() == 2160);
}
