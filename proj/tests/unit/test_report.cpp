#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sklab/error.hpp"
#include "sklab/report.hpp"
#include "sklab/stats.hpp"

using namespace sklab;

TEST_CASE("mean and standard error") {
  const std::vector<double> xs{1.0, 2.0, 4.0, 7.0};
  const MeanSe m = mean_se(xs);
  CHECK(m.mean == doctest::Approx(3.5));
  CHECK(m.sd == doctest::Approx(std::sqrt(7.0)));
  CHECK(m.se == doctest::Approx(std::sqrt(7.0) / 2.0));
  CHECK(m.count == 4);
  const MeanSe one = mean_se(std::vector<double>{5.0});
  CHECK(one.mean == 5.0);
  CHECK(one.se == 0.0);
}

TEST_CASE("log-log slope fit") {
  const std::vector<double> x{50, 100, 200, 400};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 / v);
  const SlopeFit f = loglog_fit(x, y);
  CHECK(f.slope == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::exp(f.intercept) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.half_width == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(f.points == 4);

  // Noisy points: compare with a hand-computed least squares fit.
  const std::vector<double> yn{0.061, 0.029, 0.016, 0.0071};
  const SlopeFit g = loglog_fit(x, yn);
  double mx = 0, my = 0;
  for (int i = 0; i < 4; ++i) {
    mx += std::log(x[i]) / 4;
    my += std::log(yn[i]) / 4;
  }
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 4; ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(yn[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  CHECK(g.slope == doctest::Approx(sxy / sxx).epsilon(1e-12));
  double rss = 0;
  for (int i = 0; i < 4; ++i) {
    const double r = std::log(yn[i]) - (g.intercept + g.slope * std::log(x[i]));
    rss += r * r;
  }
  const double se = std::sqrt(rss / 2.0 / sxx);
  CHECK(g.slope_se == doctest::Approx(se).epsilon(1e-10));
  CHECK(g.half_width == doctest::Approx(4.302652729696142 * se).epsilon(1e-9));

  CHECK(std::isnan(loglog_fit(std::vector<double>{1, 2}, std::vector<double>{1, 2}).half_width));
  CHECK_THROWS_AS(loglog_fit(std::vector<double>{1}, std::vector<double>{1}), DomainError);
  CHECK_THROWS_AS(loglog_fit(std::vector<double>{1, 2}, std::vector<double>{0, 2}), DomainError);
}

TEST_CASE("float formatting round-trips with 17 digits") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(NAN) == "nan");
  CHECK(format_double(-INFINITY) == "-inf");
}

TEST_CASE("config hash is stable and key-order independent") {
  nlohmann::json a = {{"beta", 1.0}, {"h", 0.5}};
  nlohmann::json b;
  b["h"] = 0.5;
  b["beta"] = 1.0;
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  CHECK(config_hash(a) != config_hash({{"beta", 1.0}, {"h", 0.6}}));
  // FNV-1a 64 of "{}".
  CHECK(config_hash(nlohmann::json::object()) == "08f44b07b5901a25");
}

TEST_CASE("CSV rendering and envelopes") {
  CsvTable t({"k", "name", "value"});
  t.add_row({std::int64_t{1}, std::string("a"), 0.25});
  t.add_row({std::int64_t{2}, std::string("b"), NAN});
  CHECK_THROWS_AS(t.add_row({std::int64_t{3}}), DomainError);
  const auto meta = output_metadata({{"x", 1}}, 7);
  CHECK(meta["base_seed"] == 7);
  CHECK(meta["tool"] == "sklab");
  const std::string csv = t.render(meta);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("# {", 0) == 0);
  CHECK(nlohmann::json::parse(line.substr(2)) == meta);
  std::getline(in, line);
  CHECK(line == "k,name,value");
  std::getline(in, line);
  CHECK(line == "1,a,0.25");
  std::getline(in, line);
  CHECK(line == "2,b,nan");

  const auto env = report_envelope("demo", {{"x", 1}}, 7, {{"v", NAN}});
  CHECK(env["schema"] == kReportSchema);
  CHECK(env["meta"]["kind"] == "demo");
  CHECK(env.dump().find("null") != std::string::npos);

  const auto dir = std::filesystem::temp_directory_path() / "sklab_report_test";
  write_csv(dir / "nested" / "t.csv", t, meta);
  std::ifstream f(dir / "nested" / "t.csv", std::ios::binary);
  std::stringstream back;
  back << f.rdbuf();
  CHECK(back.str() == csv);
  std::filesystem::remove_all(dir);
}
