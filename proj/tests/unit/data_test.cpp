#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include <tariffopt/data.hpp>
#include <tariffopt/error.hpp>

using namespace tariffopt;

namespace {

std::string csv_rows(int n, int skip = -1, int swap = -1) {
  std::ostringstream os;
  os << "timestamp,demand_kwh,price_p_kwh,temp_c,apparent_temp_c,humidity,holiday\n";
  std::vector<int> order;
  for (int i = 0; i < n; ++i) order.push_back(i);
  if (swap >= 0) std::swap(order[swap], order[swap + 1]);
  for (int i : order) {
    if (i == skip) continue;
    const auto ts = Timestamp::from_date_slot(make_date(2016, 3, 1), 0).plus_slots(i);
    os << ts.iso() << "," << 50 + i << ",11.76," << 10 - 0.1 * i << ",8.5,0.8,0\n";
  }
  return os.str();
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::IoError;
}

}  // namespace

TEST(Calendar, SlotArithmetic) {
  const auto ts = Timestamp::parse("2016-02-29T23:30:00");
  ASSERT_TRUE(ts);
  EXPECT_EQ(ts->slot_of_day(), 47);
  EXPECT_EQ(ts->plus_slots(1).date(), make_date(2016, 3, 1));
  EXPECT_EQ(ts->plus_slots(1).slot_of_day(), 0);
  EXPECT_EQ(slots_between(*ts, ts->plus_slots(97)), 97);
  EXPECT_EQ(weekday_index(make_date(2016, 2, 29)), 0);  // a Monday
  EXPECT_FALSE(Timestamp::parse("2016-02-30T00:00"));
  EXPECT_EQ(Timestamp::parse("2016-01-01 12:30")->slot_of_day(), 25);
}

TEST(Csv, ParsesAndRoundTrips) {
  const auto series = data::parse_csv(csv_rows(100));
  ASSERT_EQ(series.size(), 100u);
  EXPECT_DOUBLE_EQ(series[7].demand, 57.0);
  const auto again = data::parse_csv(data::to_csv(series));
  EXPECT_EQ(again, series);
}

TEST(Csv, BinarySnapshotRoundTrips) {
  const auto series = data::synthesize(data::SynthConfig::defaults(), 3);
  const auto path = std::filesystem::temp_directory_path() / "tariffopt_data_test.bin";
  data::write_binary(series, path);
  EXPECT_EQ(data::load_series(path), series);
  std::filesystem::remove(path);
}

TEST(Csv, MissingColumn) {
  auto text = csv_rows(5);
  text.replace(text.find("humidity"), 8, "humid");
  EXPECT_EQ(code_of([&] { data::parse_csv(text); }), ErrorCode::MissingColumn);
}

TEST(Csv, InvalidRecord) {
  auto text = csv_rows(5);
  text.replace(text.find(",11.76,"), 7, ",abc,");
  EXPECT_EQ(code_of([&] { data::parse_csv(text); }), ErrorCode::InvalidRecord);
}

TEST(Csv, NonMonotoneTime) {
  EXPECT_EQ(code_of([&] { data::parse_csv(csv_rows(10, -1, 4)); }), ErrorCode::NonMonotoneTime);
}

TEST(Csv, GapRejectedOrInterpolated) {
  const auto text = csv_rows(10, 4);
  EXPECT_EQ(code_of([&] { data::parse_csv(text); }), ErrorCode::TimestampGap);

  data::IngestOptions opt;
  opt.gap_policy = data::GapPolicy::Interpolate;
  const auto series = data::parse_csv(text, {}, opt);
  ASSERT_EQ(series.size(), 10u);
  ASSERT_EQ(series.imputed_rows().size(), 1u);
  EXPECT_EQ(series.imputed_rows()[0], 4u);
  EXPECT_DOUBLE_EQ(series[4].demand, 54.0);

  opt.max_interpolated_gap = 0;
  EXPECT_EQ(code_of([&] { data::parse_csv(text, {}, opt); }), ErrorCode::TimestampGap);
}

TEST(Split, RejectsOverlap) {
  data::SplitSpec s{{make_date(2015, 1, 1), make_date(2015, 12, 31)},
                    {make_date(2015, 12, 1), make_date(2016, 6, 30)},
                    {make_date(2016, 7, 1), make_date(2016, 12, 31)}};
  EXPECT_EQ(code_of([&] { s.validate(); }), ErrorCode::InvalidConfig);
}

TEST(Holidays, MarksWholeDays) {
  const auto series = data::parse_csv(csv_rows(96));
  const std::vector<Date> hol{make_date(2016, 3, 2)};
  const auto marked = data::apply_holidays(series, hol);
  EXPECT_FALSE(marked[47].holiday);
  EXPECT_TRUE(marked[48].holiday);
  EXPECT_TRUE(marked[95].holiday);
}

TEST(Aggregate, MeanDemandAndMisalignment) {
  const auto a = data::parse_csv(csv_rows(10));
  std::vector<data::MeterRecord> recs(a.records().begin(), a.records().end());
  for (auto& r : recs) r.demand += 10.0;
  const data::MeterSeries b(recs, 1);
  const std::vector<data::MeterSeries> both{a, b};
  const auto m = data::aggregate_households(both);
  for (std::size_t i = 0; i < m.size(); ++i) EXPECT_DOUBLE_EQ(m[i].demand, a[i].demand + 5.0);

  const std::vector<data::MeterSeries> bad{a, data::parse_csv(csv_rows(9))};
  EXPECT_EQ(code_of([&] { data::aggregate_households(bad); }), ErrorCode::MisalignedSeries);
}

TEST(Synth, DeterministicPerSeed) {
  auto cfg = data::SynthConfig::defaults();
  cfg.days = 20;
  EXPECT_EQ(data::synthesize(cfg, 11), data::synthesize(cfg, 11));
  EXPECT_NE(data::synthesize(cfg, 11), data::synthesize(cfg, 12));
  cfg.coefficients["price"] = 0.5;
  EXPECT_EQ(code_of([&] { data::synthesize(cfg, 1); }), ErrorCode::InvalidConfig);
}
