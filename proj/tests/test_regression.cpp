#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "cmrls/ecm.hpp"
#include "cmrls/error.hpp"
#include "cmrls/regression.hpp"

namespace {

using namespace cmrls::regression;
namespace ecm = cmrls::ecm;

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("cmrls_regression_" + name)).string();
}

ecm::SimTrace aligned_trace(const ecm::EcmParams& p, double sim_step, std::uint64_t seed, double duration) {
  ecm::PulseConfig cfg;
  cfg.duration = duration;
  cfg.step = sim_step;
  cfg.align = 10.0;
  cfg.sign_mode = ecm::SignMode::Random;
  cfg.rest_max = 200.0;
  return ecm::simulate(p, ecm::gen_random_pulse(cfg, seed), {0.0, 0.5});
}

TEST(SampleWindow, WarmUp) {
  SampleWindow w;
  EXPECT_FALSE(w.push(3.7, 1.0, 0.0));
  EXPECT_FALSE(w.push(3.7, 1.0, 10.0));
  EXPECT_TRUE(w.push(3.7, 1.0, 20.0));
  EXPECT_EQ(w.filled(), 3u);
}

TEST(SampleWindow, ConstantStream) {
  SampleWindow w;
  std::optional<RegressorSample> s;
  for (int k = 0; k < 5; ++k) s = w.push(3.6, 2.0, 10.0 * k);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->d, 0.0);
  EXPECT_EQ(s->phi, cmrls::Vec4(0.0, 2.0, 2.0, 2.0));
  EXPECT_EQ(s->t, 40.0);
}

TEST(SampleWindow, Layout) {
  SampleWindow w;
  w.push(1.0, 0.1, 0.0);
  w.push(1.5, 0.2, 1.0);
  const auto s = w.push(2.5, 0.3, 2.0);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->d, 1.0);
  EXPECT_EQ(s->phi, cmrls::Vec4(0.5, 0.3, 0.2, 0.1));
}

TEST(SampleWindow, NonMonotoneTimeThrows) {
  SampleWindow w;
  w.push(1.0, 0.0, 5.0);
  EXPECT_THROW(w.push(1.0, 0.0, 5.0), cmrls::NonMonotoneTime);
  EXPECT_THROW(w.push(1.0, 0.0, 4.0), cmrls::NonMonotoneTime);
}

TEST(SampleWindow, JitterToleratedGapRestarts) {
  SampleWindow w(10.0);
  w.push(1.0, 0.0, 0.0);
  w.push(1.0, 0.0, 10.05);
  EXPECT_TRUE(w.push(1.0, 0.0, 19.98));
  EXPECT_EQ(w.restarts(), 0u);
  EXPECT_FALSE(w.push(1.0, 0.0, 40.0));
  EXPECT_EQ(w.restarts(), 1u);
  EXPECT_EQ(w.filled(), 1u);
  EXPECT_FALSE(w.push(1.0, 0.0, 50.0));
  EXPECT_TRUE(w.push(1.0, 0.0, 60.0));
}

TEST(BuildSamples, TwoFewerThanPoints) {
  std::vector<Measurement> stream;
  for (int k = 0; k < 57; ++k) stream.push_back({10.0 * k, 3.0 + 0.01 * k, 1.0});
  EXPECT_EQ(build_samples(stream).size(), 55u);
  EXPECT_TRUE(build_samples(std::span(stream).first(2)).empty());
}

TEST(Regression, NoiselessIdentityAtEstimatorRate) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    ecm::EcmParams p;
    p.r0 *= std::uniform_real_distribution<double>(0.5, 2.0)(rng);
    p.r1 *= std::uniform_real_distribution<double>(0.5, 2.0)(rng);
    p.c1 *= std::uniform_real_distribution<double>(0.5, 2.0)(rng);
    const ecm::SimTrace trace = aligned_trace(p, 10.0, 100 + trial, 20000.0);
    const auto samples = build_samples(decimate(trace, 1));
    const cmrls::Vec4 theta = ecm::theta_from_params(p, 10.0);
    ASSERT_EQ(samples.size(), trace.size() - 2);
    for (const auto& s : samples) {
      ASSERT_NEAR(s.d, theta.dot(s.phi), 1e-9) << "trial " << trial << " t " << s.t;
    }
  }
}

TEST(Regression, DecimatedFineTraceSatisfiesIdentity) {
  ecm::EcmParams p;
  const ecm::SimTrace trace = aligned_trace(p, 0.01, 5, 5000.0);
  const auto samples = build_samples(decimate(trace, 1000), 10.0);
  const cmrls::Vec4 theta = ecm::theta_from_params(p, 10.0);
  ASSERT_EQ(samples.size(), 499u);
  for (const auto& s : samples) ASSERT_NEAR(s.d, theta.dot(s.phi), 1e-9) << "t " << s.t;
}

TEST(Decimate, Lengths) {
  ecm::SimTrace t;
  for (int k = 0; k < 100000; ++k) {
    t.time.push_back(k);
    t.current.push_back(0.0);
    t.voltage.push_back(k);
    t.soc.push_back(0.5);
    t.v1.push_back(0.0);
  }
  const auto same = decimate(t, 1);
  ASSERT_EQ(same.size(), t.size());
  EXPECT_EQ(same[123].v, 123.0);
  const auto d = decimate(t, 1000);
  ASSERT_EQ(d.size(), 100u);
  EXPECT_EQ(d[7].t, 7000.0);
  EXPECT_THROW(decimate(t, 0), cmrls::InvalidFactor);
}

TEST(Regularize, InterpolatesJitteredLog) {
  std::mt19937_64 rng(22);
  std::vector<Measurement> raw;
  for (int k = 0; k < 50; ++k) {
    const double t = 10.0 * k + std::uniform_real_distribution<double>(-0.04, 0.04)(rng);
    raw.push_back({t, 3.0 + 0.001 * t, 0.5 * t});
  }
  const auto segs = regularize(raw, 10.0);
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_GE(segs[0].size(), 49u);
  for (std::size_t k = 0; k < segs[0].size(); ++k) {
    const auto& m = segs[0][k];
    EXPECT_NEAR(m.t, raw[0].t + 10.0 * k, 1e-9);
    if (m.t > raw.back().t) continue;  // held, not extrapolated
    EXPECT_NEAR(m.v, 3.0 + 0.001 * m.t, 1e-12);
    EXPECT_NEAR(m.i, 0.5 * m.t, 1e-9);
  }
}

TEST(Regularize, LargeGapSplitsSegments) {
  std::vector<Measurement> raw;
  for (int k = 0; k < 10; ++k) raw.push_back({10.0 * k, 1.0, 0.0});
  for (int k = 0; k < 10; ++k) raw.push_back({500.0 + 10.0 * k, 1.0, 0.0});
  const auto segs = regularize(raw, 10.0);
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_EQ(segs[0].size(), 10u);
  EXPECT_EQ(segs[1].size(), 10u);
  EXPECT_EQ(samples_from_segments(segs).size(), 16u);
}

TEST(Regularize, OversampledLogLandsOnGrid) {
  std::vector<Measurement> raw;
  for (int k = 0; k <= 100; ++k) raw.push_back({1.0 * k, 2.0 * k, 0.0});
  const auto segs = regularize(raw, 10.0);
  ASSERT_EQ(segs.size(), 1u);
  ASSERT_EQ(segs[0].size(), 11u);
  EXPECT_EQ(segs[0][10].t, 100.0);
  EXPECT_EQ(segs[0][10].v, 200.0);
}

TEST(Regularize, NonMonotoneThrows) {
  const std::vector<Measurement> raw = {{0.0, 1.0, 0.0}, {10.0, 1.0, 0.0}, {10.0, 1.0, 0.0}};
  EXPECT_THROW(regularize(raw, 10.0), cmrls::NonMonotoneTime);
}

TEST(Csv, RoundTripIsExact) {
  std::mt19937_64 rng(23);
  std::vector<Measurement> rows;
  for (int k = 0; k < 100; ++k) {
    rows.push_back({10.0 * k + 1e-7, std::uniform_real_distribution<double>(3.0, 4.2)(rng),
                    std::uniform_real_distribution<double>(-3.0, 3.0)(rng)});
  }
  const std::string path = temp_path("roundtrip.csv");
  write_measurements_csv(path, rows);
  const auto back = read_measurements_csv(path);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(back[k].t, rows[k].t);
    EXPECT_EQ(back[k].v, rows[k].v);
    EXPECT_EQ(back[k].i, rows[k].i);
  }
  std::remove(path.c_str());
}

TEST(Csv, HeaderOrderAndCommentsAndExtraColumns) {
  const std::string path = temp_path("columns.csv");
  {
    std::ofstream out(path);
    out << "# comment\n\nvoltage_v,soc,time_s,current_a\n3.5,0.5,0,1\n3.6,0.5,10,-1\n";
  }
  const auto rows = read_measurements_csv(path);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].t, 10.0);
  EXPECT_EQ(rows[1].v, 3.6);
  EXPECT_EQ(rows[1].i, -1.0);
  std::remove(path.c_str());
}

TEST(Csv, Errors) {
  EXPECT_THROW(read_measurements_csv(temp_path("missing.csv")), cmrls::IoError);
  const std::string path = temp_path("bad.csv");
  {
    std::ofstream out(path);
    out << "time_s,current_a\n0,1\n";
  }
  EXPECT_THROW(read_measurements_csv(path), cmrls::IoError);
  {
    std::ofstream out(path);
    out << "time_s,current_a,voltage_v\n0,1,x\n";
  }
  EXPECT_THROW(read_measurements_csv(path), cmrls::IoError);
  std::remove(path.c_str());
}

}  // namespace
