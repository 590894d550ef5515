#include "sqrng/battery.hpp"
#include "sqrng/error.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace sqrng;

namespace {

BitStream coin(std::size_t n, std::uint64_t seed, double p_one = 0.5) {
    std::mt19937_64 eng(seed);
    std::bernoulli_distribution b(p_one);
    BitStream out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(b(eng));
    }
    return out;
}

// Upper regularized gamma Q(k, x) for integer k, by its finite series.
double igamc_integer(int k, double x) {
    double term = 1.0, sum = 1.0;
    for (int i = 1; i < k; ++i) {
        term *= x / i;
        sum += term;
    }
    return std::exp(-x) * sum;
}

} // namespace

TEST(Monobit, Examples) {
    BitStream balanced;
    for (int i = 0; i < 1000; ++i) {
        balanced.push_back(i % 2);
    }
    EXPECT_DOUBLE_EQ(monobit(balanced), 1.0);

    // |6 - 4| / sqrt(10) = 0.6325
    const double p = monobit(BitStream::from_string("1011010101"), true);
    EXPECT_NEAR(p, std::erfc(2.0 / std::sqrt(10.0) / std::sqrt(2.0)), 1e-15);
    EXPECT_NEAR(p, 0.527, 0.001);

    EXPECT_LT(monobit(coin(100'000, 1, 0.7)), 1e-6);
}

TEST(Monobit, ComplementInvariant) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto b = coin(1000 + s * 37, s, 0.52);
        EXPECT_EQ(monobit(b), monobit(b.complement()));
    }
}

TEST(Monobit, LengthFloor) {
    const auto b = BitStream::from_string("1011010101");
    try {
        (void)monobit(b);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::insufficient_data);
    }
    EXPECT_THROW((void)monobit(BitStream::from_string("1"), true), Error);
}

TEST(Runs, Examples) {
    // runs 1|00|11|0|1|0|11 = 7, pi = 0.6
    const auto r = runs_test(BitStream::from_string("1001101011"), true);
    ASSERT_TRUE(r.applicable);
    EXPECT_EQ(r.statistic, 7.0);
    const double expected = std::erfc(std::abs(7.0 - 2.0 * 10 * 0.6 * 0.4) / (2.0 * std::sqrt(20.0) * 0.24));
    EXPECT_NEAR(r.p_value, expected, 1e-12);
    EXPECT_NEAR(r.p_value, 0.147, 0.001);

    BitStream alt;
    for (int i = 0; i < 1000; ++i) {
        alt.push_back(i % 2);
    }
    EXPECT_LT(runs_test(alt).p_value, 1e-10);
}

TEST(Runs, GateMakesTestNotApplicable) {
    const auto r = runs_test(coin(10'000, 2, 0.6));
    EXPECT_FALSE(r.applicable);
    EXPECT_EQ(r.p_value, 0.0);
}

TEST(Runs, FairCoinPassRate) {
    int pass = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto r = runs_test(coin(100'000, 1000 + s));
        pass += r.applicable && r.p_value >= 0.01;
    }
    EXPECT_GE(pass, 98);
}

TEST(BlockFrequency, MatchesClosedForm) {
    // 10 blocks of 100 bits: chi^2 with 10 degrees of freedom
    const auto b = coin(1000, 3);
    double chi2 = 0.0;
    for (int blk = 0; blk < 10; ++blk) {
        int ones = 0;
        for (int i = 0; i < 100; ++i) {
            ones += b[static_cast<std::size_t>(blk * 100 + i)];
        }
        chi2 += std::pow(ones / 100.0 - 0.5, 2);
    }
    chi2 *= 4.0 * 100;
    EXPECT_NEAR(block_frequency(b, 100), igamc_integer(5, chi2 / 2.0), 1e-12);
}

TEST(BlockFrequency, ShortWorkedExample) {
    // 0110011010, M = 3: block fractions 2/3, 1/3, 2/3; chi^2 = 1
    const double p = block_frequency(BitStream::from_string("0110011010"), 3, true);
    EXPECT_NEAR(p, 0.801252, 1e-6);
}

TEST(BlockFrequency, DefaultBlockLength) {
    EXPECT_EQ(default_block_len(1'000'000), 10'102u);
    EXPECT_EQ(default_block_len(100), 20u);
    EXPECT_EQ(default_block_len(10), 10u);
    EXPECT_LT(1'000'000 / default_block_len(1'000'000), 100u);
}

TEST(Serial2, MatchesClosedForm) {
    const auto b = coin(5000, 4);
    const std::size_t n = b.size();
    double pairs[4] = {0, 0, 0, 0};
    double singles[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        pairs[2 * b[i] + b[(i + 1) % n]] += 1;
        singles[b[i]] += 1;
    }
    const double N = static_cast<double>(n);
    const double psi2 = 4.0 / N * (pairs[0] * pairs[0] + pairs[1] * pairs[1] + pairs[2] * pairs[2] + pairs[3] * pairs[3]) - N;
    const double psi1 = 2.0 / N * (singles[0] * singles[0] + singles[1] * singles[1]) - N;
    // Q(1, x) = exp(-x)
    EXPECT_NEAR(serial2(b), std::exp(-(psi2 - psi1) / 2.0), 1e-12);
}

TEST(Serial2, DetectsPairStructure) {
    // balanced singles, but "01" and "10" dominate
    BitStream b;
    std::mt19937_64 eng(5);
    for (int i = 0; i < 5000; ++i) {
        b.push_back(i % 2 == 0 ? (eng() % 10 != 0) : (eng() % 10 == 0));
    }
    EXPECT_LT(serial2(b), 1e-6);
}

TEST(BitAcf, WhiteAndAlternating) {
    const auto acf = bit_acf(coin(100'000, 6), 8);
    EXPECT_DOUBLE_EQ(acf.coefficients[0], 1.0);
    for (std::size_t k = 1; k <= 8; ++k) {
        EXPECT_LT(std::abs(acf.coefficients[k]), 4.0 / std::sqrt(100'000.0));
    }
    BitStream alt;
    for (int i = 0; i < 1000; ++i) {
        alt.push_back(i % 2);
    }
    EXPECT_NEAR(bit_acf(alt, 2).coefficients[1], -1.0, 1e-2);
}

TEST(Battery, ConstantZeroFailsEverything) {
    const auto b = BitStream::from_bits(std::vector<std::uint8_t>(10'000, 0));
    const auto report = run_battery(b);
    ASSERT_EQ(report.records.size(), 4u);
    for (const auto& r : report.records) {
        EXPECT_FALSE(r.pass) << r.name;
        EXPECT_LT(r.p_value, 1e-10) << r.name;
    }
    EXPECT_FALSE(report.all_pass());
    EXPECT_FALSE(report.acf_first_nonpositive_lag.has_value());
}

TEST(Battery, RecordsAndInvariants) {
    const auto b = coin(20'000, 7);
    const auto report = run_battery(b, TestOptions{0.05, false, 0, 16});
    EXPECT_EQ(report.bit_length, 20'000u);
    EXPECT_EQ(report.alpha, 0.05);
    std::vector<std::string> names;
    for (const auto& r : report.records) {
        names.push_back(r.name);
        EXPECT_GE(r.p_value, 0.0);
        EXPECT_LE(r.p_value, 1.0);
        EXPECT_EQ(r.pass, r.applicable && r.p_value >= 0.05);
    }
    EXPECT_EQ(names, (std::vector<std::string>{"monobit", "runs", "block_frequency", "serial2"}));
    EXPECT_TRUE(report.acf_first_nonpositive_lag.has_value());
    // pure function of the stream
    const auto again = run_battery(b, TestOptions{0.05, false, 0, 16});
    for (std::size_t i = 0; i < report.records.size(); ++i) {
        EXPECT_EQ(report.records[i].p_value, again.records[i].p_value);
    }
}

TEST(Battery, NotApplicableIsExcludedFromVerdict) {
    TestReport r;
    r.records = {{"monobit", 0.0, 0.5, true, true}, {"runs", 0.0, 0.0, false, false}};
    EXPECT_TRUE(r.all_pass());
    r.records.push_back({"serial2", 0.0, 0.001, true, false});
    EXPECT_FALSE(r.all_pass());
}

TEST(Battery, NullPassRatePerTest) {
    // 1000 fair-coin streams: each test should pass about 99% of the time
    std::vector<int> pass(4, 0);
    for (std::uint64_t s = 0; s < 1000; ++s) {
        const auto report = run_battery(coin(10'000, 50'000 + s));
        for (std::size_t i = 0; i < 4; ++i) {
            pass[i] += report.records[i].pass;
        }
    }
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(pass[i] / 1000.0, 0.99, 0.01) << i;
    }
}

TEST(Battery, RejectsBadAlpha) {
    EXPECT_THROW((void)run_battery(coin(1000, 1), TestOptions{0.0}), Error);
    EXPECT_THROW((void)run_battery(coin(1000, 1), TestOptions{1.0}), Error);
}
