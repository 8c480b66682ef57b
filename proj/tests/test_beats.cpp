#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "bsw/beats.hpp"

using namespace bsw;

TEST_CASE("midpoint-to-midpoint segmentation") {
    // signal value == sample index, so resampled endpoints are readable
    Signal x(800);
    for (std::size_t t = 0; t < x.size(); ++t) x[t] = static_cast<double>(t);
    const std::vector<std::size_t> peaks{100, 300, 500, 700};

    const BeatSet set = segment_beats(x, peaks, LeadId::V2);
    REQUIRE(set.size() == 2);  // peaks - 2
    CHECK(set.lead == LeadId::V2);
    for (const Beat& b : set.beats) REQUIRE(b.size() == kBeatLength);
    // beat 0 covers [200, 400): first sample 200, last 399
    CHECK(set.beats[0].front() == Catch::Approx(200.0));
    CHECK(set.beats[0].back() == Catch::Approx(399.0));
    // beat 1 covers [400, 600)
    CHECK(set.beats[1].front() == Catch::Approx(400.0));
    CHECK(set.beats[1].back() == Catch::Approx(599.0));
}

TEST_CASE("segmentation needs at least three peaks") {
    Signal x(800, 0.0);
    try {
        segment_beats(x, {100, 300});
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotEnoughBeats);
    }
    SECTION("peaks outside the signal") {
        CHECK_THROWS_AS(segment_beats(x, {100, 700, 2000}), Error);
    }
}

TEST_CASE("mean beat is the pointwise average") {
    BeatSet set;
    set.lead = LeadId::aVF;
    set.beats.push_back(Beat(kBeatLength, 1.0));
    set.beats.push_back(Beat(kBeatLength, 3.0));
    const MeanBeat m = mean_beat(set, "rec9");
    CHECK(m.record_id == "rec9");
    CHECK(m.lead == LeadId::aVF);
    CHECK(m.n_beats_averaged == 2);
    for (double v : m.samples) CHECK(v == 2.0);

    SECTION("a single beat is not enough") {
        set.beats.pop_back();
        CHECK_THROWS_AS(mean_beat(set), Error);
    }
}
