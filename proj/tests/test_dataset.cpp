#include "helpers.hpp"

#include "lcbf/dataset.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace lcbf;

namespace {

LaserScan manual_scan(Vec2 pose, std::vector<double> angles, std::vector<BeamReturn> ranges) {
    LaserScan s;
    s.pose = pose;
    s.beam_angles = std::move(angles);
    s.ranges = std::move(ranges);
    return s;
}

bool has_sample(const TrainingSet& set, const Vec2& p, Label l) {
    for (const auto& s : set.samples)
        if (s.label == l && (s.position - p).norm() < 1e-12) return true;
    return false;
}

// Greedy sequential dedup with an O(n^2) scan.
std::size_t naive_union_size(const TrainingSet& a, const TrainingSet& b, double tol) {
    std::vector<LabeledSample> kept = a.samples;
    for (const auto& s : b.samples) {
        bool dup = false;
        for (const auto& k : kept) dup |= k.label == s.label && (k.position - s.position).norm() <= tol;
        if (!dup) kept.push_back(s);
    }
    return kept.size();
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("single beam pair") {
    const auto set = generate_training_data(manual_scan({0, 0}, {0.0}, {2.0}), 0.5);
    REQUIRE(set.size() == 2);
    CHECK(has_sample(set, {2.0, 0.0}, Label::Unsafe));
    CHECK(has_sample(set, {1.5, 0.0}, Label::Safe));
}

TEST_CASE("all no-return scan is empty") {
    const auto set =
        generate_training_data(manual_scan({0, 0}, {0.0, 1.0, 2.0}, {std::nullopt, std::nullopt, std::nullopt}), 0.1);
    CHECK(set.empty());
    CHECK_FALSE(set.has_both_labels());
}

TEST_CASE("two beams hand-evaluated") {
    const auto set = generate_training_data(
        manual_scan({0, 0}, {0.0, std::numbers::pi / 2.0}, {1.0, 3.0}), 0.25);
    REQUIRE(set.size() == 4);
    CHECK(set.count(Label::Unsafe) == 2);
    CHECK(has_sample(set, {1.0, 0.0}, Label::Unsafe));
    CHECK(has_sample(set, {0.0, 3.0}, Label::Unsafe));
    CHECK(has_sample(set, {0.75, 0.0}, Label::Safe));
    CHECK(has_sample(set, {0.0, 2.75}, Label::Safe));
}

TEST_CASE("short beams give only the unsafe sample") {
    const auto set = generate_training_data(manual_scan({0, 0}, {0.0}, {0.05}), 0.1);
    REQUIRE(set.size() == 1);
    CHECK(set.samples[0].label == Label::Unsafe);
    CHECK_THROWS_AS(generate_training_data(manual_scan({0, 0}, {0.0}, {1.0}), 0.0), Error);
}

TEST_CASE("aggregate identity and idempotence") {
    const auto s = generate_training_data(
        manual_scan({0, 0}, {0.0, 1.0, 2.0}, {1.0, 1.2, 0.7}), 0.1);
    const TrainingSet empty;
    const auto a = aggregate(empty, s, 0.01);
    REQUIRE(a.size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(a.samples[i].position == s.samples[i].position);
    CHECK(aggregate(s, s, 0.01).size() == s.size());
    CHECK(aggregate(s, s, 0.0).size() == s.size());
}

TEST_CASE("nearby scans of the same wall deduplicate") {
    const Scenario sc = testing::shipped("single_circle");
    const auto a = generate_training_data(scan(sc, {1.0, 1.0}, sc.sensor), 0.1);
    const auto b = generate_training_data(scan(sc, {1.0, 1.005}, sc.sensor), 0.1);
    const auto merged = aggregate(a, b, 0.01);
    CHECK(merged.size() < a.size() + b.size());
    CHECK(merged.size() == naive_union_size(a, b, 0.01));
    CHECK(merged.size() >= a.size());
}

TEST_CASE("accumulator never keeps two same-label samples within tolerance") {
    const Scenario sc = testing::shipped("five_ellipse");
    SampleAccumulator acc(0.01);
    std::mt19937_64 rng(2);
    std::size_t prev = 0;
    for (int k = 0; k < 6;) {
        const Vec2 p = testing::uniform_point(rng, sc.workspace);
        if (inside_any_obstacle(sc, p)) continue;
        ++k;
        acc.add(generate_training_data(scan(sc, p, sc.sensor), 0.1));
        CHECK(acc.set().size() >= prev);
        prev = acc.set().size();
    }
    const auto& v = acc.set().samples;
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i + 1; j < v.size(); ++j)
            if (v[i].label == v[j].label) REQUIRE((v[i].position - v[j].position).norm() > 0.01);
}

TEST_CASE("sample geometry along each beam") {
    const Scenario sc = testing::shipped("five_ellipse");
    const Vec2 pose(0.5, 1.0);
    const LaserScan s = scan(sc, pose, sc.sensor);
    const double d = 0.1;
    const auto set = generate_training_data(s, d);
    std::size_t k = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s.ranges[i]) continue;
        const auto& neg = set.samples[k++];
        REQUIRE(neg.label == Label::Unsafe);
        CHECK(std::abs(true_signed_distance(sc, neg.position)) <= 1e-6);
        if (*s.ranges[i] <= d) continue;
        const auto& pos = set.samples[k++];
        REQUIRE(pos.label == Label::Safe);
        CHECK((pos.position - neg.position).norm() == doctest::Approx(d).epsilon(1e-12));
        const Vec2 u = (neg.position - pose).normalized();
        const Vec2 w = pos.position - pose;
        CHECK(std::abs(u.x() * w.y() - u.y() * w.x()) < 1e-12);
        CHECK(w.dot(u) > 0.0);
    }
    CHECK(k == set.size());
}

TEST_CASE("positives are safe in shipped scenarios") {
    for (const char* name : {"five_ellipse", "single_circle"}) {
        const Scenario sc = testing::shipped(name);
        std::mt19937_64 rng(4);
        for (int k = 0; k < 15;) {
            const Vec2 p = testing::uniform_point(rng, sc.workspace);
            if (inside_any_obstacle(sc, p)) continue;
            ++k;
            for (const auto& smp : generate_training_data(scan(sc, p, sc.sensor), 0.1).samples)
                if (smp.label == Label::Safe) CHECK(true_signed_distance(sc, smp.position) > 0.0);
        }
    }
}

TEST_CASE("csv export") {
    TrainingSet set;
    set.samples.push_back({{1.0, 2.0}, Label::Unsafe, 0.5});
    set.samples.push_back({{0.5, 0.25}, Label::Safe, 0.5});
    std::ostringstream out;
    write_training_csv(out, set);
    CHECK(out.str() == "x,y,label,t\n1,2,-1,0.5\n0.5,0.25,1,0.5\n");
}

}  // TEST_SUITE
