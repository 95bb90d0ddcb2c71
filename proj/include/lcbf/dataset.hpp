#pragma once

#include "lcbf/sensor.hpp"

#include <cstdint>
#include <iosfwd>
#include <unordered_map>
#include <vector>

namespace lcbf {

enum class Label : int { Safe = 1, Unsafe = -1 };

inline int sign(Label l) { return static_cast<int>(l); }

struct LabeledSample {
    Vec2 position;
    Label label;
    double timestamp = 0.0;  // scan time the sample came from
};

struct TrainingSet {
    std::vector<LabeledSample> samples;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    std::size_t count(Label label) const;
    bool has_both_labels() const { return count(Label::Safe) > 0 && count(Label::Unsafe) > 0; }
};

// One unsafe sample at each finite hit and one safe sample pulled back along the beam by
// `offset`. Beams with range <= offset contribute only the unsafe sample.
TrainingSet generate_training_data(const LaserScan& scan, double offset);

// Accumulates samples, dropping a newcomer that lies within `tol` of an already
// accepted sample carrying the same label. Backed by a uniform hash grid.
class SampleAccumulator {
public:
    explicit SampleAccumulator(double tol);

    // Seeds with samples taken as-is (no deduplication among them).
    void seed(const TrainingSet& accepted);
    // Returns the number of samples accepted.
    std::size_t add(const TrainingSet& incoming);
    const TrainingSet& set() const { return set_; }
    double tolerance() const { return tol_; }

private:
    using Key = std::int64_t;
    Key key(std::int64_t cx, std::int64_t cy) const;
    std::int64_t cell(double v) const;
    bool near_existing(const LabeledSample& s) const;
    void insert(const LabeledSample& s);

    double tol_;
    double cell_;
    TrainingSet set_;
    std::unordered_map<Key, std::vector<std::size_t>> grid_;
};

TrainingSet aggregate(const TrainingSet& accumulated, const TrainingSet& incoming, double dedup_tol);

// CSV with header "x,y,label,t".
void write_training_csv(std::ostream& out, const TrainingSet& set);

}  // namespace lcbf
