#include "lcbf/dataset.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace lcbf {

std::size_t TrainingSet::count(Label label) const {
    return static_cast<std::size_t>(std::count_if(
        samples.begin(), samples.end(), [label](const LabeledSample& s) { return s.label == label; }));
}

TrainingSet generate_training_data(const LaserScan& scan, double offset) {
    if (!(offset > 0.0)) throw Error(ErrorKind::InvalidArgument, "training offset must be > 0");
    TrainingSet out;
    out.samples.reserve(2 * scan.finite_count());
    for (std::size_t i = 0; i < scan.size(); ++i) {
        const auto& r = scan.ranges[i];
        if (!r) continue;
        out.samples.push_back({scan_to_world(scan, i, *r), Label::Unsafe, scan.timestamp});
        if (*r > offset)
            out.samples.push_back({scan_to_world(scan, i, *r - offset), Label::Safe, scan.timestamp});
    }
    return out;
}

SampleAccumulator::SampleAccumulator(double tol) : tol_(tol), cell_(tol > 0.0 ? tol : 1e-3) {
    if (!(tol >= 0.0)) throw Error(ErrorKind::InvalidArgument, "dedup tolerance must be >= 0");
}

std::int64_t SampleAccumulator::cell(double v) const {
    return static_cast<std::int64_t>(std::floor(v / cell_));
}

SampleAccumulator::Key SampleAccumulator::key(std::int64_t cx, std::int64_t cy) const {
    return cx * 73856093LL ^ cy * 19349663LL;
}

bool SampleAccumulator::near_existing(const LabeledSample& s) const {
    const auto cx = cell(s.position.x());
    const auto cy = cell(s.position.y());
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
        for (std::int64_t dy = -1; dy <= 1; ++dy) {
            const auto it = grid_.find(key(cx + dx, cy + dy));
            if (it == grid_.end()) continue;
            for (std::size_t idx : it->second) {
                const auto& other = set_.samples[idx];
                if (other.label == s.label && (other.position - s.position).norm() <= tol_)
                    return true;
            }
        }
    }
    return false;
}

void SampleAccumulator::insert(const LabeledSample& s) {
    grid_[key(cell(s.position.x()), cell(s.position.y()))].push_back(set_.samples.size());
    set_.samples.push_back(s);
}

void SampleAccumulator::seed(const TrainingSet& accepted) {
    for (const auto& s : accepted.samples) insert(s);
}

std::size_t SampleAccumulator::add(const TrainingSet& incoming) {
    std::size_t accepted = 0;
    for (const auto& s : incoming.samples) {
        if (near_existing(s)) continue;
        insert(s);
        ++accepted;
    }
    return accepted;
}

TrainingSet aggregate(const TrainingSet& accumulated, const TrainingSet& incoming, double dedup_tol) {
    SampleAccumulator acc(dedup_tol);
    acc.seed(accumulated);
    acc.add(incoming);
    return acc.set();
}

void write_training_csv(std::ostream& out, const TrainingSet& set) {
    out << "x,y,label,t\n";
    for (const auto& s : set.samples)
        out << fmt::format("{:.10g},{:.10g},{},{:.10g}\n", s.position.x(), s.position.y(),
                           sign(s.label), s.timestamp);
}

}  // namespace lcbf
