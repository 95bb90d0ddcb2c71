#include "lcbf/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace lcbf {

double Polyline::length() const {
    double len = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) len += (points[i] - points[i - 1]).norm();
    return len;
}

void Polyline::validate() const {
    if (points.size() < 2)
        throw Error(ErrorKind::InvalidArgument, "polyline needs at least 2 points");
    for (const auto& p : points)
        if (!p.allFinite()) throw Error(ErrorKind::InvalidArgument, "polyline has non-finite point");
}

Polyline resample_by_arclength(const Polyline& traj, std::size_t m) {
    if (m < 2) throw Error(ErrorKind::InvalidArgument, "resample count must be >= 2");
    if (traj.points.empty()) throw Error(ErrorKind::InvalidArgument, "cannot resample empty polyline");
    const auto& p = traj.points;
    std::vector<double> cum(p.size(), 0.0);
    for (std::size_t i = 1; i < p.size(); ++i) cum[i] = cum[i - 1] + (p[i] - p[i - 1]).norm();
    const double total = cum.back();

    Polyline out;
    out.points.reserve(m);
    if (!(total > 0.0)) {
        out.points.assign(m, p.front());
        return out;
    }
    std::size_t seg = 1;
    for (std::size_t k = 0; k < m; ++k) {
        if (k == 0) { out.points.push_back(p.front()); continue; }
        if (k + 1 == m) { out.points.push_back(p.back()); continue; }
        const double s = total * double(k) / double(m - 1);
        while (seg + 1 < p.size() && cum[seg] < s) ++seg;
        const double span = cum[seg] - cum[seg - 1];
        const double w = span > 0.0 ? std::clamp((s - cum[seg - 1]) / span, 0.0, 1.0) : 0.0;
        out.points.push_back(p[seg - 1] + w * (p[seg] - p[seg - 1]));
    }
    return out;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty())
        throw Error(ErrorKind::InvalidArgument, "pearson: sequences must be non-empty and equal length");
    const double n = double(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) { ma += a[i]; mb += b[i]; }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    // Relative threshold so round-off around a constant does not read as variation.
    const auto flat = [](double ss, double mean, double count) {
        return ss <= 1e-24 * count * std::max(1.0, mean * mean);
    };
    const bool ca = flat(saa, ma, n), cb = flat(sbb, mb, n);
    if (ca || cb) return (ca && cb) ? 1.0 : 0.0;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double correlation(const Polyline& a, const Polyline& b, std::size_t m) {
    const Polyline ra = resample_by_arclength(a, m);
    const Polyline rb = resample_by_arclength(b, m);
    std::vector<double> ax(m), ay(m), bx(m), by(m);
    for (std::size_t i = 0; i < m; ++i) {
        ax[i] = ra.points[i].x();
        ay[i] = ra.points[i].y();
        bx[i] = rb.points[i].x();
        by[i] = rb.points[i].y();
    }
    return 0.5 * (pearson(ax, bx) + pearson(ay, by));
}

double frechet_distance(const Polyline& a, const Polyline& b) {
    const std::size_t n = a.size(), m = b.size();
    if (n == 0 || m == 0) throw Error(ErrorKind::InvalidArgument, "frechet: empty polyline");
    // Rolling row over the coupling lattice.
    std::vector<double> prev(m), cur(m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double d = (a.points[i] - b.points[j]).norm();
            double best;
            if (i == 0 && j == 0) best = d;
            else if (i == 0) best = std::max(cur[j - 1], d);
            else if (j == 0) best = std::max(prev[0], d);
            else best = std::max(std::min({prev[j], prev[j - 1], cur[j - 1]}), d);
            cur[j] = best;
        }
        std::swap(prev, cur);
    }
    return prev[m - 1];
}

}  // namespace lcbf
