#include "lcbf/svm.hpp"

#include <Eigen/QR>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace lcbf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTau = 1e-12;

std::int64_t position_key(const Vec2& p) {
    const auto qx = static_cast<std::int64_t>(std::llround(p.x() * 1e9));
    const auto qy = static_cast<std::int64_t>(std::llround(p.y() * 1e9));
    return qx * 1000003LL ^ qy;
}

}  // namespace

SvmConfig SvmConfig::from(const LearnerConfig& learner) {
    SvmConfig c;
    c.c_plus = learner.c_plus;
    c.c_minus_init = learner.c_minus_init;
    c.c_minus_cap = learner.c_minus_cap;
    c.tolerance = learner.kkt_tolerance;
    c.max_iters = learner.max_iters;
    return c;
}

void SvmConfig::validate() const {
    if (!(c_plus > 1.0)) throw Error(ErrorKind::Validation, "svm: C+ must be > 1");
    if (!(c_minus_init >= c_plus)) throw Error(ErrorKind::Validation, "svm: C- must be >= C+");
    if (!(c_minus_cap >= c_minus_init))
        throw Error(ErrorKind::Validation, "svm: C- cap must be >= initial C-");
    if (!(tolerance > 0.0)) throw Error(ErrorKind::Validation, "svm: tolerance must be > 0");
    if (max_iters == 0) throw Error(ErrorKind::Validation, "svm: max_iters must be > 0");
}

// ---------------------------------------------------------------------------
// BarrierModel

BarrierModel::BarrierModel(std::shared_ptr<const KernelNet> net, std::vector<Vec2> points,
                           std::vector<Label> labels, std::vector<double> alphas, double bias,
                           TrainingDiagnostics diagnostics)
    : net_(std::move(net)), points_(std::move(points)), labels_(std::move(labels)),
      alphas_(std::move(alphas)), bias_(bias), diagnostics_(std::move(diagnostics)) {
    if (!net_) throw Error(ErrorKind::InvalidArgument, "barrier model: missing kernel");
    if (points_.size() != labels_.size() || points_.size() != alphas_.size())
        throw Error(ErrorKind::InvalidArgument, "barrier model: support arrays differ in length");
    const auto n = static_cast<Eigen::Index>(points_.size());
    features_.resize(static_cast<Eigen::Index>(net_->map().size()), n);
    coef_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        net_->map().featurize(points_[std::size_t(i)], features_.col(i));
        coef_(i) = alphas_[std::size_t(i)] * sign(labels_[std::size_t(i)]);
    }
}

Eigen::VectorXd BarrierModel::kernel_row(const Eigen::VectorXd& fx) const {
    const double inv = 1.0 / (net_->sigma2() * net_->sigma2());
    return (-(features_.colwise() - fx).colwise().squaredNorm().array() * inv).exp().transpose();
}

double BarrierModel::decision(const Vec2& x) const {
    if (points_.empty()) return bias_;
    const Eigen::VectorXd fx = net_->map().featurize(x);
    return coef_.dot(kernel_row(fx)) + bias_;
}

Vec2 BarrierModel::decision_gradient(const Vec2& x) const {
    if (points_.empty()) return Vec2::Zero();
    const Eigen::VectorXd fx = net_->map().featurize(x);
    const Eigen::VectorXd wk = coef_.cwiseProduct(kernel_row(fx));
    return net_->weighted_gradient(x, fx, features_, wk);
}

// ---------------------------------------------------------------------------
// SvmTrainer

SvmTrainer::SvmTrainer(std::shared_ptr<const KernelNet> net, SvmConfig config)
    : net_(std::move(net)), config_(config), c_minus_(config.c_minus_init) {
    if (!net_) throw Error(ErrorKind::InvalidArgument, "svm: missing kernel");
    config_.validate();
}

void SvmTrainer::reset() {
    c_minus_ = config_.c_minus_init;
    points_.clear();
    y_.clear();
    sqnorm_.clear();
    alpha_.clear();
    grad_.clear();
    rows_.clear();
    lru_.clear();
    cached_doubles_ = 0;
    occupancy_.clear();
    conflicting_ = false;
}

void SvmTrainer::append(const TrainingSet& samples) {
    if (samples.empty()) return;
    const std::size_t old_n = points_.size();
    const std::size_t new_n = old_n + samples.size();
    const auto dim = static_cast<Eigen::Index>(net_->map().size());
    if (features_.rows() != dim || static_cast<std::size_t>(features_.cols()) < new_n) {
        Eigen::MatrixXd grown(dim, static_cast<Eigen::Index>(std::max(new_n, 2 * old_n + 16)));
        if (old_n > 0) grown.leftCols(Eigen::Index(old_n)) = features_.leftCols(Eigen::Index(old_n));
        features_.swap(grown);
    }
    for (const auto& s : samples.samples) {
        const auto col = static_cast<Eigen::Index>(points_.size());
        points_.push_back(s.position);
        y_.push_back(static_cast<signed char>(sign(s.label)));
        net_->map().featurize(s.position, features_.col(col));
        sqnorm_.push_back(features_.col(col).squaredNorm());
        alpha_.push_back(0.0);
        grad_.push_back(-1.0);
        rows_.emplace_back();
        int& mask = occupancy_[position_key(s.position)];
        mask |= s.label == Label::Safe ? 1 : 2;
        if (mask == 3) conflicting_ = true;
    }
    // New samples enter with alpha = 0: existing gradients are unchanged, the new ones need
    // the contribution of the current support set.
    bool any_support = std::any_of(alpha_.begin(), alpha_.begin() + std::ptrdiff_t(old_n),
                                   [](double a) { return a > 0.0; });
    if (!any_support) return;
    for (std::size_t k = old_n; k < new_n; ++k) {
        const double* kr = row(k);
        double acc = 0.0;
        for (std::size_t j = 0; j < old_n; ++j)
            if (alpha_[j] > 0.0) acc += alpha_[j] * y_[j] * kr[j];
        grad_[k] = y_[k] * acc - 1.0;
    }
}

void SvmTrainer::evict_until_fits(std::size_t needed) {
    const std::size_t budget = config_.cache_bytes / sizeof(double);
    while (!lru_.empty() && cached_doubles_ + needed > budget) {
        const std::size_t victim = lru_.back();
        lru_.pop_back();
        Row& r = rows_[victim];
        cached_doubles_ -= r.values.capacity();
        std::vector<double>().swap(r.values);
        r.cached = false;
    }
}

const double* SvmTrainer::row(std::size_t i) {
    const std::size_t n = points_.size();
    Row& r = rows_[i];
    if (r.cached) {
        lru_.splice(lru_.begin(), lru_, r.lru);
    } else {
        evict_until_fits(n);
        lru_.push_front(i);
        r.lru = lru_.begin();
        r.cached = true;
    }
    const std::size_t have = r.values.size();
    if (have < n) {
        const std::size_t before = r.values.capacity();
        r.values.resize(n);
        cached_doubles_ += r.values.capacity() - before;
        const double inv = 1.0 / (net_->sigma2() * net_->sigma2());
        const auto fi = features_.col(static_cast<Eigen::Index>(i));
        const Eigen::VectorXd dots =
            features_.middleCols(Eigen::Index(have), Eigen::Index(n - have)).transpose() * fi;
        for (std::size_t t = have; t < n; ++t) {
            const double d2 = std::max(0.0, sqnorm_[i] + sqnorm_[t] - 2.0 * dots(Eigen::Index(t - have)));
            r.values[t] = t == i ? 1.0 : std::exp(-d2 * inv);
        }
    }
    return r.values.data();
}

double SvmTrainer::dual_objective() const {
    double v = 0.0;
    for (std::size_t i = 0; i < alpha_.size(); ++i) v += alpha_[i] * (grad_[i] - 1.0);
    return -0.5 * v;
}

bool SvmTrainer::optimize(std::size_t budget, std::size_t& iterations, double& gap,
                          std::vector<double>* trace) {
    const std::size_t n = points_.size();
    gap = kInf;
    for (std::size_t iter = 0; iter < budget; ++iter) {
        // Maximal violating index from the "up" set.
        double gmax = -kInf;
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t) {
            const bool up = y_[t] > 0 ? !is_upper(t) : !is_lower(t);
            if (up && -y_[t] * grad_[t] >= gmax) {
                gmax = -y_[t] * grad_[t];
                i = t;
            }
        }
        if (i == n) {
            gap = 0.0;
            return true;
        }
        const double* ki = row(i);

        // Second-order partner from the "low" set.
        double gmax2 = -kInf;
        double best = kInf;
        std::size_t j = n;
        for (std::size_t t = 0; t < n; ++t) {
            const bool low = y_[t] > 0 ? !is_lower(t) : !is_upper(t);
            if (!low) continue;
            const double yg = y_[t] * grad_[t];
            gmax2 = std::max(gmax2, yg);
            const double b = gmax + yg;
            if (b > 0.0) {
                double a = 2.0 - 2.0 * ki[t];
                if (a <= 0.0) a = kTau;
                const double obj = -(b * b) / a;
                if (obj <= best) {
                    best = obj;
                    j = t;
                }
            }
        }
        gap = gmax + gmax2;
        if (gap < config_.tolerance || j == n) return true;

        ki = row(i);  // keep i hot in the cache before fetching j
        const double* kj = row(j);
        ki = row(i);
        const double ci = upper(i), cj = upper(j);
        const double old_ai = alpha_[i], old_aj = alpha_[j];
        double quad = 2.0 - 2.0 * ki[j];
        if (quad <= 0.0) quad = kTau;

        if (y_[i] != y_[j]) {
            const double delta = (-grad_[i] - grad_[j]) / quad;
            const double diff = alpha_[i] - alpha_[j];
            alpha_[i] += delta;
            alpha_[j] += delta;
            if (diff > 0.0) {
                if (alpha_[j] < 0.0) { alpha_[j] = 0.0; alpha_[i] = diff; }
            } else {
                if (alpha_[i] < 0.0) { alpha_[i] = 0.0; alpha_[j] = -diff; }
            }
            if (diff > ci - cj) {
                if (alpha_[i] > ci) { alpha_[i] = ci; alpha_[j] = ci - diff; }
            } else {
                if (alpha_[j] > cj) { alpha_[j] = cj; alpha_[i] = cj + diff; }
            }
        } else {
            const double delta = (grad_[i] - grad_[j]) / quad;
            const double sum = alpha_[i] + alpha_[j];
            alpha_[i] -= delta;
            alpha_[j] += delta;
            if (sum > ci) {
                if (alpha_[i] > ci) { alpha_[i] = ci; alpha_[j] = sum - ci; }
            } else {
                if (alpha_[j] < 0.0) { alpha_[j] = 0.0; alpha_[i] = sum; }
            }
            if (sum > cj) {
                if (alpha_[j] > cj) { alpha_[j] = cj; alpha_[i] = sum - cj; }
            } else {
                if (alpha_[i] < 0.0) { alpha_[i] = 0.0; alpha_[j] = sum; }
            }
        }

        const double dai = (alpha_[i] - old_ai) * y_[i];
        const double daj = (alpha_[j] - old_aj) * y_[j];
        for (std::size_t t = 0; t < n; ++t) grad_[t] += y_[t] * (ki[t] * dai + kj[t] * daj);
        ++iterations;
        if (trace) trace->push_back(dual_objective());
        if (config_.polish_every > 0 && (iter + 1) % config_.polish_every == 0 && polish() && trace)
            trace->push_back(dual_objective());
    }
    return false;
}

bool SvmTrainer::polish() {
    std::vector<std::size_t> free;
    for (std::size_t t = 0; t < alpha_.size(); ++t)
        if (!is_lower(t) && !is_upper(t)) free.push_back(t);
    const auto m = static_cast<Eigen::Index>(free.size());
    if (m < 2) return false;

    Eigen::MatrixXd q(m, m);
    Eigen::VectorXd yf(m), g(m), a0(m), hi(m);
    for (Eigen::Index r = 0; r < m; ++r) {
        const std::size_t i = free[std::size_t(r)];
        const double* ki = row(i);
        for (Eigen::Index c = 0; c < m; ++c) {
            const std::size_t j = free[std::size_t(c)];
            q(r, c) = double(y_[i] * y_[j]) * ki[j];
        }
        yf(r) = y_[i];
        g(r) = grad_[i];
        a0(r) = alpha_[i];
        hi(r) = upper(i);
    }

    // Primal active-set descent restricted to the free variables: solve the face problem,
    // stop at the first bound, pin that variable, repeat until a full step fits.
    Eigen::VectorXd a = a0;
    std::vector<char> active(std::size_t(m), 1);
    bool moved = false;
    for (Eigen::Index pass = 0; pass < m; ++pass) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index r = 0; r < m; ++r)
            if (active[std::size_t(r)]) idx.push_back(r);
        const auto k = static_cast<Eigen::Index>(idx.size());
        if (k < 2) break;
        // Stationarity on the face: Q d + b y = -g,  y' d = 0.
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
        Eigen::VectorXd rhs(k + 1);
        for (Eigen::Index r = 0; r < k; ++r) {
            for (Eigen::Index c = 0; c < k; ++c) kkt(r, c) = q(idx[r], idx[c]);
            kkt(r, k) = kkt(k, r) = yf(idx[r]);
            rhs(r) = -g(idx[r]);
        }
        rhs(k) = 0.0;
        const Eigen::VectorXd d = kkt.completeOrthogonalDecomposition().solve(rhs).head(k);
        if (!d.allFinite()) break;

        double step = 1.0;
        Eigen::Index blocking = -1;
        for (Eigen::Index r = 0; r < k; ++r) {
            const Eigen::Index v = idx[r];
            double limit = 1.0;
            if (d(r) > 0.0) limit = (hi(v) - a(v)) / d(r);
            else if (d(r) < 0.0) limit = -a(v) / d(r);
            if (limit < step) {
                step = limit;
                blocking = v;
            }
        }
        step = std::max(step, 0.0);
        Eigen::VectorXd full = Eigen::VectorXd::Zero(m);
        for (Eigen::Index r = 0; r < k; ++r) full(idx[r]) = step * d(r);
        const double decrease = -(g.dot(full) + 0.5 * full.dot(q * full));
        if (decrease > 0.0) {
            a += full;
            g += q * full;
            moved = true;
        }
        if (blocking < 0) break;
        a(blocking) = d(std::find(idx.begin(), idx.end(), blocking) - idx.begin()) > 0.0 ? hi(blocking) : 0.0;
        active[std::size_t(blocking)] = 0;
    }
    if (!moved) return false;

    // Clean round-off at the bounds and restore the equality constraint exactly.
    for (Eigen::Index r = 0; r < m; ++r) {
        if (a(r) <= 1e-12 * hi(r)) a(r) = 0.0;
        if (hi(r) - a(r) <= 1e-12 * hi(r)) a(r) = hi(r);
    }
    std::vector<double> delta(free.size());
    for (Eigen::Index r = 0; r < m; ++r) {
        const std::size_t i = free[std::size_t(r)];
        delta[std::size_t(r)] = (a(r) - alpha_[i]) * y_[i];
        alpha_[i] = a(r);
    }
    double residual = 0.0;
    for (std::size_t t = 0; t < alpha_.size(); ++t) residual += alpha_[t] * y_[t];
    if (residual != 0.0) {
        for (Eigen::Index r = m - 1; r >= 0; --r) {
            const std::size_t i = free[std::size_t(r)];
            const double fixed = alpha_[i] - residual * y_[i];
            if (fixed > 0.0 && fixed < upper(i)) {
                delta[std::size_t(r)] += (fixed - alpha_[i]) * y_[i];
                alpha_[i] = fixed;
                break;
            }
        }
    }
    const std::size_t n = alpha_.size();
    for (std::size_t r = 0; r < free.size(); ++r) {
        if (delta[r] == 0.0) continue;
        const double* kr = row(free[r]);
        for (std::size_t t = 0; t < n; ++t) grad_[t] += y_[t] * kr[t] * delta[r];
    }
    return true;
}

double SvmTrainer::compute_bias() const {
    double ub = kInf, lb = -kInf, sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t i = 0; i < alpha_.size(); ++i) {
        const double yg = y_[i] * grad_[i];
        if (is_upper(i)) {
            if (y_[i] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else if (is_lower(i)) {
            if (y_[i] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    const double rho = n_free > 0 ? sum_free / double(n_free) : 0.5 * (ub + lb);
    return -rho;
}

BarrierModel SvmTrainer::solve() {
    const std::size_t n = points_.size();
    const auto n_pos = static_cast<std::size_t>(std::count(y_.begin(), y_.end(), 1));
    if (n < 2 || n_pos == 0 || n_pos == n)
        throw Error(ErrorKind::DegenerateTrainingSet,
                    fmt::format("degenerate training set: {} safe and {} unsafe samples", n_pos,
                                n - n_pos));
    if (conflicting_)
        throw Error(ErrorKind::HardMarginInfeasible,
                    "hard-margin infeasible: a safe and an unsafe sample coincide");

    TrainingDiagnostics diag;
    std::vector<double>* trace = config_.record_objective ? &diag.objective_trace : nullptr;
    if (trace) trace->push_back(dual_objective());
    for (;;) {
        double gap = 0.0;
        const bool converged = optimize(config_.max_iters, diag.iterations, gap, trace);
        const double bias = compute_bias();
        std::size_t violations = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (y_[i] > 0) continue;
            const double f = y_[i] * (grad_[i] + 1.0) + bias;
            if (f >= 0.0) ++violations;
        }
        diag.converged = converged;
        diag.max_kkt_violation = gap;
        diag.negative_margin_violations = violations;
        diag.c_minus = c_minus_;
        if (violations == 0) {
            diag.dual_objective = dual_objective();
            double residual = 0.0;
            std::vector<Vec2> pts;
            std::vector<Label> labels;
            std::vector<double> alphas;
            for (std::size_t i = 0; i < n; ++i) {
                residual += alpha_[i] * y_[i];
                if (alpha_[i] <= 0.0) continue;
                pts.push_back(points_[i]);
                labels.push_back(y_[i] > 0 ? Label::Safe : Label::Unsafe);
                alphas.push_back(alpha_[i]);
            }
            diag.dual_equality_residual = residual;
            return BarrierModel(net_, std::move(pts), std::move(labels), std::move(alphas), bias,
                                std::move(diag));
        }
        if (c_minus_ * 10.0 > config_.c_minus_cap * (1.0 + 1e-12))
            throw Error(ErrorKind::HardMarginInfeasible,
                        fmt::format("hard-margin infeasible: {} unsafe samples misclassified at "
                                    "C- = {:g} after {} iterations",
                                    violations, c_minus_, diag.iterations));
        c_minus_ *= 10.0;
        ++diag.escalations;
    }
}

BarrierModel train(const TrainingSet& data, const SvmConfig& config,
                   std::shared_ptr<const KernelNet> net) {
    SvmTrainer trainer(std::move(net), config);
    trainer.append(data);
    return trainer.solve();
}

std::size_t count_negative_violations(const BarrierModel& model, const TrainingSet& data) {
    std::size_t count = 0;
    for (const auto& s : data.samples)
        if (s.label == Label::Unsafe && model.decision(s.position) >= 0.0) ++count;
    return count;
}

}  // namespace lcbf
