#pragma once

#include "lcbf/dataset.hpp"
#include "lcbf/kernelnet.hpp"

#include <list>
#include <memory>
#include <unordered_map>
#include <vector>

namespace lcbf {

struct SvmConfig {
    double c_plus = 10.0;
    double c_minus_init = 1e4;  // escalated x10 while unsafe samples are misclassified
    double c_minus_cap = 1e8;
    double tolerance = 1e-6;    // maximal KKT violation at convergence
    std::size_t max_iters = 10'000'000;
    std::size_t polish_every = 200;  // decomposition iterations between face solves; 0 disables
    bool record_objective = false;
    std::size_t cache_bytes = std::size_t(256) << 20;

    static SvmConfig from(const LearnerConfig& learner);
    void validate() const;
};

struct TrainingDiagnostics {
    std::size_t iterations = 0;
    std::size_t negative_margin_violations = 0;
    std::size_t escalations = 0;
    double c_minus = 0.0;
    double max_kkt_violation = 0.0;
    bool converged = false;
    double dual_objective = 0.0;  // maximization form
    double dual_equality_residual = 0.0;
    std::vector<double> objective_trace;  // filled when SvmConfig::record_objective
};

// Trained two-layer classifier; its decision value is the learned barrier.
class BarrierModel final : public Barrier {
public:
    BarrierModel(std::shared_ptr<const KernelNet> net, std::vector<Vec2> points,
                 std::vector<Label> labels, std::vector<double> alphas, double bias,
                 TrainingDiagnostics diagnostics = {});

    // sum_i alpha_i y_i k(x, x_i) + b
    double decision(const Vec2& x) const;
    Vec2 decision_gradient(const Vec2& x) const;
    double value(const Vec2& x) const override { return decision(x); }
    Vec2 gradient(const Vec2& x) const override { return decision_gradient(x); }

    std::size_t support_count() const { return points_.size(); }
    const std::vector<Vec2>& support_points() const { return points_; }
    const std::vector<Label>& support_labels() const { return labels_; }
    const std::vector<double>& alphas() const { return alphas_; }
    double bias() const { return bias_; }
    const KernelNet& net() const { return *net_; }
    const std::shared_ptr<const KernelNet>& net_ptr() const { return net_; }
    const TrainingDiagnostics& diagnostics() const { return diagnostics_; }

private:
    Eigen::VectorXd kernel_row(const Eigen::VectorXd& fx) const;

    std::shared_ptr<const KernelNet> net_;
    std::vector<Vec2> points_;
    std::vector<Label> labels_;
    std::vector<double> alphas_;
    double bias_;
    TrainingDiagnostics diagnostics_;
    Eigen::MatrixXd features_;  // one featurized support per column
    Eigen::VectorXd coef_;      // alpha_i * y_i
};

// Biased-penalty C-SVM solved in the dual by two-variable working-set decomposition
// (maximal-violating pair with second-order selection). The trainer keeps its dual state
// so that appending samples and solving again warm-starts from the previous solution.
class SvmTrainer {
public:
    SvmTrainer(std::shared_ptr<const KernelNet> net, SvmConfig config);

    void reset();
    void append(const TrainingSet& samples);
    std::size_t size() const { return points_.size(); }

    // Throws DegenerateTrainingSet for single-class data and HardMarginInfeasible when an
    // unsafe sample stays misclassified at the C- cap (or coincides with a safe sample).
    BarrierModel solve();

    const std::vector<double>& alphas() const { return alpha_; }

private:
    struct Row {
        std::vector<double> values;
        std::list<std::size_t>::iterator lru;
        bool cached = false;
    };

    double upper(std::size_t i) const { return y_[i] > 0 ? config_.c_plus : c_minus_; }
    bool is_upper(std::size_t i) const { return alpha_[i] >= upper(i); }
    bool is_lower(std::size_t i) const { return alpha_[i] <= 0.0; }
    const double* row(std::size_t i);
    void evict_until_fits(std::size_t needed);
    // Runs decomposition iterations until the KKT gap falls below tolerance.
    bool optimize(std::size_t budget, std::size_t& iterations, double& gap,
                  std::vector<double>* trace);
    // Exact minimization over the face of currently free variables, truncated at the box.
    bool polish();
    double compute_bias() const;
    double dual_objective() const;

    std::shared_ptr<const KernelNet> net_;
    SvmConfig config_;
    double c_minus_;

    std::vector<Vec2> points_;
    std::vector<signed char> y_;
    Eigen::MatrixXd features_;  // D x capacity; first size() columns used
    std::vector<double> sqnorm_;
    std::vector<double> alpha_;
    std::vector<double> grad_;  // (Q alpha)_i - 1

    std::vector<Row> rows_;
    std::list<std::size_t> lru_;
    std::size_t cached_doubles_ = 0;

    std::unordered_map<std::int64_t, int> occupancy_;  // exact-position label mask
    bool conflicting_ = false;
};

BarrierModel train(const TrainingSet& data, const SvmConfig& config,
                   std::shared_ptr<const KernelNet> net);

// Count of unsafe samples with decision >= 0, evaluated through the model itself.
std::size_t count_negative_violations(const BarrierModel& model, const TrainingSet& data);

}  // namespace lcbf
