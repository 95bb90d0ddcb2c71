#pragma once

#include "lcbf/environment.hpp"

#include <Eigen/Core>

#include <memory>

namespace lcbf {

struct KernelConfig {
    double sigma1;        // first-layer bandwidth, meters
    double sigma2;        // second-layer bandwidth, feature-space units
    double grid_spacing;  // first-layer center spacing, meters

    void validate() const;
};

// Fills unset (non-positive) learner fields: spacing = max extent / 20, sigma1 = 2 * spacing.
KernelConfig resolve_kernel_config(const LearnerConfig& learner, const Workspace& workspace);

// Fixed first layer: Gaussian bumps exp(-|x - c_j|^2 / sigma1^2) on a uniform grid.
class FeatureMap {
public:
    FeatureMap(const Workspace& workspace, double spacing, double sigma1);
    // Arbitrary centers; used by tests that need a tiny first layer.
    FeatureMap(Eigen::Matrix2Xd centers, double spacing, double sigma1);

    std::size_t size() const { return static_cast<std::size_t>(centers_.cols()); }
    const Eigen::Matrix2Xd& centers() const { return centers_; }
    double sigma1() const { return sigma1_; }
    double spacing() const { return spacing_; }

    Eigen::VectorXd featurize(const Vec2& x) const;
    void featurize(const Vec2& x, Eigen::Ref<Eigen::VectorXd> out) const;

private:
    Eigen::Matrix2Xd centers_;
    double spacing_;
    double sigma1_;
    double inv_sigma1_sq_;
};

// Two-layer Gaussian kernel: a Gaussian of bandwidth sigma2 between feature vectors.
class KernelNet {
public:
    KernelNet(FeatureMap map, double sigma2);
    static std::shared_ptr<const KernelNet> make(const KernelConfig& config, const Workspace& workspace);

    const FeatureMap& map() const { return map_; }
    double sigma2() const { return sigma2_; }
    KernelConfig config() const { return {map_.sigma1(), sigma2_, map_.spacing()}; }

    double kernel(const Vec2& a, const Vec2& b) const;
    // Kernel between already featurized points.
    double feature_kernel(const Eigen::Ref<const Eigen::VectorXd>& fa,
                          const Eigen::Ref<const Eigen::VectorXd>& fb) const;
    // d kernel(query, support) / d query
    Vec2 kernel_gradient(const Vec2& query, const Vec2& support) const;

    // Gradient of sum_i w_i * kernel(x, s_i) given featurized supports (one per column)
    // and the kernel values k_i = kernel(x, s_i). Shared with the SVM decision gradient.
    Vec2 weighted_gradient(const Vec2& x, const Eigen::VectorXd& fx,
                           const Eigen::Ref<const Eigen::MatrixXd>& support_features,
                           const Eigen::VectorXd& weighted_kernels) const;

private:
    FeatureMap map_;
    double sigma2_;
    double inv_sigma2_sq_;
};

// Free-function forms of the kernel operations.
Eigen::VectorXd featurize(const FeatureMap& map, const Vec2& x);
double kernel(const KernelConfig& config, const FeatureMap& map, const Vec2& a, const Vec2& b);
Vec2 kernel_gradient(const KernelConfig& config, const FeatureMap& map, const Vec2& query,
                     const Vec2& support);

}  // namespace lcbf
