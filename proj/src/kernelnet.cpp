#include "lcbf/kernelnet.hpp"

#include <cmath>

namespace lcbf {

void KernelConfig::validate() const {
    if (!(sigma1 > 0.0) || !(sigma2 > 0.0) || !(grid_spacing > 0.0))
        throw Error(ErrorKind::Validation, "kernel: sigma1, sigma2 and grid_spacing must be > 0");
}

KernelConfig resolve_kernel_config(const LearnerConfig& learner, const Workspace& workspace) {
    KernelConfig cfg;
    cfg.grid_spacing = learner.grid_spacing > 0.0
                           ? learner.grid_spacing
                           : std::max(workspace.width(), workspace.height()) / 20.0;
    cfg.sigma1 = learner.sigma1 > 0.0 ? learner.sigma1 : 2.0 * cfg.grid_spacing;
    cfg.sigma2 = learner.sigma2;
    cfg.validate();
    return cfg;
}

namespace {

Eigen::Matrix2Xd grid_centers(const Workspace& ws, double spacing) {
    const auto nx = static_cast<Eigen::Index>(std::ceil(ws.width() / spacing - 1e-9)) + 1;
    const auto ny = static_cast<Eigen::Index>(std::ceil(ws.height() / spacing - 1e-9)) + 1;
    Eigen::Matrix2Xd c(2, nx * ny);
    for (Eigen::Index j = 0; j < ny; ++j)
        for (Eigen::Index i = 0; i < nx; ++i)
            c.col(j * nx + i) = Vec2(ws.x_min + double(i) * spacing, ws.y_min + double(j) * spacing);
    return c;
}

}  // namespace

FeatureMap::FeatureMap(const Workspace& workspace, double spacing, double sigma1)
    : FeatureMap(grid_centers(workspace, spacing), spacing, sigma1) {}

FeatureMap::FeatureMap(Eigen::Matrix2Xd centers, double spacing, double sigma1)
    : centers_(std::move(centers)), spacing_(spacing), sigma1_(sigma1),
      inv_sigma1_sq_(1.0 / (sigma1 * sigma1)) {
    if (!(sigma1 > 0.0) || !(spacing > 0.0) || centers_.cols() == 0)
        throw Error(ErrorKind::InvalidArgument, "feature map: need centers and positive sigma1");
}

void FeatureMap::featurize(const Vec2& x, Eigen::Ref<Eigen::VectorXd> out) const {
    out = (-(centers_.colwise() - x).colwise().squaredNorm().array() * inv_sigma1_sq_).exp().transpose();
}

Eigen::VectorXd FeatureMap::featurize(const Vec2& x) const {
    Eigen::VectorXd out(centers_.cols());
    featurize(x, out);
    return out;
}

KernelNet::KernelNet(FeatureMap map, double sigma2)
    : map_(std::move(map)), sigma2_(sigma2), inv_sigma2_sq_(1.0 / (sigma2 * sigma2)) {
    if (!(sigma2 > 0.0)) throw Error(ErrorKind::InvalidArgument, "kernel: sigma2 must be > 0");
}

std::shared_ptr<const KernelNet> KernelNet::make(const KernelConfig& config, const Workspace& workspace) {
    config.validate();
    return std::make_shared<const KernelNet>(FeatureMap(workspace, config.grid_spacing, config.sigma1),
                                             config.sigma2);
}

double KernelNet::feature_kernel(const Eigen::Ref<const Eigen::VectorXd>& fa,
                                 const Eigen::Ref<const Eigen::VectorXd>& fb) const {
    return std::exp(-(fa - fb).squaredNorm() * inv_sigma2_sq_);
}

double KernelNet::kernel(const Vec2& a, const Vec2& b) const {
    return feature_kernel(map_.featurize(a), map_.featurize(b));
}

Vec2 KernelNet::weighted_gradient(const Vec2& x, const Eigen::VectorXd& fx,
                                  const Eigen::Ref<const Eigen::MatrixXd>& support_features,
                                  const Eigen::VectorXd& weighted_kernels) const {
    // d/dx exp(-|f(x) - f_i|^2 / s2^2) = k_i * (-2/s2^2) * J(x)^T (f(x) - f_i)
    // with J_j(x) = f_j(x) * (-2/s1^2) * (x - c_j).
    const Eigen::VectorXd r = weighted_kernels.sum() * fx - support_features * weighted_kernels;
    const Eigen::ArrayXd w = r.array() * fx.array();
    const Eigen::Matrix2Xd& c = map_.centers();
    const Vec2 jt_r(((x.x() - c.row(0).array()) * w.transpose()).sum(),
                    ((x.y() - c.row(1).array()) * w.transpose()).sum());
    const double s1 = map_.sigma1();
    return (-2.0 * inv_sigma2_sq_) * (-2.0 / (s1 * s1)) * jt_r;
}

Vec2 KernelNet::kernel_gradient(const Vec2& query, const Vec2& support) const {
    const Eigen::VectorXd fq = map_.featurize(query);
    const Eigen::VectorXd fs = map_.featurize(support);
    Eigen::VectorXd k(1);
    k(0) = feature_kernel(fq, fs);
    return weighted_gradient(query, fq, fs, k);
}

Eigen::VectorXd featurize(const FeatureMap& map, const Vec2& x) { return map.featurize(x); }

double kernel(const KernelConfig& config, const FeatureMap& map, const Vec2& a, const Vec2& b) {
    return KernelNet(map, config.sigma2).kernel(a, b);
}

Vec2 kernel_gradient(const KernelConfig& config, const FeatureMap& map, const Vec2& query,
                     const Vec2& support) {
    return KernelNet(map, config.sigma2).kernel_gradient(query, support);
}

}  // namespace lcbf
