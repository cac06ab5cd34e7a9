#include "odenet/shallow.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "odenet/controls.hpp"
#include "odenet/linalg.hpp"
#include "odenet/rng.hpp"

namespace odenet {

namespace {

double coordinate_radius(const Domain& region) {
    double r = 0.0;
    for (int i = 0; i < region.dimension(); ++i)
        r = std::max({r, std::abs(region.lower[i]), std::abs(region.upper[i])});
    return r;
}

ScalarFit fit_scalar_values(const std::vector<Eigen::VectorXd>& pts,
                            const Eigen::VectorXd& y, double offset_radius,
                            const Activation& sigma, int width,
                            double feature_scale, double ridge,
                            std::uint64_t seed) {
    if (width < 1) throw PreconditionError("fit_scalar: width must be >= 1");
    if (!(feature_scale > 0.0))
        throw PreconditionError("fit_scalar: feature_scale must be > 0");
    if (ridge < 0.0) throw PreconditionError("fit_scalar: ridge must be >= 0");

    const auto n = static_cast<Eigen::Index>(pts.size());
    const auto dim = pts.front().size();
    UniformSource rng(seed);

    std::vector<ScalarTerm> terms(width);
    for (auto& term : terms) {
        term.direction.resize(dim);
        for (Eigen::Index i = 0; i < dim; ++i)
            term.direction[i] = rng.symmetric(feature_scale);
        term.offset = rng.symmetric(feature_scale * offset_radius);
    }

    Eigen::MatrixXd a(n, width);
    for (Eigen::Index p = 0; p < n; ++p)
        for (int k = 0; k < width; ++k)
            a(p, k) = sigma(terms[k].direction.dot(pts[p]) + terms[k].offset);

    Eigen::VectorXd w;
    if (ridge > 0.0) {
        Eigen::MatrixXd gram = a.transpose() * a;
        gram.diagonal().array() += ridge * static_cast<double>(n);
        w = gram.ldlt().solve(a.transpose() * y);
    } else {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
        if (qr.rank() < width)
            throw ConditioningError(
                "fit_scalar: feature matrix is rank deficient; add ridge or "
                "change the seed");
        w = qr.solve(y);
    }
    if (!w.allFinite())
        throw ConditioningError("fit_scalar: least-squares weights are not finite");

    ScalarFit fit;
    fit.terms = std::move(terms);
    for (int k = 0; k < width; ++k) fit.terms[k].weight = w[k];
    fit.train_sup_error = (a * w - y).cwiseAbs().maxCoeff();
    return fit;
}

}  // namespace

ShallowField::ShallowField(Activation sigma, std::vector<ShallowTerm> terms)
    : sigma_(std::move(sigma)), terms_(std::move(terms)) {
    if (terms_.empty())
        throw PreconditionError("ShallowField: needs at least one term");
    const auto dim = terms_.front().alpha.size();
    for (const auto& t : terms_) {
        if (t.alpha.size() != dim || t.gamma.size() != dim ||
            t.beta.rows() != dim || t.beta.cols() != dim)
            throw DimensionError("ShallowField: inconsistent term shapes");
        if (!t.alpha.allFinite() || !t.beta.allFinite() || !t.gamma.allFinite())
            throw PreconditionError("ShallowField: non-finite term");
    }
}

Eigen::VectorXd ShallowField::eval(const Eigen::VectorXd& x) const {
    if (x.size() != dimension())
        throw DimensionError("ShallowField::eval: state dimension mismatch");
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(dimension());
    for (const auto& t : terms_)
        acc += neuron_rhs(sigma_, t.alpha, t.beta, t.gamma, x);
    return acc;
}

double ShallowField::lipschitz_x() const {
    double lip = 0.0;
    for (const auto& t : terms_)
        lip += t.alpha.norm() * operator_norm(t.beta) * sigma_.lipschitz();
    return lip;
}

VectorField ShallowField::as_field(double horizon) const {
    ShallowField copy = *this;
    return VectorField(dimension(), lipschitz_x(), horizon,
                       [copy](const Eigen::VectorXd& x, double) { return copy.eval(x); });
}

ScalarFit fit_scalar(const std::function<double(const Eigen::VectorXd&)>& fn,
                     const Domain& region, const Activation& sigma, int width,
                     double feature_scale, double ridge, std::uint64_t seed) {
    auto pts = region.grid();
    Eigen::VectorXd y(pts.size());
    for (std::size_t p = 0; p < pts.size(); ++p) y[p] = fn(pts[p]);
    return fit_scalar_values(pts, y, coordinate_radius(region), sigma, width,
                             feature_scale, ridge, seed);
}

ShallowField stack_components(const std::vector<ScalarFit>& fits, Activation sigma) {
    if (fits.empty())
        throw PreconditionError("stack_components: needs at least one component");
    const int dim = static_cast<int>(fits.size());
    std::size_t width = 0;
    for (const auto& f : fits) width = std::max(width, f.terms.size());
    if (width == 0)
        throw PreconditionError("stack_components: all components are empty");

    std::vector<ShallowTerm> all;
    all.reserve(width);
    for (std::size_t k = 0; k < width; ++k) {
        ShallowTerm t;
        t.alpha = Eigen::VectorXd::Zero(dim);
        t.beta = Eigen::MatrixXd::Zero(dim, dim);
        t.gamma = Eigen::VectorXd::Zero(dim);
        for (int j = 0; j < dim; ++j) {
            if (k >= fits[j].terms.size()) continue;
            const ScalarTerm& s = fits[j].terms[k];
            if (s.direction.size() != dim)
                throw DimensionError("stack_components: direction length must equal "
                                     "the component count");
            t.alpha[j] = s.weight;
            t.beta.row(j) = s.direction.transpose();
            t.gamma[j] = s.offset;
        }
        all.push_back(std::move(t));
    }
    std::vector<ShallowTerm> terms;
    for (auto& t : all)
        if (!t.alpha.isZero(0.0)) terms.push_back(std::move(t));
    if (terms.empty()) terms.push_back(std::move(all.front()));  // inert but valid
    return ShallowField(std::move(sigma), std::move(terms));
}

VectorFitResult fit_vector_field(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& fn,
    const Domain& region, const Activation& sigma, const FitConfig& cfg) {
    if (cfg.width_per_component < 1)
        throw PreconditionError("fit_vector_field: width_per_component must be >= 1");
    if (cfg.max_escalations < 0)
        throw PreconditionError("fit_vector_field: max_escalations must be >= 0");
    if (!(cfg.target_sup_error > 0.0))
        throw PreconditionError("fit_vector_field: target_sup_error must be > 0");

    const int dim = region.dimension();
    auto train_pts = region.grid();
    Domain validation = region.with_samples(2 * region.samples_per_axis - 1);
    auto val_pts = validation.grid();

    Eigen::MatrixXd train_y(train_pts.size(), dim);
    for (std::size_t p = 0; p < train_pts.size(); ++p) {
        Eigen::VectorXd v = fn(train_pts[p]);
        if (v.size() != dim)
            throw DimensionError("fit_vector_field: target output dimension mismatch");
        train_y.row(p) = v.transpose();
    }
    Eigen::MatrixXd val_y(val_pts.size(), dim);
    for (std::size_t p = 0; p < val_pts.size(); ++p)
        val_y.row(p) = fn(val_pts[p]).transpose();

    const double offset_radius = coordinate_radius(region);
    double best = std::numeric_limits<double>::infinity();
    for (int attempt = 0; attempt <= cfg.max_escalations; ++attempt) {
        int width = cfg.width_per_component << attempt;
        std::vector<ScalarFit> fits;
        fits.reserve(dim);
        for (int j = 0; j < dim; ++j) {
            std::uint64_t seed =
                mix_seed(cfg.seed, static_cast<std::uint64_t>(attempt) * 1024 + j);
            fits.push_back(fit_scalar_values(train_pts, train_y.col(j),
                                             offset_radius, sigma, width,
                                             cfg.feature_scale, cfg.ridge, seed));
        }
        ShallowField field = stack_components(fits, sigma);
        double err = 0.0;
        for (std::size_t p = 0; p < val_pts.size(); ++p)
            err = std::max(
                err, (field.eval(val_pts[p]) - val_y.row(p).transpose()).norm());
        best = std::min(best, err);
        if (err <= cfg.target_sup_error) return {std::move(field), err, width};
    }
    throw ApproximationError(
        "fit_vector_field: width escalation exhausted without reaching the "
        "target sup error",
        best);
}

}  // namespace odenet
