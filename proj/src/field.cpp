#include "odenet/field.hpp"

#include <algorithm>
#include <cmath>

#include "odenet/linalg.hpp"
#include "odenet/rng.hpp"

namespace odenet {

namespace {

void check_field_args(int dim, double lipschitz, double horizon) {
    if (dim < 1) throw PreconditionError("VectorField: dimension must be >= 1");
    if (!(lipschitz >= 0.0) || !std::isfinite(lipschitz))
        throw PreconditionError("VectorField: lipschitz_x must be finite and >= 0");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw PreconditionError("VectorField: horizon must be finite and > 0");
}

}  // namespace

VectorField::VectorField(int dim, double lipschitz_x, double horizon, Fn fn)
    : dim_(dim), lipschitz_(lipschitz_x), horizon_(horizon), fn_(std::move(fn)) {
    check_field_args(dim_, lipschitz_, horizon_);
}

VectorField::VectorField(int dim, double lipschitz_x, double horizon, Fn fn,
                         std::vector<double> breakpoints)
    : dim_(dim), lipschitz_(lipschitz_x), horizon_(horizon), fn_(std::move(fn)),
      piecewise_(true), breakpoints_(std::move(breakpoints)) {
    check_field_args(dim_, lipschitz_, horizon_);
    double prev = 0.0;
    for (double b : breakpoints_) {
        if (!(b > prev) || !(b < horizon_))
            throw PreconditionError(
                "VectorField: breakpoints must be strictly increasing inside (0, horizon)");
        prev = b;
    }
}

Eigen::VectorXd VectorField::operator()(const Eigen::VectorXd& x, double t) const {
    if (x.size() != dim_)
        throw DimensionError("VectorField: state has dimension " +
                             std::to_string(x.size()) + ", field expects " +
                             std::to_string(dim_));
    Eigen::VectorXd out = fn_(x, t);
    if (out.size() != dim_)
        throw DimensionError("VectorField: evaluation returned wrong dimension");
    return out;
}

PiecewiseField::PiecewiseField(std::vector<double> ts, std::vector<VectorField> ps)
    : times(std::move(ts)), pieces(std::move(ps)) {
    if (pieces.empty() || times.size() != pieces.size() + 1)
        throw PreconditionError("PiecewiseField: need M pieces and M+1 times");
    if (times.front() != 0.0)
        throw PreconditionError("PiecewiseField: times must start at 0");
    for (std::size_t i = 0; i + 1 < times.size(); ++i)
        if (!(times[i] < times[i + 1]))
            throw PreconditionError("PiecewiseField: times must increase strictly");
    int dim = pieces.front().dimension();
    for (const auto& p : pieces)
        if (p.dimension() != dim)
            throw DimensionError("PiecewiseField: pieces disagree on dimension");
}

std::size_t PiecewiseField::piece_index(double t) const {
    // Value on (times[i], times[i+1]] belongs to piece i; t <= 0 uses piece 0.
    if (t <= times.front()) return 0;
    auto it = std::lower_bound(times.begin() + 1, times.end(), t);
    if (it == times.end()) return pieces.size() - 1;
    return static_cast<std::size_t>(it - times.begin()) - 1;
}

double PiecewiseField::lipschitz() const {
    double lip = 0.0;
    for (const auto& p : pieces) lip = std::max(lip, p.lipschitz_x());
    return lip;
}

VectorField PiecewiseField::as_field() const {
    std::vector<double> interior(times.begin() + 1, times.end() - 1);
    PiecewiseField self = *this;
    return VectorField(
        dimension(), lipschitz(), horizon(),
        [self](const Eigen::VectorXd& x, double t) {
            return self.pieces[self.piece_index(t)](x, 0.0);
        },
        std::move(interior));
}

VectorField PiecewiseField::averaged() const {
    PiecewiseField self = *this;
    const double total = horizon();
    double lip = 0.0;
    for (std::size_t i = 0; i < pieces.size(); ++i)
        lip += (times[i + 1] - times[i]) / total * pieces[i].lipschitz_x();
    return VectorField(dimension(), lip, total,
                       [self, total](const Eigen::VectorXd& x, double) {
                           Eigen::VectorXd acc = Eigen::VectorXd::Zero(x.size());
                           for (std::size_t i = 0; i < self.pieces.size(); ++i) {
                               double w = (self.times[i + 1] - self.times[i]) / total;
                               acc += w * self.pieces[i](x, 0.0);
                           }
                           return acc;
                       });
}

PiecewiseField PiecewiseField::accelerated(int m) const {
    if (m < 1) throw PreconditionError("PiecewiseField: acceleration factor must be >= 1");
    if (m == 1) return *this;
    const double total = horizon();
    std::vector<double> ts;
    std::vector<VectorField> ps;
    ts.push_back(0.0);
    for (int k = 0; k < m; ++k) {
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            double t = (static_cast<double>(k) * total + times[i + 1]) / m;
            ts.push_back(t);
            ps.push_back(pieces[i]);
        }
    }
    ts.back() = total;  // guard against rounding in (m-1)T/m + T/m
    return PiecewiseField(std::move(ts), std::move(ps));
}

namespace fields {

VectorField constant(const Eigen::VectorXd& c, double horizon) {
    Eigen::VectorXd cc = c;
    return VectorField(static_cast<int>(c.size()), 0.0, horizon,
                       [cc](const Eigen::VectorXd&, double) { return cc; });
}

VectorField linear(const Eigen::MatrixXd& a, double horizon) {
    if (a.rows() != a.cols() || a.rows() < 1)
        throw DimensionError("fields::linear: matrix must be square");
    Eigen::MatrixXd aa = a;
    return VectorField(static_cast<int>(a.rows()), operator_norm(a), horizon,
                       [aa](const Eigen::VectorXd& x, double) -> Eigen::VectorXd {
                           return aa * x;
                       });
}

VectorField scaled_tanh(const Eigen::VectorXd& c, const Eigen::MatrixXd& a,
                        double horizon) {
    if (a.rows() != a.cols() || a.rows() != c.size())
        throw DimensionError("fields::scaled_tanh: need square a matching c");
    Eigen::VectorXd cc = c;
    Eigen::MatrixXd aa = a;
    double lip = c.cwiseAbs().maxCoeff() * operator_norm(a);
    return VectorField(static_cast<int>(c.size()), lip, horizon,
                       [cc, aa](const Eigen::VectorXd& x, double) -> Eigen::VectorXd {
                           return cc.cwiseProduct((aa * x).array().tanh().matrix());
                       });
}

VectorField neg_tanh(int dim, double horizon) {
    return VectorField(dim, 1.0, horizon,
                       [](const Eigen::VectorXd& x, double) -> Eigen::VectorXd {
                           return (-x.array().tanh()).matrix();
                       });
}

VectorField tanh_rotation(double turn_rate, double horizon) {
    // |R(phi) x| = |x| and tanh is 1-Lipschitz componentwise, so 1 certifies.
    return VectorField(2, 1.0, horizon,
                       [turn_rate](const Eigen::VectorXd& x, double t) -> Eigen::VectorXd {
                           double phi = turn_rate * t;
                           double c = std::cos(phi), s = std::sin(phi);
                           Eigen::VectorXd r(2);
                           r << c * x[0] - s * x[1], s * x[0] + c * x[1];
                           return r.array().tanh().matrix();
                       });
}

PiecewiseField alternating_constant(double level, double period) {
    Eigen::VectorXd up(1), down(1);
    up << level;
    down << -level;
    std::vector<double> ts{0.0, 0.5 * period, period};
    std::vector<VectorField> ps{constant(up, period), constant(down, period)};
    return PiecewiseField(std::move(ts), std::move(ps));
}

PiecewiseField alternating_linear(const Eigen::MatrixXd& a1,
                                  const Eigen::MatrixXd& a2, double period) {
    std::vector<double> ts{0.0, 0.5 * period, period};
    std::vector<VectorField> ps{linear(a1, period), linear(a2, period)};
    return PiecewiseField(std::move(ts), std::move(ps));
}

}  // namespace fields

double estimate_lipschitz(const VectorField& f, const Domain& d, int t_samples) {
    if (t_samples < 1)
        throw PreconditionError("estimate_lipschitz: t_samples must be >= 1");
    if (d.dimension() != f.dimension())
        throw DimensionError("estimate_lipschitz: domain/field dimension mismatch");

    // Sample times strictly inside pieces (or uniformly placed midpoints for
    // continuous fields): piecewise values are left-open, so breakpoints
    // themselves would alias the previous piece.
    std::vector<double> ts;
    if (f.piecewise_constant()) {
        std::vector<double> edges{0.0};
        edges.insert(edges.end(), f.breakpoints().begin(), f.breakpoints().end());
        edges.push_back(f.horizon());
        std::size_t pieces = edges.size() - 1;
        std::size_t count = std::min<std::size_t>(pieces, static_cast<std::size_t>(t_samples));
        for (std::size_t j = 0; j < count; ++j) {
            std::size_t i = pieces <= count ? j : j * pieces / count;
            ts.push_back(0.5 * (edges[i] + edges[i + 1]));
        }
    } else {
        for (int j = 0; j < t_samples; ++j)
            ts.push_back(f.horizon() * (j + 0.5) / t_samples);
    }

    auto pts = d.grid();
    const std::size_t n = pts.size();
    double best = 0.0;
    auto consider = [&](std::size_t i, std::size_t j) {
        double dist = (pts[i] - pts[j]).norm();
        if (dist <= 0.0) return;
        for (double t : ts) {
            double q = (f(pts[i], t) - f(pts[j], t)).norm() / dist;
            best = std::max(best, q);
        }
    };

    const std::size_t pair_budget = 3000;
    if (n * (n - 1) / 2 <= pair_budget) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) consider(i, j);
    } else {
        UniformSource rng(0x11b5c0de);
        for (std::size_t k = 0; k < pair_budget; ++k) {
            std::size_t i = rng.index(n);
            std::size_t j = rng.index(n);
            if (i != j) consider(i, j);
        }
    }
    return best;
}

}  // namespace odenet
