#include "contagion/gpd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "contagion/csv.hpp"
#include "contagion/rng.hpp"
#include "contagion/stats.hpp"

namespace contagion::gpd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Gauss-Legendre nodes and weights on [-1, 1], Newton iteration on the
// Legendre recurrence.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(3.141592653589793 * (i + 0.75) / (n + 0.5));
        double z1 = kInf, pp = 0.0;
        while (std::fabs(z - z1) > 1e-15) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            z1 = z;
            z = z1 - p1 / pp;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
}

// Per-axis quadrature nodes and weights on [lo, hi].  Orders up to eight use a
// single Gauss-Legendre rule; larger orders abut eight-point panels.  The
// energy has gradient kinks along the sorted-distance switching curves, which
// stall a single global polynomial rule, while panelling confines the damage
// to the few panels a kink actually crosses.
void composite_axis(double lo, double hi, int order, std::vector<double>& nodes,
                    std::vector<double>& weights) {
    constexpr int kPanelOrder = 8;
    const int m = std::min(order, kPanelOrder);
    const int panels = (order + kPanelOrder - 1) / kPanelOrder;
    std::vector<double> gx, gw;
    gauss_legendre(m, gx, gw);
    nodes.clear();
    weights.clear();
    nodes.reserve(static_cast<std::size_t>(panels) * m);
    weights.reserve(static_cast<std::size_t>(panels) * m);
    const double width = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
        const double centre = lo + (p + 0.5) * width;
        for (int i = 0; i < m; ++i) {
            nodes.push_back(centre + 0.5 * width * gx[i]);
            weights.push_back(0.5 * width * gw[i]);
        }
    }
}

// Everything fixed across theta evaluations for one fit.
struct Work {
    int n{0}, K{0}, Q{0};
    Domain dom;
    std::vector<double> d_at_x;     // n*K sorted distances to own neighbors
    std::vector<double> logg_at_x;  // n
    std::vector<double> d_at_node;  // n*Q*K sorted distances node -> neighbors(x)
    std::vector<double> logg_node;  // Q
    std::vector<double> logw;       // Q, log of area-scaled quadrature weight
};

std::vector<std::vector<int>> neighbor_sets(const tda::ProjectedDiagram& pts, int K) {
    const int n = static_cast<int>(pts.size());
    std::vector<std::vector<int>> out(n);
    for (int i = 0; i < n; ++i) {
        std::vector<std::pair<double, int>> order;
        order.reserve(n - 1);
        for (int j = 0; j < n; ++j) {
            if (j != i) order.emplace_back((pts[i] - pts[j]).norm(), j);
        }
        std::sort(order.begin(), order.end());
        for (int q = 0; q < K; ++q) out[i].push_back(order[q].second);
    }
    return out;
}

Work build_work(const tda::ProjectedDiagram& pts, int K, const PlaneKde& kde, int quad_order) {
    const int n = static_cast<int>(pts.size());
    if (K < 1) throw std::invalid_argument("gpd: K must be >= 1");
    if (n < K + 2) throw std::invalid_argument("gpd: need at least K + 2 points");
    if (quad_order < 2) throw std::invalid_argument("gpd: quad_order must be >= 2");

    Work wk;
    wk.n = n;
    wk.K = K;
    wk.dom = default_domain(pts);

    std::vector<double> xn, xw, yn, yw;
    composite_axis(wk.dom.x_lo, wk.dom.x_hi, quad_order, xn, xw);
    composite_axis(wk.dom.y_lo, wk.dom.y_hi, quad_order, yn, yw);
    const int nx = static_cast<int>(xn.size()), ny = static_cast<int>(yn.size());
    wk.Q = nx * ny;
    Eigen::MatrixXd nodes(wk.Q, 2);
    wk.logw.resize(wk.Q);
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            const int q = i * ny + j;
            nodes(q, 0) = xn[i];
            nodes(q, 1) = yn[j];
            wk.logw[q] = std::log(xw[i] * yw[j]);
        }
    }

    const auto nbrs = neighbor_sets(pts, K);
    wk.d_at_x.resize(static_cast<std::size_t>(n) * K);
    wk.d_at_node.resize(static_cast<std::size_t>(n) * wk.Q * K);
    std::vector<double> dists(K);
    for (int x = 0; x < n; ++x) {
        for (int q = 0; q < K; ++q) dists[q] = (pts[x] - pts[nbrs[x][q]]).norm();
        std::sort(dists.begin(), dists.end());
        std::copy(dists.begin(), dists.end(), wk.d_at_x.begin() + static_cast<std::size_t>(x) * K);
        for (int node = 0; node < wk.Q; ++node) {
            const Eigen::Vector2d z = nodes.row(node);
            for (int q = 0; q < K; ++q) dists[q] = (z - pts[nbrs[x][q]]).norm();
            std::sort(dists.begin(), dists.end());
            std::copy(dists.begin(), dists.end(),
                      wk.d_at_node.begin() + (static_cast<std::size_t>(x) * wk.Q + node) * K);
        }
    }

    Eigen::MatrixXd own(n, 2);
    for (int x = 0; x < n; ++x) own.row(x) = pts[x];
    wk.logg_at_x = tda::kde_log_evaluate(kde.points, kde.eta, own);
    wk.logg_node = tda::kde_log_evaluate(kde.points, kde.eta, nodes);
    return wk;
}

// Negative log pseudo-likelihood with optional analytic gradient and optional
// per-point score rows (n x (K+1)).
double eval_nll(const Work& wk, const Eigen::VectorXd& theta, Eigen::VectorXd* grad,
                Eigen::MatrixXd* scores) {
    const int K = wk.K, Q = wk.Q;
    const double theta0 = theta(0);
    if (grad) grad->setZero(K + 1);
    if (scores) scores->setZero(wk.n, K + 1);

    // g(z)^theta_0 at the shared quadrature nodes.
    std::vector<double> gpow_node(Q), hnode(Q), anode(Q);
    for (int i = 0; i < Q; ++i) gpow_node[i] = std::exp(theta0 * wk.logg_node[i]);

    double nll = 0.0;
    for (int x = 0; x < wk.n; ++x) {
        const double* dx = &wk.d_at_x[static_cast<std::size_t>(x) * K];
        double sx = 0.0;
        for (int q = 0; q < K; ++q) sx += theta(q + 1) * dx[q];
        const double gx = std::exp(theta0 * wk.logg_at_x[x]);
        const double hx = sx * gx;
        nll += hx;

        const double* dn = &wk.d_at_node[static_cast<std::size_t>(x) * Q * K];
        double amax = -kInf;
        for (int i = 0; i < Q; ++i) {
            double s = 0.0;
            const double* d = dn + static_cast<std::size_t>(i) * K;
            for (int q = 0; q < K; ++q) s += theta(q + 1) * d[q];
            hnode[i] = s * gpow_node[i];
            anode[i] = wk.logw[i] - hnode[i];
            amax = std::max(amax, anode[i]);
        }
        double zsum = 0.0;
        for (int i = 0; i < Q; ++i) zsum += std::exp(anode[i] - amax);
        const double log_z = amax + std::log(zsum);
        nll += log_z;

        if (grad || scores) {
            // score_x = grad h(x) - E[grad h(z)] under the conditional law.
            Eigen::VectorXd sc = Eigen::VectorXd::Zero(K + 1);
            sc(0) += hx * wk.logg_at_x[x];
            for (int q = 0; q < K; ++q) sc(q + 1) += dx[q] * gx;
            for (int i = 0; i < Q; ++i) {
                const double p = std::exp(anode[i] - log_z);
                sc(0) -= p * hnode[i] * wk.logg_node[i];
                const double* d = dn + static_cast<std::size_t>(i) * K;
                for (int q = 0; q < K; ++q) sc(q + 1) -= p * d[q] * gpow_node[i];
            }
            if (grad) *grad += sc;
            if (scores) scores->row(x) = sc;
        }
    }
    return nll;
}

struct OptResult {
    Eigen::VectorXd theta;
    double nll{kInf};
    bool converged{false};
};

// Quasi-Newton minimization with theta_0 projected onto [0, inf).
OptResult minimize(const Work& wk, Eigen::VectorXd theta, const FitOptions& opt) {
    const int dim = wk.K + 1;
    const auto project = [&](Eigen::VectorXd& t) {
        if (opt.fix_theta0) {
            t(0) = 0.0;
        } else {
            t(0) = std::max(t(0), 0.0);
        }
    };
    project(theta);

    Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(dim, dim);
    Eigen::VectorXd grad(dim);
    double f = eval_nll(wk, theta, &grad, nullptr);
    OptResult res;
    res.theta = theta;
    res.nll = f;
    if (!std::isfinite(f)) return res;

    for (int iter = 0; iter < opt.max_iters; ++iter) {
        // Projected gradient: a bound coordinate only counts when it pushes
        // into the feasible region.
        const bool frozen = opt.fix_theta0 || (theta(0) <= 0.0 && grad(0) > 0.0);
        Eigen::VectorXd g_eff = grad;
        if (frozen) g_eff(0) = 0.0;
        if (g_eff.lpNorm<Eigen::Infinity>() < opt.grad_tol) {
            res.converged = true;
            break;
        }

        Eigen::VectorXd dir = -h_inv * g_eff;
        if (frozen) dir(0) = 0.0;
        double slope = dir.dot(g_eff);
        if (!(slope < 0.0)) {
            h_inv.setIdentity();
            dir = -g_eff;
            slope = dir.dot(g_eff);
        }

        double step = 1.0;
        Eigen::VectorXd theta_new = theta;
        double f_new = f;
        bool accepted = false;
        for (int back = 0; back < 60; ++back) {
            theta_new = theta + step * dir;
            project(theta_new);
            f_new = eval_nll(wk, theta_new, nullptr, nullptr);
            if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        Eigen::VectorXd grad_new(dim);
        eval_nll(wk, theta_new, &grad_new, nullptr);
        const Eigen::VectorXd s = theta_new - theta;
        const Eigen::VectorXd y = grad_new - grad;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            // BFGS update of the inverse Hessian.
            const Eigen::VectorXd hy = h_inv * y;
            const double yhy = y.dot(hy);
            h_inv += ((sy + yhy) / (sy * sy)) * (s * s.transpose()) -
                     (hy * s.transpose() + s * hy.transpose()) / sy;
        } else {
            h_inv.setIdentity();
        }
        theta = theta_new;
        grad = grad_new;
        f = f_new;
        res.theta = theta;
        res.nll = f;
    }
    return res;
}

}  // namespace

// ── public surface ──────────────────────────────────────────────────────────

PlaneKde default_plane_kde(const tda::ProjectedDiagram& points) {
    const int n = static_cast<int>(points.size());
    if (n < 1) throw std::invalid_argument("default_plane_kde: empty diagram");
    PlaneKde kde;
    kde.points.resize(n, 2);
    for (int i = 0; i < n; ++i) kde.points.row(i) = points[i];
    double var = 0.0;
    for (int axis = 0; axis < 2; ++axis) {
        const double mean = kde.points.col(axis).mean();
        var += (kde.points.col(axis).array() - mean).square().sum() / n;
    }
    const double scale = std::sqrt(0.5 * var);
    kde.eta = std::pow(static_cast<double>(n), -1.0 / 6.0) * (scale > 0.0 ? scale : 1e-3);
    return kde;
}

Domain default_domain(const tda::ProjectedDiagram& points) {
    if (points.empty()) throw std::invalid_argument("default_domain: empty diagram");
    double x_lo = points[0](0), x_hi = x_lo, y_lo = points[0](1), y_hi = y_lo;
    for (const auto& p : points) {
        x_lo = std::min(x_lo, p(0));
        x_hi = std::max(x_hi, p(0));
        y_lo = std::min(y_lo, p(1));
        y_hi = std::max(y_hi, p(1));
    }
    const auto expand = [](double& lo, double& hi) {
        const double spread = hi - lo;
        const double half = spread > 0.0 ? 1.5 * spread : 0.5;
        const double centre = 0.5 * (lo + hi);
        lo = centre - half;
        hi = centre + half;
    };
    Domain d;
    d.x_lo = x_lo;
    d.x_hi = x_hi;
    expand(d.x_lo, d.x_hi);
    d.y_lo = y_lo;
    d.y_hi = y_hi;
    expand(d.y_lo, d.y_hi);
    d.y_lo = std::max(d.y_lo, 0.0);  // persistence axis is non-negative
    if (d.y_hi <= d.y_lo) d.y_hi = d.y_lo + 1.0;
    return d;
}

double neighbor_energy(const tda::ProjectedDiagram& points, int q) {
    const int n = static_cast<int>(points.size());
    if (q < 1) throw std::invalid_argument("neighbor_energy: q must be >= 1");
    if (n < q + 1) throw std::invalid_argument("neighbor_energy: need at least q + 1 points");
    double total = 0.0;
    std::vector<double> dists;
    for (int i = 0; i < n; ++i) {
        dists.clear();
        for (int j = 0; j < n; ++j) {
            if (j != i) dists.push_back((points[i] - points[j]).norm());
        }
        std::nth_element(dists.begin(), dists.begin() + (q - 1), dists.end());
        total += dists[q - 1];
    }
    return total;
}

double energy(const Eigen::Vector2d& z, std::span<const Eigen::Vector2d> neighbors,
              const Eigen::VectorXd& theta, const PlaneKde& kde) {
    const int K = static_cast<int>(theta.size()) - 1;
    if (K < 1) throw std::invalid_argument("energy: theta must have at least 2 entries");
    if (static_cast<int>(neighbors.size()) < K) {
        throw std::invalid_argument("energy: fewer neighbors than K");
    }
    std::vector<double> dists;
    dists.reserve(neighbors.size());
    for (const auto& nb : neighbors) dists.push_back((z - nb).norm());
    std::sort(dists.begin(), dists.end());
    double s = 0.0;
    for (int q = 0; q < K; ++q) s += theta(q + 1) * dists[q];
    Eigen::MatrixXd query(1, 2);
    query.row(0) = z;
    const double logg = tda::kde_log_evaluate(kde.points, kde.eta, query)[0];
    return s * std::exp(theta(0) * logg);
}

double conditional_density(const Eigen::Vector2d& z, std::span<const Eigen::Vector2d> neighbors,
                           const Eigen::VectorXd& theta, const PlaneKde& kde,
                           const Domain& domain, int quad_order) {
    if (quad_order < 2) throw std::invalid_argument("conditional_density: quad_order < 2");
    std::vector<double> xn, xw, yn, yw;
    composite_axis(domain.x_lo, domain.x_hi, quad_order, xn, xw);
    composite_axis(domain.y_lo, domain.y_hi, quad_order, yn, yw);
    double amax = -kInf;
    std::vector<double> a;
    a.reserve(xn.size() * yn.size());
    for (std::size_t i = 0; i < xn.size(); ++i) {
        for (std::size_t j = 0; j < yn.size(); ++j) {
            const Eigen::Vector2d node(xn[i], yn[j]);
            const double h = energy(node, neighbors, theta, kde);
            const double lw = std::log(xw[i] * yw[j]);
            a.push_back(lw - h);
            amax = std::max(amax, lw - h);
        }
    }
    double zsum = 0.0;
    for (const double ai : a) zsum += std::exp(ai - amax);
    const double log_z = amax + std::log(zsum);
    return std::exp(-energy(z, neighbors, theta, kde) - log_z);
}

double nll_with_gradient(const tda::ProjectedDiagram& points, int K, const PlaneKde& kde,
                         const Eigen::VectorXd& theta, Eigen::VectorXd* gradient,
                         int quad_order) {
    if (theta.size() != K + 1) throw std::invalid_argument("nll_with_gradient: theta size != K+1");
    const Work wk = build_work(points, K, kde, quad_order);
    return eval_nll(wk, theta, gradient, nullptr);
}

GibbsModel fit(const tda::ProjectedDiagram& points, int K, const PlaneKde& kde,
               const FitOptions& options) {
    const Work wk = build_work(points, K, kde, options.quad_order);

    // Distance scale per order statistic, for sizing the random starts.
    std::vector<double> scale(K, 1.0);
    for (int q = 0; q < K; ++q) {
        double s = 0.0;
        for (int x = 0; x < wk.n; ++x) s += wk.d_at_x[static_cast<std::size_t>(x) * K + q];
        scale[q] = 1.0 / (s / wk.n + 1e-12);
    }

    Rng rng = Rng::substream(options.seed, 0x67'70'64ULL);
    std::vector<Eigen::VectorXd> starts;
    starts.push_back(Eigen::VectorXd::Zero(K + 1));
    for (int r = 0; r < options.restarts; ++r) {
        Eigen::VectorXd t(K + 1);
        t(0) = options.fix_theta0 ? 0.0 : rng.uniform(0.0, 0.5);
        for (int q = 0; q < K; ++q) t(q + 1) = rng.uniform(-1.0, 1.0) * scale[q];
        starts.push_back(t);
    }

    OptResult best;
    for (const auto& start : starts) {
        const OptResult r = minimize(wk, start, options);
        if (r.nll < best.nll) best = r;
    }
    if (!best.theta.size()) throw std::runtime_error("fit: optimization failed to produce a value");

    GibbsModel model;
    model.K = K;
    model.theta = best.theta;
    model.nll = best.nll;
    model.converged = best.converged;

    // Empirical Fisher from per-point scores at the optimum.
    Eigen::MatrixXd scores;
    eval_nll(wk, best.theta, nullptr, &scores);
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(K + 1, K + 1);
    for (int x = 0; x < wk.n; ++x) {
        info += scores.row(x).transpose() * scores.row(x);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(info, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double tol = 1e-12 * sv(0);
    model.singular_fisher = sv(sv.size() - 1) <= tol;
    Eigen::VectorXd inv_sv = sv;
    for (int i = 0; i < sv.size(); ++i) inv_sv(i) = sv(i) > tol ? 1.0 / sv(i) : 0.0;
    const Eigen::MatrixXd pinv =
        svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
    model.variances = pinv.diagonal();
    return model;
}

std::vector<ParamTest> compare(const GibbsModel& a, const GibbsModel& b, double alpha,
                               int bonferroni_m) {
    if (a.K != b.K) throw std::invalid_argument("compare: models have different K");
    if (bonferroni_m < 1) throw std::invalid_argument("compare: bonferroni_m must be >= 1");
    std::vector<ParamTest> out;
    for (int j = 0; j <= a.K; ++j) {
        ParamTest t;
        t.param = j;
        const double var_sum = a.variances(j) + b.variances(j);
        const double diff = std::fabs(a.theta(j) - b.theta(j));
        // A vanishing variance sum means the parameter was unidentified in
        // both fits (pseudo-inverse zeroed the direction); that is absence of
        // evidence, not certainty.
        if (var_sum > 1e-12 && std::isfinite(var_sum)) {
            t.t_stat = diff / std::sqrt(var_sum);
            t.p_value = stats::normal_two_sided_p(t.t_stat);
        } else {
            t.t_stat = 0.0;
            t.p_value = 1.0;
        }
        t.reject_bonferroni = t.p_value < alpha / bonferroni_m;
        out.push_back(t);
    }
    return out;
}

PairedTestResult paired_difference_test(std::span<const double> statistics_a,
                                        std::span<const double> statistics_b) {
    const auto r = stats::paired_t_test_greater(statistics_a, statistics_b);
    return {r.statistic, r.p_value, r.dof};
}

OrderSelection select_order(const tda::ProjectedDiagram& points, const PlaneKde& kde,
                            int max_params, const FitOptions& options) {
    if (max_params < 1 || max_params > 4) {
        throw std::invalid_argument("select_order: max_params must be in 1..4");
    }
    tda::ProjectedDiagram train, test;
    for (std::size_t i = 0; i < points.size(); ++i) {
        (i % 2 == 0 ? train : test).push_back(points[i]);
    }
    const Domain domain = default_domain(points);

    OrderSelection sel;
    sel.best_count = 1;
    double best_score = -kInf;
    for (int count = 1; count <= max_params; ++count) {
        const int K = count == 1 ? 1 : count - 1;
        FitOptions opt = options;
        opt.fix_theta0 = count == 1;
        if (static_cast<int>(train.size()) < K + 2 || test.empty()) {
            throw std::invalid_argument("select_order: too few points for the split");
        }
        const GibbsModel model = fit(train, K, kde, opt);

        // Mean held-out log conditional density given K nearest train points.
        double score = 0.0;
        for (const auto& z : test) {
            std::vector<std::pair<double, int>> order;
            for (std::size_t j = 0; j < train.size(); ++j) {
                order.emplace_back((z - train[j]).norm(), static_cast<int>(j));
            }
            std::sort(order.begin(), order.end());
            std::vector<Eigen::Vector2d> nbrs;
            for (int q = 0; q < K; ++q) nbrs.push_back(train[order[q].second]);
            const double dens =
                conditional_density(z, nbrs, model.theta, kde, domain, options.quad_order);
            score += std::log(std::max(dens, 1e-300));
        }
        score /= static_cast<double>(test.size());
        sel.held_out_scores.push_back(score);
        if (score > best_score) {
            best_score = score;
            sel.best_count = count;
        }
    }
    return sel;
}

// ── CSV I/O ─────────────────────────────────────────────────────────────────

void write_fits_csv(std::span<const FitRecord> fits, const std::string& path) {
    if (fits.empty()) throw std::invalid_argument("write_fits_csv: no records");
    const int K = fits[0].model.K;
    for (const auto& f : fits) {
        if (f.model.K != K) throw std::invalid_argument("write_fits_csv: mixed K across records");
    }
    std::vector<std::string> header{"agent_id", "company_id", "period", "K"};
    for (int j = 0; j <= K; ++j) header.push_back("theta_" + std::to_string(j));
    for (int j = 0; j <= K; ++j) header.push_back("var_" + std::to_string(j));
    header.push_back("converged");
    std::vector<std::vector<std::string>> rows;
    for (const auto& f : fits) {
        std::vector<std::string> row{std::to_string(f.agent_id), std::to_string(f.company_id),
                                     f.period, std::to_string(K)};
        for (int j = 0; j <= K; ++j) row.push_back(csv::format_double(f.model.theta(j)));
        for (int j = 0; j <= K; ++j) row.push_back(csv::format_double(f.model.variances(j)));
        row.push_back(f.model.converged ? "1" : "0");
        rows.push_back(std::move(row));
    }
    csv::write_file(path, header, rows);
}

void write_tests_csv(std::span<const TestRecord> tests, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& t : tests) {
        rows.push_back({std::to_string(t.agent_id), std::to_string(t.company_id),
                        "theta_" + std::to_string(t.test.param), csv::format_double(t.test.t_stat),
                        csv::format_double(t.test.p_value), t.test.reject_bonferroni ? "1" : "0"});
    }
    csv::write_file(path, {"agent_id", "company_id", "param", "T", "p_value",
                           "reject_at_0.1_bonferroni"},
                    rows);
}

}  // namespace contagion::gpd
