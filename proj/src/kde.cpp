#include <cmath>
#include <limits>
#include <stdexcept>

#include "contagion/stats.hpp"
#include "contagion/tda.hpp"

namespace contagion::tda {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void check_kde_args(const Eigen::MatrixXd& cloud, double eta, const Eigen::MatrixXd& queries) {
    if (cloud.rows() == 0) throw std::invalid_argument("kde: empty cloud");
    if (eta <= 0.0) throw std::invalid_argument("kde: bandwidth must be > 0");
    if (queries.cols() != cloud.cols()) {
        throw std::invalid_argument("kde: query dimension != cloud dimension");
    }
}

}  // namespace

std::vector<double> kde_evaluate(const Eigen::MatrixXd& cloud, double eta,
                                 const Eigen::MatrixXd& queries) {
    check_kde_args(cloud, eta, queries);
    const double n = static_cast<double>(cloud.rows());
    const double dim = static_cast<double>(cloud.cols());
    const double norm = 1.0 / (n * std::pow(std::sqrt(kTwoPi) * eta, dim));
    const double inv_2eta2 = 1.0 / (2.0 * eta * eta);
    std::vector<double> out(queries.rows());
    for (Eigen::Index q = 0; q < queries.rows(); ++q) {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < cloud.rows(); ++i) {
            const double d2 = (queries.row(q) - cloud.row(i)).squaredNorm();
            sum += std::exp(-d2 * inv_2eta2);
        }
        out[q] = norm * sum;
    }
    return out;
}

std::vector<double> kde_log_evaluate(const Eigen::MatrixXd& cloud, double eta,
                                     const Eigen::MatrixXd& queries) {
    check_kde_args(cloud, eta, queries);
    const double n = static_cast<double>(cloud.rows());
    const double dim = static_cast<double>(cloud.cols());
    const double log_norm = -std::log(n) - dim * std::log(std::sqrt(kTwoPi) * eta);
    const double inv_2eta2 = 1.0 / (2.0 * eta * eta);
    std::vector<double> out(queries.rows());
    std::vector<double> expo(cloud.rows());
    for (Eigen::Index q = 0; q < queries.rows(); ++q) {
        double xmax = -std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < cloud.rows(); ++i) {
            expo[i] = -(queries.row(q) - cloud.row(i)).squaredNorm() * inv_2eta2;
            xmax = std::max(xmax, expo[i]);
        }
        double sum = 0.0;
        for (const double e : expo) sum += std::exp(e - xmax);
        out[q] = log_norm + xmax + std::log(sum);
    }
    return out;
}

KdeField build_kde_field(const Eigen::MatrixXd& cloud, int res, double bandwidth_scale) {
    if (cloud.rows() < 2) throw std::invalid_argument("build_kde_field: need >= 2 points");
    if (cloud.cols() != 2) throw std::invalid_argument("build_kde_field: cloud must be 2-D");
    if (res < 2) throw std::invalid_argument("build_kde_field: res must be >= 2");
    if (bandwidth_scale <= 0.0) {
        throw std::invalid_argument("build_kde_field: bandwidth_scale must be > 0");
    }

    // Standardize each axis; a degenerate axis keeps scale 1.
    const int n = static_cast<int>(cloud.rows());
    Eigen::MatrixXd std_cloud = cloud;
    for (int axis = 0; axis < 2; ++axis) {
        const double mean = cloud.col(axis).mean();
        double sd = std::sqrt((cloud.col(axis).array() - mean).square().sum() / n);
        if (sd == 0.0) sd = 1.0;
        std_cloud.col(axis) = (cloud.col(axis).array() - mean) / sd;
    }

    KdeField field;
    field.eta = bandwidth_scale * std::pow(static_cast<double>(n), -1.0 / 6.0);
    const double pad = 3.0 * field.eta;
    Eigen::MatrixXd queries(res * res, 2);
    field.xs.resize(res);
    field.ys.resize(res);
    for (int axis = 0; axis < 2; ++axis) {
        const double lo = std_cloud.col(axis).minCoeff() - pad;
        const double hi = std_cloud.col(axis).maxCoeff() + pad;
        auto& coords = axis == 0 ? field.xs : field.ys;
        for (int i = 0; i < res; ++i) {
            coords[i] = lo + (hi - lo) * i / (res - 1);
        }
    }
    for (int i = 0; i < res; ++i) {
        for (int j = 0; j < res; ++j) {
            queries(i * res + j, 0) = field.xs[i];
            queries(i * res + j, 1) = field.ys[j];
        }
    }
    const auto dens = kde_evaluate(std_cloud, field.eta, queries);
    field.values.resize(res, res);
    for (int i = 0; i < res; ++i) {
        for (int j = 0; j < res; ++j) field.values(i, j) = dens[i * res + j];
    }
    return field;
}

}  // namespace contagion::tda
