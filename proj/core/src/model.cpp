#include "vargram/model.hpp"

#include <cmath>
#include <utility>

namespace vargram {

SystemModel make_linear(const Matrix& a, const Matrix& c) {
    if (a.rows() != a.cols())
        throw ConfigError("linear model: A must be square, got " + std::to_string(a.rows()) +
                          "x" + std::to_string(a.cols()));
    if (c.cols() != a.rows())
        throw ConfigError("linear model: C has " + std::to_string(c.cols()) +
                          " columns, expected " + std::to_string(a.rows()));

    SystemModel m;
    m.n_x = a.rows();
    m.n_y = c.rows();
    m.f = [a](const Vector& x) -> Vector { return a * x; };
    m.jac_f = [a](const Vector&) -> Matrix { return a; };
    m.h = [c](const Vector& x) -> Vector { return c * x; };
    m.jac_h = [c](const Vector&) -> Matrix { return c; };
    m.name = "linear";
    return m;
}

SystemModel make_lorenz63(double sigma, double rho, double beta) {
    SystemModel m;
    m.n_x = 3;
    m.n_y = 3;
    m.f = [sigma, rho, beta](const Vector& x) -> Vector {
        Vector dx(3);
        dx(0) = sigma * (x(1) - x(0));
        dx(1) = x(0) * (rho - x(2)) - x(1);
        dx(2) = x(0) * x(1) - beta * x(2);
        return dx;
    };
    m.jac_f = [sigma, rho, beta](const Vector& x) -> Matrix {
        Matrix j(3, 3);
        j << -sigma, sigma, 0.0,
             rho - x(2), -1.0, -x(0),
             x(1), x(0), -beta;
        return j;
    };
    m.h = [](const Vector& x) -> Vector { return x; };
    m.jac_h = [](const Vector& x) -> Matrix {
        return Matrix::Identity(x.size(), x.size());
    };
    m.name = "lorenz63";
    return m;
}

SystemModel with_identity_output(SystemModel model) {
    model.n_y = model.n_x;
    model.h = [](const Vector& x) -> Vector { return x; };
    model.jac_h = [](const Vector& x) -> Matrix {
        return Matrix::Identity(x.size(), x.size());
    };
    return model;
}

Matrix fd_jacobian(const std::function<Vector(const Vector&)>& fn, const Vector& x,
                   double base_step) {
    const Vector f0 = fn(x);
    Matrix j(f0.size(), x.size());
    for (Index i = 0; i < x.size(); ++i) {
        const double step = base_step * (1.0 + std::abs(x(i)));
        Vector xp = x, xm = x;
        xp(i) += step;
        xm(i) -= step;
        j.col(i) = (fn(xp) - fn(xm)) / (2.0 * step);
    }
    return j;
}

} // namespace vargram
