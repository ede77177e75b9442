#include "sdefit/multivar.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace sdefit {

namespace {

Matrix pade_expm(const Matrix& A, const std::vector<double>& b) {
    const Index p = A.rows();
    const Matrix A2 = A * A;
    Matrix U = Matrix::Zero(p, p);
    Matrix Vm = Matrix::Zero(p, p);
    if (b.size() == 14) {  // degree 13
        const Matrix A4 = A2 * A2;
        const Matrix A6 = A4 * A2;
        U = A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 +
                 b[3] * A2 + b[1] * Matrix::Identity(p, p));
        Vm = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 +
             b[0] * Matrix::Identity(p, p);
    } else {
        Matrix Apow = Matrix::Identity(p, p);
        for (size_t k = 0; k + 1 < b.size(); k += 2) {
            Vm += b[k] * Apow;
            U += b[k + 1] * Apow;
            if (k + 2 < b.size()) Apow = Apow * A2;
        }
        U = A * U;
    }
    return (Vm - U).partialPivLu().solve(Vm + U);
}

}  // namespace

Matrix matrix_exponential(const Matrix& M) {
    if (M.rows() != M.cols()) throw DomainError("matrix_exponential: square matrix required");
    if (!M.allFinite()) throw DomainError("matrix_exponential: non-finite entries");
    const double norm = M.cwiseAbs().rowwise().sum().maxCoeff();  // inf-norm
    if (norm > 1e100) throw DomainError("matrix_exponential: norm overflow");

    static const std::vector<double> b3 = {120, 60, 12, 1};
    static const std::vector<double> b5 = {30240, 15120, 3360, 420, 30, 1};
    static const std::vector<double> b7 = {17297280, 8648640, 1995840, 277200, 25200, 1512, 56, 1};
    static const std::vector<double> b9 = {17643225600.0, 8821612800.0, 2075673600.0,
                                           302702400.0,   30270240.0,   2162160.0,
                                           110880.0,      3960.0,       90.0,
                                           1.0};
    static const std::vector<double> b13 = {64764752532480000.0, 32382376266240000.0,
                                            7771770303897600.0,  1187353796428800.0,
                                            129060195264000.0,   10559470521600.0,
                                            670442572800.0,      33522128640.0,
                                            1323241920.0,        40840800.0,
                                            960960.0,            16380.0,
                                            182.0,               1.0};

    if (norm < 1.495585217958292e-2) return pade_expm(M, b3);
    if (norm < 2.539398330063230e-1) return pade_expm(M, b5);
    if (norm < 9.504178996162932e-1) return pade_expm(M, b7);
    if (norm < 2.097847961257068) return pade_expm(M, b9);

    const double theta13 = 5.371920351148152;
    int squarings = 0;
    double scaled = norm;
    while (scaled > theta13) {
        scaled /= 2.0;
        ++squarings;
    }
    Matrix E = pade_expm(M / std::pow(2.0, squarings), b13);
    for (int s = 0; s < squarings; ++s) E = E * E;
    return E;
}

Matrix transition_covariance(const Matrix& A, const Matrix& S, double dt) {
    const Index p = A.rows();
    if (A.cols() != p || S.rows() != p || S.cols() != p)
        throw DomainError("transition_covariance: dimension mismatch");
    if (!(dt > 0)) throw DomainError("transition_covariance: dt must be positive");
    const Matrix Q = S * S.transpose();
    const Matrix E = matrix_exponential(A * dt);
    const Matrix rhs = E * Q * E.transpose() - Q;

    // vec(AX + XA') = (I (x) A + A (x) I) vec(X)
    const Index pp = p * p;
    Matrix K = Matrix::Zero(pp, pp);
    for (Index j = 0; j < p; ++j)
        K.block(j * p, j * p, p, p) += A;
    for (Index j = 0; j < p; ++j)
        for (Index l = 0; l < p; ++l)
            for (Index i = 0; i < p; ++i)
                K(j * p + i, l * p + i) += A(j, l);

    Vector vec_rhs(pp);
    for (Index j = 0; j < p; ++j)
        for (Index i = 0; i < p; ++i) vec_rhs[j * p + i] = rhs(i, j);

    Eigen::FullPivLU<Matrix> lu(K);
    if (lu.rank() < pp)
        throw SingularOperator(
            "Lyapunov operator singular (eigenvalue pair summing to zero); "
            "use transition_covariance_quadrature");
    const Vector vec_x = lu.solve(vec_rhs);

    Matrix X(p, p);
    for (Index j = 0; j < p; ++j)
        for (Index i = 0; i < p; ++i) X(i, j) = vec_x[j * p + i];
    X = 0.5 * (X + X.transpose()).eval();
    return X;
}

Matrix transition_covariance_quadrature(const Matrix& A, const Matrix& S, double dt,
                                        int panels) {
    const Index p = A.rows();
    const Matrix Q = S * S.transpose();
    auto f = [&](double t) -> Matrix {
        const Matrix E = matrix_exponential(A * t);
        return E * Q * E.transpose();
    };
    // composite Simpson
    if (panels % 2) ++panels;
    const double h = dt / panels;
    Matrix acc = f(0.0) + f(dt);
    for (int k = 1; k < panels; ++k) acc += f(k * h) * ((k % 2) ? 4.0 : 2.0);
    Matrix X = acc * (h / 3.0);
    return 0.5 * (X + X.transpose()).eval();
}

MultivarResiduals multivariate_conditional_residuals(const std::vector<Vector>& y,
                                                     const Vector& t,
                                                     const LinearSdeSystem& system) {
    const Index p = system.A.rows();
    const size_t n = y.size();
    if (static_cast<size_t>(t.size()) != n)
        throw DataError("multivariate residuals: time/observation mismatch");
    Eigen::FullPivLU<Matrix> alu(system.A);
    if (alu.rank() < p) throw SingularOperator("A singular: integrating-factor path unavailable");
    const Vector offset = alu.solve(system.b);

    MultivarResiduals out;
    out.z.resize(n);
    out.var.resize(n);
    out.cov_prev.resize(n);
    double tprev = system.t0;
    Vector yprev = system.y0;
    for (size_t i = 0; i < n; ++i) {
        const double dt = t[i] - tprev;
        if (!(dt > 0)) throw DataError("multivariate residuals: times must increase");
        const Matrix E = matrix_exponential(system.A * dt);
        out.z[i] = y[i] + offset - E * (yprev + offset);
        const Matrix vd = transition_covariance(system.A, system.S, dt);
        if (i == 0)
            out.var[i] = system.V + E * system.V0 * E.transpose() + vd;
        else
            out.var[i] = system.V + E * system.V * E.transpose() + vd;
        if (i > 0) out.cov_prev[i] = -E * system.V;
        tprev = t[i];
        yprev = y[i];
    }
    return out;
}

BlockWhitened block_whiten(const MultivarResiduals& r) {
    const size_t n = r.z.size();
    if (n == 0) throw DataError("block_whiten: empty");
    const Index p = r.z[0].size();
    BlockWhitened out;
    out.v.resize(static_cast<Index>(n) * p);

    Matrix Lprev;  // L_{i-1,i-1}
    Vector vprev;
    for (size_t i = 0; i < n; ++i) {
        Matrix Si = r.var[i];
        Vector rhs = r.z[i];
        Matrix Lsub;
        if (i > 0) {
            // L_{i,i-1} = C_{i,i-1} L_{i-1,i-1}^{-T}
            Lsub = Lprev.triangularView<Eigen::Lower>()
                       .transpose()
                       .solve<Eigen::OnTheRight>(r.cov_prev[i]);
            Si -= Lsub * Lsub.transpose();
            rhs -= Lsub * vprev;
        }
        Eigen::LLT<Matrix> llt(Si);
        if (llt.info() != Eigen::Success)
            throw NotPositiveDefinite("block covariance not positive definite at block " +
                                      std::to_string(i + 1));
        const Matrix Li = llt.matrixL();
        for (Index k = 0; k < p; ++k) out.logdet += std::log(Li(k, k));
        const Vector vi = Li.triangularView<Eigen::Lower>().solve(rhs);
        out.v.segment(static_cast<Index>(i) * p, p) = vi;
        Lprev = Li;
        vprev = vi;
    }
    return out;
}

UVector multivar_uvector(const std::vector<Vector>& y, const Vector& t,
                         const LinearSdeSystem& system, double log_jacobian_phi) {
    const auto r = multivariate_conditional_residuals(y, t, system);
    const auto w = block_whiten(r);
    UVector out;
    out.n = w.v.size();
    out.log_jacobian = log_jacobian_phi - w.logdet;
    out.u = w.v / std::exp(out.log_jacobian / static_cast<double>(out.n));
    return out;
}

Matrix drift_from_eigen(const Matrix& P, const Vector& eigenvalues) {
    if (P.rows() != P.cols() || P.rows() != eigenvalues.size())
        throw DomainError("drift_from_eigen: dimension mismatch");
    Eigen::FullPivLU<Matrix> lu(P);
    if (lu.rank() < P.rows()) throw SingularOperator("drift_from_eigen: P singular");
    return lu.solve(eigenvalues.asDiagonal() * P);
}

Vector power_product(const Vector& x, const Matrix& C) {
    Vector lx(x.size());
    for (Index i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0)) throw DomainError("power_product: components must be positive");
        lx[i] = std::log(x[i]);
    }
    return (C * lx).array().exp();
}

Vector power_product_inverse(const Vector& y, const Matrix& C) {
    Vector ly(y.size());
    for (Index i = 0; i < y.size(); ++i) {
        if (!(y[i] > 0)) throw DomainError("power_product_inverse: components must be positive");
        ly[i] = std::log(y[i]);
    }
    Eigen::FullPivLU<Matrix> lu(C);
    if (lu.rank() < C.rows()) throw SingularOperator("power_product: C singular");
    return (lu.solve(ly)).array().exp();
}

double power_product_log_jacobian(const Vector& x, const Matrix& C) {
    const Vector y = power_product(x, C);
    double out = std::log(std::abs(C.fullPivLu().determinant()));
    for (Index i = 0; i < x.size(); ++i) out += std::log(y[i]) - std::log(x[i]);
    return out;
}

}  // namespace sdefit
