#include "ccr/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ccr {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::NotHermitian: return "NotHermitian";
        case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorKind::Singular: return "Singular";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::ModeII: return "ModeII";
        case ErrorKind::DegenerateRelayChannel: return "DegenerateRelayChannel";
        case ErrorKind::Diverged: return "Diverged";
        case ErrorKind::DegenerateDirection: return "DegenerateDirection";
        case ErrorKind::ZeroGain: return "ZeroGain";
        case ErrorKind::Infeasible: return "Infeasible";
        case ErrorKind::NegativePower: return "NegativePower";
        case ErrorKind::Inconclusive: return "Inconclusive";
        case ErrorKind::DimensionDeficit: return "DimensionDeficit";
        case ErrorKind::ZeroProjection: return "ZeroProjection";
        case ErrorKind::PuInfeasible: return "PuInfeasible";
        case ErrorKind::OutOfRegime: return "OutOfRegime";
        case ErrorKind::InfeasibleScalar: return "InfeasibleScalar";
        case ErrorKind::NoFeasibleGridPoint: return "NoFeasibleGridPoint";
        case ErrorKind::NoFeasibleInstance: return "NoFeasibleInstance";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::Parse: return "Parse";
    }
    return "Unknown";
}

template <typename T>
Matrix<T>::Matrix(std::initializer_list<std::initializer_list<T>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw Error(ErrorKind::DimensionMismatch, "ragged matrix initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

template <typename T>
Matrix<T> Matrix<T>::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
}

template <typename T>
Matrix<T> Matrix<T>::diagonal(std::span<const T> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

template <typename T>
Matrix<T> Matrix<T>::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

template <typename T>
Matrix<T> Matrix<T>::adjoint() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) {
            if constexpr (std::is_same_v<T, cdouble>)
                t(c, r) = std::conj((*this)(r, c));
            else
                t(c, r) = (*this)(r, c);
        }
    return t;
}

template class Matrix<cdouble>;
template class Matrix<double>;

cdouble dot(std::span<const cdouble> a, std::span<const cdouble> b) {
    if (a.size() != b.size()) throw Error(ErrorKind::DimensionMismatch, "dot");
    cdouble s{};
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error(ErrorKind::DimensionMismatch, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const cdouble> a) {
    double s = 0.0;
    for (const auto& x : a) s += std::norm(x);
    return s;
}

double norm(std::span<const cdouble> a) { return std::sqrt(norm2(a)); }

double norm1(std::span<const double> a) {
    double s = 0.0;
    for (double x : a) s += std::abs(x);
    return s;
}

double norm_inf(std::span<const double> a) {
    double s = 0.0;
    for (double x : a) s = std::max(s, std::abs(x));
    return s;
}

CVector scaled(std::span<const cdouble> a, cdouble s) {
    CVector out(a.begin(), a.end());
    for (auto& x : out) x *= s;
    return out;
}

CVector normalized(std::span<const cdouble> a) {
    const double n = norm(a);
    if (n == 0.0) throw Error(ErrorKind::DegenerateDirection, "cannot normalize a zero vector");
    return scaled(a, 1.0 / n);
}

template <typename T>
std::vector<T> matvec(const Matrix<T>& a, std::span<const T> x) {
    if (a.cols() != x.size()) throw Error(ErrorKind::DimensionMismatch, "matvec");
    std::vector<T> y(a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        T s{};
        for (std::size_t c = 0; c < a.cols(); ++c) s += a(r, c) * x[c];
        y[r] = s;
    }
    return y;
}

template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.cols() != b.rows()) throw Error(ErrorKind::DimensionMismatch, "matmul");
    Matrix<T> c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const T aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

template std::vector<cdouble> matvec(const CMatrix&, std::span<const cdouble>);
template std::vector<double> matvec(const RMatrix&, std::span<const double>);
template CMatrix matmul(const CMatrix&, const CMatrix&);
template RMatrix matmul(const RMatrix&, const RMatrix&);

void add_outer(CMatrix& a, std::span<const cdouble> x, double s) {
    if (!a.square() || a.rows() != x.size()) throw Error(ErrorKind::DimensionMismatch, "add_outer");
    for (std::size_t r = 0; r < x.size(); ++r)
        for (std::size_t c = 0; c < x.size(); ++c) a(r, c) += s * x[r] * std::conj(x[c]);
}

CMatrix outer(std::span<const cdouble> v, std::span<const cdouble> g) {
    CMatrix a(v.size(), g.size());
    for (std::size_t r = 0; r < v.size(); ++r)
        for (std::size_t c = 0; c < g.size(); ++c) a(r, c) = v[r] * std::conj(g[c]);
    return a;
}

double frobenius_norm2(const CMatrix& a) { return norm2(a.data()); }

double hermitian_defect(const CMatrix& a) {
    if (!a.square()) throw Error(ErrorKind::DimensionMismatch, "hermitian_defect on non-square matrix");
    double scale = 0.0;
    double defect = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) {
            scale = std::max(scale, std::abs(a(r, c)));
            defect = std::max(defect, std::abs(a(r, c) - std::conj(a(c, r))));
        }
    return scale == 0.0 ? 0.0 : defect / scale;
}

CVector hermitian_solve(const CMatrix& a, std::span<const cdouble> b) {
    const std::size_t n = a.rows();
    if (!a.square() || b.size() != n) throw Error(ErrorKind::DimensionMismatch, "hermitian_solve");
    if (hermitian_defect(a) >= 1e-12) throw Error(ErrorKind::NotHermitian, "hermitian_solve input");

    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, a(i, i).real());
    const double pivot_floor = 1e-14 * max_diag;

    // Lower-triangular Cholesky factor, A = L L^H.
    CMatrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j).real();
        for (std::size_t k = 0; k < j; ++k) d -= std::norm(l(j, k));
        if (!(d > pivot_floor))
            throw Error(ErrorKind::NotPositiveDefinite, "pivot " + std::to_string(j) + " = " + std::to_string(d));
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            cdouble s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
            l(i, j) = s / ljj;
        }
    }

    CVector y(b.begin(), b.end());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) y[i] -= l(i, k) * y[k];
        y[i] /= l(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t k = i + 1; k < n; ++k) y[i] -= std::conj(l(k, i)) * y[k];
        y[i] /= l(i, i);
    }
    return y;
}

RVector linear_solve_real(const RMatrix& m, std::span<const double> b) {
    const std::size_t n = m.rows();
    if (!m.square() || b.size() != n) throw Error(ErrorKind::DimensionMismatch, "linear_solve_real");

    double scale = 0.0;
    for (double x : m.data()) scale = std::max(scale, std::abs(x));
    if (scale == 0.0) {
        if (n == 0) return {};
        throw Error(ErrorKind::Singular, "zero matrix");
    }
    const double pivot_floor = 1e-14 * scale;

    RMatrix a = m;
    RVector x(b.begin(), b.end());
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        if (std::abs(a(piv, col)) <= pivot_floor)
            throw Error(ErrorKind::Singular, "pivot underflow at column " + std::to_string(col));
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a(col, c), a(piv, c));
            std::swap(x[col], x[piv]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a(r, col) / a(col, col);
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a(r, c) -= f * a(col, c);
            x[r] -= f * x[col];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t c = i + 1; c < n; ++c) x[i] -= a(i, c) * x[c];
        x[i] /= a(i, i);
    }
    return x;
}

PerronPair dominant_eigpair(const RMatrix& a, std::size_t cap) {
    const std::size_t n = a.rows();
    if (!a.square() || n == 0) throw Error(ErrorKind::DimensionMismatch, "dominant_eigpair needs a square matrix");
    for (double v : a.data())
        if (v < 0.0 || !std::isfinite(v)) throw Error(ErrorKind::DimensionMismatch, "dominant_eigpair needs nonnegative entries");

    PerronPair out;
    out.x.assign(n, 1.0 / static_cast<double>(n));
    double rho_prev = -1.0;
    for (std::size_t it = 1; it <= cap; ++it) {
        RVector y = matvec<double>(a, out.x);
        const double rho = norm1(y);
        out.iterations = it;
        if (rho == 0.0) {
            // Nilpotent direction from the all-ones start: the Perron root is 0.
            out.rho = 0.0;
            return out;
        }
        for (auto& v : y) v /= rho;

        double residual = 0.0;
        const RVector ay = matvec<double>(a, y);
        for (std::size_t i = 0; i < n; ++i) residual += std::abs(ay[i] - rho * y[i]);

        out.x = std::move(y);
        out.rho = rho;
        if (std::abs(rho - rho_prev) < 1e-12 * rho && residual <= 1e-10 * rho) return out;
        rho_prev = rho;
    }
    throw Error(ErrorKind::NoConvergence, "power iteration did not settle in " + std::to_string(cap) + " steps");
}

}  // namespace ccr
