// Dense complex matrices and vectors used by the statevector / density-matrix
// simulator. Row-major storage, value semantics, no external dependencies.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace cnqe {

using cdouble = std::complex<double>;
using cvector = std::vector<cdouble>;

class CMatrix {
public:
    CMatrix() = default;
    CMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols) {}

    static CMatrix identity(int n) {
        CMatrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static CMatrix from_rows(std::initializer_list<std::initializer_list<cdouble>> rows) {
        const int r = static_cast<int>(rows.size());
        const int c = r > 0 ? static_cast<int>(rows.begin()->size()) : 0;
        CMatrix m(r, c);
        int i = 0;
        for (const auto& row : rows) {
            if (static_cast<int>(row.size()) != c) throw std::invalid_argument("ragged matrix literal");
            int j = 0;
            for (const auto& v : row) m(i, j++) = v;
            ++i;
        }
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return a_.empty(); }

    cdouble& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
    const cdouble& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

    cdouble* data() { return a_.data(); }
    const cdouble* data() const { return a_.data(); }

    CMatrix adjoint() const {
        CMatrix m(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
        return m;
    }

    CMatrix transpose() const {
        CMatrix m(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) m(j, i) = (*this)(i, j);
        return m;
    }

    cdouble trace() const {
        cdouble t = 0.0;
        for (int i = 0; i < rows_ && i < cols_; ++i) t += (*this)(i, i);
        return t;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (const auto& v : a_) s += std::norm(v);
        return std::sqrt(s);
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : a_) m = std::max(m, std::abs(v));
        return m;
    }

    CMatrix& operator+=(const CMatrix& o) {
        check_same_shape(o);
        for (size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
        return *this;
    }
    CMatrix& operator-=(const CMatrix& o) {
        check_same_shape(o);
        for (size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
        return *this;
    }
    CMatrix& operator*=(cdouble s) {
        for (auto& v : a_) v *= s;
        return *this;
    }

    friend CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
    friend CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
    friend CMatrix operator*(CMatrix a, cdouble s) { return a *= s; }
    friend CMatrix operator*(cdouble s, CMatrix a) { return a *= s; }

    friend CMatrix operator*(const CMatrix& a, const CMatrix& b) {
        if (a.cols_ != b.rows_) throw std::invalid_argument("matrix product shape mismatch");
        CMatrix c(a.rows_, b.cols_);
        for (int i = 0; i < a.rows_; ++i) {
            for (int k = 0; k < a.cols_; ++k) {
                const cdouble aik = a(i, k);
                if (aik == cdouble{}) continue;
                for (int j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        }
        return c;
    }

    cvector operator*(const cvector& v) const {
        if (static_cast<int>(v.size()) != cols_) throw std::invalid_argument("matrix-vector shape mismatch");
        cvector out(rows_);
        for (int i = 0; i < rows_; ++i) {
            cdouble s = 0.0;
            for (int j = 0; j < cols_; ++j) s += (*this)(i, j) * v[j];
            out[i] = s;
        }
        return out;
    }

    CMatrix kron(const CMatrix& b) const {
        CMatrix c(rows_ * b.rows_, cols_ * b.cols_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) {
                const cdouble s = (*this)(i, j);
                if (s == cdouble{}) continue;
                for (int k = 0; k < b.rows_; ++k)
                    for (int l = 0; l < b.cols_; ++l)
                        c(i * b.rows_ + k, j * b.cols_ + l) = s * b(k, l);
            }
        return c;
    }

    bool is_unitary(double tol) const {
        if (rows_ != cols_) return false;
        const CMatrix p = adjoint() * (*this);
        CMatrix d = p - identity(rows_);
        return d.max_abs() < tol;
    }

    double hermiticity_defect() const {
        double m = 0.0;
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j)
                m = std::max(m, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
        return m;
    }

private:
    void check_same_shape(const CMatrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("matrix shape mismatch");
    }

    int rows_ = 0;
    int cols_ = 0;
    cvector a_;
};

inline cdouble inner(const cvector& a, const cvector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("inner product length mismatch");
    cdouble s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

inline double norm2(const cvector& a) {
    double s = 0.0;
    for (const auto& v : a) s += std::norm(v);
    return std::sqrt(s);
}

}  // namespace cnqe
