// SPDX-License-Identifier: Apache-2.0
#pragma once

// Small dense matrices (Butcher coefficients, eigenvector bases, coarse-grid
// operators). Row-major storage, real or complex entries.

#include "spirk/error.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace spirk {

template <typename T>
class DenseMatrix
{
public:
  using value_type = T;

  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, T fill = T{})
    : rows_(rows), cols_(cols), data_(rows * cols, fill)
  {}
  DenseMatrix(std::initializer_list<std::initializer_list<T>> rows)
  {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto &r : rows)
    {
      if (r.size() != cols_)
        throw DimensionError("DenseMatrix: ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static DenseMatrix identity(std::size_t n)
  {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      m(i, i) = T{1};
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  T &operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T &operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  DenseMatrix transpose() const
  {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        t(j, i) = (*this)(i, j);
    return t;
  }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Matrix = DenseMatrix<double>;
using ComplexMatrix = DenseMatrix<std::complex<double>>;

template <typename T>
DenseMatrix<T> operator*(const DenseMatrix<T> &a, const DenseMatrix<T> &b)
{
  if (a.cols() != b.rows())
    throw DimensionError("matrix product: inner dimensions differ");
  DenseMatrix<T> c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k)
    {
      const T aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j)
        c(i, j) += aik * b(k, j);
    }
  return c;
}

template <typename T>
DenseMatrix<T> operator+(DenseMatrix<T> a, const DenseMatrix<T> &b)
{
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("matrix sum: shapes differ");
  for (std::size_t i = 0; i < a.data().size(); ++i)
    a.data()[i] += b.data()[i];
  return a;
}

template <typename T>
DenseMatrix<T> operator-(DenseMatrix<T> a, const DenseMatrix<T> &b)
{
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("matrix difference: shapes differ");
  for (std::size_t i = 0; i < a.data().size(); ++i)
    a.data()[i] -= b.data()[i];
  return a;
}

template <typename T>
DenseMatrix<T> operator*(T s, DenseMatrix<T> a)
{
  for (auto &v : a.data())
    v *= s;
  return a;
}

template <typename T>
std::vector<T> operator*(const DenseMatrix<T> &a, std::span<const T> x)
{
  if (a.cols() != x.size())
    throw DimensionError("matrix-vector product: size mismatch");
  std::vector<T> y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      y[i] += a(i, j) * x[j];
  return y;
}

// Largest entrywise absolute difference.
template <typename T>
double max_abs_diff(const DenseMatrix<T> &a, const DenseMatrix<T> &b)
{
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("max_abs_diff: shapes differ");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    m = std::max(m, static_cast<double>(std::abs(a.data()[i] - b.data()[i])));
  return m;
}

template <typename T>
DenseMatrix<std::complex<double>> to_complex(const DenseMatrix<T> &a)
{
  DenseMatrix<std::complex<double>> c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.data().size(); ++i)
    c.data()[i] = a.data()[i];
  return c;
}

// Gaussian elimination with partial pivoting, kept for repeated solves.
template <typename T>
class LuSolver
{
public:
  LuSolver() = default;
  explicit LuSolver(DenseMatrix<T> a) : lu_(std::move(a)), perm_(lu_.rows())
  {
    if (!lu_.square())
      throw DimensionError("LuSolver: matrix is not square");
    const std::size_t n = lu_.rows();
    for (std::size_t i = 0; i < n; ++i)
      perm_[i] = i;
    for (std::size_t k = 0; k < n; ++k)
    {
      std::size_t p = k;
      double best = std::abs(lu_(k, k));
      for (std::size_t i = k + 1; i < n; ++i)
        if (std::abs(lu_(i, k)) > best)
        {
          best = std::abs(lu_(i, k));
          p = i;
        }
      if (!(best > 0.0))
        throw FactorizationError("LuSolver: singular matrix at pivot " + std::to_string(k),
                                 static_cast<int>(k));
      if (p != k)
      {
        for (std::size_t j = 0; j < n; ++j)
          std::swap(lu_(k, j), lu_(p, j));
        std::swap(perm_[k], perm_[p]);
      }
      for (std::size_t i = k + 1; i < n; ++i)
      {
        const T f = lu_(i, k) / lu_(k, k);
        lu_(i, k) = f;
        for (std::size_t j = k + 1; j < n; ++j)
          lu_(i, j) -= f * lu_(k, j);
      }
    }
  }

  std::size_t size() const noexcept { return lu_.rows(); }

  void solve_in_place(std::span<T> b) const
  {
    const std::size_t n = lu_.rows();
    if (b.size() != n)
      throw DimensionError("LuSolver::solve: size mismatch");
    std::vector<T> y(n);
    for (std::size_t i = 0; i < n; ++i)
      y[i] = b[perm_[i]];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j)
        y[i] -= lu_(i, j) * y[j];
    for (std::size_t i = n; i-- > 0;)
    {
      for (std::size_t j = i + 1; j < n; ++j)
        y[i] -= lu_(i, j) * y[j];
      y[i] /= lu_(i, i);
    }
    std::copy(y.begin(), y.end(), b.begin());
  }

private:
  DenseMatrix<T> lu_;
  std::vector<std::size_t> perm_;
};

template <typename T>
DenseMatrix<T> inverse(const DenseMatrix<T> &a)
{
  LuSolver<T> lu(a);
  const std::size_t n = a.rows();
  DenseMatrix<T> inv(n, n);
  std::vector<T> col(n);
  for (std::size_t j = 0; j < n; ++j)
  {
    std::fill(col.begin(), col.end(), T{});
    col[j] = T{1};
    lu.solve_in_place(col);
    for (std::size_t i = 0; i < n; ++i)
      inv(i, j) = col[i];
  }
  return inv;
}

}  // namespace spirk
