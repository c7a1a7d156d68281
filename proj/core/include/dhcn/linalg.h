// Copyright 2026 The DHCN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DHCN_LINALG_H_
#define DHCN_LINALG_H_

#include <span>
#include <vector>

#include "dhcn/matrix.h"

namespace dhcn {

// a * b. Throws ValidationError naming both shapes when a.cols != b.rows.
Matrix MatMul(const Matrix& a, const Matrix& b);
// a' * b without forming the transpose.
Matrix MatMulTransA(const Matrix& a, const Matrix& b);
// a * b' without forming the transpose.
Matrix MatMulTransB(const Matrix& a, const Matrix& b);

Matrix Transpose(const Matrix& a);

// a + b and a - b; shapes must agree.
Matrix Add(const Matrix& a, const Matrix& b);
Matrix Subtract(const Matrix& a, const Matrix& b);
Matrix Scale(const Matrix& a, double s);

// Entrywise product, used for masking.
Matrix Hadamard(const Matrix& a, const BoolMatrix& mask);

// Column-wise concatenation [a b c ...]; all blocks must share a row count.
Matrix HConcat(std::span<const Matrix> blocks);
// Columns [begin, begin + count) of a.
Matrix ColumnBlock(const Matrix& a, std::size_t begin, std::size_t count);

double Dot(std::span<const double> a, std::span<const double> b);
double Trace(const Matrix& a);
double FrobeniusNorm(const Matrix& a);
double MaxAbs(const Matrix& a);
bool AllFinite(const Matrix& a);

// Max entrywise |a - b| divided by max(1e-300, max|b|).
double RelativeError(const Matrix& a, const Matrix& b);

struct SymEigResult {
  std::vector<double> values;  // descending
  Matrix vectors;              // column i pairs with values[i]
};

// Cyclic Jacobi eigensolver for symmetric matrices. The input is symmetrized
// by averaging with its transpose first. Sweeps stop once the off-diagonal
// Frobenius mass drops to 1e-12 of its initial value, or after 100 sweeps.
SymEigResult SymEig(const Matrix& a);

}  // namespace dhcn

#endif  // DHCN_LINALG_H_
