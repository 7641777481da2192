#pragma once

// Slow, independent reference implementations used only by the test suite.
// Everything here works on explicit axis tuples with permutation-parity
// bookkeeping (bubble sort with swap counting) instead of the bit-mask
// arithmetic of the library, so agreement is meaningful.

#include <Eigen/Dense>

#include <map>
#include <vector>

#include "hodgeforms/forms.hpp"

namespace oracle {

// A form as a map from increasing axis tuples to coefficients.
using TupleForm = std::map<std::vector<int>, double>;

// Sign of sorting v into increasing order; 0 if v has duplicates.
int sort_parity(std::vector<int> v);

TupleForm to_tuples(const hodge::Form& f);
hodge::Form from_tuples(int n, int k, const TupleForm& t);

TupleForm slow_wedge(const TupleForm& a, const TupleForm& b);

// Interior product defined through adjointness <v _| xi, e^K> = <xi, v ^ e^K>.
TupleForm slow_interior(int n, int k, const Eigen::VectorXd& v, const TupleForm& xi);

// Star defined by e^I ^ (star e^I) = vol, evaluated with slow_wedge.
TupleForm slow_star(int n, int k, const TupleForm& xi);

// Pullback by evaluating xi(T v_1, ..., T v_k) on basis vectors, with the
// alternating evaluation done from determinants of column tuples.
TupleForm slow_pullback(const Eigen::MatrixXd& T, int k, const TupleForm& xi);

// Exact integral of the monomial prod x_i^{a_i} over the unit reference
// simplex in R^n: (prod a_i!) / (n + sum a_i)!.
double simplex_monomial_integral(const std::vector<int>& powers);

// Dense product-grid lower bound for the Legendre-Hadamard constant of A on
// decomposable (k+1)-vectors a ^ b, |a| = |b| = 1: minimizes
// <A(a^b); a^b> over a grid with ~points^2 samples (n <= 4 intended).
double lh_grid_minimum(const Eigen::MatrixXd& A, int n, int k, int points);

}  // namespace oracle
