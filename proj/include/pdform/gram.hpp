#pragma once

#include "pdform/forms.hpp"
#include "pdform/matrix.hpp"

namespace pdform {

/// Expands m(x)^T G m(x) for the monomial vector m of `basis`: the
/// coefficient of x^gamma is the sum of G[alpha, beta] over alpha + beta = gamma.
template <class S>
Form<S> gram_to_form(const Matrix<S>& g, const MonomialBasis& basis) {
  if (g.rows() != basis.size() || g.cols() != basis.size())
    throw InputError("Gram matrix size does not match the monomial basis");
  require_symmetric(g, "Gram matrix");
  Form<S> out(basis.n(), 2 * basis.k());
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = 0; j < basis.size(); ++j) out.add_term(basis[i] + basis[j], g(i, j));
  return out;
}

}  // namespace pdform
