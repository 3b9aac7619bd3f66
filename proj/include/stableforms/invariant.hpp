#pragma once

#include <vector>

#include "stableforms/form.hpp"
#include "stableforms/linalg.hpp"

namespace stableforms {

/// Extends a linear map on 1-forms to a derivation of the exterior algebra.
/// Column convention: D e^j = sum_i M(i, j) e^i.
template <class S>
Form<S> derivation_apply(const Endo<S>& M, const Form<S>& a) {
  std::array<Form<S>, kDim + 1> images;
  for (int j = 1; j <= kDim; ++j) {
    Form<S> f(1);
    for (int i = 1; i <= kDim; ++i) f.add(mask_of({i}), M.at(i, j));
    images[j] = f;
  }
  Form<S> out(a.degree());
  for (const auto& [m, c] : a.terms()) {
    auto idx = mask_indices(m);
    for (std::size_t p = 0; p < idx.size(); ++p) {
      Form<S> term = Form<S>::basis(0, c);
      for (std::size_t q = 0; q < idx.size(); ++q)
        term = wedge(term, q == p ? images[idx[q]] : Form<S>::basis(mask_of({idx[q]})));
      out += term;
    }
  }
  return out;
}

/// Exact basis of the k-forms annihilated by every generator.
inline std::vector<Form<QuadraticScalar>> invariant_forms(const std::vector<Endo<QuadraticScalar>>& generators, int k) {
  std::vector<Mask> masks = masks_of_degree(k);
  std::vector<Mask> target = masks_of_degree(k);
  ExactMatrix rows;
  for (const auto& gen : generators) {
    std::vector<ExactVector> columns;
    for (Mask m : masks) {
      Form<QuadraticScalar> img = derivation_apply(gen, Form<QuadraticScalar>::basis(m));
      ExactVector col(target.size());
      for (std::size_t r = 0; r < target.size(); ++r) col[r] = img.coeff(target[r]);
      columns.push_back(col);
    }
    for (std::size_t r = 0; r < target.size(); ++r) {
      ExactVector row(masks.size());
      for (std::size_t c = 0; c < masks.size(); ++c) row[c] = columns[c][r];
      rows.push_back(row);
    }
  }
  std::vector<Form<QuadraticScalar>> out;
  for (const auto& v : kernel(rows, masks.size())) {
    Form<QuadraticScalar> f(k);
    for (std::size_t c = 0; c < masks.size(); ++c) f.add(masks[c], v[c]);
    out.push_back(f);
  }
  return out;
}

}  // namespace stableforms
