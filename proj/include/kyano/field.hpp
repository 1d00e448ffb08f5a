// Antisymmetric tensor fields of rank 2 or n-1.

#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "kyano/autodiff.hpp"
#include "kyano/expr.hpp"
#include "kyano/tensor.hpp"

namespace kyano {

// A field is described by its independent components f_{i1<i2<...<ir}
// (ascending index tuples in lexicographic order). The full array is
// assembled by permutation signs, so antisymmetry holds exactly.
class AntisymTensorField {
public:
    using ComponentFn = std::function<std::vector<Jet>(std::span<const Jet>)>;

    AntisymTensorField(std::size_t dim, std::size_t rank, ComponentFn components, std::string label);

    std::size_t dim() const { return dim_; }
    std::size_t rank() const { return rank_; }
    const std::string& label() const { return label_; }

    // Ascending index tuples, one per independent component.
    const std::vector<std::vector<std::size_t>>& independent_indices() const { return layout_->tuples; }

    // Full array with derivatives carried by the input jets.
    Tensor<Jet> evaluate(std::span<const Jet> x) const;
    // Full array with gradients w.r.t. the chart coordinates.
    Tensor<Jet> evaluate_at(std::span<const double> point) const;
    Tensor<double> value_at(std::span<const double> point) const;

    // Components given as expressions; absent components are zero.
    static AntisymTensorField from_expressions(std::size_t dim, std::size_t rank,
                                               const std::map<std::vector<std::size_t>, expr::Expression>& comps,
                                               std::string label = "expression field");
    // Constant field from any antisymmetric matrix (upper triangle is read).
    static AntisymTensorField constant(const Matrix& f, std::string label = "constant field");

    // Linear combination sum_k coeffs[k] * fields[k]; all fields share dim and rank.
    static AntisymTensorField combination(std::vector<AntisymTensorField> fields, std::vector<double> coeffs,
                                          std::string label);

private:
    struct Layout {
        std::vector<std::vector<std::size_t>> tuples;
        // For every flat position of the full array: component index and sign (0 when repeated).
        std::vector<std::size_t> component;
        std::vector<int> sign;
    };
    static std::shared_ptr<const Layout> make_layout(std::size_t dim, std::size_t rank);

    std::size_t dim_;
    std::size_t rank_;
    ComponentFn components_;
    std::string label_;
    std::shared_ptr<const Layout> layout_;
};

// Ascending r-subsets of {0..n-1} in lexicographic order.
std::vector<std::vector<std::size_t>> ascending_tuples(std::size_t n, std::size_t r);

// Seeds n chart coordinates as jet variables.
std::vector<Jet> seed_jets(std::span<const double> point);

}  // namespace kyano
