#include "kyano/field.hpp"

#include <optional>
#include <utility>

namespace kyano {

std::vector<std::vector<std::size_t>> ascending_tuples(std::size_t n, std::size_t r) {
    std::vector<std::vector<std::size_t>> out;
    if (r > n) return out;
    std::vector<std::size_t> t(r);
    for (std::size_t i = 0; i < r; ++i) t[i] = i;
    for (;;) {
        out.push_back(t);
        std::size_t i = r;
        while (i > 0 && t[i - 1] == n - r + (i - 1)) --i;
        if (i == 0) break;
        ++t[i - 1];
        for (std::size_t j = i; j < r; ++j) t[j] = t[j - 1] + 1;
    }
    return out;
}

std::vector<Jet> seed_jets(std::span<const double> point) {
    std::vector<Jet> x;
    x.reserve(point.size());
    for (std::size_t i = 0; i < point.size(); ++i) x.push_back(Jet::variable(point[i], i, point.size()));
    return x;
}

AntisymTensorField::AntisymTensorField(std::size_t dim, std::size_t rank, ComponentFn components,
                                       std::string label)
    : dim_(dim), rank_(rank), components_(std::move(components)), label_(std::move(label)) {
    if (dim < 2 || (rank != 2 && rank + 1 != dim)) {
        throw ShapeError("antisymmetric field must have rank 2 or n-1 (dim " + std::to_string(dim) + ", rank " +
                         std::to_string(rank) + ")");
    }
    layout_ = make_layout(dim, rank);
}

std::shared_ptr<const AntisymTensorField::Layout> AntisymTensorField::make_layout(std::size_t dim,
                                                                                  std::size_t rank) {
    auto layout = std::make_shared<Layout>();
    layout->tuples = ascending_tuples(dim, rank);
    std::map<std::vector<std::size_t>, std::size_t> position;
    for (std::size_t i = 0; i < layout->tuples.size(); ++i) position[layout->tuples[i]] = i;

    const Tensor<int> shape(dim, rank, 0);
    layout->component.assign(shape.size(), 0);
    layout->sign.assign(shape.size(), 0);
    for (std::size_t k = 0; k < shape.size(); ++k) {
        std::vector<std::size_t> idx = shape.unravel(k);
        const int s = sort_with_sign(idx);
        layout->sign[k] = s;
        if (s != 0) layout->component[k] = position.at(idx);
    }
    return layout;
}

Tensor<Jet> AntisymTensorField::evaluate(std::span<const Jet> x) const {
    if (x.size() != dim_) {
        throw ShapeError("field '" + label_ + "' expects " + std::to_string(dim_) + " coordinates");
    }
    const std::vector<Jet> comps = components_(x);
    if (comps.size() != layout_->tuples.size()) {
        throw ShapeError("field '" + label_ + "' returned wrong number of components");
    }
    Tensor<Jet> out(dim_, rank_, Jet(0.0));
    for (std::size_t k = 0; k < out.size(); ++k) {
        const int s = layout_->sign[k];
        if (s > 0) {
            out.data()[k] = comps[layout_->component[k]];
        } else if (s < 0) {
            out.data()[k] = -comps[layout_->component[k]];
        }
    }
    return out;
}

Tensor<Jet> AntisymTensorField::evaluate_at(std::span<const double> point) const {
    const std::vector<Jet> x = seed_jets(point);
    return evaluate(x);
}

Tensor<double> AntisymTensorField::value_at(std::span<const double> point) const {
    std::vector<Jet> x(point.begin(), point.end());
    return values_of(evaluate(x));
}

AntisymTensorField AntisymTensorField::from_expressions(
    std::size_t dim, std::size_t rank, const std::map<std::vector<std::size_t>, expr::Expression>& comps,
    std::string label) {
    const auto tuples = ascending_tuples(dim, rank);
    std::vector<std::optional<expr::Expression>> ordered(tuples.size());
    for (const auto& [idx, e] : comps) {
        bool found = false;
        for (std::size_t i = 0; i < tuples.size(); ++i) {
            if (tuples[i] == idx) {
                ordered[i] = e;
                found = true;
            }
        }
        if (!found) throw ShapeError("component index is not an ascending tuple of the field's rank");
        if (e.dim() != dim) throw ShapeError("component expression has wrong chart dimension");
    }
    auto fn = [ordered = std::move(ordered)](std::span<const Jet> x) {
        std::vector<Jet> out;
        out.reserve(ordered.size());
        for (const auto& e : ordered) out.push_back(e ? e->evaluate<Jet>(x) : Jet(0.0));
        return out;
    };
    return AntisymTensorField(dim, rank, std::move(fn), std::move(label));
}

AntisymTensorField AntisymTensorField::constant(const Matrix& f, std::string label) {
    const std::size_t n = f.dim();
    std::vector<double> upper;
    for (const auto& t : ascending_tuples(n, 2)) upper.push_back(f(t[0], t[1]));
    auto fn = [upper](std::span<const Jet>) { return std::vector<Jet>(upper.begin(), upper.end()); };
    return AntisymTensorField(n, 2, std::move(fn), std::move(label));
}

AntisymTensorField AntisymTensorField::combination(std::vector<AntisymTensorField> fields,
                                                   std::vector<double> coeffs, std::string label) {
    if (fields.empty() || fields.size() != coeffs.size()) throw ShapeError("combination: size mismatch");
    const std::size_t dim = fields.front().dim();
    const std::size_t rank = fields.front().rank();
    for (const auto& f : fields) {
        if (f.dim() != dim || f.rank() != rank) throw ShapeError("combination: fields differ in shape");
    }
    auto fn = [fields = std::move(fields), coeffs = std::move(coeffs)](std::span<const Jet> x) {
        std::vector<Jet> out;
        for (std::size_t k = 0; k < fields.size(); ++k) {
            const std::vector<Jet> c = fields[k].components_(x);
            if (out.empty()) out.assign(c.size(), Jet(0.0));
            for (std::size_t i = 0; i < c.size(); ++i) out[i] += coeffs[k] * c[i];
        }
        return out;
    };
    return AntisymTensorField(dim, rank, std::move(fn), std::move(label));
}

}  // namespace kyano
