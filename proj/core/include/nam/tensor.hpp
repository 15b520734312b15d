#pragma once

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace nam {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);
std::string to_string(const Shape& shape);

/// Dense row-major tensor of doubles. The buffer is shared and never written
/// after construction, so copies are cheap and a Tensor behaves as a value.
class Tensor {
  public:
    /// Scalar zero.
    Tensor();
    Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

    static Tensor zeros(Shape shape);
    static Tensor full(Shape shape, double value);
    static Tensor scalar(double value);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t size() const noexcept { return data_->size(); }

    std::span<const double> data() const noexcept { return *data_; }
    double operator[](std::size_t i) const noexcept { return (*data_)[i]; }
    double at(std::initializer_list<std::size_t> index) const;

    /// Value of a single-element tensor.
    double item() const;

    bool requires_grad() const noexcept { return requires_grad_; }
    Tensor with_requires_grad(bool flag) const;

    /// Same data, new shape with equal element count.
    Tensor reshaped(Shape shape) const;

    bool all_finite() const noexcept;

    /// Bitwise equality of shape and data.
    friend bool operator==(const Tensor& a, const Tensor& b);

  private:
    Shape shape_;
    std::shared_ptr<const std::vector<double>> data_;
    bool requires_grad_ = false;
};

} // namespace nam
