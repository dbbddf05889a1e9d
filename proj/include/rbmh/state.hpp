#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace rbmh {

/// Chain state: a fixed-length vector of reals for continuous models, an
/// integer for discrete ones. Equality is bitwise on the representation,
/// which is exact for run-length purposes because rejected steps copy the
/// state and never recompute it.
class State {
public:
    State() : value_(std::int64_t{0}) {}

    static State integer(std::int64_t v) { return State(v); }
    static State real1(double x) { return State(std::vector<double>{x}); }
    static State real2(double x, double y) { return State(std::vector<double>{x, y}); }
    static State reals(std::vector<double> v) {
        if (v.empty()) throw std::invalid_argument("State: empty real vector");
        return State(std::move(v));
    }

    bool is_integer() const { return std::holds_alternative<std::int64_t>(value_); }

    std::int64_t as_integer() const {
        if (!is_integer()) throw std::logic_error("State: not an integer state");
        return std::get<std::int64_t>(value_);
    }

    const std::vector<double>& as_reals() const {
        if (is_integer()) throw std::logic_error("State: not a real-vector state");
        return std::get<std::vector<double>>(value_);
    }

    std::size_t dimension() const { return is_integer() ? 1 : as_reals().size(); }

    double real(std::size_t i) const { return as_reals().at(i); }

    /// Scalar view used by the generic test functions h: the integer value
    /// for discrete states, the first coordinate otherwise.
    double scalar() const {
        return is_integer() ? static_cast<double>(as_integer()) : as_reals().front();
    }

    friend bool operator==(const State& a, const State& b) {
        if (a.is_integer() != b.is_integer()) return false;
        if (a.is_integer()) return a.as_integer() == b.as_integer();
        const auto& x = a.as_reals();
        const auto& y = b.as_reals();
        if (x.size() != y.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (std::bit_cast<std::uint64_t>(x[i]) != std::bit_cast<std::uint64_t>(y[i]))
                return false;
        }
        return true;
    }
    friend bool operator!=(const State& a, const State& b) { return !(a == b); }

    std::string to_string() const;

private:
    explicit State(std::int64_t v) : value_(v) {}
    explicit State(std::vector<double> v) : value_(std::move(v)) {}

    std::variant<std::int64_t, std::vector<double>> value_;
};

}  // namespace rbmh
