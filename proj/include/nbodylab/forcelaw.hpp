#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nbodylab/errors.hpp"

namespace nbodylab {

enum class LawKind { PowerLaw, Custom };

enum class AdmissibilityClass { PositiveG, NegativeG, DegenerateInverseCube, Indefinite };

inline const char* to_string(AdmissibilityClass c) {
    switch (c) {
        case AdmissibilityClass::PositiveG: return "PositiveG";
        case AdmissibilityClass::NegativeG: return "NegativeG";
        case AdmissibilityClass::DegenerateInverseCube: return "DegenerateInverseCube";
        case AdmissibilityClass::Indefinite: return "Indefinite";
    }
    return "Indefinite";
}

/// Sign classification of g(x) = x f(x) + F(x) over a sample grid, together
/// with the evidence used to reach it.
template <class Real = double>
struct BasicAdmissibility {
    AdmissibilityClass cls = AdmissibilityClass::Indefinite;
    std::vector<std::pair<Real, Real>> evidence;  // (x, g(x)) samples
};

using Admissibility = BasicAdmissibility<double>;

/// A pairwise interaction law evaluated on squared separations.
///
/// `f` is the kernel of the equations of motion, `antiderivative` is F with
/// F' = f (the pairwise potential kernel, integration constant fixed to the
/// standard power-law choice), and g(x) = x f(x) + F(x) = (x F(x))'. The sign
/// behaviour of g over the positive reals is what classify_admissibility reads
/// off: a fixed sign means the law is admissible, g identically zero is
/// exactly the inverse-cube family f = C/x^2.
///
/// Custom laws must supply f and F in closed form; nothing here integrates
/// numerically. Immutable after construction, safe to share across threads.
/// Real selects the working precision; double is the default everywhere,
/// long double buys three extra decades when instability amplifies rounding
/// noise.
template <class Real = double>
class BasicForceLaw {
public:
    using ScalarFn = std::function<Real(Real)>;

    /// f(x) = C x^(-alpha/2). F(x) = C x^(1-alpha/2) / (1-alpha/2), or
    /// C ln(x) when alpha == 2. Any real alpha is admitted; classification is
    /// a separate concern.
    static BasicForceLaw power_law(double alpha, double coefficient) {
        if (!(coefficient > 0.0)) throw ValidationError("power-law coefficient must be positive");
        const Real c = static_cast<Real>(coefficient);
        const Real half_alpha = static_cast<Real>(alpha) / Real(2);
        ScalarFn f = [c, half_alpha](Real x) { return c * std::pow(x, -half_alpha); };
        ScalarFn F;
        if (alpha == 2.0) {
            F = [c](Real x) { return c * std::log(x); };
        } else {
            const Real p = Real(1) - half_alpha;
            F = [c, p](Real x) { return c * std::pow(x, p) / p; };
        }
        BasicForceLaw law(std::move(f), std::move(F), LawKind::PowerLaw,
                          "power(alpha=" + std::to_string(alpha) + ",C=" + std::to_string(coefficient) +
                              ")");
        law.alpha_ = alpha;
        law.coefficient_ = coefficient;
        return law;
    }

    /// Newtonian kernel f(x) = x^(-3/2).
    static BasicForceLaw newtonian() { return power_law(3.0, 1.0); }

    /// The degenerate family: f(x) = C/x^2, for which g vanishes identically.
    static BasicForceLaw inverse_cube(double coefficient = 1.0) { return power_law(4.0, coefficient); }

    /// Callers must supply real-analytic kernels on the positive axis with
    /// F' = f in closed form; only real-axis behaviour is ever audited here.
    static BasicForceLaw custom(std::string name, ScalarFn f, ScalarFn F) {
        return BasicForceLaw(std::move(f), std::move(F), LawKind::Custom, std::move(name));
    }

    Real f(Real x) const { return f_(x); }
    Real antiderivative(Real x) const { return F_(x); }

    /// g(x) = x f(x) + F(x), computed from the definition.
    Real g(Real x) const {
        if (!(x > Real(0))) throw NonPositiveArgument(static_cast<double>(x));
        return x * f_(x) + F_(x);
    }

    /// Same law at another working precision. Closed-form for power laws;
    /// custom laws cannot be re-derived and keep their original kernels
    /// bridged through the narrower type, so only widen power laws.
    template <class Other>
    BasicForceLaw<Other> cast() const {
        if (kind_ == LawKind::PowerLaw) return BasicForceLaw<Other>::power_law(alpha_, coefficient_);
        auto f = f_;
        auto F = F_;
        return BasicForceLaw<Other>::custom(
            name_, [f](Other x) { return static_cast<Other>(f(static_cast<Real>(x))); },
            [F](Other x) { return static_cast<Other>(F(static_cast<Real>(x))); });
    }

    LawKind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    double alpha() const { return alpha_; }
    double coefficient() const { return coefficient_; }

private:
    BasicForceLaw(ScalarFn f, ScalarFn F, LawKind kind, std::string name)
        : f_(std::move(f)), F_(std::move(F)), kind_(kind), name_(std::move(name)) {}

    ScalarFn f_;
    ScalarFn F_;
    LawKind kind_;
    std::string name_;
    double alpha_ = std::numeric_limits<double>::quiet_NaN();
    double coefficient_ = std::numeric_limits<double>::quiet_NaN();
};

using ForceLaw = BasicForceLaw<double>;

/// Log-spaced grid, inclusive of both endpoints.
inline std::vector<double> log_grid(double lo, double hi, int count) {
    if (count < 2 || !(lo > 0.0) || !(hi > lo)) throw ValidationError("bad log grid spec");
    std::vector<double> xs(count);
    const double step = (std::log(hi) - std::log(lo)) / (count - 1);
    for (int i = 0; i < count; ++i) xs[i] = std::exp(std::log(lo) + step * i);
    xs.front() = lo;
    xs.back() = hi;
    return xs;
}

/// Default audit grid: two decades around unit separation.
inline std::vector<double> default_admissibility_grid() { return log_grid(0.1, 10.0, 41); }

/// Classifies the sign of g over the grid. Degeneracy wins when max |g| sits
/// at the double-precision noise floor relative to the x f(x) scale, which is
/// exactly where the inverse-cube family lands.
template <class Real>
BasicAdmissibility<Real> classify_admissibility(const BasicForceLaw<Real>& law,
                                                std::span<const double> grid) {
    if (grid.empty()) throw EmptyGrid();
    BasicAdmissibility<Real> result;
    result.evidence.reserve(grid.size());
    Real g_min = std::numeric_limits<Real>::infinity();
    Real g_max = -std::numeric_limits<Real>::infinity();
    Real abs_g_max = 0;
    Real abs_xf_max = 0;
    for (double x_in : grid) {
        const Real x = static_cast<Real>(x_in);
        if (!(x > Real(0))) throw NonPositiveArgument(x_in);
        const Real gx = law.g(x);
        result.evidence.emplace_back(x, gx);
        g_min = std::min(g_min, gx);
        g_max = std::max(g_max, gx);
        abs_g_max = std::max(abs_g_max, std::abs(gx));
        abs_xf_max = std::max(abs_xf_max, std::abs(x * law.f(x)));
    }
    if (abs_g_max < Real(1e-12) * (Real(1) + abs_xf_max)) {
        result.cls = AdmissibilityClass::DegenerateInverseCube;
    } else if (g_min > Real(0)) {
        result.cls = AdmissibilityClass::PositiveG;
    } else if (g_max < Real(0)) {
        result.cls = AdmissibilityClass::NegativeG;
    } else {
        result.cls = AdmissibilityClass::Indefinite;
    }
    return result;
}

template <class Real>
BasicAdmissibility<Real> classify_admissibility(const BasicForceLaw<Real>& law) {
    const auto grid = default_admissibility_grid();
    return classify_admissibility(law, std::span<const double>(grid));
}

/// A law is admissible when g keeps a fixed sign.
inline bool is_admissible(AdmissibilityClass c) {
    return c == AdmissibilityClass::PositiveG || c == AdmissibilityClass::NegativeG;
}

}  // namespace nbodylab
