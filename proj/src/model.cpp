#include "agrospray/model.hpp"

#include <algorithm>
#include <cmath>

#include "agrospray/error.hpp"

namespace agrospray {

namespace {

using Vec3 = std::array<double, 3>;

bool all_finite(std::initializer_list<double> values)
{
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

void require_finite(const PopulationState& x, const char* op)
{
    if (!x.finite()) throw InvalidArgument(std::string(op) + ": non-finite population state");
}

void require_finite(const AdjointState& l, const char* op)
{
    if (!l.finite()) throw InvalidArgument(std::string(op) + ": non-finite costate");
}

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

// Jacobian of the unsprayed dynamics, row-major.
std::array<Vec3, 3> drift_jacobian(const PopulationState& x, const ModelParams& p)
{
    const double r = p.insect_birth, e = p.pest_birth, a = p.spider_mortality;
    const double b = p.hunt_pests, c = p.hunt_insects, k = p.conversion;
    const double W = p.woods_capacity, V = p.vineyard_capacity;
    const double f = x.insects, s = x.spiders, v = x.pests;
    return {{
        {r - 2.0 * r * f / W - c * s, -c * f, 0.0},
        {k * c * s, -a + k * b * v + k * c * f, k * b * s},
        {0.0, -b * v, e - 2.0 * e * v / V - b * s},
    }};
}

// Symmetric bilinear form built from the (constant) Hessians of the drift.
Vec3 drift_hessian(const Vec3& y, const Vec3& z, const ModelParams& p)
{
    const double r = p.insect_birth, e = p.pest_birth;
    const double b = p.hunt_pests, c = p.hunt_insects, k = p.conversion;
    const double W = p.woods_capacity, V = p.vineyard_capacity;
    const double fs = y[0] * z[1] + y[1] * z[0];
    const double sv = y[1] * z[2] + y[2] * z[1];
    return {
        -2.0 * r / W * y[0] * z[0] - c * fs,
        k * c * fs + k * b * sv,
        -2.0 * e / V * y[2] * z[2] - b * sv,
    };
}

Vec3 apply(const std::array<Vec3, 3>& m, const Vec3& y)
{
    return {dot(m[0], y), dot(m[1], y), dot(m[2], y)};
}

} // namespace

std::optional<ModelParams::Violation> ModelParams::check() const
{
    const std::pair<const char*, double> fields[] = {
        {"r", insect_birth},   {"e", pest_birth},        {"a", spider_mortality}, {"b", hunt_pests},
        {"c", hunt_insects},   {"h", spray_intensity},   {"q", on_target},        {"k", conversion},
        {"W", woods_capacity}, {"V", vineyard_capacity}, {"K", spider_kill},      {"xi", control_weight},
    };
    for (const auto& [name, value] : fields) {
        if (!std::isfinite(value)) return Violation{name, std::string(name) + " must be finite"};
        if (value < 0.0) return Violation{name, std::string(name) + " must be non-negative"};
    }
    if (on_target > 1.0) return Violation{"q", "q must lie in [0, 1]"};
    if (conversion <= 0.0 || conversion > 1.0) return Violation{"k", "k must lie in (0, 1]"};
    if (woods_capacity <= 0.0) return Violation{"W", "W must be positive"};
    if (vineyard_capacity <= 0.0) return Violation{"V", "V must be positive"};
    return std::nullopt;
}

void ModelParams::validate() const
{
    if (auto v = check()) throw InvalidArgument("invalid model parameter " + v->field + ": " + v->message);
}

ModelParams mintime_params()
{
    ModelParams p;
    p.hunt_insects = 2.0;
    p.pest_birth = 0.3;
    return p;
}

bool PopulationState::finite() const { return all_finite({insects, spiders, pests}); }

bool AdjointState::finite() const { return all_finite({insects, spiders, pests, multiplier}); }

void ProblemSpec::validate() const
{
    params.validate();
    if (!init.finite()) throw InvalidArgument("initial state must be finite");
    if (init.insects < 0.0 || init.spiders < 0.0 || init.pests < 0.0)
        throw InvalidArgument("initial populations must be non-negative");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("horizon must be positive");
}

PopulationState dynamics_rhs(const PopulationState& x, double u, const ModelParams& p)
{
    require_finite(x, "dynamics_rhs");
    if (!std::isfinite(u)) throw InvalidArgument("dynamics_rhs: non-finite control");
    const double r = p.insect_birth, e = p.pest_birth, a = p.spider_mortality;
    const double b = p.hunt_pests, c = p.hunt_insects, h = p.spray_intensity;
    const double q = p.on_target, k = p.conversion, K = p.spider_kill;
    const double W = p.woods_capacity, V = p.vineyard_capacity;
    const double f = x.insects, s = x.spiders, v = x.pests;
    return {
        r * f * (1.0 - f / W) - c * s * f - h * (1.0 - q) * u,
        s * (-a + k * b * v + k * c * f) - h * K * q * u,
        e * v * (1.0 - v / V) - b * s * v - h * q * u,
    };
}

AdjointState adjoint_rhs_mintime(const AdjointState& l, const PopulationState& x, const ModelParams& p)
{
    require_finite(x, "adjoint_rhs");
    require_finite(l, "adjoint_rhs");
    const double r = p.insect_birth, e = p.pest_birth, a = p.spider_mortality;
    const double b = p.hunt_pests, c = p.hunt_insects, k = p.conversion;
    const double W = p.woods_capacity, V = p.vineyard_capacity;
    const double f = x.insects, s = x.spiders, v = x.pests;
    const double l1 = l.insects, l2 = l.spiders, l3 = l.pests;
    AdjointState d;
    d.insects = -l1 * (r * (1.0 - f / W) - r * f / W - c * s) - l2 * s * k * c;
    d.spiders = l1 * c * f - l2 * (-a + k * b * v + k * c * f) + l3 * b * v;
    d.pests = -l2 * s * k * b - l3 * (e * (1.0 - v / V) - e * v / V - b * s);
    d.multiplier = 0.0;
    return d;
}

AdjointState adjoint_rhs_fixed(const AdjointState& l, const PopulationState& x, const ModelParams& p)
{
    AdjointState d = adjoint_rhs_mintime(l, x, p);
    d.pests -= 1.0;
    return d;
}

AdjointState adjoint_rhs(ProblemKind kind, const AdjointState& l, const PopulationState& x,
                         const ModelParams& p)
{
    return kind == ProblemKind::FixedHorizon ? adjoint_rhs_fixed(l, x, p) : adjoint_rhs_mintime(l, x, p);
}

double hamiltonian(const PopulationState& x, double u, const AdjointState& l, const ModelParams& p,
                   ProblemKind kind)
{
    require_finite(l, "hamiltonian");
    const PopulationState dx = dynamics_rhs(x, u, p);
    const double running = kind == ProblemKind::FixedHorizon
                               ? x.pests + 0.5 * p.control_weight * u * u
                               : l.multiplier;
    return running + l.insects * dx.insects + l.spiders * dx.spiders + l.pests * dx.pests;
}

double control_from_adjoint(const AdjointState& l, const ModelParams& p)
{
    if (p.control_weight == 0.0)
        throw DivisionByZero("control_from_adjoint: control weight xi is zero");
    const double h = p.spray_intensity, q = p.on_target, K = p.spider_kill;
    const double raw =
        h * (l.insects - l.insects * q + l.spiders * K * q + l.pests * q) / p.control_weight;
    return std::min(std::max(0.0, raw), 1.0);
}

double switching_function(const AdjointState& l, const ModelParams& p)
{
    const double h = p.spray_intensity, q = p.on_target, K = p.spider_kill;
    return -h * (1.0 - q) * l.insects - h * K * q * l.spiders - h * q * l.pests;
}

// Along the extremal flow, x' = F(x) + u h g and l' = -J(x)^T l, the switching
// function phi = h l.g has
//   phi'' = h l.(J J g - D2F[F, g]) - u h^2 l.D2F[g, g],
// with g = -(1-q, Kq, q). Scaling by (VW)^2 reproduces the closed-form B.
SingularTerms singular_terms(const PopulationState& x, const AdjointState& l, const ModelParams& p)
{
    require_finite(x, "singular_terms");
    require_finite(l, "singular_terms");
    const double q = p.on_target, K = p.spider_kill, h = p.spray_intensity;
    const double scale = std::pow(p.woods_capacity * p.vineyard_capacity, 2);
    const Vec3 g{-(1.0 - q), -K * q, -q};
    const Vec3 lam = l.as_array();
    const auto jac = drift_jacobian(x, p);
    const Vec3 drift = dynamics_rhs(x, 0.0, p).as_array();

    const Vec3 jg = apply(jac, g);
    const Vec3 jjg = apply(jac, jg);
    const Vec3 cross = drift_hessian(drift, g, p);
    const Vec3 gg = drift_hessian(g, g, p);

    SingularTerms t;
    t.numerator = -scale * (dot(lam, jjg) - dot(lam, cross));
    t.denominator = 0.5 * scale * h * dot(lam, gg);
    return t;
}

SingularTerms closed_form_singular_terms(const PopulationState& x, const AdjointState& l,
                                     const ModelParams& p)
{
    require_finite(x, "closed_form_singular_terms");
    require_finite(l, "closed_form_singular_terms");
    const double r = p.insect_birth, e = p.pest_birth, a = p.spider_mortality;
    const double b = p.hunt_pests, c = p.hunt_insects, h = p.spray_intensity;
    const double q = p.on_target, k = p.conversion, K = p.spider_kill;
    const double W = p.woods_capacity, V = p.vineyard_capacity;
    const double f = x.insects, s = x.spiders, v = x.pests;
    const double l1 = l.insects, l2 = l.spiders, l3 = l.pests;
    const double W2V2 = W * W * V * V;

    double A = q * b * b * s * s * W2V2 * (l3 - l2 * k);
    A += W2V2 * q * (e - b * s);
    A += 2 * q * l3 * e * v * W * W * b * s * V;
    A += 2 * l1 * r * r * f * f * V * V;
    A += W2V2 * (r * r * l1 + 2 * c * s * q * l1 * r + c * c * s * s * q * l2 * k);
    A += 2 * c * s * W * V * V * l1 * r * f;
    A += W2V2 * (-2 * q * e * l3 * b * s + r * l2 * s * k * c + K * q * a * a * l2 - l1 * c * s * a
                 - c * c * s * s * q * l1);
    A += 2 * q * V * W * (l1 * r * r * f * V - l3 * e * e * v * W);
    A += W2V2 * (-2 * c * s * l1 * r - c * c * s * s * l2 * k - K * q * b * v);
    A -= 2 * (l1 * r * r * f * f * q * V * V + q * l3 * e * e * v * v * W * W);
    A += W2V2 * (-r * r * q * l1 + c * c * s * s * l1 + q * e * e * l3);
    A += -2 * q * e * v * W * W * V - 2 * l1 * r * r * f * V * V * W;
    A -= W2V2 * s * k * c * l3 * b * v;
    A += W2V2 * K * q * a * (l1 * c * f - 2 * l2 * k * b * v - 2 * l2 * k * c * f + l3 * b * v);
    A += l1 * W2V2 * c * s * k * b * v - 2 * c * s * q * W * V * V * l1 * r * f;
    A += W2V2 * l2 * s * k * (q * e * b - r * q * c);
    A += 2 * l2 * s * k * (r * f * q * V * V * c * W - e * v * q * W * W * b * V - r * f * V * V * c * W);
    A += W2V2 * K * q
         * (-k * b * v * l1 * c * f + k * k * b * b * v * v * l2 + 2 * k * k * b * v * l2 * c * f
            - k * b * b * v * v * l3 - k * c * c * f * f * l1 + k * k * c * c * f * f * l2
            - k * c * f * l3 * b * v + s * c * l3 * b * v);
    A += W2V2 * l1 * (-q * s * k * b * c * f + c * s * q * a - c * s * q * k * b * v);
    A += q * l3 * b * s * W2V2 * (-a + k * c * f);
    A += K * q
         * (c * f * f * W * V * V * l1 * r + b * v * v * W * W * V * l3 * e
            + l2 * k
                  * (-b * v * W2V2 * e + b * v * v * W * W * V * e - c * f * W2V2 * r
                     + c * f * f * W * V * V * r));

    const double B = h * W * V
                     * (l2 * K * W * V * k * c * q * (1 - q)
                        + l1 * V * (2 * r * q - r * q * q - c * K * q * W + c * K * q * q * W - r)
                        + K * W * V * q * q * b * (l2 * k - l3) - q * q * l3 * e * W);
    return {A, B};
}

double singular_control(const PopulationState& x, const AdjointState& l, const ModelParams& p,
                        double tolerance)
{
    const SingularTerms t = singular_terms(x, l, p);
    if (std::abs(t.denominator) < tolerance * (1.0 + std::abs(t.numerator)))
        throw SingularDenominator("singular_control: denominator B vanishes", t.numerator, t.denominator);
    return -t.numerator / (2.0 * t.denominator);
}

PopulationState coexistence_equilibrium(const ModelParams& p)
{
    const double r = p.insect_birth, e = p.pest_birth, a = p.spider_mortality;
    const double b = p.hunt_pests, c = p.hunt_insects, k = p.conversion;
    const double W = p.woods_capacity, V = p.vineyard_capacity;
    if (!(r > 0.0) || !(e > 0.0))
        throw NoInteriorEquilibrium("coexistence_equilibrium: birth rates must be positive");
    const double denom = k * b * b * V / e + k * c * c * W / r;
    if (!(denom > 0.0)) throw NoInteriorEquilibrium("coexistence_equilibrium: vanishing denominator");

    const double s = (k * b * V + k * c * W - a) / denom;
    const PopulationState eq{W * (1.0 - c * s / r), s, V * (1.0 - b * s / e)};
    if (!(eq.insects > 0.0) || !(eq.spiders > 0.0) || !(eq.pests > 0.0))
        throw NoInteriorEquilibrium("coexistence_equilibrium: no interior equilibrium for these parameters");
    return eq;
}

PestFreeFeasibility pest_free_feasibility(const ModelParams& p)
{
    const double r = p.insect_birth, e = p.pest_birth, a = p.spider_mortality;
    const double b = p.hunt_pests, c = p.hunt_insects, k = p.conversion;
    const double W = p.woods_capacity;
    PestFreeFeasibility out;
    out.spiders_persist = a < c * k * W;
    if (out.spiders_persist) out.stable = c * c * k * W * e < b * r * (c * k * W - a);
    return out;
}

} // namespace agrospray
