#pragma once

#include <array>
#include <optional>
#include <string>

namespace agrospray {

/// Ecological and spraying constants of the vineyard / woods / spider system.
///
/// Default construction gives the reference parameter set (control weight 0).
/// Config files and the CLI address the fields by their conventional symbols,
/// listed next to each member.
struct ModelParams {
    double insect_birth = 1.0;      ///< r, birth rate of woods insects [1/day]
    double pest_birth = 2.5;        ///< e, birth rate of vineyard pests [1/day]
    double spider_mortality = 3.1;  ///< a [1/day]
    double hunt_pests = 1.2;        ///< b, hunting rate on vineyard pests [1/(ind day)]
    double hunt_insects = 0.2;      ///< c, hunting rate on woods insects [1/(ind day)]
    double spray_intensity = 0.7;   ///< h, poison released at full spraying
    double on_target = 0.9;         ///< q, fraction of spray landing in the vineyard
    double conversion = 1.0;        ///< k, prey-to-spider conversion efficiency
    double woods_capacity = 5.0;    ///< W
    double vineyard_capacity = 1000.0; ///< V
    double spider_kill = 0.01;      ///< K, unwanted effect of spraying on spiders
    double control_weight = 0.0;    ///< xi, weight of the quadratic spraying cost

    struct Violation {
        std::string field; ///< conventional symbol, e.g. "q"
        std::string message;
    };

    /// First violated invariant, if any.
    std::optional<Violation> check() const;
    /// Throws InvalidArgument naming the offending field.
    void validate() const;
};

/// Parameter set used for the minimal-time eradication runs: reference values
/// with c = 2 and e = 0.3.
ModelParams mintime_params();

/// Woods insects, spiders and vineyard pests (individuals). Components may
/// become negative under spraying; nothing clamps them.
struct PopulationState {
    double insects = 0.0;
    double spiders = 0.0;
    double pests = 0.0;

    std::array<double, 3> as_array() const { return {insects, spiders, pests}; }
    static PopulationState from_array(const std::array<double, 3>& a) { return {a[0], a[1], a[2]}; }
    bool finite() const;
};

/// Costates paired with (insects, spiders, pests), plus the multiplier of the
/// running cost. The multiplier is 1 for the fixed-horizon problem and the
/// abnormal multiplier for the minimal-time problem.
struct AdjointState {
    double insects = 0.0;
    double spiders = 0.0;
    double pests = 0.0;
    double multiplier = 1.0;

    std::array<double, 3> as_array() const { return {insects, spiders, pests}; }
    static AdjointState from_array(const std::array<double, 3>& a, double multiplier = 1.0)
    {
        return {a[0], a[1], a[2], multiplier};
    }
    bool finite() const;
};

enum class ProblemKind { FixedHorizon, MinTime };

struct ProblemSpec {
    ModelParams params;
    PopulationState init{3.1, 3.7, 2.2};
    double horizon = 50.0;
    ProblemKind kind = ProblemKind::FixedHorizon;

    void validate() const;
};

/// Right-hand side of the controlled population model for spraying level u.
PopulationState dynamics_rhs(const PopulationState& x, double u, const ModelParams& p);

/// Costate dynamics of the fixed-horizon problem (running cost v + xi/2 u^2).
AdjointState adjoint_rhs_fixed(const AdjointState& l, const PopulationState& x, const ModelParams& p);

/// Costate dynamics of the minimal-time problem; differs from the fixed-horizon
/// system only by the missing -1 in the pest costate.
AdjointState adjoint_rhs_mintime(const AdjointState& l, const PopulationState& x, const ModelParams& p);

AdjointState adjoint_rhs(ProblemKind kind, const AdjointState& l, const PopulationState& x,
                         const ModelParams& p);

/// Running cost plus costate-weighted dynamics. For MinTime the running cost is
/// `l.multiplier`.
double hamiltonian(const PopulationState& x, double u, const AdjointState& l, const ModelParams& p,
                   ProblemKind kind);

/// Pointwise minimizer of the fixed-horizon Hamiltonian over u in [0, 1].
/// Throws DivisionByZero when the control weight is 0.
double control_from_adjoint(const AdjointState& l, const ModelParams& p);

/// Coefficient of u in the Hamiltonian:
/// phi = -h(1-q) l1 - hKq l2 - hq l3.
/// phi < 0 favours full spraying, phi > 0 no spraying.
double switching_function(const AdjointState& l, const ModelParams& p);

/// Numerator A and denominator B of the singular control u = -A / (2B).
struct SingularTerms {
    double numerator = 0.0;
    double denominator = 0.0;
};

/// A and B obtained by differentiating the switching function twice along the
/// minimal-time extremal flow. B coincides with the closed-form expression of
/// closed_form_singular_terms; A does not.
SingularTerms singular_terms(const PopulationState& x, const AdjointState& l, const ModelParams& p);

/// A and B transcribed term by term from the long closed form in circulation.
/// That A contains costate-free terms and does not annihilate the second
/// derivative of the switching function; it is kept for comparison only.
SingularTerms closed_form_singular_terms(const PopulationState& x, const AdjointState& l,
                                     const ModelParams& p);

/// Default relative guard on |B| used by singular_control.
inline constexpr double kSingularDenominatorTolerance = 1e-10;

/// Raw singular control -A/(2B), not clamped. Throws SingularDenominator when
/// |B| < tol (1 + |A|).
double singular_control(const PopulationState& x, const AdjointState& l, const ModelParams& p,
                        double tolerance = kSingularDenominatorTolerance);

/// Interior steady state of the unsprayed model. Throws NoInteriorEquilibrium
/// when any component would be non-positive.
PopulationState coexistence_equilibrium(const ModelParams& p);

/// Feasibility/stability conditions of the pest-free equilibrium (f4, s4, 0).
struct PestFreeFeasibility {
    bool spiders_persist = false;          ///< a < c k W
    std::optional<bool> stable = std::nullopt; ///< c^2 k W e < b r (c k W - a); only set when spiders persist
};

PestFreeFeasibility pest_free_feasibility(const ModelParams& p);

} // namespace agrospray
