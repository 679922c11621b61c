//! Simulation designs for data fusion and multiple-instrument settings, with
//! their closed-form nuisance functions.

mod panel_a;
mod panel_b;

pub use panel_a::{gen_panel_a, oracle_nuisances_panel_a, panel_a_perturbation, panel_a_score, PanelAConfig};
pub use panel_b::{
    gen_panel_b, gen_panel_b_with_strata, oracle_nuisances_panel_b, panel_b_perturbation, panel_b_score,
    stratum_probabilities, PanelBConfig, Stratum, UParam,
};

/// Misalignment `(alpha1, alpha2)` for scenarios I–IV of the data fusion design.
pub const PANEL_A_SCENARIOS: [(f64, f64); 4] = [(0.0, 0.0), (0.2, 0.0), (0.2, 0.2), (0.2, 0.4)];

/// Violation `(beta1, beta2)` for scenarios I–IV of the two-instrument design.
pub const PANEL_B_SCENARIOS: [(f64, f64); 4] = [(0.0, 0.0), (0.5, 0.0), (0.5, 0.3), (0.5, 0.5)];

fn uniform_pm1(rng: &mut crate::numerics::RngStream) -> f64 {
    2.0 * rng.uniform() - 1.0
}
