//! The sum `sum_m e(r sqrt(t - m^2)) / r` and its chain of representations:
//! Poisson/oscillatory integrals, stationary-phase terms, the `n_nu` form,
//! and the `G`/`F` reformulation with the weights `e(omega_nu)`.

pub mod node;
pub mod quadrature;
pub mod reform;
pub mod sums;

pub use node::{node, x_derivatives, y_derivative, Node};
pub use quadrature::{oscillatory_integral, Quadrature, QUAD_TOLERANCE};
pub use reform::{
    chain_residuals, f2_phases, f2_profile, g2_value, g_funcs, omega_coeffs,
    parity_total_variation, reformulated_sum, taylor_rational_part, taylor_step_check,
    total_variation, ChainResiduals, GValues, DEFAULT_ORDER, DEFAULT_STEP_ORDER, OMEGA_TV_CONSTANT,
};
pub use sums::{
    direct_sum, n_form_sum, n_phase_gap, node_weight, poisson_rhs, stationary_phase_sum,
    stationary_phase_sum_signed, EighthSign,
};
