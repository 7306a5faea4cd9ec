//! Smooth-L1 (Huber-type) loss: quadratic inside `[-beta, beta]`, linear
//! outside.

/// Width of the quadratic region.
pub const SMOOTH_L1_BETA: f64 = 1.0;

/// Element-wise smooth-L1 loss of a residual `prediction - target`.
pub fn smooth_l1(residual: f64) -> f64 {
    let abs = residual.abs();
    if abs < SMOOTH_L1_BETA {
        0.5 * residual * residual / SMOOTH_L1_BETA
    } else {
        abs - 0.5 * SMOOTH_L1_BETA
    }
}

/// Derivative of [`smooth_l1`] with respect to the residual.
pub fn smooth_l1_grad(residual: f64) -> f64 {
    if residual.abs() < SMOOTH_L1_BETA {
        residual / SMOOTH_L1_BETA
    } else {
        residual.signum()
    }
}
