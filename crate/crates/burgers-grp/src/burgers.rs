//! The scalar conservation law solved by this crate: the Burgers flux
//! `f(u) = u²/2` replicated in every coordinate direction, together with the
//! quadratic entropy pair and the entropy potential.

/// Physical flux `f(u) = u²/2`.
#[inline]
pub fn flux(u: f64) -> f64 {
    0.5 * u * u
}

/// Wave speed `f'(u) = u`.
#[inline]
pub fn wave_speed(u: f64) -> f64 {
    u
}

/// Entropy `η(u) = u²/2`.
#[inline]
pub fn entropy(u: f64) -> f64 {
    0.5 * u * u
}

/// Entropy flux `q(u) = u³/3`.
#[inline]
pub fn entropy_flux(u: f64) -> f64 {
    u * u * u / 3.0
}

/// Entropy potential `ψ(u) = u³/6`; it satisfies `⟦ψ⟧ = f^EC ⟦u⟧` for the
/// entropy-conservative flux of [`crate::flux::ec_flux`].
#[inline]
pub fn entropy_potential(u: f64) -> f64 {
    u * u * u / 6.0
}
