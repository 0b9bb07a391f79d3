//! Single-photon reflection off a weakly coupled or bad cavity.
//!
//! In this regime the gate mechanism is a state-dependent Faraday rotation:
//! the reflection coefficient of a monochromatic photon picks up a phase that
//! depends on whether the ensemble populates the coupled level. Reflecting
//! the photon twice turns the phase pair (pi, pi/2) into an exact
//! controlled phase flip.
//!
//! The frequency-domain coefficient for a single-sided cavity containing one
//! effective emitter is
//!
//! ```text
//! r(wp) = { [i(wc-wp) - k/2][i(w0-wp) + gamma/2] + g^2 }
//!         / { [i(wc-wp) + k/2][i(w0-wp) + gamma/2] + g^2 }
//! ```
//!
//! and the uncoupled case is its `g -> 0` limit, taken analytically so the
//! empty-cavity coefficient stays defined when `gamma = 0` and `wp = w0`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qsim::{Gate, StateVector};

/// Frequencies and rates of the probe-cavity-ensemble system, all in the
/// same angular-frequency unit.
#[derive(Clone, Copy, Debug)]
pub struct ProbeParams {
    /// Cavity resonance frequency.
    pub omega_c: f64,
    /// Frequency of the coupled atomic transition.
    pub omega_0: f64,
    /// Probe photon frequency.
    pub omega_p: f64,
    /// Collective coupling rate.
    pub g: f64,
    /// Cavity decay rate.
    pub kappa: f64,
    /// Atomic decay rate.
    pub gamma: f64,
}

impl ProbeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kappa must be > 0, got {}",
                self.kappa
            )));
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gamma must be >= 0, got {}",
                self.gamma
            )));
        }
        if self.g < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "g must be >= 0, got {}",
                self.g
            )));
        }
        Ok(())
    }

    /// The operating point `w0 = wc`, `wp = wc - k/2`, `g = k/2`, `gamma = 0`
    /// at which the two reflection phases are exactly (pi, pi/2).
    pub fn operating_point(kappa: f64) -> Self {
        ProbeParams {
            omega_c: 0.0,
            omega_0: 0.0,
            omega_p: -kappa / 2.0,
            g: kappa / 2.0,
            kappa,
            gamma: 0.0,
        }
    }
}

/// Reflection phases with the ensemble coupled (`phi`) and uncoupled
/// (`phi0`), in principal value `(-pi, pi]`.
#[derive(Clone, Copy, Debug)]
pub struct FaradayPhases {
    pub phi: f64,
    pub phi0: f64,
}

/// Reflection coefficient of the probe photon. `coupled` selects whether the
/// ensemble populates the coupled level; the uncoupled case uses the exact
/// `g = 0` limit.
pub fn reflection_coefficient(p: &ProbeParams, coupled: bool) -> Result<Complex64> {
    p.validate()?;
    let dc = Complex64::new(0.0, p.omega_c - p.omega_p);
    let half_k = Complex64::new(p.kappa / 2.0, 0.0);
    if !coupled {
        // empty cavity: the atomic factor cancels exactly
        return Ok((dc - half_k) / (dc + half_k));
    }
    let da = Complex64::new(p.gamma / 2.0, p.omega_0 - p.omega_p);
    let g2 = Complex64::new(p.g * p.g, 0.0);
    let den = (dc + half_k) * da + g2;
    if den.norm() < 1e-300 {
        return Err(Error::SingularDenominator(format!(
            "(i(wc-wp)+k/2)(i(w0-wp)+gamma/2)+g^2 = 0 at wc-wp={}, w0-wp={}, g={}, gamma={}",
            p.omega_c - p.omega_p,
            p.omega_0 - p.omega_p,
            p.g,
            p.gamma
        )));
    }
    Ok(((dc - half_k) * da + g2) / den)
}

/// Principal value in `(-pi, pi]`; pins the `-0.0` imaginary-part case of
/// `atan2` at a real negative axis crossing to `+pi`.
fn principal(z: Complex64) -> f64 {
    let a = z.arg();
    if a <= -std::f64::consts::PI + 1e-12 {
        a + 2.0 * std::f64::consts::PI
    } else {
        a
    }
}

/// Reflection phases for the coupled and uncoupled ensemble states.
pub fn faraday_phases(p: &ProbeParams) -> Result<FaradayPhases> {
    Ok(FaradayPhases {
        phi: principal(reflection_coefficient(p, true)?),
        phi0: principal(reflection_coefficient(p, false)?),
    })
}

/// Phase pair swept over probe frequencies; phases in principal value.
pub fn phase_sweep(p: &ProbeParams, omega_p: &[f64]) -> Result<Vec<(f64, FaradayPhases)>> {
    omega_p
        .iter()
        .map(|&wp| {
            let pt = ProbeParams { omega_p: wp, ..*p };
            Ok((wp, faraday_phases(&pt)?))
        })
        .collect()
}

/// As [`phase_sweep`] but with each phase curve unwrapped to be continuous
/// across branch cuts.
pub fn phase_sweep_unwrapped(
    p: &ProbeParams,
    omega_p: &[f64],
) -> Result<Vec<(f64, FaradayPhases)>> {
    let mut rows = phase_sweep(p, omega_p)?;
    let unwrap = |prev: f64, cur: f64| -> f64 {
        let mut v = cur;
        while v - prev > std::f64::consts::PI {
            v -= 2.0 * std::f64::consts::PI;
        }
        while prev - v > std::f64::consts::PI {
            v += 2.0 * std::f64::consts::PI;
        }
        v
    };
    for k in 1..rows.len() {
        let (prev_phi, prev_phi0) = (rows[k - 1].1.phi, rows[k - 1].1.phi0);
        rows[k].1.phi = unwrap(prev_phi, rows[k].1.phi);
        rows[k].1.phi0 = unwrap(prev_phi0, rows[k].1.phi0);
    }
    Ok(rows)
}

/// Gate produced by reflecting the photon's `h` component twice, plus its
/// fidelity against the ideal controlled phase flip `-1` on the
/// ensemble-ground `h` branch. The fidelity is the state overlap on the
/// uniform four-branch probe, insensitive to a global phase.
pub fn twice_reflection_cpf(p: &ProbeParams) -> Result<(Gate, f64)> {
    let phases = faraday_phases(p)?;
    let e0 = Complex64::from_polar(1.0, 2.0 * phases.phi0);
    let e1 = Complex64::from_polar(1.0, 2.0 * phases.phi);
    let one = Complex64::new(1.0, 0.0);
    // sites (ensemble, photon); photon level 0 is h
    let gate = Gate::diagonal(&[2, 2], &[e0, one, e1, one])?;

    let probe = StateVector::plus().tensor(&StateVector::plus())?;
    let out = probe.apply(&gate, &[0, 1])?;
    let ideal = probe.apply(&Gate::cpf_atom_photon(), &[0, 1])?;
    let fidelity = ideal.fidelity(&out)?;
    Ok((gate, fidelity))
}
