//! Rydberg-blockade physics: pair potentials and blockade radii, collective
//! three-pulse qubit rotations, a calibrated double-excitation error model,
//! position-averaged cavity couplings, and geometric validity checks.
//!
//! Pair potentials use the Foerster-channel form
//! `V±(R) = delta/2 ± sqrt(delta^2/4 + D_phi C3^2 / R^6)`; the dipole-dipole
//! coefficient `C3` for a specific Rydberg level is a configuration input,
//! not computed from atomic structure.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qsim::Gate;

/// Bohr radius in meters.
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;

/// Foerster-channel interaction constants. `delta` (the channel defect) and
/// `c3 / R^3` must carry the same frequency unit; lengths are whatever unit
/// `c3`'s length factor uses.
#[derive(Clone, Debug)]
pub struct FoersterParams {
    /// Foerster defect (>= 0; magnitude of the channel defect).
    pub delta: f64,
    /// Dipole-dipole coefficient, frequency x length^3.
    pub c3: f64,
    /// Fine-structure eigenvalue of the pair interaction (1.333 for the
    /// s+s -> p3/2 + p3/2 channel).
    pub d_phi: f64,
    /// Level label, e.g. "75s".
    pub level: String,
}

impl FoersterParams {
    pub fn new(delta: f64, c3: f64, d_phi: f64, level: &str) -> Result<Self> {
        if !(c3 > 0.0) {
            return Err(Error::InvalidParameter(format!("c3 must be > 0, got {c3}")));
        }
        if !(d_phi > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "d_phi must be > 0, got {d_phi}"
            )));
        }
        if delta < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "delta must be >= 0 (use the defect magnitude), got {delta}"
            )));
        }
        Ok(FoersterParams {
            delta,
            c3,
            d_phi,
            level: level.to_string(),
        })
    }
}

/// Which eigenvalue branch of the pair Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PotentialBranch {
    Upper,
    Lower,
}

/// Sign of the radicand term in the written form of the potential.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnerSign {
    Plus,
    Minus,
}

/// Pair potential `V±(R) = delta/2 ± sqrt(delta^2/4 + D_phi C3^2/R^6)`.
///
/// The physical eigenvalues of the two-channel pair Hamiltonian use the
/// plus sign under the square root; see [`blockade_potential_signed`] for
/// the minus-sign variant, which is only defined where its radicand is
/// non-negative.
pub fn blockade_potential(fp: &FoersterParams, r: f64, branch: PotentialBranch) -> Result<f64> {
    blockade_potential_signed(fp, r, branch, InnerSign::Plus)
}

/// Potential with an explicit radicand sign. `InnerSign::Minus` errors where
/// `delta^2/4 < D_phi C3^2/R^6` instead of returning a complex value.
pub fn blockade_potential_signed(
    fp: &FoersterParams,
    r: f64,
    branch: PotentialBranch,
    inner: InnerSign,
) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("R must be > 0, got {r}")));
    }
    let x = fp.d_phi * (fp.c3 / r.powi(3)).powi(2);
    let radicand = match inner {
        InnerSign::Plus => fp.delta * fp.delta / 4.0 + x,
        InnerSign::Minus => fp.delta * fp.delta / 4.0 - x,
    };
    if radicand < 0.0 {
        return Err(Error::InvalidBranch(format!(
            "radicand delta^2/4 - D_phi C3^2/R^6 = {radicand:.6e} < 0 at R = {r}; \
             the minus-sign form is undefined below R = {:.6e}",
            (fp.d_phi.sqrt() * fp.c3 * 2.0 / fp.delta).powf(1.0 / 3.0)
        )));
    }
    let root = radicand.sqrt();
    Ok(match branch {
        PotentialBranch::Upper => fp.delta / 2.0 + root,
        PotentialBranch::Lower => fp.delta / 2.0 - root,
    })
}

/// Crossover radius `Rc = (2 C3 / delta)^{1/3}` between the resonant R^-3
/// and van der Waals R^-6 regimes. Infinite when `delta = 0`.
pub fn critical_radius(fp: &FoersterParams) -> f64 {
    if fp.delta == 0.0 {
        f64::INFINITY
    } else {
        (2.0 * fp.c3 / fp.delta).powf(1.0 / 3.0)
    }
}

/// Sampled pair-potential curve over a radius grid.
#[derive(Clone, Debug)]
pub struct BlockadeCurve {
    pub r: Vec<f64>,
    pub v_plus: Vec<f64>,
    pub v_minus: Vec<f64>,
}

impl BlockadeCurve {
    pub fn generate(fp: &FoersterParams, r_grid: &[f64]) -> Result<Self> {
        let mut v_plus = Vec::with_capacity(r_grid.len());
        let mut v_minus = Vec::with_capacity(r_grid.len());
        for &r in r_grid {
            v_plus.push(blockade_potential(fp, r, PotentialBranch::Upper)?);
            v_minus.push(blockade_potential(fp, r, PotentialBranch::Lower)?);
        }
        Ok(BlockadeCurve {
            r: r_grid.to_vec(),
            v_plus,
            v_minus,
        })
    }
}

// ---------------------------------------------------------------------------
// Collective three-pulse rotation
// ---------------------------------------------------------------------------

/// Laser phases of the three pulses (first flip, middle drive, second flip).
#[derive(Clone, Copy, Debug)]
pub struct DrivePhases {
    pub first_flip: f64,
    pub middle: f64,
    pub second_flip: f64,
}

/// Phase choice for which the composite is the textbook x-rotation
/// `R_x(phi)`: identity at `phi = 0`, Pauli X (up to global phase) at
/// `phi = pi`.
pub const DRIVE_PHASES_ROTATION: DrivePhases = DrivePhases {
    first_flip: 0.0,
    middle: -std::f64::consts::FRAC_PI_2,
    second_flip: std::f64::consts::PI,
};

/// Phase choice for which `phi = pi/2` lands exactly on the real Hadamard
/// matrix.
pub const DRIVE_PHASES_HADAMARD: DrivePhases = DrivePhases {
    first_flip: 0.0,
    middle: std::f64::consts::PI,
    second_flip: 0.0,
};

/// Result of composing flip / drive / flip in the collective basis
/// {ground, single-excitation, single-Rydberg}.
#[derive(Clone, Debug)]
pub struct CollectiveRotation {
    /// Half-area of the middle pulse.
    pub phi: f64,
    /// Composite restricted to the qubit block, row-major 2x2.
    pub unitary: [[Complex64; 2]; 2],
    /// Population leaked outside the qubit space from qubit-space inputs
    /// (zero in the ideal blockade model).
    pub leakage: f64,
    /// Full 3x3 composite, row-major.
    pub full: [[Complex64; 3]; 3],
}

fn mat3_mul(a: &[[Complex64; 3]; 3], b: &[[Complex64; 3]; 3]) -> [[Complex64; 3]; 3] {
    let z = Complex64::new(0.0, 0.0);
    let mut out = [[z; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

/// Compose the three-pulse sequence: a flip between the qubit's excited
/// level and the Rydberg level, a coherent drive of half-area `phi` between
/// the ground level and the Rydberg level (blockade-limited to one
/// excitation), and a second flip.
pub fn collective_rotation(phi: f64, drive: DrivePhases) -> CollectiveRotation {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mi = Complex64::new(0.0, -1.0);

    let flip = |alpha: f64| -> [[Complex64; 3]; 3] {
        let up = mi * Complex64::from_polar(1.0, alpha); // |1> -> -i e^{ia} |r>
        let dn = mi * Complex64::from_polar(1.0, -alpha); // |r> -> -i e^{-ia} |1>
        [[one, z, z], [z, z, dn], [z, up, z]]
    };
    let c = Complex64::new((phi / 2.0).cos(), 0.0);
    let s = (phi / 2.0).sin();
    let rot = {
        let up = mi * Complex64::from_polar(s, drive.middle); // |0> -> -i e^{ib} s |r>
        let dn = mi * Complex64::from_polar(s, -drive.middle);
        [[c, z, dn], [z, one, z], [up, z, c]]
    };

    let full = mat3_mul(
        &flip(drive.second_flip),
        &mat3_mul(&rot, &flip(drive.first_flip)),
    );
    let unitary = [[full[0][0], full[0][1]], [full[1][0], full[1][1]]];
    let leakage = full[2][0].norm_sqr() + full[2][1].norm_sqr();
    CollectiveRotation {
        phi,
        unitary,
        leakage,
        full,
    }
}

impl CollectiveRotation {
    /// Qubit block as a [`Gate`]; errors if leakage made it non-unitary.
    pub fn qubit_gate(&self) -> Result<Gate> {
        Gate::new(
            &[2],
            vec![
                self.unitary[0][0],
                self.unitary[0][1],
                self.unitary[1][0],
                self.unitary[1][1],
            ],
        )
    }

    /// Deviation of the full 3x3 composite from unitarity.
    pub fn unitarity_defect(&self) -> f64 {
        let mut max_dev: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let mut dot = Complex64::new(0.0, 0.0);
                for k in 0..3 {
                    dot += self.full[k][i].conj() * self.full[k][j];
                }
                let want = if i == j { 1.0 } else { 0.0 };
                max_dev = max_dev.max((dot - want).norm());
            }
        }
        max_dev
    }
}

// ---------------------------------------------------------------------------
// Double-excitation error model
// ---------------------------------------------------------------------------

/// Slope of the phenomenological double-excitation fidelity model,
/// calibrated so a 0.997 baseline drops to 0.992 at P2 = 0.01.
pub const DOUBLE_EXCITATION_SLOPE: f64 = (1.0 - 0.992 / 0.997) / 0.01;

/// Gate fidelity under a double-excitation probability `p2`:
/// `F = baseline * (1 - slope * p2)`. Phenomenological one-parameter leakage
/// model anchored to the two calibration points above; exact at `p2 = 0`.
pub fn excitation_error_fidelity(p2: f64, baseline: f64) -> Result<f64> {
    if !(0.0..=0.05).contains(&p2) {
        return Err(Error::InvalidParameter(format!(
            "P2 must lie in [0, 0.05], got {p2}"
        )));
    }
    if !(0.0..=1.0).contains(&baseline) {
        return Err(Error::InvalidParameter(format!(
            "baseline fidelity must lie in [0, 1], got {baseline}"
        )));
    }
    Ok(baseline * (1.0 - DOUBLE_EXCITATION_SLOPE * p2))
}

// ---------------------------------------------------------------------------
// Position-averaged coupling
// ---------------------------------------------------------------------------

/// Standing-wave Gaussian cavity mode `g(r) = g0 cos(kc z) exp(-r_perp^2/wc^2)`.
#[derive(Clone, Copy, Debug)]
pub struct CavityMode {
    pub g0: f64,
    /// Mode waist `wc`.
    pub waist: f64,
    /// Mode wavevector `kc`.
    pub wavevector: f64,
}

impl CavityMode {
    /// Coupling at position `(x, y, z)` (z along the cavity axis).
    pub fn coupling_at(&self, pos: [f64; 3]) -> f64 {
        let r_perp_sq = pos[0] * pos[0] + pos[1] * pos[1];
        self.g0 * (self.wavevector * pos[2]).cos() * (-r_perp_sq / (self.waist * self.waist)).exp()
    }
}

/// Atomic density distribution.
#[derive(Clone, Debug)]
pub enum AtomDensity {
    /// Gaussian cloud centered on a mode antinode, axial width `sigma_z`,
    /// radial width `sigma_perp` per axis.
    Gaussian {
        n_atoms: f64,
        sigma_z: f64,
        sigma_perp: f64,
    },
    /// Explicit atom positions.
    Points(Vec<[f64; 3]>),
}

#[derive(Clone, Debug)]
pub struct CloudGeometry {
    pub density: AtomDensity,
    pub mode: CavityMode,
}

/// Density-averaged coupling `gbar = sqrt( int rho(r) |g(r)|^2 dr / N )`.
/// Gaussian clouds use the closed form; point sets sum directly.
pub fn average_coupling(cg: &CloudGeometry) -> Result<f64> {
    let m = &cg.mode;
    if !(m.waist > 0.0) {
        return Err(Error::InvalidParameter("mode waist must be > 0".into()));
    }
    match &cg.density {
        AtomDensity::Points(points) => {
            if points.is_empty() {
                return Err(Error::InvalidParameter("empty point cloud".into()));
            }
            let g2: f64 = points
                .iter()
                .map(|&p| {
                    let g = m.coupling_at(p);
                    g * g
                })
                .sum::<f64>()
                / points.len() as f64;
            Ok(g2.sqrt())
        }
        AtomDensity::Gaussian {
            n_atoms,
            sigma_z,
            sigma_perp,
        } => {
            if !(*n_atoms > 0.0) || *sigma_z < 0.0 || *sigma_perp < 0.0 {
                return Err(Error::InvalidParameter(
                    "Gaussian cloud needs n_atoms > 0 and non-negative widths".into(),
                ));
            }
            // E[cos^2(k z)] = (1 + exp(-2 k^2 sz^2)) / 2
            // E[exp(-2 x^2 / w^2)] = 1 / sqrt(1 + 4 sp^2 / w^2) per radial axis
            let axial = (1.0 + (-2.0 * m.wavevector * m.wavevector * sigma_z * sigma_z).exp()) / 2.0;
            let radial = 1.0 / (1.0 + 4.0 * sigma_perp * sigma_perp / (m.waist * m.waist));
            Ok(m.g0 * (axial * radial).sqrt())
        }
    }
}

/// Numerical quadrature of the same average, as an independent check of the
/// closed form. Refines Simpson grids until two successive levels agree to
/// `1e-10` relative.
pub fn average_coupling_quadrature(cg: &CloudGeometry) -> Result<f64> {
    let (n_atoms, sigma_z, sigma_perp) = match &cg.density {
        AtomDensity::Gaussian {
            n_atoms,
            sigma_z,
            sigma_perp,
        } => (*n_atoms, *sigma_z, *sigma_perp),
        AtomDensity::Points(_) => return average_coupling(cg),
    };
    let _ = n_atoms;
    let m = &cg.mode;

    // 1D Simpson over [-L, L] of a (weight * integrand) pair
    let simpson = |f: &dyn Fn(f64) -> f64, l: f64, n: usize| -> f64 {
        let h = 2.0 * l / n as f64;
        let mut acc = f(-l) + f(l);
        for k in 1..n {
            let x = -l + k as f64 * h;
            acc += f(x) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    };
    let converge = |f: &dyn Fn(f64) -> f64, l: f64| -> Result<f64> {
        let mut n = 256;
        let mut prev = simpson(f, l, n);
        for _ in 0..8 {
            n *= 2;
            let cur = simpson(f, l, n);
            if (cur - prev).abs() <= 1e-10 * prev.abs().max(1e-30) {
                return Ok(cur);
            }
            prev = cur;
        }
        Err(Error::QuadratureNonConvergence(format!(
            "Simpson rule still moving after n = {n} points; increase widths resolution"
        )))
    };

    let axial = if sigma_z == 0.0 {
        1.0
    } else {
        let norm = 1.0 / (sigma_z * (2.0 * std::f64::consts::PI).sqrt());
        let f = |z: f64| {
            norm * (-z * z / (2.0 * sigma_z * sigma_z)).exp()
                * (m.wavevector * z).cos().powi(2)
        };
        converge(&f, 10.0 * sigma_z)?
    };
    let radial_axis = |sigma: f64| -> Result<f64> {
        if sigma == 0.0 {
            return Ok(1.0);
        }
        let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
        let f = move |x: f64| {
            norm * (-x * x / (2.0 * sigma * sigma)).exp()
                * (-2.0 * x * x / (m.waist * m.waist)).exp()
        };
        converge(&f, 10.0 * sigma)
    };
    let radial = radial_axis(sigma_perp)?.powi(2);
    Ok(m.g0 * (axial * radial).sqrt())
}

// ---------------------------------------------------------------------------
// Geometric validity checks
// ---------------------------------------------------------------------------

/// Report of the ensemble's geometric validity conditions. Lengths in meters.
#[derive(Clone, Debug)]
pub struct GeometryReport {
    /// Mean in-plane atom spacing `d = sqrt(pi (dr_perp)^2 / N)`.
    pub spacing: f64,
    /// `lambda / 2 pi`.
    pub reduced_wavelength: f64,
    /// Ground-state orbital radius `n_g^2 a0`.
    pub ground_state_radius: f64,
    pub spacing_over_reduced_wavelength: f64,
    pub spacing_over_ground_radius: f64,
    /// Spacing exceeds the reduced optical wavelength, so collective
    /// dephasing reduces to the single-particle rate.
    pub dephasing_single_particle: bool,
    /// Spacing exceeds the ground-state radius, so ground-ground
    /// interactions are negligible.
    pub ground_interaction_negligible: bool,
    /// Atom-number fluctuation advisory, when `delta_n` was supplied.
    pub number_fluctuation: Option<NumberFluctuation>,
}

#[derive(Clone, Copy, Debug)]
pub struct NumberFluctuation {
    pub ratio: f64,
    /// `delta_n / N` at most 1/20 counts as negligible.
    pub negligible: bool,
}

pub fn geometry_checks(
    n_atoms: f64,
    delta_r_perp: f64,
    lambda: f64,
    n_g: f64,
    delta_n: Option<f64>,
) -> Result<GeometryReport> {
    for (name, v) in [
        ("n_atoms", n_atoms),
        ("delta_r_perp", delta_r_perp),
        ("lambda", lambda),
        ("n_g", n_g),
    ] {
        if !(v > 0.0) {
            return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
        }
    }
    let spacing = (std::f64::consts::PI * delta_r_perp * delta_r_perp / n_atoms).sqrt();
    let reduced_wavelength = lambda / (2.0 * std::f64::consts::PI);
    let ground_state_radius = n_g * n_g * BOHR_RADIUS;
    let number_fluctuation = delta_n.map(|dn| NumberFluctuation {
        ratio: dn / n_atoms,
        negligible: dn / n_atoms <= 0.05,
    });
    Ok(GeometryReport {
        spacing,
        reduced_wavelength,
        ground_state_radius,
        spacing_over_reduced_wavelength: spacing / reduced_wavelength,
        spacing_over_ground_radius: spacing / ground_state_radius,
        dephasing_single_particle: spacing > reduced_wavelength,
        ground_interaction_negligible: spacing > ground_state_radius,
        number_fluctuation,
    })
}
