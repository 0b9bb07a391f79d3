//! Exact state-vector engine for small tensor-product Hilbert spaces.
//!
//! Sites may have any dimension (qubits, collective three-level systems,
//! photon polarization). The site order is little-endian over the `dims`
//! list: site 0 is the fastest-varying index, so a basis state with per-site
//! levels `(l0, l1, ..)` lives at flat index `l0 + d0*l1 + d0*d1*l2 + ..`.
//!
//! States are immutable values; every operation returns a new state, so they
//! can be shared freely across threads.

pub mod gate;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
pub use gate::Gate;

/// Tolerance on norms, unitarity and orthonormality checks.
pub const NORM_TOL: f64 = 1e-12;

/// Default cap on the total Hilbert-space dimension for tensor products.
pub const DEFAULT_DIM_CAP: usize = 1 << 22;

/// Dense state vector over a tensor product of finite-dimensional sites.
#[derive(Clone, Debug)]
pub struct StateVector {
    dims: Vec<usize>,
    amps: Vec<Complex64>,
}

/// Measurement basis for a single site.
#[derive(Clone, Debug)]
pub enum Basis {
    /// The site's computational basis `|0>, |1>, ..`.
    Computational,
    /// `(|0> ± |1>)/sqrt(2)`; outcome 0 is `+`. Two-level sites only.
    Diagonal,
    /// Arbitrary orthonormal basis given as a list of `dim` vectors.
    Custom(Vec<Vec<Complex64>>),
}

impl Basis {
    /// Basis vectors for a site of dimension `dim`, checked orthonormal.
    pub fn vectors(&self, dim: usize) -> Result<Vec<Vec<Complex64>>> {
        let vecs = match self {
            Basis::Computational => (0..dim)
                .map(|k| {
                    let mut v = vec![Complex64::new(0.0, 0.0); dim];
                    v[k] = Complex64::new(1.0, 0.0);
                    v
                })
                .collect(),
            Basis::Diagonal => {
                if dim != 2 {
                    return Err(Error::DimensionMismatch(format!(
                        "diagonal basis requires a two-level site, got dim {dim}"
                    )));
                }
                let s = std::f64::consts::FRAC_1_SQRT_2;
                vec![
                    vec![Complex64::new(s, 0.0), Complex64::new(s, 0.0)],
                    vec![Complex64::new(s, 0.0), Complex64::new(-s, 0.0)],
                ]
            }
            Basis::Custom(vecs) => vecs.clone(),
        };
        if vecs.len() != dim || vecs.iter().any(|v| v.len() != dim) {
            return Err(Error::NonOrthonormalBasis(format!(
                "expected {dim} vectors of length {dim}"
            )));
        }
        for (i, a) in vecs.iter().enumerate() {
            for (j, b) in vecs.iter().enumerate() {
                let dot: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot - want).norm() > 1e-10 {
                    return Err(Error::NonOrthonormalBasis(format!(
                        "<v{i}|v{j}> = {dot} deviates from {want}"
                    )));
                }
            }
        }
        Ok(vecs)
    }

    /// Short label for protocol records.
    pub fn label(&self) -> &'static str {
        match self {
            Basis::Computational => "computational",
            Basis::Diagonal => "diagonal",
            Basis::Custom(_) => "custom",
        }
    }
}

/// Outcome of a projective single-site measurement.
#[derive(Clone, Debug)]
pub struct MeasurementRecord {
    pub site: usize,
    pub basis: Basis,
    pub outcome: usize,
    pub probability: f64,
    /// Normalized post-measurement state (the measured site is retained,
    /// collapsed onto the outcome's basis vector).
    pub state: StateVector,
}

impl StateVector {
    /// Basis state with the given per-site levels.
    pub fn computational(dims: &[usize], levels: &[usize]) -> Result<Self> {
        if dims.len() != levels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} dims but {} levels",
                dims.len(),
                levels.len()
            )));
        }
        if dims.iter().any(|&d| d < 2) {
            return Err(Error::InvalidParameter("site dims must be >= 2".into()));
        }
        for (s, (&l, &d)) in levels.iter().zip(dims).enumerate() {
            if l >= d {
                return Err(Error::InvalidParameter(format!(
                    "level {l} out of range for site {s} of dim {d}"
                )));
            }
        }
        let n: usize = dims.iter().product();
        let mut amps = vec![Complex64::new(0.0, 0.0); n];
        let mut idx = 0;
        let mut stride = 1;
        for (&l, &d) in levels.iter().zip(dims) {
            idx += l * stride;
            stride *= d;
        }
        amps[idx] = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            dims: dims.to_vec(),
            amps,
        })
    }

    /// Single qubit in level `l` (0 or 1).
    pub fn qubit(l: usize) -> Self {
        Self::computational(&[2], &[l]).expect("valid qubit level")
    }

    /// Single qubit `(|0> + |1>)/sqrt(2)`.
    pub fn plus() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_amplitudes(&[2], vec![Complex64::new(s, 0.0), Complex64::new(s, 0.0)])
            .expect("normalized")
    }

    /// `n` qubits, each in `|+>`.
    pub fn plus_qubits(n: usize) -> Result<Self> {
        let mut s = Self::plus();
        for _ in 1..n {
            s = s.tensor(&Self::plus())?;
        }
        Ok(s)
    }

    /// Build from raw amplitudes; must be normalized to within 1e-9.
    /// The stored amplitudes are renormalized exactly.
    pub fn from_amplitudes(dims: &[usize], amps: Vec<Complex64>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if n != amps.len() {
            return Err(Error::DimensionMismatch(format!(
                "dims give total {n} but {} amplitudes supplied",
                amps.len()
            )));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized((norm - 1.0).abs()));
        }
        let amps = amps.into_iter().map(|a| a / norm).collect();
        Ok(StateVector {
            dims: dims.to_vec(),
            amps,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn n_sites(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn stride(&self, site: usize) -> usize {
        self.dims[..site].iter().product()
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.dims.len() {
            return Err(Error::SiteOutOfRange {
                site,
                n_sites: self.dims.len(),
            });
        }
        Ok(())
    }

    /// Flat index of the basis state with the given per-site levels.
    pub fn index_of(&self, levels: &[usize]) -> usize {
        let mut idx = 0;
        let mut stride = 1;
        for (&l, &d) in levels.iter().zip(&self.dims) {
            idx += l * stride;
            stride *= d;
        }
        idx
    }

    /// Kronecker product `self ⊗ other`, with `other`'s sites appended.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        self.tensor_capped(other, DEFAULT_DIM_CAP)
    }

    /// Kronecker product with an explicit cap on the total dimension.
    pub fn tensor_capped(&self, other: &StateVector, cap: usize) -> Result<StateVector> {
        let dim = self.total_dim() * other.total_dim();
        if dim > cap {
            return Err(Error::DimensionCap { dim, cap });
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let mut amps = Vec::with_capacity(dim);
        for b in &other.amps {
            for a in &self.amps {
                amps.push(a * b);
            }
        }
        Ok(StateVector { dims, amps })
    }

    /// Apply a gate to the listed target sites (targets[k] is the gate's
    /// k-th site). Identity on all other sites.
    pub fn apply(&self, gate: &Gate, targets: &[usize]) -> Result<StateVector> {
        if targets.len() != gate.arity() {
            return Err(Error::DimensionMismatch(format!(
                "gate arity {} but {} targets",
                gate.arity(),
                targets.len()
            )));
        }
        for &t in targets {
            self.check_site(t)?;
        }
        let mut sorted = targets.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != targets.len() {
            return Err(Error::DuplicateTargets(targets.to_vec()));
        }
        for (k, &t) in targets.iter().enumerate() {
            if self.dims[t] != gate.dims()[k] {
                return Err(Error::DimensionMismatch(format!(
                    "site {t} has dim {} but gate site {k} expects {}",
                    self.dims[t],
                    gate.dims()[k]
                )));
            }
        }

        let gdim = gate.dim();
        let strides: Vec<usize> = targets.iter().map(|&t| self.stride(t)).collect();
        // offset of each gate-local combo in the flat index
        let mut offsets = vec![0usize; gdim];
        for (combo, off) in offsets.iter_mut().enumerate() {
            let mut rem = combo;
            for (k, &gd) in gate.dims().iter().enumerate() {
                *off += (rem % gd) * strides[k];
                rem /= gd;
            }
        }

        let m = gate.matrix();
        let n = self.amps.len();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        'outer: for base in 0..n {
            // visit only indices whose target digits are all zero
            for (k, &t) in targets.iter().enumerate() {
                if (base / strides[k]) % self.dims[t] != 0 {
                    continue 'outer;
                }
            }
            for col in 0..gdim {
                let a = self.amps[base + offsets[col]];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for row in 0..gdim {
                    out[base + offsets[row]] += m[row * gdim + col] * a;
                }
            }
        }
        Ok(StateVector {
            dims: self.dims.clone(),
            amps: out,
        })
    }

    /// Multiply every amplitude by a unit-modulus phase factor.
    pub fn phased(&self, phase: Complex64) -> Result<StateVector> {
        if (phase.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "phase factor must have unit modulus, got |{phase}| = {}",
                phase.norm()
            )));
        }
        Ok(StateVector {
            dims: self.dims.clone(),
            amps: self.amps.iter().map(|a| a * phase).collect(),
        })
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Global-phase-insensitive overlap `|<self|other>|`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    /// Probabilities of all outcomes of measuring `site` in `basis`.
    pub fn outcome_probabilities(&self, site: usize, basis: &Basis) -> Result<Vec<f64>> {
        Ok(self
            .measure_branches(site, basis)?
            .into_iter()
            .map(|r| r.probability)
            .collect())
    }

    /// Exhaustive measurement: every outcome branch with its probability and
    /// normalized post-measurement state. Zero-probability branches are kept
    /// (their post state is the raw projection, zero).
    pub fn measure_branches(&self, site: usize, basis: &Basis) -> Result<Vec<MeasurementRecord>> {
        self.check_site(site)?;
        let d = self.dims[site];
        let vecs = basis.vectors(d)?;
        let stride = self.stride(site);
        let block = stride * d;
        let mut records = Vec::with_capacity(d);
        for (outcome, v) in vecs.iter().enumerate() {
            // project onto |v><v| at `site`
            let mut amps = vec![Complex64::new(0.0, 0.0); self.amps.len()];
            let mut prob = 0.0;
            for hi in 0..self.amps.len() / block {
                for lo in 0..stride {
                    let mut coef = Complex64::new(0.0, 0.0);
                    for (l, vl) in v.iter().enumerate() {
                        coef += vl.conj() * self.amps[hi * block + l * stride + lo];
                    }
                    prob += coef.norm_sqr();
                    for (l, vl) in v.iter().enumerate() {
                        amps[hi * block + l * stride + lo] = coef * vl;
                    }
                }
            }
            if prob > NORM_TOL {
                let inv = 1.0 / prob.sqrt();
                for a in &mut amps {
                    *a *= inv;
                }
            }
            records.push(MeasurementRecord {
                site,
                basis: basis.clone(),
                outcome,
                probability: prob,
                state: StateVector {
                    dims: self.dims.clone(),
                    amps,
                },
            });
        }
        Ok(records)
    }

    /// Born-rule measurement of `site` in `basis`, sampled from `rng`.
    /// Runs with the same seed reproduce the same outcome sequence.
    pub fn measure<R: Rng + ?Sized>(
        &self,
        site: usize,
        basis: &Basis,
        rng: &mut R,
    ) -> Result<MeasurementRecord> {
        let branches = self.measure_branches(site, basis)?;
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let last = branches.len() - 1;
        for (k, rec) in branches.iter().enumerate() {
            acc += rec.probability;
            if u < acc || k == last {
                return Ok(branches.into_iter().nth(k).expect("branch exists"));
            }
        }
        unreachable!()
    }

    /// Project `site` onto the (unit) vector `onto` and drop the site from
    /// the state. Errors if the residual norm vanishes, i.e. the component
    /// is absent.
    pub fn project_out_site(&self, site: usize, onto: &[Complex64]) -> Result<StateVector> {
        self.check_site(site)?;
        let d = self.dims[site];
        if onto.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "projector length {} for site dim {d}",
                onto.len()
            )));
        }
        let stride = self.stride(site);
        let block = stride * d;
        let mut dims = self.dims.clone();
        dims.remove(site);
        let mut amps = Vec::with_capacity(self.amps.len() / d);
        for hi in 0..self.amps.len() / block {
            for lo in 0..stride {
                let mut coef = Complex64::new(0.0, 0.0);
                for (l, vl) in onto.iter().enumerate() {
                    coef += vl.conj() * self.amps[hi * block + l * stride + lo];
                }
                amps.push(coef);
            }
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-9 {
            return Err(Error::NotNormalized(1.0));
        }
        for a in &mut amps {
            *a /= norm;
        }
        Ok(StateVector { dims, amps })
    }
}

/// Kronecker product of two states (free-function form of [`StateVector::tensor`]).
pub fn tensor_product(a: &StateVector, b: &StateVector) -> Result<StateVector> {
    a.tensor(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn tensor_of_ground_states() {
        let s = StateVector::qubit(0).tensor(&StateVector::qubit(0)).unwrap();
        assert_eq!(s.dims(), &[2, 2]);
        assert_eq!(s.amps()[0], c(1.0, 0.0));
        for k in 1..4 {
            assert_eq!(s.amps()[k], c(0.0, 0.0));
        }
    }

    #[test]
    fn tensor_of_plus_states_is_uniform() {
        let s = StateVector::plus().tensor(&StateVector::plus()).unwrap();
        for a in s.amps() {
            assert!((a - c(0.5, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn four_branch_input_state() {
        // (|0>+|1>)/sqrt2 on the ensemble ⊗ (|h>+|v>)/sqrt2 on the photon:
        // all four branch amplitudes 1/2.
        let s = StateVector::plus().tensor(&StateVector::plus()).unwrap();
        for a in s.amps() {
            assert!((a.re - 0.5).abs() < 1e-14 && a.im.abs() < 1e-15);
        }
        assert!((s.norm() - 1.0).abs() < NORM_TOL);
    }

    #[test]
    fn tensor_respects_dimension_cap() {
        let a = StateVector::plus_qubits(3).unwrap();
        let err = a.tensor_capped(&StateVector::plus(), 8).unwrap_err();
        assert!(matches!(err, Error::DimensionCap { dim: 16, cap: 8 }));
    }

    #[test]
    fn apply_x_flips_qubit() {
        let s = StateVector::qubit(0).apply(&Gate::x(), &[0]).unwrap();
        assert!((s.amps()[1] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn cpf_between_qubits_flips_only_11() {
        let g = Gate::cpf_ensembles();
        for (l0, l1) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let s = StateVector::computational(&[2, 2], &[l0, l1]).unwrap();
            let out = s.apply(&g, &[0, 1]).unwrap();
            let sign = if l0 == 1 && l1 == 1 { -1.0 } else { 1.0 };
            let idx = s.index_of(&[l0, l1]);
            assert!((out.amps()[idx] - c(sign, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn hadamards_then_cpf_give_two_qubit_cluster() {
        // H ⊗ H then the conditional phase flip on |00> produces the
        // two-qubit cluster state with amplitudes (1,1,1,-1)/2.
        let s = StateVector::computational(&[2, 2], &[0, 0])
            .unwrap()
            .apply(&Gate::hadamard(), &[0])
            .unwrap()
            .apply(&Gate::hadamard(), &[1])
            .unwrap()
            .apply(&Gate::cpf_ensembles(), &[0, 1])
            .unwrap();
        let want = [0.5, 0.5, 0.5, -0.5];
        for (a, w) in s.amps().iter().zip(want) {
            assert!((a - c(w, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn apply_rejects_duplicates_and_bad_dims() {
        let s = StateVector::plus_qubits(2).unwrap();
        assert!(matches!(
            s.apply(&Gate::cpf_ensembles(), &[0, 0]),
            Err(Error::DuplicateTargets(_))
        ));
        let s3 = StateVector::computational(&[3], &[0]).unwrap();
        assert!(matches!(
            s3.apply(&Gate::x(), &[0]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn measure_plus_in_diagonal_basis_is_deterministic() {
        let s = StateVector::plus();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rec = s.measure(0, &Basis::Diagonal, &mut rng).unwrap();
        assert_eq!(rec.outcome, 0);
        assert!((rec.probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn measure_photon_superposition_is_unbiased() {
        let s = StateVector::plus();
        let probs = s.outcome_probabilities(0, &Basis::Computational).unwrap();
        assert!((probs[0] - 0.5).abs() < 1e-12);
        assert!((probs[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn branch_probabilities_sum_to_one() {
        let s = StateVector::plus_qubits(3)
            .unwrap()
            .apply(&Gate::cpf_ensembles(), &[0, 2])
            .unwrap();
        for basis in [Basis::Computational, Basis::Diagonal] {
            let total: f64 = s.outcome_probabilities(1, &basis).unwrap().iter().sum();
            assert!((total - 1.0).abs() < NORM_TOL);
        }
    }

    #[test]
    fn non_orthonormal_basis_rejected() {
        let bad = Basis::Custom(vec![
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        ]);
        let s = StateVector::plus();
        assert!(matches!(
            s.measure_branches(0, &bad),
            Err(Error::NonOrthonormalBasis(_))
        ));
    }

    #[test]
    fn fidelity_examples() {
        let psi = StateVector::plus_qubits(2)
            .unwrap()
            .apply(&Gate::cpf_ensembles(), &[0, 1])
            .unwrap();
        assert!((psi.fidelity(&psi).unwrap() - 1.0).abs() < 1e-14);
        let zero = StateVector::qubit(0);
        let one = StateVector::qubit(1);
        assert!(zero.fidelity(&one).unwrap() < 1e-14);
        // global phase invariance
        let theta = 0.7321;
        let rot = Complex64::from_polar(1.0, theta);
        let amps: Vec<Complex64> = psi.amps().iter().map(|a| a * rot).collect();
        let phased = StateVector::from_amplitudes(psi.dims(), amps).unwrap();
        assert!((psi.fidelity(&phased).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn seeded_measurements_replay_bit_identically() {
        let s = StateVector::plus_qubits(4).unwrap();
        let run = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..4)
                .map(|k| s.measure(k, &Basis::Computational, &mut rng).unwrap().outcome)
                .collect::<Vec<_>>()
        };
        assert_eq!(run(42), run(42));
    }

    #[test]
    fn project_out_collapsed_site() {
        let s = StateVector::plus_qubits(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rec = s.measure(1, &Basis::Computational, &mut rng).unwrap();
        let mut onto = vec![c(0.0, 0.0); 2];
        onto[rec.outcome] = c(1.0, 0.0);
        let reduced = rec.state.project_out_site(1, &onto).unwrap();
        assert_eq!(reduced.dims(), &[2]);
        assert!((reduced.fidelity(&StateVector::plus()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qutrit_site_round_trip() {
        let s = StateVector::computational(&[3, 2], &[2, 1]).unwrap();
        assert_eq!(s.index_of(&[2, 1]), 2 + 3);
        let probs = s.outcome_probabilities(0, &Basis::Computational).unwrap();
        assert_eq!(probs.len(), 3);
        assert!((probs[2] - 1.0).abs() < 1e-12);
    }

    proptest! {
        // Norm preservation over random gate sequences.
        #[test]
        fn norm_preserved_by_gate_sequences(seed in any::<u64>(), n_gates in 1usize..20) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = StateVector::plus_qubits(4).unwrap();
            for _ in 0..n_gates {
                let which: u8 = rng.gen_range(0..5);
                let a = rng.gen_range(0..4);
                let b = (a + 1 + rng.gen_range(0..3)) % 4;
                s = match which {
                    0 => s.apply(&Gate::x(), &[a]).unwrap(),
                    1 => s.apply(&Gate::hadamard(), &[a]).unwrap(),
                    2 => s.apply(&Gate::z(), &[a]).unwrap(),
                    3 => s.apply(&Gate::cpf_ensembles(), &[a, b]).unwrap(),
                    _ => s.apply(&Gate::cnot(), &[a, b]).unwrap(),
                };
            }
            prop_assert!((s.norm() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn measurement_probabilities_sum_to_one(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = StateVector::plus_qubits(3).unwrap();
            for _ in 0..6 {
                let a = rng.gen_range(0..3);
                let b = (a + 1 + rng.gen_range(0..2)) % 3;
                s = s.apply(&Gate::hadamard(), &[a]).unwrap();
                s = s.apply(&Gate::cpf_ensembles(), &[a, b]).unwrap();
            }
            let total: f64 = s.outcome_probabilities(1, &Basis::Diagonal).unwrap().iter().sum();
            prop_assert!((total - 1.0).abs() < NORM_TOL);
        }
    }
}
