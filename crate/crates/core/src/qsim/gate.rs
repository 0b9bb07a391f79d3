//! Unitary gates over one or more sites.
//!
//! A gate stores its per-site dimensions and a dense row-major matrix whose
//! row/column indices use the same little-endian packing as [`super::StateVector`]
//! (gate site 0 is the fastest-varying index). Unitarity is checked at
//! construction; non-unitary matrices are rejected.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Gate {
    dims: Vec<usize>,
    matrix: Vec<Complex64>,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl Gate {
    /// Build a gate from per-site dims and a row-major matrix; checks
    /// `G†G = I` to 1e-12.
    pub fn new(dims: &[usize], matrix: Vec<Complex64>) -> Result<Self> {
        let d: usize = dims.iter().product();
        if matrix.len() != d * d {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} entries, expected {}",
                matrix.len(),
                d * d
            )));
        }
        let mut max_dev: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let mut dot = c(0.0, 0.0);
                for k in 0..d {
                    dot += matrix[k * d + i].conj() * matrix[k * d + j];
                }
                let want = if i == j { 1.0 } else { 0.0 };
                max_dev = max_dev.max((dot - want).norm());
            }
        }
        if max_dev > 1e-12 {
            return Err(Error::NonUnitary(max_dev));
        }
        Ok(Gate {
            dims: dims.to_vec(),
            matrix,
        })
    }

    /// Diagonal gate; every entry must have unit modulus.
    pub fn diagonal(dims: &[usize], phases: &[Complex64]) -> Result<Self> {
        let d: usize = dims.iter().product();
        if phases.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "{} diagonal entries, expected {d}",
                phases.len()
            )));
        }
        let mut m = vec![c(0.0, 0.0); d * d];
        for (k, p) in phases.iter().enumerate() {
            m[k * d + k] = *p;
        }
        Self::new(dims, m)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn arity(&self) -> usize {
        self.dims.len()
    }

    /// Total matrix dimension.
    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn matrix(&self) -> &[Complex64] {
        &self.matrix
    }

    /// Operator fidelity `|tr(A†B)|/d` against another gate of equal shape;
    /// 1 iff equal up to a global phase.
    pub fn fidelity(&self, other: &Gate) -> Result<f64> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        let d = self.dim();
        let mut tr = c(0.0, 0.0);
        for i in 0..d {
            for k in 0..d {
                tr += self.matrix[k * d + i].conj() * other.matrix[k * d + i];
            }
        }
        Ok(tr.norm() / d as f64)
    }

    pub fn identity(dims: &[usize]) -> Self {
        let d: usize = dims.iter().product();
        Self::diagonal(dims, &vec![c(1.0, 0.0); d]).expect("identity is unitary")
    }

    pub fn x() -> Self {
        Self::new(&[2], vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
            .expect("unitary")
    }

    pub fn y() -> Self {
        Self::new(&[2], vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
            .expect("unitary")
    }

    pub fn z() -> Self {
        Self::diagonal(&[2], &[c(1.0, 0.0), c(-1.0, 0.0)]).expect("unitary")
    }

    pub fn hadamard() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::new(&[2], vec![c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]).expect("unitary")
    }

    /// `diag(1, e^{i theta})` on one qubit.
    pub fn phase(theta: f64) -> Self {
        Self::diagonal(&[2], &[c(1.0, 0.0), Complex64::from_polar(1.0, theta)])
            .expect("unitary")
    }

    /// Conditional phase flip between two ensemble qubits: `-1` on `|11>`.
    pub fn cpf_ensembles() -> Self {
        Self::diagonal(&[2, 2], &[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)])
            .expect("unitary")
    }

    /// Conditional phase flip between an ensemble qubit (gate site 0) and a
    /// photon polarization site (gate site 1, `h` = level 0): `-1` on the
    /// ensemble-ground, `h`-polarized branch.
    pub fn cpf_atom_photon() -> Self {
        Self::diagonal(&[2, 2], &[c(-1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)])
            .expect("unitary")
    }

    /// CNOT with gate site 0 as control, gate site 1 as target.
    pub fn cnot() -> Self {
        // little-endian packing: index = control + 2*target
        let mut m = vec![c(0.0, 0.0); 16];
        let map = [(0usize, 0usize), (1, 3), (2, 2), (3, 1)];
        for (input, output) in map {
            m[output * 4 + input] = c(1.0, 0.0);
        }
        Self::new(&[2, 2], m).expect("unitary")
    }
}
