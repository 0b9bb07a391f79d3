//! Single-photon wavepacket envelopes on a uniform time grid.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniformly sampled complex envelope `f(t_k)`, `t_k = t0 + k dt`.
///
/// Input pulses are normalized so that `sum |f|^2 dt = 1` (single-photon
/// normalization); reflected output pulses are generally not, their norm
/// deficit being the photon loss.
#[derive(Clone, Debug)]
pub struct PulseProfile {
    t0: f64,
    dt: f64,
    samples: Vec<Complex64>,
}

impl PulseProfile {
    pub fn new(t0: f64, dt: f64, samples: Vec<Complex64>) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
        }
        if samples.len() < 2 {
            return Err(Error::InvalidParameter(
                "pulse needs at least two samples".into(),
            ));
        }
        Ok(PulseProfile { t0, dt, samples })
    }

    /// Gaussian envelope `f(t) ∝ exp[-(t - T/2)^2 / (T/5)^2]` sampled on
    /// `[0, 2T)` with `n` points and unit-normalized. The factor-two span
    /// leaves room for the cavity ring-down of the reflected pulse.
    pub fn gaussian(duration: f64, n: usize) -> Result<Self> {
        if !(duration > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "duration must be > 0, got {duration}"
            )));
        }
        if n < 16 {
            return Err(Error::InvalidParameter(
                "gaussian pulse needs at least 16 samples".into(),
            ));
        }
        let dt = 2.0 * duration / n as f64;
        let width = duration / 5.0;
        let mut samples = Vec::with_capacity(n);
        for k in 0..n {
            let t = k as f64 * dt;
            let arg = (t - duration / 2.0) / width;
            samples.push(Complex64::new((-arg * arg).exp(), 0.0));
        }
        let mut p = PulseProfile {
            t0: 0.0,
            dt,
            samples,
        };
        let norm = p.norm_squared().sqrt();
        for s in &mut p.samples {
            *s /= norm;
        }
        Ok(p)
    }

    /// [`Self::gaussian`] on the default 4096-point grid.
    pub fn gaussian_default(duration: f64) -> Result<Self> {
        Self::gaussian(duration, 4096)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    /// `sum |f|^2 dt`.
    pub fn norm_squared(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * self.dt
    }

    /// Errors unless `|norm^2 - 1| <= tol`.
    pub fn check_normalized(&self, tol: f64) -> Result<()> {
        let dev = (self.norm_squared() - 1.0).abs();
        if dev > tol {
            return Err(Error::NotNormalized(dev));
        }
        Ok(())
    }

    /// `sum conj(self) other dt` on a shared grid.
    pub fn inner(&self, other: &PulseProfile) -> Result<Complex64> {
        if self.samples.len() != other.samples.len()
            || (self.dt - other.dt).abs() > 1e-12 * self.dt
            || (self.t0 - other.t0).abs() > 1e-9
        {
            return Err(Error::DimensionMismatch(
                "pulses live on different time grids".into(),
            ));
        }
        Ok(self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.dt)
    }

    /// `sum conj(self(t - tau)) other(t) dt`, with `self` linearly
    /// interpolated and taken as zero outside its grid.
    pub fn inner_shifted(&self, other: &PulseProfile, tau: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let n = self.samples.len() as f64;
        for (k, b) in other.samples.iter().enumerate() {
            let t = other.t0 + k as f64 * other.dt - tau;
            let x = (t - self.t0) / self.dt;
            if x < 0.0 || x >= n - 1.0 {
                continue;
            }
            let j = x.floor() as usize;
            let frac = x - j as f64;
            let a = self.samples[j] * (1.0 - frac) + self.samples[j + 1] * frac;
            acc += a.conj() * b;
        }
        acc * other.dt
    }

    /// Intensity-weighted RMS width of the envelope.
    pub fn rms_width(&self) -> f64 {
        let total: f64 = self.samples.iter().map(|s| s.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let mean: f64 = self
            .samples
            .iter()
            .enumerate()
            .map(|(k, s)| k as f64 * s.norm_sqr())
            .sum::<f64>()
            / total;
        let var: f64 = self
            .samples
            .iter()
            .enumerate()
            .map(|(k, s)| (k as f64 - mean).powi(2) * s.norm_sqr())
            .sum::<f64>()
            / total;
        var.sqrt() * self.dt
    }

    /// Rescale every sample (used by the reflection solver for unit changes).
    pub(crate) fn scaled(&self, factor: f64) -> PulseProfile {
        PulseProfile {
            t0: self.t0,
            dt: self.dt,
            samples: self.samples.iter().map(|s| s * factor).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_is_normalized() {
        let p = PulseProfile::gaussian_default(120.0).unwrap();
        assert!((p.norm_squared() - 1.0).abs() < 1e-12);
        p.check_normalized(1e-9).unwrap();
    }

    #[test]
    fn gaussian_peaks_at_half_duration() {
        let p = PulseProfile::gaussian(80.0, 2048).unwrap();
        let peak = p
            .samples()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
            .unwrap()
            .0;
        assert!((p.time(peak) - 40.0).abs() < 0.1);
    }

    #[test]
    fn rms_width_matches_gaussian_theory() {
        // |f|^2 has std width = (T/5)/2
        let p = PulseProfile::gaussian(100.0, 8192).unwrap();
        assert!((p.rms_width() - 10.0).abs() < 0.05);
    }

    #[test]
    fn shifted_inner_recovers_displacement() {
        let p = PulseProfile::gaussian(100.0, 4096).unwrap();
        let same = p.inner_shifted(&p, 0.0);
        assert!((same.re - 1.0).abs() < 1e-6);
        // displaced overlap of two gaussians: exp(-tau^2 / (2 w^2)), w = T/5
        let tau = 8.0;
        let got = p.inner_shifted(&p, tau).norm();
        let want = (-tau * tau / (2.0 * 20.0_f64 * 20.0)).exp();
        assert!((got - want).abs() < 1e-4);
    }

    #[test]
    fn mismatched_grids_rejected() {
        let a = PulseProfile::gaussian(100.0, 1024).unwrap();
        let b = PulseProfile::gaussian(100.0, 2048).unwrap();
        assert!(a.inner(&b).is_err());
    }
}
