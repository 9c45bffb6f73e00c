//! Frequency sampling lattice shared by every spectrum in a run.
//!
//! Magnitudes follow a geometric progression so that low frequencies (broad
//! shape) and high frequencies (fine detail) are both represented. Because
//! the integrands are real, spectra obey F(−u,−v) = conj F(u,v), so sampling
//! both half-planes would store every value twice; the default grid keeps
//! u > 0 only and the full grid exists purely as a diagnostic.

use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("frequency range invalid: need 0 < f_min < f_max, got [{f_min}, {f_max}]")]
    InvalidRange { f_min: f64, f_max: f64 },
    #[error("need at least two frequencies per axis, got {0}")]
    TooFew(usize),
}

/// `w` magnitudes from `f_min` to `f_max` in geometric progression, with
/// both endpoints set exactly.
pub fn geometric_frequencies(f_min: f64, f_max: f64, w: usize) -> Result<Vec<f64>, GridError> {
    if !(f_min > 0.0 && f_max > f_min && f_min.is_finite() && f_max.is_finite()) {
        return Err(GridError::InvalidRange { f_min, f_max });
    }
    if w < 2 {
        return Err(GridError::TooFew(w));
    }
    let ratio = (f_max / f_min).powf(1.0 / (w as f64 - 1.0));
    let mut out = Vec::with_capacity(w);
    out.push(f_min);
    for i in 1..w - 1 {
        out.push(f_min * ratio.powi(i as i32));
    }
    out.push(f_max);
    Ok(out)
}

/// Whether a grid covers the u > 0 half-plane (the default; the u ≤ 0 half
/// is redundant by conjugate symmetry) or all four quadrants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridMode {
    HalfPlane,
    Full,
}

/// An ordered set of (u, v) sample frequencies. Every spectrum records the
/// id of the grid it was sampled on, so mismatched artifacts are caught
/// when they are combined.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    samples: Vec<(f64, f64)>,
    pub f_min: f64,
    pub f_max: f64,
    pub w_axis: usize,
    pub mode: GridMode,
}

impl FrequencyGrid {
    /// Half-plane grid over the given positive magnitudes: u runs over the
    /// W magnitudes, v over −f_{W−1}..−f_0, 0, f_0..f_{W−1} (ascending),
    /// u-major. W(2W+1) samples; 210 for the default W = 10.
    pub fn build(freqs: &[f64]) -> Result<Self, GridError> {
        let freqs = check_freqs(freqs)?;
        let mut samples = Vec::with_capacity(freqs.len() * (2 * freqs.len() + 1));
        let v_axis = signed_axis(freqs);
        for &u in freqs {
            for &v in &v_axis {
                samples.push((u, v));
            }
        }
        Ok(FrequencyGrid {
            samples,
            f_min: freqs[0],
            f_max: freqs[freqs.len() - 1],
            w_axis: freqs.len(),
            mode: GridMode::HalfPlane,
        })
    }

    /// Diagnostic grid over all four quadrants plus the axes: both u and v
    /// run over the signed axis, (2W+1)² samples. Conjugate-redundant; not
    /// used by the embedding pipeline.
    pub fn build_full(freqs: &[f64]) -> Result<Self, GridError> {
        let freqs = check_freqs(freqs)?;
        let axis = signed_axis(freqs);
        let mut samples = Vec::with_capacity(axis.len() * axis.len());
        for &u in &axis {
            for &v in &axis {
                samples.push((u, v));
            }
        }
        Ok(FrequencyGrid {
            samples,
            f_min: freqs[0],
            f_max: freqs[freqs.len() - 1],
            w_axis: freqs.len(),
            mode: GridMode::Full,
        })
    }

    /// Default half-plane grid for a frequency range.
    pub fn standard(f_min: f64, f_max: f64, w_axis: usize) -> Result<Self, GridError> {
        Self::build(&geometric_frequencies(f_min, f_max, w_axis)?)
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Stable fingerprint over the exact sample values, for tagging spectra.
    pub fn id(&self) -> u64 {
        // FNV-1a over the bit patterns, plus the mode tag.
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        eat(match self.mode {
            GridMode::HalfPlane => 1,
            GridMode::Full => 2,
        });
        eat(self.samples.len() as u64);
        for &(u, v) in &self.samples {
            eat(u.to_bits());
            eat(v.to_bits());
        }
        h
    }

    /// CSV listing of the samples: header `index,u,v`, one row per sample.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,u,v\n");
        for (i, (u, v)) in self.samples.iter().enumerate() {
            writeln!(out, "{i},{u},{v}").unwrap();
        }
        out
    }
}

fn check_freqs(freqs: &[f64]) -> Result<&[f64], GridError> {
    if freqs.len() < 2 {
        return Err(GridError::TooFew(freqs.len()));
    }
    for w in freqs.windows(2) {
        if !(w[0] > 0.0 && w[1] > w[0] && w[1].is_finite()) {
            return Err(GridError::InvalidRange { f_min: w[0], f_max: w[1] });
        }
    }
    Ok(freqs)
}

fn signed_axis(freqs: &[f64]) -> Vec<f64> {
    let mut axis = Vec::with_capacity(2 * freqs.len() + 1);
    for &f in freqs.iter().rev() {
        axis.push(-f);
    }
    axis.push(0.0);
    axis.extend_from_slice(freqs);
    axis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_progression_endpoints_exact() {
        let f = geometric_frequencies(0.1, 1.0, 10).unwrap();
        assert_eq!(f.len(), 10);
        assert_eq!(f[0], 0.1);
        assert_eq!(f[9], 1.0);
        let ratio = f[1] / f[0];
        assert!((ratio - 1.2915496650).abs() < 1e-9);
        for w in f.windows(2) {
            assert!((w[1] / w[0] - ratio).abs() < 1e-12);
        }
    }

    #[test]
    fn two_point_progression_is_just_the_endpoints() {
        let f = geometric_frequencies(1.0, 1.0001, 2).unwrap();
        assert_eq!(f, vec![1.0, 1.0001]);
    }

    #[test]
    fn bad_ranges_rejected() {
        assert!(matches!(
            geometric_frequencies(0.0, 1.0, 4),
            Err(GridError::InvalidRange { .. })
        ));
        assert!(matches!(
            geometric_frequencies(1.0, 0.5, 4),
            Err(GridError::InvalidRange { .. })
        ));
        assert!(matches!(
            geometric_frequencies(0.1, 1.0, 1),
            Err(GridError::TooFew(1))
        ));
    }

    #[test]
    fn half_plane_grid_shape_and_members() {
        let grid = FrequencyGrid::build(&[1.0, 2.0]).unwrap();
        assert_eq!(grid.len(), 2 * (2 * 2 + 1));
        let s = grid.samples();
        assert!(s.contains(&(1.0, -2.0)));
        assert!(s.contains(&(1.0, 0.0)));
        assert!(s.contains(&(2.0, 2.0)));
        // u-major ordering with v ascending inside each block.
        assert_eq!(s[0], (1.0, -2.0));
        assert_eq!(s[4], (1.0, 2.0));
        assert_eq!(s[5], (2.0, -2.0));
        // No u ≤ 0 samples on the default grid.
        assert!(s.iter().all(|&(u, _)| u > 0.0));
    }

    #[test]
    fn default_grid_has_210_samples_and_no_conjugate_pairs() {
        let grid = FrequencyGrid::standard(0.1, 1.0, 10).unwrap();
        assert_eq!(grid.len(), 210);
        let s = grid.samples();
        for &(u, v) in s {
            assert!(
                !s.contains(&(-u, -v)),
                "grid stores a conjugate-redundant pair ({u},{v})"
            );
        }
    }

    #[test]
    fn full_grid_is_square() {
        let grid = FrequencyGrid::build_full(&[1.0, 2.0]).unwrap();
        assert_eq!(grid.len(), 25);
        assert_eq!(grid.mode, GridMode::Full);
        assert!(grid.samples().contains(&(-2.0, 1.0)));
        assert!(grid.samples().contains(&(0.0, 0.0)));
    }

    #[test]
    fn grid_construction_is_deterministic() {
        let a = FrequencyGrid::standard(0.1, 1.0, 10).unwrap();
        let b = FrequencyGrid::standard(0.1, 1.0, 10).unwrap();
        assert_eq!(a.id(), b.id());
        for (x, y) in a.samples().iter().zip(b.samples()) {
            assert_eq!(x.0.to_bits(), y.0.to_bits());
            assert_eq!(x.1.to_bits(), y.1.to_bits());
        }
        let c = FrequencyGrid::standard(0.1, 1.0, 9).unwrap();
        assert_ne!(a.id(), c.id());
    }

    #[test]
    fn csv_lists_every_sample() {
        let grid = FrequencyGrid::build(&[1.0, 2.0]).unwrap();
        let csv = grid.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "index,u,v");
        assert_eq!(lines.len(), 1 + grid.len());
        assert_eq!(lines[1], "0,1,-2");
    }
}
