//! Atomic-medium description: ground-state preparation, inhomogeneous
//! broadening profile and its quadrature discretization.

use crate::error::{Error, Result};
use crate::quad;
use num_complex::Complex64 as C64;

/// Coherently prepared ground-state manifold of the Λ-type atoms.
///
/// The atoms carry populations `pop1`, `pop2` on the two lower levels and a
/// two-photon coherence of magnitude `sqrt(pop1 * pop2)` (pure state) with
/// phase `phi12` at the front face. A nonzero `theta` imposes a linear
/// longitudinal phase `phi12 + theta * z / L` on the coherence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseoniumPreparation {
    /// Population fraction of level |1>.
    pub pop1: f64,
    /// Population fraction of level |2> (= 1 - pop1).
    pub pop2: f64,
    /// Coherence phase at z = 0 (radians).
    pub phi12: f64,
    /// Total linear phase imposed across the medium length (radians);
    /// 0 for a uniform preparation.
    pub theta: f64,
    /// When set, the ground-state coherence is forced to zero while the
    /// populations are kept; the two transitions then decouple.
    pub incoherent: bool,
}

impl PhaseoniumPreparation {
    /// Pure (fully coherent) preparation.
    pub fn new(pop1: f64, phi12: f64, theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&pop1) || !pop1.is_finite() {
            return Err(Error::PopulationOutOfRange(pop1));
        }
        Ok(Self {
            pop1,
            pop2: 1.0 - pop1,
            phi12,
            theta,
            incoherent: false,
        })
    }

    /// Preparation with the same populations but vanishing coherence.
    pub fn incoherent(pop1: f64) -> Result<Self> {
        let mut prep = Self::new(pop1, 0.0, 0.0)?;
        prep.incoherent = true;
        Ok(prep)
    }

    /// |sigma12|: `sqrt(pop1 * pop2)` for a pure state, 0 when incoherent.
    pub fn coherence_magnitude(&self) -> f64 {
        if self.incoherent {
            0.0
        } else {
            (self.pop1 * self.pop2).sqrt()
        }
    }

    /// Complex ground-state coherence sigma12 at fractional depth
    /// `z_over_l` in `[0, 1]`.
    pub fn coherence_at(&self, z_over_l: f64) -> C64 {
        let phase = self.phi12 + self.theta * z_over_l;
        self.coherence_magnitude() * C64::new(phase.cos(), phase.sin())
    }

    /// Whether the coherence phase varies along the medium.
    pub fn is_uniform(&self) -> bool {
        self.theta == 0.0
    }
}

/// Shape of the normalized detuning distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileShape {
    /// `exp(-delta^2 / (2 width^2))`, truncated at `±span` and renormalized.
    Gaussian,
    /// `1 / (1 + (delta/width)^2)`, truncated at `±span` and renormalized.
    LorentzianTruncated,
    /// Constant on `|delta| <= width / 2`, zero outside.
    FlatTop,
}

/// Normalized, symmetric inhomogeneous broadening profile `G(delta)`.
///
/// `G` integrates to one over the numerical support `[-span, span]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InhomogeneousProfile {
    pub shape: ProfileShape,
    /// Characteristic width (inverse-time units): standard deviation for the
    /// Gaussian, half-width parameter for the Lorentzian, full support width
    /// for the flat top.
    pub width: f64,
    /// Half-range of the numerical support (inverse-time units).
    pub span: f64,
    /// Normalization constant making the area over the span equal one.
    norm: f64,
}

/// Amplitude spectral full width at half maximum of a Gaussian pulse of unit
/// duration; the default profile width is expressed in these units.
pub const PULSE_SPECTRAL_FWHM: f64 = 2.354820045030949; // 2 sqrt(2 ln 2)

impl InhomogeneousProfile {
    pub fn new(shape: ProfileShape, width: f64, span: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::NonPositiveWidth(width));
        }
        if span < 5.0 * width {
            return Err(Error::SpanTooNarrow { span, width });
        }
        let norm = match shape {
            ProfileShape::FlatTop => 1.0 / width,
            ProfileShape::Gaussian => {
                let area = width
                    * (2.0 * std::f64::consts::PI).sqrt()
                    * libm::erf(span / (width * std::f64::consts::SQRT_2));
                1.0 / area
            }
            ProfileShape::LorentzianTruncated => {
                let area = 2.0 * width * (span / width).atan();
                1.0 / area
            }
        };
        Ok(Self {
            shape,
            width,
            span,
            norm,
        })
    }

    /// Default broad flat-top profile: width 20x the pulse spectral FWHM,
    /// span 5x the width. Broad enough that the response kernels are flat
    /// across the pulse band.
    pub fn default_flat_top() -> Self {
        let width = 20.0 * PULSE_SPECTRAL_FWHM;
        Self::new(ProfileShape::FlatTop, width, 5.0 * width).expect("valid default profile")
    }

    /// Probability density `G(delta)` (zero outside the span).
    pub fn density(&self, delta: f64) -> f64 {
        if delta.abs() > self.span {
            return 0.0;
        }
        match self.shape {
            ProfileShape::FlatTop => {
                if delta.abs() <= 0.5 * self.width {
                    self.norm
                } else {
                    0.0
                }
            }
            ProfileShape::Gaussian => {
                self.norm * (-0.5 * (delta / self.width).powi(2)).exp()
            }
            ProfileShape::LorentzianTruncated => {
                self.norm / (1.0 + (delta / self.width).powi(2))
            }
        }
    }

    /// Discretize the profile into `n` detuning classes with weights such
    /// that `sum_j w_j f(delta_j) ~ integral G(delta) f(delta) d delta`.
    ///
    /// Flat-top profiles use a uniform trapezoid rule over the support
    /// (exact for the constant density); smooth profiles use Gauss–Legendre
    /// over the span. `n` must be even so that the node set is closed under
    /// the sign flip `delta -> -delta`.
    pub fn sample(&self, n: usize) -> Result<DetuningGrid> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::BadNodeCount(n));
        }
        let (nodes, weights) = match self.shape {
            ProfileShape::FlatTop => {
                let a = 0.5 * self.width;
                let h = self.width / (n - 1) as f64;
                // Build the lower half and mirror it so the node set is
                // exactly closed under delta -> -delta.
                let mut nodes = vec![0.0; n];
                for i in 0..n / 2 {
                    let x = -a + h * i as f64;
                    nodes[i] = x;
                    nodes[n - 1 - i] = -x;
                }
                let mut weights = vec![h * self.norm; n];
                weights[0] *= 0.5;
                weights[n - 1] *= 0.5;
                (nodes, weights)
            }
            _ => {
                let (x, w) = quad::gauss_legendre_on(-self.span, self.span, n);
                let weights = x
                    .iter()
                    .zip(&w)
                    .map(|(&xi, &wi)| wi * self.density(xi))
                    .collect();
                (x, weights)
            }
        };
        Ok(DetuningGrid { nodes, weights })
    }

    /// Raw Gauss–Legendre rule on the span, for kernel quadrature.
    pub(crate) fn span_rule(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        quad::gauss_legendre_on(-self.span, self.span, n)
    }
}

/// Discretized detuning distribution: nodes and probability weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DetuningGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl DetuningGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Sum of weights; should be 1 within quadrature tolerance.
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Weighted k-th moment of the node set.
    pub fn moment(&self, k: u32) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * x.powi(k as i32))
            .sum()
    }
}

/// Complete medium description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumSpec {
    pub preparation: PhaseoniumPreparation,
    pub profile: InhomogeneousProfile,
    /// Dimensionless optical depth alpha(0) * L at line center.
    pub optical_depth: f64,
}

impl MediumSpec {
    pub fn new(
        preparation: PhaseoniumPreparation,
        profile: InhomogeneousProfile,
        optical_depth: f64,
    ) -> Result<Self> {
        if !(optical_depth > 0.0) || !optical_depth.is_finite() {
            return Err(Error::NonPositiveDepth(optical_depth));
        }
        Ok(Self {
            preparation,
            profile,
            optical_depth,
        })
    }

    /// Coupling constant eta, calibrated so that `Re alpha(0) * L` equals the
    /// configured optical depth (with L = 1).
    pub fn eta(&self) -> f64 {
        let h0 = crate::kernels::kernel_h(&self.profile, 0.0)
            .expect("omega = 0 is always inside the span");
        self.optical_depth / h0.re
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn preparation_examples() {
        let p = PhaseoniumPreparation::new(0.6, std::f64::consts::PI / 3.0, 0.0).unwrap();
        assert_abs_diff_eq!(p.pop2, 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(p.coherence_magnitude(), 0.24f64.sqrt(), epsilon = 1e-15);

        let pure1 = PhaseoniumPreparation::new(1.0, 0.3, 0.0).unwrap();
        assert_eq!(pure1.coherence_magnitude(), 0.0);

        let graded =
            PhaseoniumPreparation::new(0.5, 0.0, 3.0 * std::f64::consts::PI).unwrap();
        assert_abs_diff_eq!(graded.coherence_magnitude(), 0.5, epsilon = 1e-15);
        assert!(!graded.is_uniform());

        assert!(PhaseoniumPreparation::new(1.2, 0.0, 0.0).is_err());
        assert!(PhaseoniumPreparation::new(-0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn coherence_phase_is_linear_in_z() {
        let theta = 3.0 * std::f64::consts::PI;
        let p = PhaseoniumPreparation::new(0.5, 0.0, theta).unwrap();
        let end = p.coherence_at(1.0);
        // Total phase 3*pi, i.e. a -1 factor relative to the front face.
        assert_abs_diff_eq!(end.re, -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(end.im, 0.0, epsilon = 1e-12);
        let third = p.coherence_at(1.0 / 3.0);
        assert_abs_diff_eq!(third.re, -0.5, epsilon = 1e-12);

        let uniform = PhaseoniumPreparation::new(0.6, 1.0, 0.0).unwrap();
        assert_eq!(uniform.coherence_at(0.2), uniform.coherence_at(0.9));
    }

    #[test]
    fn purity_and_incoherent_flag() {
        for pop1 in [0.0, 0.17, 0.5, 0.83, 1.0] {
            let p = PhaseoniumPreparation::new(pop1, 0.4, 0.0).unwrap();
            assert_abs_diff_eq!(
                p.coherence_magnitude().powi(2),
                p.pop1 * p.pop2,
                epsilon = 1e-15
            );
            let inc = PhaseoniumPreparation::incoherent(pop1).unwrap();
            assert_eq!(inc.coherence_magnitude(), 0.0);
            assert_eq!(inc.pop1, p.pop1);
        }
    }

    #[test]
    fn profiles_are_normalized_and_symmetric() {
        let shapes = [
            ProfileShape::FlatTop,
            ProfileShape::Gaussian,
            ProfileShape::LorentzianTruncated,
        ];
        for shape in shapes {
            for width in [1.0, 5.0, 47.0] {
                let prof = InhomogeneousProfile::new(shape, width, 6.0 * width).unwrap();
                let grid = prof.sample(1024).unwrap();
                assert_abs_diff_eq!(grid.total_weight(), 1.0, epsilon = 1e-10);
                assert_abs_diff_eq!(grid.moment(1), 0.0, epsilon = 1e-12);
                for d in [0.1 * width, width, 2.5 * width] {
                    assert_eq!(prof.density(d), prof.density(-d));
                    assert!(prof.density(d) >= 0.0);
                }
            }
        }
    }

    #[test]
    fn gaussian_second_moment_matches_truncated_closed_form() {
        let width = 3.0;
        let span = 5.0 * width;
        let prof =
            InhomogeneousProfile::new(ProfileShape::Gaussian, width, span).unwrap();
        let grid = prof.sample(1024).unwrap();
        // Second moment of a Gaussian truncated at +-span, from the error
        // function: s^2 (1 - 2 A exp(-A^2/(2 s^2)) / (s sqrt(2 pi) erf(A/(s sqrt 2)))).
        let a = span;
        let s = width;
        let erf_term = libm::erf(a / (s * std::f64::consts::SQRT_2));
        let exact = s * s
            * (1.0
                - 2.0 * a * (-a * a / (2.0 * s * s)).exp()
                    / (s * (2.0 * std::f64::consts::PI).sqrt() * erf_term));
        assert!((grid.moment(2) / exact - 1.0).abs() < 1e-8);
    }

    #[test]
    fn grid_is_sign_flip_closed() {
        let prof = InhomogeneousProfile::default_flat_top();
        for n in [64usize, 512] {
            let grid = prof.sample(n).unwrap();
            for j in 0..n {
                assert_eq!(grid.nodes[j], -grid.nodes[n - 1 - j]);
                assert_eq!(grid.weights[j], grid.weights[n - 1 - j]);
            }
        }
        let gauss = InhomogeneousProfile::new(ProfileShape::Gaussian, 2.0, 12.0).unwrap();
        let grid = gauss.sample(128).unwrap();
        for j in 0..grid.len() {
            assert_eq!(grid.nodes[j], -grid.nodes[grid.len() - 1 - j]);
            assert_eq!(grid.weights[j], grid.weights[grid.len() - 1 - j]);
        }
    }

    #[test]
    fn configuration_errors() {
        assert!(InhomogeneousProfile::new(ProfileShape::FlatTop, -1.0, 10.0).is_err());
        assert!(matches!(
            InhomogeneousProfile::new(ProfileShape::FlatTop, 4.0, 10.0),
            Err(Error::SpanTooNarrow { .. })
        ));
        let prof = InhomogeneousProfile::default_flat_top();
        assert!(matches!(prof.sample(0), Err(Error::BadNodeCount(0))));
        assert!(matches!(prof.sample(7), Err(Error::BadNodeCount(7))));
        let prep = PhaseoniumPreparation::new(0.5, 0.0, 0.0).unwrap();
        assert!(MediumSpec::new(prep, prof, 0.0).is_err());
        assert!(MediumSpec::new(prep, prof, -3.0).is_err());
    }
}
