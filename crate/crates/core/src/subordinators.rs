//! The GGC(θ, F) subordinator: Laplace transforms, finite-dimensional
//! densities over a partition of (0, 1/θ], and a convolution check.

use rayon::prelude::*;

use crate::dist::DistributionSpec;
use crate::error::{Error, Result};
use crate::functionals::psi;
use crate::quadrature::{self, Node, QuadratureConfig};
use crate::transforms::{ggc_component_density, GgcLaw};

/// A partition of (0, 1/θ] stored by cell lengths. Locations do not matter
/// because increments are stationary and independent.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionSpec {
    pub theta: f64,
    lengths: Vec<f64>,
}

impl PartitionSpec {
    pub fn new(theta: f64, lengths: Vec<f64>) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::domain(format!("theta must be positive, got {theta}")));
        }
        if lengths.is_empty() {
            return Err(Error::precondition("partition needs at least one cell"));
        }
        if let Some(l) = lengths.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return Err(Error::precondition(format!("cell length {l} is not positive")));
        }
        let total: f64 = lengths.iter().sum();
        let target = 1.0 / theta;
        if (total - target).abs() > 1e-12 * target.max(1.0) {
            return Err(Error::precondition(format!(
                "cell lengths sum to {total}, expected 1/theta = {target}"
            )));
        }
        Ok(PartitionSpec { theta, lengths })
    }

    /// Splits (0, 1/θ] into `k` equal cells.
    pub fn equal(theta: f64, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::precondition("partition needs at least one cell"));
        }
        let l = 1.0 / (theta * k as f64);
        let mut lengths = vec![l; k];
        // absorb rounding in the last cell
        let head: f64 = lengths[..k - 1].iter().sum();
        lengths[k - 1] = 1.0 / theta - head;
        Self::new(theta, lengths)
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    /// σ_i = θ·|C_i|, each in (0,1] and summing to 1.
    pub fn sigmas(&self) -> Vec<f64> {
        self.lengths
            .iter()
            .map(|l| (self.theta * l).min(1.0))
            .collect()
    }
}

/// E[e^{−λζ(t)}] = e^{−tθψ(λ)}.
pub fn ggc_laplace(ggc: &GgcLaw, t: f64, lambda: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("t must be positive, got {t}")));
    }
    Ok((-t * ggc.theta * psi(&ggc.base, lambda, &ggc.quad)?).exp())
}

/// Joint density of the increments over the cells, with the per-cell
/// marginals.
#[derive(Clone, Debug)]
pub struct FidiValue {
    pub joint: f64,
    pub marginals: Vec<f64>,
}

pub fn fidi_density(ggc: &GgcLaw, part: &PartitionSpec, xs: &[f64]) -> Result<FidiValue> {
    if (part.theta - ggc.theta).abs() > 1e-12 * ggc.theta {
        return Err(Error::precondition(format!(
            "partition built for theta = {} but the law has theta = {}",
            part.theta, ggc.theta
        )));
    }
    if xs.len() != part.len() {
        return Err(Error::precondition(format!(
            "{} points given for {} cells",
            xs.len(),
            part.len()
        )));
    }
    let sig = part.sigmas();
    let marginals = sig
        .par_iter()
        .zip(xs.par_iter())
        .map(|(&s, &x)| ggc_component_density(&ggc.base, s, x, &ggc.quad))
        .collect::<Result<Vec<f64>>>()?;
    Ok(FidiValue {
        joint: marginals.iter().product(),
        marginals,
    })
}

/// Outcome of comparing g_{σ₁} * g_{σ₂} with g_{σ₁+σ₂} on a grid.
#[derive(Clone, Debug)]
pub struct ConvolutionResidual {
    /// max over the grid of |(g₁ * g₂)(x) − g₁₂(x)|.
    pub residual: f64,
    /// Largest quadrature error estimate of the convolution integrals.
    pub quadrature_error: f64,
    pub grid: Vec<f64>,
}

/// Number of grid points on (0, upper] used by [`convolution_check`].
pub const CONVOLUTION_GRID: usize = 200;

/// Numerical convolution of g_{σ₁,F} and g_{σ₂,F}, compared with
/// g_{σ₁+σ₂,F} on 200 points of (0, upper]. The convolution integral
/// ∫_0^x g₁(x−u)g₂(u)du is taken by the double-exponential trapezoid rule,
/// which resolves the algebraic singularities of both factors at the ends.
pub fn convolution_check(
    base: &DistributionSpec,
    sigma1: f64,
    sigma2: f64,
    upper: f64,
    quad: &QuadratureConfig,
) -> Result<ConvolutionResidual> {
    if !(sigma1 > 0.0 && sigma2 > 0.0 && sigma1 + sigma2 <= 1.0 + 1e-12) {
        return Err(Error::precondition(format!(
            "need positive sigmas with sigma1 + sigma2 <= 1, got {sigma1} and {sigma2}"
        )));
    }
    if !(upper > 0.0 && upper.is_finite()) {
        return Err(Error::domain(format!("grid upper end must be positive, got {upper}")));
    }
    let s12 = (sigma1 + sigma2).min(1.0);
    let grid: Vec<f64> = (1..=CONVOLUTION_GRID)
        .map(|j| upper * j as f64 / CONVOLUTION_GRID as f64)
        .collect();
    let cfg = quad.tightened(1e-9, 1e-12);
    let rows = grid
        .par_iter()
        .map(|&x| -> Result<(f64, f64)> {
            let est = quadrature::integrate(
                |n: Node| {
                    let a = ggc_component_density(base, sigma1, n.to_upper, quad)?;
                    if a == 0.0 {
                        return Ok(0.0);
                    }
                    Ok(a * ggc_component_density(base, sigma2, n.from_lower, quad)?)
                },
                0.0,
                x,
                &cfg,
            )?;
            let conv = est.require(&cfg, "convolution integral")?;
            let direct = ggc_component_density(base, s12, x, quad)?;
            Ok(((conv - direct).abs(), est.error))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvolutionResidual {
        residual: rows.iter().map(|r| r.0).fold(0.0, f64::max),
        quadrature_error: rows.iter().map(|r| r.1).fold(0.0, f64::max),
        grid,
    })
}
