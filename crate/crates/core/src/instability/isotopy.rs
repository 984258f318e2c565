use crate::error::{Error, Result};
use crate::geometry::differential::vertex_normals;
use crate::geometry::{DiscreteSurface, PerturbationField};
use crate::instability::cutoff::smoothstep5;

/// Samples used to measure sup|Dφ|.
const PROFILE_SAMPLES: usize = 4096;

/// Collar profile φ(s): 1 for |s| ≤ inner, a quintic ramp to 0 at |s| = outer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollarProfile {
    pub inner: f64,
    pub outer: f64,
}

impl CollarProfile {
    pub fn value(&self, s: f64) -> f64 {
        let s = s.abs();
        if s <= self.inner {
            1.0
        } else if s >= self.outer {
            0.0
        } else {
            1.0 - smoothstep5((s - self.inner) / (self.outer - self.inner))
        }
    }

    /// max |φ(sₖ₊₁) − φ(sₖ)|/(sₖ₊₁ − sₖ) on a uniform grid over [0, outer].
    pub fn measured_sup_derivative(&self) -> f64 {
        let h = self.outer / PROFILE_SAMPLES as f64;
        (0..PROFILE_SAMPLES)
            .map(|k| (self.value((k + 1) as f64 * h) - self.value(k as f64 * h)).abs() / h)
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsotopyParams {
    pub beta1: f64,
    pub beta2: f64,
    pub profile: CollarProfile,
    /// Fiber samples on each side of s = 0.
    pub fiber_half: usize,
}

impl IsotopyParams {
    /// The profile ramps from β1 to β2.
    pub fn new(beta1: f64, beta2: f64) -> Result<Self> {
        Self::with_profile(
            beta1,
            beta2,
            CollarProfile {
                inner: beta1,
                outer: beta2,
            },
        )
    }

    pub fn with_profile(beta1: f64, beta2: f64, profile: CollarProfile) -> Result<Self> {
        if !(beta1 > 0.0 && beta1 < beta2 && beta2.is_finite()) {
            return Err(Error::domain(format!("need 0 < beta1 < beta2, got {beta1}, {beta2}")));
        }
        if !(profile.inner >= 0.0 && profile.inner < profile.outer && profile.outer <= beta2) {
            return Err(Error::domain("profile ramp must lie inside [0, beta2]"));
        }
        Ok(Self {
            beta1,
            beta2,
            profile,
            fiber_half: 32,
        })
    }

    /// Checks the derivative bound and the collar fit of t·f; returns the
    /// measured sup|Dφ|.
    pub fn admit(&self, sup_f: f64, t: f64) -> Result<f64> {
        let dphi = self.profile.measured_sup_derivative();
        if !(dphi < 1.0 / self.beta1) || !(dphi * t * sup_f < 1.0) {
            return Err(Error::IsotopyBound(dphi * sup_f));
        }
        if t * sup_f > self.beta2 - self.beta1 || t * sup_f > self.beta1 {
            return Err(Error::domain(format!(
                "displacement {} does not fit the collar (beta1 = {}, beta2 = {})",
                t * sup_f,
                self.beta1,
                self.beta2
            )));
        }
        Ok(dphi)
    }
}

/// h((x, s), t) = (x, s + tφ(s)f(x)) on the sampled normal collar.
#[derive(Clone, Debug)]
pub struct IsotopyImage {
    /// Fiber sample heights s, ascending, containing 0.
    pub fibers: Vec<f64>,
    /// Image heights per vertex, `fibers.len()` values each.
    pub heights: Vec<f64>,
    /// Every fiber map is strictly increasing.
    pub injective: bool,
    pub sup_dphi: f64,
    /// The image of Σ itself (s = 0).
    pub surface: DiscreteSurface,
}

impl IsotopyImage {
    pub fn fiber(&self, vertex: usize) -> &[f64] {
        let k = self.fibers.len();
        &self.heights[vertex * k..(vertex + 1) * k]
    }
}

pub fn graph_isotopy(
    surface: &DiscreteSurface,
    f: &PerturbationField,
    t: f64,
    params: &IsotopyParams,
) -> Result<IsotopyImage> {
    f.check_base(surface)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain(format!("isotopy time {t} outside [0, 1]")));
    }
    let sup_dphi = params.admit(f.sup_norm(), t)?;
    let k = params.fiber_half;
    let fibers: Vec<f64> = (0..=2 * k)
        .map(|i| params.beta2 * (i as f64 - k as f64) / k as f64)
        .collect();
    let phi: Vec<f64> = fibers.iter().map(|&s| params.profile.value(s)).collect();
    let mut heights = Vec::with_capacity(f.len() * fibers.len());
    let mut injective = true;
    for &fx in &f.values {
        let start = heights.len();
        heights.extend(fibers.iter().zip(&phi).map(|(s, p)| s + t * p * fx));
        injective &= heights[start..].windows(2).all(|w| w[1] > w[0]);
    }
    let normals = vertex_normals(surface);
    let phi0 = params.profile.value(0.0);
    let moved = surface
        .vertices()
        .iter()
        .zip(&normals)
        .zip(&f.values)
        .map(|((x, n), fx)| x + (t * phi0 * fx) * n)
        .collect();
    Ok(IsotopyImage {
        fibers,
        heights,
        injective,
        sup_dphi,
        surface: surface.with_positions(moved)?,
    })
}
