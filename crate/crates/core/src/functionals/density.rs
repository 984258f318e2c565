use crate::error::{Error, Result};
use crate::geometry::{Vec3, WeightedSurfaceMeasure};
use crate::quadrature::{QuadratureCloud, QuadratureRule};

/// Quadrature points of a whole measure with weights already multiplied by
/// the multiplicities, ready for repeated Gaussian evaluations.
#[derive(Clone, Debug)]
pub struct GaussianDensity {
    points: Vec<Vec3>,
    weights: Vec<f64>,
    dimension: usize,
}

/// F together with its derivatives in x₀ and t₀.
#[derive(Clone, Copy, Debug)]
pub struct FGradient {
    pub value: f64,
    pub grad_x0: Vec3,
    pub d_t0: f64,
}

impl GaussianDensity {
    pub fn new(measure: &WeightedSurfaceMeasure, rule: QuadratureRule) -> Self {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (s, m) in measure.components() {
            let c = QuadratureCloud::new(s, rule);
            points.extend(c.points);
            weights.extend(c.weights.iter().map(|w| w * *m as f64));
        }
        Self {
            points,
            weights,
            dimension: measure.dimension(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn prefactor(&self, t0: f64) -> f64 {
        (4.0 * std::f64::consts::PI * t0).powf(-(self.dimension as f64) / 2.0)
    }

    pub fn value(&self, x0: &Vec3, t0: f64) -> f64 {
        let inv = 1.0 / (4.0 * t0);
        let sum: f64 = self
            .points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * (-(p - x0).norm_squared() * inv).exp())
            .sum();
        self.prefactor(t0) * sum
    }

    /// Exact derivatives of the quadrature sum:
    /// ∂x₀F = pref Σ w e (x − x₀)/(2t₀), ∂t₀F = pref Σ w e (|x − x₀|²/4t₀² − n/2t₀).
    pub fn gradient(&self, x0: &Vec3, t0: f64) -> FGradient {
        let inv = 1.0 / (4.0 * t0);
        let half_n = self.dimension as f64 / (2.0 * t0);
        let mut sum = 0.0;
        let mut gx = Vec3::zeros();
        let mut gt = 0.0;
        for (p, w) in self.points.iter().zip(&self.weights) {
            let d = p - x0;
            let r2 = d.norm_squared();
            let we = w * (-r2 * inv).exp();
            sum += we;
            gx += we * d;
            gt += we * (r2 * inv / t0 - half_n);
        }
        let pref = self.prefactor(t0);
        FGradient {
            value: pref * sum,
            grad_x0: gx * (pref / (2.0 * t0)),
            d_t0: pref * gt,
        }
    }
}

fn check_t0(t0: f64) -> Result<()> {
    if t0 > 0.0 && t0.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("t0 must be positive and finite, got {t0}")))
    }
}

/// F_{x₀,t₀}(μ) = (4πt₀)^{−n/2} Σ mᵢ ∫_{Σᵢ} exp(−|x − x₀|²/4t₀) dA.
pub fn f_functional(measure: &WeightedSurfaceMeasure, x0: &Vec3, t0: f64) -> Result<f64> {
    f_functional_with(measure, x0, t0, QuadratureRule::default())
}

pub fn f_functional_with(measure: &WeightedSurfaceMeasure, x0: &Vec3, t0: f64, rule: QuadratureRule) -> Result<f64> {
    check_t0(t0)?;
    Ok(GaussianDensity::new(measure, rule).value(x0, t0))
}

/// (∇_{x₀}F, ∂_{t₀}F).
pub fn f_gradient(measure: &WeightedSurfaceMeasure, x0: &Vec3, t0: f64) -> Result<(Vec3, f64)> {
    check_t0(t0)?;
    let g = GaussianDensity::new(measure, QuadratureRule::default()).gradient(x0, t0);
    Ok((g.grad_x0, g.d_t0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fixtures::{disk, ellipsoid, icosphere};

    fn sphere_f(r: f64, t: f64) -> f64 {
        r * r / t * (-r * r / (4.0 * t)).exp()
    }

    #[test]
    fn sphere_closed_forms() {
        let s2: WeightedSurfaceMeasure = icosphere(4, 2.0).into();
        let f = f_functional(&s2, &Vec3::zeros(), 1.0).unwrap();
        assert!((f - 4.0 / std::f64::consts::E).abs() < 0.01 * f);
        let s1: WeightedSurfaceMeasure = icosphere(4, 1.0).into();
        let f = f_functional(&s1, &Vec3::zeros(), 1.0).unwrap();
        assert!((f - sphere_f(1.0, 1.0)).abs() < 0.01 * f);
    }

    #[test]
    fn off_centre_sphere_closed_form() {
        let s: WeightedSurfaceMeasure = icosphere(4, 2.0).into();
        let (r, d, t): (f64, f64, f64) = (2.0, 0.7, 0.8);
        let exact = r / d * ((-(r - d).powi(2) / (4.0 * t)).exp() - (-(r + d).powi(2) / (4.0 * t)).exp());
        let f = f_functional(&s, &Vec3::new(0.0, d, 0.0), t).unwrap();
        assert!((f - exact).abs() < 0.01 * exact);
    }

    #[test]
    fn flat_disk_is_one() {
        let d: WeightedSurfaceMeasure = disk(8.0, 40).into();
        let f = f_functional(&d, &Vec3::zeros(), 1.0).unwrap();
        assert!((f - 1.0).abs() < 1e-3, "{f}");
    }

    #[test]
    fn quadrature_refinement_is_stable() {
        let s: WeightedSurfaceMeasure = icosphere(4, 2.0).into();
        let a = f_functional_with(&s, &Vec3::new(0.3, 0.1, 0.0), 0.7, QuadratureRule::ThreePoint).unwrap();
        let b = f_functional_with(&s, &Vec3::new(0.3, 0.1, 0.0), 0.7, QuadratureRule::SixPoint).unwrap();
        assert!((a - b).abs() <= 1e-3 * b);
    }

    #[test]
    fn symmetric_gradient_vanishes() {
        let s: WeightedSurfaceMeasure = icosphere(4, 2.0).into();
        let (gx, gt) = f_gradient(&s, &Vec3::zeros(), 1.0).unwrap();
        assert!(gx.norm() < 1e-10);
        // d/dt (4/t) e^{-1/t} vanishes at t = 1; the discrete sphere is slightly smaller
        assert!(gt.abs() < 1e-2, "{gt}");
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let s: WeightedSurfaceMeasure = ellipsoid(3, [2.0, 1.5, 1.0]).into();
        let dens = GaussianDensity::new(&s, QuadratureRule::default());
        let x0 = Vec3::new(0.3, -0.2, 0.4);
        let t0 = 0.6;
        let g = dens.gradient(&x0, t0);
        let h = 1e-5;
        for k in 0..3 {
            let mut e = Vec3::zeros();
            e[k] = h;
            let fd = (dens.value(&(x0 + e), t0) - dens.value(&(x0 - e), t0)) / (2.0 * h);
            assert!((fd - g.grad_x0[k]).abs() < 1e-5 * g.grad_x0.norm());
        }
        let fd = (dens.value(&x0, t0 + h) - dens.value(&x0, t0 - h)) / (2.0 * h);
        assert!((fd - g.d_t0).abs() < 1e-5 * g.d_t0.abs());
    }

    #[test]
    fn nonpositive_t0_rejected() {
        let s: WeightedSurfaceMeasure = icosphere(1, 1.0).into();
        assert!(f_functional(&s, &Vec3::zeros(), 0.0).is_err());
        assert!(f_gradient(&s, &Vec3::zeros(), -1.0).is_err());
    }
}
