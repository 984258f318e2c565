//! Entropy and local entropy as constrained maxima of F.
//!
//! The optimizer evaluates F on a coarse grid of centers (a vertex subsample
//! plus the centroid) and log-spaced scales, then runs projected gradient
//! ascent from the best grid points in the variables (x₀, u = ln t₀). The
//! step is preconditioned by (t₀∇ₓF, t₀∂ₜF), which is invariant under
//! parabolic rescaling, and accepted by Armijo backtracking.

use rayon::prelude::*;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::functionals::density::GaussianDensity;
use crate::geometry::{Vec3, WeightedSurfaceMeasure};
use crate::quadrature::QuadratureRule;

/// Scale interval [a, b] or [a, ∞).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaleWindow {
    pub a: f64,
    pub b: Option<f64>,
}

impl ScaleWindow {
    pub fn new(a: f64, b: Option<f64>) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::domain(format!("window start must be positive, got {a}")));
        }
        if let Some(b) = b {
            if !(b >= a && b.is_finite()) {
                return Err(Error::domain(format!("window end {b} below start {a}")));
            }
        }
        Ok(Self { a, b })
    }

    pub fn bounded(a: f64, b: f64) -> Result<Self> {
        Self::new(a, Some(b))
    }

    pub fn unbounded(a: f64) -> Result<Self> {
        Self::new(a, None)
    }

    pub fn single(t0: f64) -> Result<Self> {
        Self::new(t0, Some(t0))
    }

    /// The window moved by `shift` in time; the start is kept positive.
    pub fn shifted(&self, shift: f64) -> Result<Self> {
        Self::new(self.a + shift, self.b.map(|b| b + shift))
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.a && self.b.is_none_or(|b| t <= b)
    }
}

impl Serialize for ScaleWindow {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(2))?;
        seq.serialize_element(&self.a)?;
        match self.b {
            Some(b) => seq.serialize_element(&b)?,
            None => seq.serialize_element("inf")?,
        }
        seq.end()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum SpatialDomain {
    #[default]
    All,
    Box { lo: Vec3, hi: Vec3 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyOptions {
    pub rule: QuadratureRule,
    /// Ascent runs started from the best grid points.
    pub starts: usize,
    pub max_iters: usize,
    /// Stop when the preconditioned step falls below this (relative) size.
    pub step_tol: f64,
    pub grid_scales: usize,
    pub grid_centers: usize,
}

impl Default for EntropyOptions {
    fn default() -> Self {
        Self {
            rule: QuadratureRule::ThreePoint,
            starts: 32,
            max_iters: 200,
            step_tol: 1e-12,
            grid_scales: 8,
            grid_centers: 48,
        }
    }
}

/// A supremum certificate: F(x₀, t₀) = value.
#[derive(Clone, Debug, Serialize)]
pub struct EntropyWitness {
    pub value: f64,
    pub x0: [f64; 3],
    pub t0: f64,
    /// Scale range actually searched.
    pub window: ScaleWindow,
    pub starts: usize,
    pub iters: usize,
}

impl EntropyWitness {
    pub fn center(&self) -> Vec3 {
        Vec3::from(self.x0)
    }
}

/// λ(μ): supremum of F over x₀ in the bounding box of μ and t₀ between
/// (min edge)² and the area bound t_max = (A/F_floor)^{2/n}/4π, where
/// F_floor is the best grid value.
pub fn entropy(measure: &WeightedSurfaceMeasure, opts: &EntropyOptions) -> Result<EntropyWitness> {
    maximize(measure, None, &SpatialDomain::All, opts)
}

/// λ^I_U(μ) for I = window and U = domain. For b = ∞ the search stops at
/// max(a, t_max).
pub fn local_entropy(
    measure: &WeightedSurfaceMeasure,
    window: &ScaleWindow,
    domain: &SpatialDomain,
    opts: &EntropyOptions,
) -> Result<EntropyWitness> {
    ScaleWindow::new(window.a, window.b)?;
    maximize(measure, Some(window), domain, opts)
}

struct Problem<'a> {
    density: &'a GaussianDensity,
    lo: Vec3,
    hi: Vec3,
    u_lo: f64,
    u_hi: f64,
}

impl Problem<'_> {
    fn project(&self, x: &Vec3, u: f64) -> (Vec3, f64) {
        (x.sup(&self.lo).inf(&self.hi), u.clamp(self.u_lo, self.u_hi))
    }

    /// Projected ascent from (x, u); returns (value, x, u, iterations).
    fn ascend(&self, x: Vec3, u: f64, opts: &EntropyOptions) -> (f64, Vec3, f64, usize) {
        let (mut x, mut u) = self.project(&x, u);
        let mut g = self.density.gradient(&x, u.exp());
        let mut step = 1.0;
        let mut iters = 0;
        while iters < opts.max_iters {
            iters += 1;
            let t = u.exp();
            let dx = g.grad_x0 * t;
            let du = g.d_t0 * t;
            let mut accepted = None;
            let mut s = step;
            for _ in 0..60 {
                let (nx, nu) = self.project(&(x + s * dx), u + s * du);
                let (mx, mu) = (nx - x, nu - u);
                let gain = g.grad_x0.dot(&mx) + g.d_t0 * t * mu;
                if gain <= 0.0 {
                    break;
                }
                let ng = self.density.gradient(&nx, nu.exp());
                if ng.value >= g.value + 1e-4 * gain {
                    accepted = Some((nx, nu, ng, mx.norm_squared() / t + mu * mu));
                    break;
                }
                s *= 0.5;
            }
            match accepted {
                Some((nx, nu, ng, moved)) => {
                    let improved = ng.value > g.value;
                    x = nx;
                    u = nu;
                    g = ng;
                    step = (2.0 * s).min(1e6);
                    if !improved || moved.sqrt() < opts.step_tol {
                        break;
                    }
                }
                None => break,
            }
        }
        (g.value, x, u, iters)
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 || hi <= lo {
        return vec![lo];
    }
    let (l, h) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| (l + (h - l) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

fn maximize(
    measure: &WeightedSurfaceMeasure,
    window: Option<&ScaleWindow>,
    domain: &SpatialDomain,
    opts: &EntropyOptions,
) -> Result<EntropyWitness> {
    if measure.is_empty() {
        return Err(Error::domain("entropy of an empty measure"));
    }
    if opts.starts == 0 || opts.max_iters == 0 || opts.grid_scales == 0 {
        return Err(Error::domain("optimizer needs at least one start, iteration and scale"));
    }
    // λ(kν) = kλ(ν): optimize the reduced measure and scale the value back
    let g = measure.multiplicity_gcd();
    let reduced;
    let base = if g > 1 {
        reduced = measure.divided(g);
        &reduced
    } else {
        measure
    };
    let density = GaussianDensity::new(base, opts.rule);
    let n = base.dimension() as f64;

    let (mut lo, mut hi) = base.bounding_box();
    if let SpatialDomain::Box { lo: dlo, hi: dhi } = domain {
        lo = lo.sup(dlo);
        hi = hi.inf(dhi);
        if (0..3).any(|k| lo[k] > hi[k]) {
            return Err(Error::domain("spatial domain misses the support of the measure"));
        }
    }

    let centers = grid_centers(base, &lo, &hi, opts.grid_centers);
    let diam2 = (hi - lo).norm_squared().max(f64::MIN_POSITIVE);
    let t_floor = base
        .components()
        .iter()
        .map(|(s, _)| s.min_edge_length())
        .fold(f64::INFINITY, f64::min)
        .powi(2);
    let t_lo = window.map_or(t_floor, |w| w.a);
    let finite_hi = window.and_then(|w| w.b);

    let eval_grid = |scales: &[f64]| -> Vec<(f64, usize, usize)> {
        let jobs: Vec<(usize, usize)> = (0..scales.len())
            .flat_map(|i| (0..centers.len()).map(move |j| (i, j)))
            .collect();
        jobs.par_iter()
            .map(|&(i, j)| (density.value(&centers[j], scales[i]), i, j))
            .collect()
    };

    let t_hi = match finite_hi {
        Some(b) => b,
        None => {
            let probe_scales = log_grid(t_lo, t_lo.max(diam2), opts.grid_scales);
            let floor = eval_grid(&probe_scales)
                .iter()
                .map(|g| g.0)
                .fold(0.0, f64::max);
            let t_max = (density.total_weight() / floor).powf(2.0 / n) / (4.0 * std::f64::consts::PI);
            t_lo.max(t_max)
        }
    };

    let scales = log_grid(t_lo, t_hi, opts.grid_scales);
    let mut grid = eval_grid(&scales);
    grid.sort_by(|p, q| q.0.total_cmp(&p.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));
    let starts: Vec<(Vec3, f64)> = grid
        .iter()
        .take(opts.starts)
        .map(|&(_, i, j)| (centers[j], scales[i].ln()))
        .collect();

    let problem = Problem {
        density: &density,
        lo,
        hi,
        u_lo: t_lo.ln(),
        u_hi: t_hi.ln(),
    };
    let runs: Vec<(f64, Vec3, f64, usize)> = starts
        .par_iter()
        .map(|(x, u)| problem.ascend(*x, *u, opts))
        .collect();
    let iters = runs.iter().map(|r| r.3).sum();
    let best = runs
        .iter()
        .min_by(|p, q| {
            q.0.total_cmp(&p.0)
                .then(p.2.total_cmp(&q.2))
                .then(p.1.x.total_cmp(&q.1.x))
                .then(p.1.y.total_cmp(&q.1.y))
                .then(p.1.z.total_cmp(&q.1.z))
        })
        .expect("at least one start");
    let t0 = best.2.exp().clamp(t_lo, t_hi);
    let value = density.value(&best.1, t0) * g as f64;
    Ok(EntropyWitness {
        value,
        x0: [best.1.x, best.1.y, best.1.z],
        t0,
        window: ScaleWindow { a: t_lo, b: finite_hi },
        starts: starts.len(),
        iters,
    })
}

/// Up to `count` vertices spread evenly through the vertex list, plus the
/// centroid, all clamped into the box.
fn grid_centers(measure: &WeightedSurfaceMeasure, lo: &Vec3, hi: &Vec3, count: usize) -> Vec<Vec3> {
    let all: Vec<&Vec3> = measure.components().iter().flat_map(|(s, _)| s.vertices()).collect();
    let stride = all.len().div_ceil(count.max(1)).max(1);
    let mut centers = vec![measure.centroid().sup(lo).inf(hi)];
    centers.extend(all.iter().step_by(stride).map(|p| p.sup(lo).inf(hi)));
    centers
}

/// Both sides of λ^{t₀}(α(Σ − y)) = λ^{α⁻²t₀}(Σ).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RescaleCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub defect: f64,
}

pub fn rescaled_local_entropy_check(
    measure: &WeightedSurfaceMeasure,
    alpha: f64,
    y: &Vec3,
    t0: f64,
    opts: &EntropyOptions,
) -> Result<RescaleCheck> {
    if !(alpha > 0.0) {
        return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
    }
    let scaled = measure.rescaled(alpha, y);
    let lhs = local_entropy(&scaled, &ScaleWindow::single(t0)?, &SpatialDomain::All, opts)?.value;
    let rhs = local_entropy(measure, &ScaleWindow::single(t0 / (alpha * alpha))?, &SpatialDomain::All, opts)?.value;
    Ok(RescaleCheck {
        lhs,
        rhs,
        defect: (lhs - rhs).abs(),
    })
}
