use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::differential::{differential_quantities, edge_weights};
use crate::geometry::{shrinker_residual, DiscreteSurface, PerturbationField};
use crate::linalg::{lanczos_smallest, CsrMatrix};

/// Shrinker gate: Gaussian L² residual below this fraction of mean |H|.
pub const SHRINKER_TOLERANCE: f64 = 0.05;
/// Round-sphere gate on the asphericity.
pub const ROUND_TOLERANCE: f64 = 0.01;
/// Residual ‖Lf − μf‖/‖f‖ required of the eigenpair.
pub const EIGEN_TOLERANCE: f64 = 1e-6;

const KRYLOV_DIM: usize = 200;
const MAX_RESTARTS: usize = 60;

#[derive(Clone, Debug, Serialize)]
pub struct UnstableDirection {
    /// Positive, sup norm 1.
    pub field: PerturbationField,
    /// μ with Lf = μf; the instability index direction has μ > 0.
    pub eigenvalue: f64,
    /// ‖Lf − μf‖/‖f‖ in the Gaussian-weighted norm.
    pub residual: f64,
    /// Whether the round-sphere branch (f ≡ 1) was taken.
    pub round: bool,
    pub asphericity: f64,
}

/// (max|x − c| − min|x − c|)/mean|x − c| over vertices, c the area centroid.
pub fn asphericity(surface: &DiscreteSurface) -> f64 {
    let c = surface.area_centroid();
    let d: Vec<f64> = surface.vertices().iter().map(|p| (p - c).norm()).collect();
    let (lo, hi) = d.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    (hi - lo) / mean
}

/// The most unstable direction of the stability operator
/// Lf = Δf − ½⟨x, ∇f⟩ + (|A|² + ½)f of a shrinker. On a round sphere this is
/// f ≡ 1; otherwise it is the top eigenfunction of the discretization
/// ρ⁻¹ div(ρ ∇f) + (|A|² + ½)f with ρ = e^{−|x|²/4}.
pub fn unstable_direction(surface: &DiscreteSurface) -> Result<UnstableDirection> {
    let res = shrinker_residual(surface)?;
    let threshold = SHRINKER_TOLERANCE * res.gaussian_mean_abs_h;
    if !(res.gaussian_l2 < threshold) {
        return Err(Error::NotShrinker {
            residual: res.gaussian_l2,
            threshold,
        });
    }
    let dq = differential_quantities(surface)?;
    let v = surface.vertices();
    let n = v.len();
    let rho: Vec<f64> = v.iter().map(|x| (-x.norm_squared() / 4.0).exp()).collect();
    let mass: Vec<f64> = (0..n).map(|i| rho[i] * dq.voronoi_area[i]).collect();
    let potential: Vec<f64> = dq.second_fundamental_sq.iter().map(|a2| a2 + 0.5).collect();
    let aspher = asphericity(surface);

    if aspher < ROUND_TOLERANCE {
        // L1 = |A|² + ½ pointwise; report its weighted mean and spread
        let total: f64 = mass.iter().sum();
        let mu = (0..n).map(|i| mass[i] * potential[i]).sum::<f64>() / total;
        let residual = ((0..n).map(|i| mass[i] * (potential[i] - mu).powi(2)).sum::<f64>() / total).sqrt();
        return Ok(UnstableDirection {
            field: PerturbationField::constant(n, 1.0),
            eigenvalue: mu,
            residual,
            round: true,
            asphericity: aspher,
        });
    }

    // −L ≈ M⁻¹(K − P); symmetrized as D(K − P)D with D = M^{-1/2}
    let d: Vec<f64> = mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let mut triplets = Vec::new();
    let mut diag: Vec<f64> = (0..n).map(|i| -potential[i] * mass[i]).collect();
    for ([a, b], w) in edge_weights(surface) {
        let mid = 0.5 * (v[a] + v[b]);
        let k = w * (-mid.norm_squared() / 4.0).exp();
        diag[a] += k;
        diag[b] += k;
        triplets.push((a, b, -k * d[a] * d[b]));
        triplets.push((b, a, -k * d[a] * d[b]));
    }
    triplets.extend(diag.iter().enumerate().map(|(i, x)| (i, i, x * d[i] * d[i])));
    let op = CsrMatrix::from_triplets(n, triplets);
    let pair = lanczos_smallest(&op, EIGEN_TOLERANCE, KRYLOV_DIM, MAX_RESTARTS)?;

    let mut f: Vec<f64> = pair.vector.iter().zip(&d).map(|(y, di)| y * di).collect();
    let sign = if f.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let sup = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    f.iter_mut().for_each(|x| *x *= sign / sup);
    let (lo, hi) = f.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if !(lo > 0.0) {
        return Err(Error::NotSignDefinite {
            min: lo,
            max: hi,
            spectrum: pair.spectrum.iter().map(|s| -s).collect(),
        });
    }
    Ok(UnstableDirection {
        field: PerturbationField::new(f),
        eigenvalue: -pair.value,
        residual: pair.residual,
        round: false,
        asphericity: aspher,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fixtures::{angenent_torus, ellipsoid, icosphere};
    use crate::Vec3;

    #[test]
    fn round_sphere_takes_constant_direction() {
        let u = unstable_direction(&icosphere(4, 2.0)).unwrap();
        assert!(u.round);
        assert!(u.field.values.iter().all(|&x| x == 1.0));
        assert!((u.eigenvalue - 1.0).abs() < 0.02, "{}", u.eigenvalue);
    }

    #[test]
    fn slightly_perturbed_sphere_still_round() {
        let s = icosphere(4, 2.0);
        let moved = s
            .vertices()
            .iter()
            .map(|p| p * (1.0 + 0.002 * (p.z / 2.0).powi(2)))
            .collect();
        let s = s.with_positions(moved).unwrap();
        assert!(asphericity(&s) > 0.0 && asphericity(&s) < ROUND_TOLERANCE);
        assert!(unstable_direction(&s).unwrap().round);
    }

    #[test]
    fn non_shrinkers_rejected() {
        let err = unstable_direction(&icosphere(3, 1.0)).unwrap_err();
        assert!(matches!(err, Error::NotShrinker { .. }));
        assert!(unstable_direction(&ellipsoid(3, [2.4, 2.0, 1.6])).is_err());
    }

    #[test]
    fn angenent_torus_has_positive_unstable_direction() {
        let s = angenent_torus(64, 64);
        let u = unstable_direction(&s).unwrap();
        assert!(!u.round);
        assert!(u.field.min() > 0.0);
        assert_eq!(u.field.sup_norm(), 1.0);
        assert!(u.residual < EIGEN_TOLERANCE);
        // H is an eigenfunction with eigenvalue 1 that changes sign here, so
        // the positive ground state lies strictly above it
        assert!(u.eigenvalue > 1.0, "{}", u.eigenvalue);
        // rotational symmetry: f depends on the profile point only
        let v = s.vertices();
        let rot = nalgebra::Rotation3::from_axis_angle(&Vec3::z_axis(), 2.0 * std::f64::consts::PI / 64.0);
        let moved = rot * v[0];
        let j = (0..v.len()).min_by(|&a, &b| (v[a] - moved).norm().total_cmp(&(v[b] - moved).norm())).unwrap();
        assert!((u.field.values[0] - u.field.values[j]).abs() < 1e-6);
    }

    #[test]
    fn eigenpair_matches_dense_oracle() {
        use crate::linalg::dense_smallest;
        let s = angenent_torus(24, 20);
        let u = unstable_direction(&s).unwrap();
        // rebuild the symmetric operator and compare the lowest eigenvalue
        let dq = differential_quantities(&s).unwrap();
        let v = s.vertices();
        let n = v.len();
        let mass: Vec<f64> = (0..n).map(|i| (-v[i].norm_squared() / 4.0).exp() * dq.voronoi_area[i]).collect();
        let mut dense = nalgebra::DMatrix::<f64>::zeros(n, n);
        for ([a, b], w) in edge_weights(&s) {
            let k = w * (-(0.5 * (v[a] + v[b])).norm_squared() / 4.0).exp();
            dense[(a, a)] += k;
            dense[(b, b)] += k;
            dense[(a, b)] -= k;
            dense[(b, a)] -= k;
        }
        for i in 0..n {
            dense[(i, i)] -= (dq.second_fundamental_sq[i] + 0.5) * mass[i];
        }
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if dense[(i, j)] != 0.0 {
                    t.push((i, j, dense[(i, j)] / (mass[i] * mass[j]).sqrt()));
                }
            }
        }
        let (lambda, _) = dense_smallest(&CsrMatrix::from_triplets(n, t));
        assert!((u.eigenvalue + lambda).abs() < 1e-8, "{} {}", u.eigenvalue, -lambda);
    }
}
