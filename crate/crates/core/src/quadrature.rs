//! Per-cell quadrature rules and precomputed quadrature clouds.

use serde::{Deserialize, Serialize};

use crate::geometry::{Cells, DiscreteSurface, Vec3};

/// Quadrature order selector. On triangles: the symmetric 3-point rule
/// (exact for degree 2) or the 6-point Dunavant rule (degree 4). On segments
/// the same names select 3- and 6-point Gauss–Legendre.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureRule {
    #[default]
    ThreePoint,
    SixPoint,
}

impl QuadratureRule {
    /// Barycentric points and weights (weights sum to 1).
    pub fn triangle_rule(self) -> Vec<([f64; 3], f64)> {
        match self {
            QuadratureRule::ThreePoint => {
                let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
                vec![([a, b, b], 1.0 / 3.0), ([b, a, b], 1.0 / 3.0), ([b, b, a], 1.0 / 3.0)]
            }
            QuadratureRule::SixPoint => {
                let (a1, b1, w1) = (0.816_847_572_980_459, 0.091_576_213_509_771, 0.109_951_743_655_322);
                let (a2, b2, w2) = (0.108_103_018_168_070, 0.445_948_490_915_965, 0.223_381_589_678_011);
                vec![
                    ([a1, b1, b1], w1),
                    ([b1, a1, b1], w1),
                    ([b1, b1, a1], w1),
                    ([a2, b2, b2], w2),
                    ([b2, a2, b2], w2),
                    ([b2, b2, a2], w2),
                ]
            }
        }
    }

    /// Parameters in [0,1] and weights (summing to 1) on a segment.
    pub fn segment_rule(self) -> Vec<(f64, f64)> {
        let (nodes, weights): (&[f64], &[f64]) = match self {
            QuadratureRule::ThreePoint => (
                &[-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4],
                &[5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0],
            ),
            QuadratureRule::SixPoint => (
                &[
                    -0.932_469_514_203_152,
                    -0.661_209_386_466_264_5,
                    -0.238_619_186_083_196_9,
                    0.238_619_186_083_196_9,
                    0.661_209_386_466_264_5,
                    0.932_469_514_203_152,
                ],
                &[
                    0.171_324_492_379_170_3,
                    0.360_761_573_048_138_6,
                    0.467_913_934_572_691,
                    0.467_913_934_572_691,
                    0.360_761_573_048_138_6,
                    0.171_324_492_379_170_3,
                ],
            ),
        };
        nodes
            .iter()
            .zip(weights)
            .map(|(&x, &w)| (0.5 * (x + 1.0), 0.5 * w))
            .collect()
    }
}

/// Quadrature points of one surface with absolute weights (cell measure ×
/// rule weight).
#[derive(Clone, Debug)]
pub struct QuadratureCloud {
    pub points: Vec<Vec3>,
    pub weights: Vec<f64>,
}

impl QuadratureCloud {
    pub fn new(surface: &DiscreteSurface, rule: QuadratureRule) -> Self {
        let v = surface.vertices();
        let mut points = Vec::new();
        let mut weights = Vec::new();
        match surface.cells() {
            Cells::Triangles(tris) => {
                let r = rule.triangle_rule();
                for (i, t) in tris.iter().enumerate() {
                    let area = surface.triangle_area(i);
                    for (bary, w) in &r {
                        points.push(bary[0] * v[t[0]] + bary[1] * v[t[1]] + bary[2] * v[t[2]]);
                        weights.push(w * area);
                    }
                }
            }
            Cells::Segments(segs) => {
                let r = rule.segment_rule();
                for s in segs {
                    let (a, b) = (v[s[0]], v[s[1]]);
                    let len = (b - a).norm();
                    for &(u, w) in &r {
                        points.push(a + u * (b - a));
                        weights.push(w * len);
                    }
                }
            }
        }
        Self { points, weights }
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_rules_integrate_polynomials() {
        // ∫_T x² over the reference triangle (0,0),(1,0),(0,1) equals 1/12
        for (rule, deg) in [(QuadratureRule::ThreePoint, 2), (QuadratureRule::SixPoint, 4)] {
            let r = rule.triangle_rule();
            let wsum: f64 = r.iter().map(|(_, w)| w).sum();
            assert!((wsum - 1.0).abs() < 1e-12);
            let x2: f64 = r.iter().map(|(b, w)| w * b[1] * b[1]).sum::<f64>() * 0.5;
            assert!((x2 - 1.0 / 12.0).abs() < 1e-12, "{rule:?}");
            if deg >= 4 {
                // ∫ x⁴ = 1/30, ∫ x²y² = 1/180
                let x4: f64 = r.iter().map(|(b, w)| w * b[1].powi(4)).sum::<f64>() * 0.5;
                let x2y2: f64 = r.iter().map(|(b, w)| w * (b[1] * b[2]).powi(2)).sum::<f64>() * 0.5;
                assert!((x4 - 1.0 / 30.0).abs() < 1e-12);
                assert!((x2y2 - 1.0 / 180.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn segment_rules_integrate_polynomials() {
        for rule in [QuadratureRule::ThreePoint, QuadratureRule::SixPoint] {
            let r = rule.segment_rule();
            let x5: f64 = r.iter().map(|(u, w)| w * u.powi(5)).sum();
            assert!((x5 - 1.0 / 6.0).abs() < 1e-12);
        }
    }
}
