//! Local-entropy barriers: if λ^{[aα⁻², bα⁻²]}(M_{T−α⁻²}) < λ(mΣ), the flow
//! has no tangent flow of entropy λ(mΣ) at (·, t) for t in
//! [T + (a−1)α⁻², T + (b−1)α⁻²] (with b = ∞ allowed). Certificates are
//! computed on the discrete surface and inherit its discretization error.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::{local_entropy, EntropyOptions, EntropyWitness, ScaleWindow, SpatialDomain};
use crate::geometry::WeightedSurfaceMeasure;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Excluded,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct BarrierCertificate {
    /// The scaled window [aα⁻², bα⁻²] the local entropy was taken over.
    pub window: ScaleWindow,
    pub value: f64,
    pub target: f64,
    pub verdict: Verdict,
    /// Time interval free of such tangent flows; present when excluded.
    #[serde(serialize_with = "serialize_interval")]
    pub excluded: Option<(f64, Option<f64>)>,
    #[serde(skip)]
    pub witness: EntropyWitness,
}

fn serialize_interval<S: serde::Serializer>(v: &Option<(f64, Option<f64>)>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    match v {
        None => s.serialize_none(),
        Some((lo, hi)) => {
            let mut seq = s.serialize_seq(Some(2))?;
            seq.serialize_element(lo)?;
            match hi {
                Some(h) => seq.serialize_element(h)?,
                None => seq.serialize_element("inf")?,
            }
            seq.end()
        }
    }
}

/// `measure` is the slice M at time T − α⁻²; `window` is the unscaled
/// [a, b] with 0 < a < 1 < b (or b = ∞).
pub fn barrier_certificate(
    measure: &WeightedSurfaceMeasure,
    singular_time: f64,
    alpha: f64,
    window: &ScaleWindow,
    lambda_target: f64,
    opts: &EntropyOptions,
) -> Result<BarrierCertificate> {
    if !(alpha > 0.0) {
        return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
    }
    if !(window.a > 0.0 && window.a < 1.0) || window.b.is_some_and(|b| b <= 1.0) {
        return Err(Error::domain("barrier window needs 0 < a < 1 < b"));
    }
    if !(lambda_target > 1.0) {
        return Err(Error::domain("target entropy must exceed 1"));
    }
    let s = 1.0 / (alpha * alpha);
    let scaled = ScaleWindow::new(window.a * s, window.b.map(|b| b * s))?;
    let witness = local_entropy(measure, &scaled, &SpatialDomain::All, opts)?;
    let excluded_flag = witness.value < lambda_target;
    let excluded = excluded_flag.then(|| {
        (
            singular_time + (window.a - 1.0) * s,
            window.b.map(|b| singular_time + (b - 1.0) * s),
        )
    });
    Ok(BarrierCertificate {
        window: scaled,
        value: witness.value,
        target: lambda_target,
        verdict: if excluded_flag { Verdict::Excluded } else { Verdict::Inconclusive },
        excluded,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fixtures::icosphere;
    use std::f64::consts::E;

    #[test]
    fn single_sphere_excludes_double_sphere() {
        let mu: WeightedSurfaceMeasure = icosphere(3, 2.0).into();
        let w = ScaleWindow::unbounded(0.25).unwrap();
        let c = barrier_certificate(&mu, 1.0, 1.0, &w, 8.0 / E, &EntropyOptions::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Excluded);
        assert_eq!(c.excluded, Some((0.25, None)));
        let json = serde_json::to_value(&c).unwrap();
        assert_eq!(json["excluded"][1], "inf");
        assert_eq!(json["verdict"], "excluded");
    }

    #[test]
    fn high_entropy_is_inconclusive() {
        let mu = WeightedSurfaceMeasure::single(icosphere(3, 2.0), 2).unwrap();
        let w = ScaleWindow::bounded(0.5, 2.0).unwrap();
        let c = barrier_certificate(&mu, 1.0, 1.0, &w, 1.2, &EntropyOptions::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
        assert!(c.excluded.is_none());
    }

    #[test]
    fn malformed_windows_rejected() {
        let mu: WeightedSurfaceMeasure = icosphere(1, 2.0).into();
        let o = EntropyOptions::default();
        assert!(barrier_certificate(&mu, 1.0, 1.0, &ScaleWindow::unbounded(1.5).unwrap(), 3.0, &o).is_err());
        assert!(barrier_certificate(&mu, 1.0, 1.0, &ScaleWindow::bounded(0.5, 0.9).unwrap(), 3.0, &o).is_err());
        assert!(barrier_certificate(&mu, 1.0, 1.0, &ScaleWindow::unbounded(0.5).unwrap(), 0.9, &o).is_err());
    }
}
