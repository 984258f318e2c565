use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::{entropy, local_entropy, EntropyOptions, ScaleWindow, SpatialDomain};
use crate::geometry::{build_normal_graph, check_embedded, DiscreteSurface, PerturbationField, WeightedSurfaceMeasure};

#[derive(Clone, Debug, Serialize)]
pub struct DropReport {
    /// λ(mΣ).
    pub lambda_base: f64,
    /// λ((m−1)Σ + Σ_{εf}), or its local entropy over `window`.
    pub lambda_pert: f64,
    pub margin: f64,
    pub epsilon: f64,
    pub window: Option<ScaleWindow>,
}

/// Compares the entropy of mΣ with that of (m−1)Σ + Σ_{εf}.
pub fn verify_entropy_drop(
    surface: &DiscreteSurface,
    m: u32,
    f: &PerturbationField,
    epsilon: f64,
    window: Option<&ScaleWindow>,
    opts: &EntropyOptions,
) -> Result<DropReport> {
    if m < 2 {
        return Err(Error::domain(format!("multiplicity must be at least 2, got {m}")));
    }
    let graph = build_normal_graph(surface, f, epsilon)?;
    let base = WeightedSurfaceMeasure::single(surface.clone(), m)?;
    let lambda_base = entropy(&base, opts)?.value;
    // an unmoved graph is the same measure, not a sum of two copies
    let pert = if graph.vertices() == surface.vertices() {
        base
    } else {
        WeightedSurfaceMeasure::new(vec![(surface.clone(), m - 1), (graph, 1)])?
    };
    let lambda_pert = match window {
        Some(w) => local_entropy(&pert, w, &SpatialDomain::All, opts)?.value,
        None => entropy(&pert, opts)?.value,
    };
    Ok(DropReport {
        lambda_base,
        lambda_pert,
        margin: lambda_base - lambda_pert,
        epsilon,
        window: window.copied(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LadderEntry {
    pub epsilon: f64,
    pub report: Option<DropReport>,
    /// Whether the graph Σ_{εf} is embedded.
    pub embedded: bool,
    pub error: Option<String>,
}

impl LadderEntry {
    pub fn works(&self) -> bool {
        self.embedded && self.report.as_ref().is_some_and(|r| r.margin > 0.0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DropLadder {
    /// In the order given.
    pub entries: Vec<LadderEntry>,
    /// Largest ε with positive margin and an embedded graph.
    pub largest_working: Option<f64>,
    /// Margins decrease along decreasing ε.
    pub monotone: bool,
}

/// Runs the drop check for each ε in parallel.
pub fn entropy_drop_ladder(
    surface: &DiscreteSurface,
    m: u32,
    f: &PerturbationField,
    ladder: &[f64],
    window: Option<&ScaleWindow>,
    opts: &EntropyOptions,
) -> Result<DropLadder> {
    if m < 2 {
        return Err(Error::domain(format!("multiplicity must be at least 2, got {m}")));
    }
    let entries: Vec<LadderEntry> = ladder
        .par_iter()
        .map(|&eps| {
            let embedded = build_normal_graph(surface, f, eps).is_ok_and(|g| check_embedded(&g).embedded);
            match verify_entropy_drop(surface, m, f, eps, window, opts) {
                Ok(r) => LadderEntry {
                    epsilon: eps,
                    report: Some(r),
                    embedded,
                    error: None,
                },
                Err(e) => LadderEntry {
                    epsilon: eps,
                    report: None,
                    embedded,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let largest_working = entries
        .iter()
        .filter(|e| e.works())
        .map(|e| e.epsilon)
        .fold(None, |best: Option<f64>, x| Some(best.map_or(x, |b| b.max(x))));
    let mut margins: Vec<(f64, f64)> = entries
        .iter()
        .filter_map(|e| e.report.as_ref().map(|r| (e.epsilon, r.margin)))
        .collect();
    margins.sort_by(|a, b| b.0.total_cmp(&a.0));
    let monotone = margins.windows(2).all(|w| w[1].1 < w[0].1);
    Ok(DropLadder {
        entries,
        largest_working,
        monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fixtures::icosphere;
    use std::f64::consts::E;

    #[test]
    fn two_sheet_sphere_drop() {
        let s = icosphere(3, 2.0);
        let f = PerturbationField::constant(s.n_vertices(), 1.0);
        let o = EntropyOptions::default();
        let r = verify_entropy_drop(&s, 2, &f, 0.1, None, &o).unwrap();
        assert!((r.lambda_base - 8.0 / E).abs() < 0.01 * 8.0 / E);
        assert!(r.margin > 0.0);
        // second-order estimate ε²/e
        assert!((r.margin - 0.01 / E).abs() < 0.3 * 0.01 / E, "{}", r.margin);
    }

    #[test]
    fn zero_epsilon_has_zero_margin() {
        let s = icosphere(2, 2.0);
        let f = PerturbationField::constant(s.n_vertices(), 1.0);
        let r = verify_entropy_drop(&s, 3, &f, 0.0, None, &EntropyOptions::default()).unwrap();
        assert_eq!(r.margin, 0.0);
    }

    #[test]
    fn preconditions() {
        let s = icosphere(2, 2.0);
        let f = PerturbationField::constant(s.n_vertices(), 1.0);
        let o = EntropyOptions::default();
        assert!(verify_entropy_drop(&s, 1, &f, 0.1, None, &o).is_err());
        let err = verify_entropy_drop(&s, 2, &f, 3.0, None, &o).unwrap_err();
        assert!(matches!(err, Error::ReachViolation { .. }));
    }

    #[test]
    fn ladder_is_monotone() {
        let s = icosphere(3, 2.0);
        let f = PerturbationField::constant(s.n_vertices(), 1.0);
        let w = ScaleWindow::unbounded(0.25).unwrap();
        let lad = entropy_drop_ladder(&s, 2, &f, &[0.2, 0.1, 0.05, 5.0], Some(&w), &EntropyOptions::default()).unwrap();
        assert!(lad.monotone);
        assert_eq!(lad.largest_working, Some(0.2));
        assert!(lad.entries[3].error.is_some());
        let json = serde_json::to_value(&lad.entries[0].report).unwrap();
        assert_eq!(json["window"][1], "inf");
    }
}
