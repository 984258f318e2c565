//! The perturb-then-certify chain on an m-sheet slice over a shrinker:
//! unstable direction, localization, top-layer isotopy, entropy drop,
//! local-entropy barrier and the inscribed-ball extinction bound.

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::flow::{barrier_certificate, extinction_lower_bound, BarrierCertificate, ExtinctionBound};
use crate::functionals::entropy;
use crate::geometry::{build_normal_graph, shrinker_residual, DiscreteSurface, PerturbationField, WeightedSurfaceMeasure};
use crate::instability::{
    entropy_drop_ladder, graph_area_defect, localize_field, perturb_top_layer, unstable_direction, CutoffSpec,
    DropLadder, DropReport, IsotopyParams,
};
use crate::layers::{curvature_concentration, sheet_decomposition, Concentration, Projector};

/// Exclusion balls use this fraction of the cutoff radius, so that the
/// Euclidean ball stays inside the geodesic zero set of the cutoff.
pub const EXCLUSION_FRACTION: f64 = 0.8;

#[derive(Clone, Debug, Default, Serialize)]
pub struct PipelineReport {
    pub multiplicity: u32,
    pub config: Option<RunConfig>,
    pub reference: Option<ReferenceSummary>,
    pub direction: Option<DirectionSummary>,
    pub cutoff: Option<CutoffSummary>,
    pub layers: Option<LayerSummary>,
    pub ladder: Option<DropLadder>,
    pub drop: Option<DropReport>,
    pub perturbed_vertices: Option<usize>,
    pub certificate: Option<BarrierCertificate>,
    pub extinction: Option<ExtinctionBound>,
    pub margin_positive: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReferenceSummary {
    pub vertices: usize,
    pub shrinker_residual: f64,
    /// λ(Σ) on this discretization.
    pub entropy: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DirectionSummary {
    pub eigenvalue: f64,
    pub residual: f64,
    pub round: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CutoffSummary {
    /// Reference vertices the cutoff is centred on.
    pub points: Vec<usize>,
    /// Whether the points came from curvature concentration.
    pub detected: bool,
    pub radius: f64,
    /// (r, graph area defect at the chosen ε) over the r-ladder.
    pub area_defects: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LayerSummary {
    pub multiplicity: usize,
    pub concentration: Vec<Concentration>,
    pub excluded_fraction: f64,
    pub mean_heights: Vec<f64>,
}

/// A failed run: the stage error plus everything computed before it.
#[derive(Debug)]
pub struct PipelineFailure {
    pub partial: PipelineReport,
    pub error: Error,
}

/// `m` sheets at normal offsets 0, gap, …, (m−1)·gap over the reference.
pub fn sheet_fixture(reference: &DiscreteSurface, m: u32, gap: f64) -> Result<DiscreteSurface> {
    let sheets = (0..m)
        .map(|k| {
            let f = PerturbationField::constant(reference.n_vertices(), k as f64 * gap);
            build_normal_graph(reference, &f, 1.0)
        })
        .collect::<Result<Vec<_>>>()?;
    DiscreteSurface::merge(&sheets.iter().collect::<Vec<_>>())
}

pub fn run_pipeline(
    reference: &DiscreteSurface,
    m: u32,
    config: &RunConfig,
) -> std::result::Result<PipelineReport, PipelineFailure> {
    let mut report = PipelineReport {
        multiplicity: m,
        config: Some(config.clone()),
        ..Default::default()
    };
    match stages(reference, m, config, &mut report) {
        Ok(()) => Ok(report),
        Err(error) => Err(PipelineFailure { partial: report, error }),
    }
}

fn stages(reference: &DiscreteSurface, m: u32, config: &RunConfig, report: &mut PipelineReport) -> Result<()> {
    if m < 2 {
        return Err(Error::domain(format!("the pipeline needs multiplicity m >= 2, got {m}")));
    }
    let window = config.window;
    if !(window.a < 1.0) {
        return Err(Error::domain(format!("window start a = {} must lie in (0, 1)", window.a)));
    }
    config.validate()?;
    let opts = config.entropy_options();

    let stage = "reference";
    let residual = shrinker_residual(reference).map_err(|e| e.at_stage(stage))?;
    let lambda_ref = entropy(&reference.clone().into(), &opts).map_err(|e| e.at_stage(stage))?.value;
    report.reference = Some(ReferenceSummary {
        vertices: reference.n_vertices(),
        shrinker_residual: residual.gaussian_l2,
        entropy: lambda_ref,
    });

    let stage = "fixture";
    let fixture = sheet_fixture(reference, m, config.sheet_gap).map_err(|e| e.at_stage(stage))?;

    let stage = "unstable_direction";
    let direction = unstable_direction(reference).map_err(|e| e.at_stage(stage))?;
    report.direction = Some(DirectionSummary {
        eigenvalue: direction.eigenvalue,
        residual: direction.residual,
        round: direction.round,
    });

    let stage = "concentration";
    let probe = config.probe_factor * fixture.mean_edge_length();
    let found = curvature_concentration(&fixture, config.eps0, probe).map_err(|e| e.at_stage(stage))?;
    let projector = Projector::new(reference).map_err(|e| e.at_stage(stage))?;
    let detected = !found.is_empty();
    let mut points: Vec<usize> = if detected {
        found
            .iter()
            .map(|c| {
                let foot = projector.project(&c.center());
                let t = reference.triangles()[foot.triangle];
                let k = (0..3).max_by(|&a, &b| foot.barycentric[a].total_cmp(&foot.barycentric[b])).unwrap();
                t[k]
            })
            .collect()
    } else {
        // no spike on a smooth fixture: mark the two extreme vertices in z
        let v = reference.vertices();
        let top = (0..v.len()).max_by(|&a, &b| v[a].z.total_cmp(&v[b].z).then(b.cmp(&a))).unwrap();
        let bottom = (0..v.len()).min_by(|&a, &b| v[a].z.total_cmp(&v[b].z).then(a.cmp(&b))).unwrap();
        vec![top, bottom]
    };
    points.dedup();

    let stage = "localize_field";
    let radius = config.r_ladder[0];
    let spec = CutoffSpec::new(points.clone(), radius);
    let f = localize_field(reference, &direction.field, &spec).map_err(|e| e.at_stage(stage))?;

    let stage = "sheet_decomposition";
    let rv = reference.vertices();
    let exclusion: Vec<_> = points.iter().map(|&p| (rv[p], EXCLUSION_FRACTION * radius)).collect();
    let mut layers = sheet_decomposition(&fixture, reference, &exclusion).map_err(|e| e.at_stage(stage))?;
    layers.concentration = found;
    report.layers = Some(LayerSummary {
        multiplicity: layers.multiplicity,
        concentration: layers.concentration.clone(),
        excluded_fraction: layers.excluded_fraction,
        mean_heights: layers.layers.iter().map(|l| l.mean_height).collect(),
    });
    if layers.multiplicity != m as usize {
        return Err(Error::domain(format!("found {} layers, expected {m}", layers.multiplicity)).at_stage(stage));
    }

    let stage = "verify_entropy_drop";
    let params = IsotopyParams::new(config.beta1, config.beta2).map_err(|e| e.at_stage(stage))?;
    let ladder = entropy_drop_ladder(reference, m, &f, &config.epsilon_ladder, Some(&window), &opts)
        .map_err(|e| e.at_stage(stage))?;
    let chosen = ladder
        .entries
        .iter()
        .filter(|e| e.works() && params.admit(f.sup_norm(), e.epsilon).is_ok())
        .max_by(|a, b| a.epsilon.total_cmp(&b.epsilon))
        .and_then(|e| e.report.clone());
    report.ladder = Some(ladder);
    let drop = chosen.ok_or_else(|| Error::domain("no epsilon in the ladder gives a positive margin inside the collar").at_stage(stage))?;
    let epsilon = drop.epsilon;
    report.margin_positive = Some(drop.margin > 0.0);
    report.drop = Some(drop.clone());

    report.cutoff = Some(CutoffSummary {
        points: points.clone(),
        detected,
        radius,
        area_defects: config
            .r_ladder
            .iter()
            .map(|&r| {
                let fr = localize_field(reference, &direction.field, &CutoffSpec::new(points.clone(), r))?;
                Ok((r, graph_area_defect(reference, &direction.field, &fr, epsilon)?))
            })
            .collect::<Result<_>>()
            .map_err(|e| e.at_stage("localize_field"))?,
    });

    let stage = "perturb_top_layer";
    let perturbed =
        perturb_top_layer(&fixture, &layers, reference, &f, epsilon, &params).map_err(|e| e.at_stage(stage))?;
    report.perturbed_vertices = Some(perturbed.n_vertices());

    let stage = "barrier_certificate";
    let measure: WeightedSurfaceMeasure = perturbed.clone().into();
    let certificate = barrier_certificate(
        &measure,
        config.singular_time,
        config.alpha,
        &window,
        drop.lambda_base,
        &opts,
    )
    .map_err(|e| e.at_stage(stage))?;
    report.certificate = Some(certificate);

    let stage = "extinction_lower_bound";
    report.extinction = Some(extinction_lower_bound(&perturbed).map_err(|e| e.at_stage(stage))?);
    Ok(())
}
