use crate::error::{Error, Result};
use crate::geometry::{check_embedded, DiscreteSurface, PerturbationField};
use crate::instability::isotopy::IsotopyParams;
use crate::layers::{LayerReport, Projector};

/// Applies the collar isotopy h(·, ε) to the highest layer of `surface`:
/// each of its vertices at height s over the foot point x moves to
/// v + εφ(s)f(x)n(x), with f and n interpolated on the reference. Other
/// vertices are copied unchanged.
pub fn perturb_top_layer(
    surface: &DiscreteSurface,
    layers: &LayerReport,
    reference: &DiscreteSurface,
    f: &PerturbationField,
    epsilon: f64,
    params: &IsotopyParams,
) -> Result<DiscreteSurface> {
    f.check_base(reference)?;
    if layers.multiplicity < 2 {
        return Err(Error::domain(format!("need at least two layers, found {}", layers.multiplicity)));
    }
    if layers.heights.len() != surface.n_vertices() {
        return Err(Error::domain("layer report does not describe this surface"));
    }
    if epsilon == 0.0 {
        return Ok(surface.clone());
    }
    if epsilon < 0.0 {
        return Err(Error::domain("the top layer moves outward only: epsilon must be nonnegative"));
    }
    let rv = reference.vertices();
    for (c, r) in &layers.exclusion {
        if let Some(i) = (0..rv.len()).find(|&i| f.values[i] != 0.0 && (rv[i] - c).norm() < *r) {
            return Err(Error::domain(format!("field is nonzero at reference vertex {i} inside an exclusion ball")));
        }
    }
    if f.min() < 0.0 {
        return Err(Error::domain("field must be nonnegative"));
    }
    let top = layers.top().expect("multiplicity checked");
    let s_max = top.vertex_ids.iter().map(|&i| layers.heights[i].abs()).fold(0.0, f64::max);
    if s_max > params.beta1 {
        return Err(Error::domain(format!(
            "top layer reaches height {s_max}, outside the collar half-width {}",
            params.beta1
        )));
    }
    params.admit(f.sup_norm(), epsilon)?;

    let projector = Projector::new(reference)?;
    let mut positions = surface.vertices().to_vec();
    for &i in &top.vertex_ids {
        let foot = projector.project(&positions[i]);
        let fx = projector.interpolate(&foot, &f.values);
        positions[i] += (epsilon * params.profile.value(foot.height) * fx) * foot.normal;
    }
    let out = surface.with_positions(positions)?;
    let report = check_embedded(&out);
    if let Some((a, b)) = report.intersection {
        return Err(Error::NotEmbedded(format!("cells {a} and {b} intersect after the perturbation")));
    }
    Ok(out)
}
