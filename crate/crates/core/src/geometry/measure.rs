use crate::error::{Error, Result};
use crate::geometry::{DiscreteSurface, Vec3};

/// The discrete Radon measure μ = Σ mᵢ Σᵢ: surfaces with positive integer
/// multiplicities. Multiplicity is a weight, never duplicated geometry.
#[derive(Clone, Debug)]
pub struct WeightedSurfaceMeasure {
    components: Vec<(DiscreteSurface, u32)>,
}

impl WeightedSurfaceMeasure {
    pub fn new(components: Vec<(DiscreteSurface, u32)>) -> Result<Self> {
        if let Some(i) = components.iter().position(|(_, m)| *m == 0) {
            return Err(Error::domain(format!("component {i} has multiplicity 0")));
        }
        if let Some((first, _)) = components.first() {
            let dim = first.dimension();
            if components.iter().any(|(s, _)| s.dimension() != dim) {
                return Err(Error::domain("components must share one dimension"));
            }
        }
        Ok(Self { components })
    }

    pub fn single(surface: DiscreteSurface, multiplicity: u32) -> Result<Self> {
        Self::new(vec![(surface, multiplicity)])
    }

    pub fn components(&self) -> &[(DiscreteSurface, u32)] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty() || self.components.iter().all(|(s, _)| s.n_cells() == 0)
    }

    pub fn dimension(&self) -> usize {
        self.components.first().map(|(s, _)| s.dimension()).unwrap_or(2)
    }

    /// Σ mᵢ · area(Σᵢ).
    pub fn total_area(&self) -> f64 {
        self.components.iter().map(|(s, m)| *m as f64 * s.area()).sum()
    }

    pub fn bounding_box(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for (s, _) in &self.components {
            let (a, b) = s.bounding_box();
            lo = lo.inf(&a);
            hi = hi.sup(&b);
        }
        (lo, hi)
    }

    /// Multiplicity-weighted area centroid.
    pub fn centroid(&self) -> Vec3 {
        let mut c = Vec3::zeros();
        let mut w = 0.0;
        for (s, m) in &self.components {
            let a = *m as f64 * s.area();
            c += a * s.area_centroid();
            w += a;
        }
        c / w
    }

    /// Greatest common divisor of the multiplicities.
    pub fn multiplicity_gcd(&self) -> u32 {
        fn gcd(a: u32, b: u32) -> u32 {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        self.components.iter().fold(0, |g, (_, m)| gcd(g, *m))
    }

    /// Same geometry with every multiplicity divided by `k`.
    pub(crate) fn divided(&self, k: u32) -> Self {
        Self {
            components: self
                .components
                .iter()
                .map(|(s, m)| (s.clone(), m / k))
                .collect(),
        }
    }

    /// Applies x ↦ scale·(x − shift) to every component.
    pub fn rescaled(&self, scale: f64, shift: &Vec3) -> Self {
        Self {
            components: self
                .components
                .iter()
                .map(|(s, m)| (s.rescaled(scale, shift), *m))
                .collect(),
        }
    }

    /// Sum of two measures.
    pub fn plus(&self, other: &Self) -> Result<Self> {
        let mut c = self.components.clone();
        c.extend(other.components.iter().cloned());
        Self::new(c)
    }
}

impl From<DiscreteSurface> for WeightedSurfaceMeasure {
    fn from(s: DiscreteSurface) -> Self {
        Self {
            components: vec![(s, 1)],
        }
    }
}
