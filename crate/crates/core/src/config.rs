//! Run configuration read from `key = value` text.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::FlowScheme;
use crate::functionals::{EntropyOptions, ScaleWindow};
use crate::quadrature::QuadratureRule;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub quadrature: QuadratureRule,
    pub starts: usize,
    pub max_iters: usize,
    pub step_tol: f64,
    pub grid_scales: usize,
    pub grid_centers: usize,
    pub scheme: FlowScheme,
    pub dt: f64,
    pub window: ScaleWindow,
    /// Perturbation sizes tried by the pipeline, largest first.
    pub epsilon_ladder: Vec<f64>,
    /// Cutoff radii; the first one localizes the pipeline perturbation.
    pub r_ladder: Vec<f64>,
    /// No stage samples randomly at present; recorded for reproducibility.
    pub seed: u64,
    /// Normal spacing of the sheets in the pipeline fixture.
    pub sheet_gap: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub alpha: f64,
    pub singular_time: f64,
    /// Curvature concentration threshold ε0 (masses compare with ε0²).
    pub eps0: f64,
    /// Probe radius in mean edge lengths.
    pub probe_factor: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let o = EntropyOptions::default();
        Self {
            quadrature: o.rule,
            starts: o.starts,
            max_iters: o.max_iters,
            step_tol: o.step_tol,
            grid_scales: o.grid_scales,
            grid_centers: o.grid_centers,
            scheme: FlowScheme::Explicit,
            dt: 1e-3,
            window: ScaleWindow { a: 0.25, b: None },
            epsilon_ladder: vec![0.1, 0.05, 0.02],
            r_ladder: vec![0.3, 0.2, 0.1],
            seed: 0,
            sheet_gap: 0.05,
            beta1: 0.1,
            beta2: 0.4,
            alpha: 1.0,
            singular_time: 1.0,
            eps0: 3.0,
            probe_factor: crate::layers::DEFAULT_PROBE_FACTOR,
        }
    }
}

impl RunConfig {
    /// Defaults overridden by the `key = value` lines of `text`. Blank lines
    /// and `#` comments are ignored; lists are comma separated and the window
    /// is `a, b` with `inf` allowed for b.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap().trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { line, message };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected 'key = value', got '{content}'")))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| v.trim().parse::<f64>().map_err(|_| err(format!("'{v}' is not a number")));
            let int = |v: &str| v.trim().parse::<usize>().map_err(|_| err(format!("'{v}' is not an integer")));
            let list = |v: &str| v.split(',').map(num).collect::<Result<Vec<f64>>>();
            match key {
                "quadrature" => {
                    c.quadrature = match value {
                        "3" => QuadratureRule::ThreePoint,
                        "6" => QuadratureRule::SixPoint,
                        _ => return Err(err(format!("quadrature must be 3 or 6, got '{value}'"))),
                    }
                }
                "starts" => c.starts = int(value)?,
                "max_iters" => c.max_iters = int(value)?,
                "step_tol" => c.step_tol = num(value)?,
                "grid_scales" => c.grid_scales = int(value)?,
                "grid_centers" => c.grid_centers = int(value)?,
                "scheme" => c.scheme = value.parse().map_err(|e: Error| err(e.to_string()))?,
                "dt" => c.dt = num(value)?,
                "window" => {
                    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                    let [a, b] = parts[..] else {
                        return Err(err("window needs two values 'a, b'".into()));
                    };
                    let b = if b == "inf" { None } else { Some(num(b)?) };
                    c.window = ScaleWindow::new(num(a)?, b).map_err(|e| err(e.to_string()))?;
                }
                "epsilon_ladder" => c.epsilon_ladder = list(value)?,
                "r_ladder" => c.r_ladder = list(value)?,
                "seed" => c.seed = value.parse().map_err(|_| err(format!("'{value}' is not a seed")))?,
                "sheet_gap" => c.sheet_gap = num(value)?,
                "beta1" => c.beta1 = num(value)?,
                "beta2" => c.beta2 = num(value)?,
                "alpha" => c.alpha = num(value)?,
                "singular_time" => c.singular_time = num(value)?,
                "eps0" => c.eps0 = num(value)?,
                "probe_factor" => c.probe_factor = num(value)?,
                other => return Err(err(format!("unknown key '{other}'"))),
            }
        }
        c.validate()?;
        Ok(c)
    }

    /// Positivity of every tolerance, size and ladder entry.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("step_tol", self.step_tol),
            ("dt", self.dt),
            ("sheet_gap", self.sheet_gap),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("alpha", self.alpha),
            ("eps0", self.eps0),
            ("probe_factor", self.probe_factor),
        ];
        if let Some((k, v)) = positive.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::domain(format!("{k} must be positive, got {v}")));
        }
        if self.starts == 0 || self.max_iters == 0 || self.grid_scales == 0 || self.grid_centers == 0 {
            return Err(Error::domain("optimizer counts must be positive"));
        }
        if self.epsilon_ladder.is_empty() || self.epsilon_ladder.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::domain("epsilon_ladder needs positive entries"));
        }
        if self.r_ladder.is_empty() || self.r_ladder.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::domain("r_ladder needs positive entries"));
        }
        if !(self.beta1 < self.beta2) {
            return Err(Error::domain("beta1 must be below beta2"));
        }
        Ok(())
    }

    pub fn entropy_options(&self) -> EntropyOptions {
        EntropyOptions {
            rule: self.quadrature,
            starts: self.starts,
            max_iters: self.max_iters,
            step_tol: self.step_tol,
            grid_scales: self.grid_scales,
            grid_centers: self.grid_centers,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(RunConfig::parse("# nothing\n\n").unwrap(), RunConfig::default());
    }

    #[test]
    fn overrides() {
        let c = RunConfig::parse("quadrature = 6\nwindow = 0.5, 2\nepsilon_ladder = 0.2, 0.1 # tried in order\nscheme = semi-implicit\nseed = 7").unwrap();
        assert_eq!(c.quadrature, QuadratureRule::SixPoint);
        assert_eq!(c.window, ScaleWindow::bounded(0.5, 2.0).unwrap());
        assert_eq!(c.epsilon_ladder, vec![0.2, 0.1]);
        assert_eq!(c.scheme, FlowScheme::SemiImplicit);
        assert_eq!(c.seed, 7);
        assert_eq!(c.entropy_options().rule, QuadratureRule::SixPoint);
    }

    #[test]
    fn errors_carry_line_numbers() {
        match RunConfig::parse("dt = 1e-3\n\nbogus = 1").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("{e}"),
        }
        assert!(matches!(RunConfig::parse("dt 0.1").unwrap_err(), Error::Parse { line: 1, .. }));
        assert!(matches!(RunConfig::parse("starts = -3").unwrap_err(), Error::Parse { .. }));
        assert!(matches!(RunConfig::parse("dt = -1").unwrap_err(), Error::Domain(_)));
        assert!(RunConfig::parse("beta1 = 0.5").is_err());
    }
}
