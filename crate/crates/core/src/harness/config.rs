//! Experiment configuration: a flat TOML file with optional sections.
//!
//! ```toml
//! [experiment]
//! family = "fsm"
//! optimizers = ["sag", "saga"]
//! iterations = 200
//! seeds = 100
//!
//! [problem]
//! kappa = 100.0
//! n = 8
//! d = 4
//! ```

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::approx_bounds::ProblemParams;
use crate::instances::Family;
use crate::optimizers::{Metric, OptParams, Sampling, OPTIMIZER_NAMES};

use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub family: String,
    pub optimizers: Vec<String>,
    pub iterations: usize,
    pub seeds: usize,
    pub output_dir: String,
    pub sampling: Sampling,
    /// Error measure for `run`; `envelope` picks the one its bound is
    /// stated in.
    pub metric: Metric,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            family: "fsm".into(),
            optimizers: vec!["sag".into()],
            iterations: 200,
            seeds: 100,
            output_dir: "out".into(),
            sampling: Sampling::WithReplacement,
            metric: Metric::Suboptimality,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemSection {
    pub l: Option<f64>,
    pub mu: f64,
    /// Alternative to `l`: `L = kappa * mu`. With neither set, kappa is 100.
    pub kappa: Option<f64>,
    pub n: usize,
    pub d: usize,
    pub r: f64,
    pub lambda: f64,
    pub eps: f64,
    pub alpha: f64,
    /// Swept component (fsm) or angle pair (rlm).
    pub coordinate: usize,
    pub memory: usize,
}

impl Default for ProblemSection {
    fn default() -> Self {
        ProblemSection {
            l: None,
            mu: 1.0,
            kappa: None,
            n: 8,
            d: 4,
            r: 1.0,
            lambda: 0.01,
            eps: 1e-3,
            alpha: -0.5,
            coordinate: 0,
            memory: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    /// Swept parameter values per family.
    pub points: usize,
    /// Grid sizes for the brute-force approximation solvers.
    pub uniform: usize,
    pub l1: usize,
    pub k_max: usize,
    /// Sample points for the iterate-polynomial figure.
    pub fig2: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            points: 9,
            uniform: crate::approx_oracle::DEFAULT_UNIFORM_GRID,
            l1: crate::approx_oracle::DEFAULT_L1_GRID,
            k_max: 8,
            fig2: 1025,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig1Section {
    pub d: usize,
    pub kappa: f64,
    pub mu: f64,
    pub iterations: usize,
    pub memory: usize,
    /// Log-linear fits use `k` in `[fit_start, fit_end]`.
    pub fit_start: usize,
    pub fit_end: usize,
    /// The momentum-method slope is fitted on `[fit_start, slope_end]`.
    pub slope_end: usize,
    /// Errors below this are rounding noise and are left out of fits.
    pub floor: f64,
}

impl Default for Fig1Section {
    fn default() -> Self {
        Fig1Section {
            d: 200,
            kappa: 200.0,
            mu: 1.0,
            iterations: 400,
            memory: 100,
            fit_start: 50,
            fit_end: 400,
            slope_end: 300,
            floor: 1e-20,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvelopeSection {
    /// Envelope prefactor. Unset means the family's default constant:
    /// `(mu/2)(n R mu/(sqrt2 (L-mu)))^2` for fsm, `lambda n/2` for rlm.
    pub prefactor: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub problem: ProblemSection,
    pub grid: GridSection,
    pub fig1: Fig1Section,
    pub envelope: EnvelopeSection,
}

/// 1-based line of the `key =` assignment inside `[section]`.
fn line_of(src: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = "";
    for (i, line) in src.lines().enumerate() {
        let t = line.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            current = name.trim();
            continue;
        }
        let assigns = t
            .strip_prefix(key)
            .map(|rest| rest.trim_start().starts_with('='))
            .unwrap_or(false);
        if current == section && assigns {
            return Some(i + 1);
        }
    }
    None
}

fn config_error(src: &str, section: &str, key: &str, msg: impl Into<String>) -> HarnessError {
    let msg = msg.into();
    match line_of(src, section, key) {
        Some(line) => HarnessError::Config(format!("line {line}: `{section}.{key}`: {msg}")),
        None => HarnessError::Config(format!("`{section}.{key}`: {msg}")),
    }
}

impl ExperimentConfig {
    pub fn from_toml(src: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig =
            toml::from_str(src).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate(src)?;
        Ok(cfg)
    }

    pub fn validate(&self, src: &str) -> Result<(), HarnessError> {
        let e = &self.experiment;
        let ex = |key, msg: String| config_error(src, "experiment", key, msg);
        if !["toy", "fsm", "smooth", "rlm", "chain"].contains(&e.family.as_str()) {
            return Err(ex("family", format!("unknown family `{}`", e.family)));
        }
        if let Some(bad) = e
            .optimizers
            .iter()
            .find(|o| !OPTIMIZER_NAMES.contains(&o.as_str()))
        {
            return Err(ex("optimizers", format!("unknown optimizer `{bad}`")));
        }
        if e.seeds == 0 {
            return Err(ex("seeds", "need at least one seed".into()));
        }
        let p = &self.problem;
        let pr = |key, msg: String| config_error(src, "problem", key, msg);
        if !(p.mu > 0.0) {
            return Err(pr("mu", format!("must be positive, got {}", p.mu)));
        }
        if line_of(src, "problem", "l").is_some() && line_of(src, "problem", "kappa").is_some() {
            return Err(pr("kappa", "set either `l` or `kappa`, not both".into()));
        }
        if !(self.l() >= p.mu) {
            return Err(pr("l", format!("need L >= mu, got L = {}", self.l())));
        }
        if p.n == 0 {
            return Err(pr("n", "must be positive".into()));
        }
        if p.d == 0 {
            return Err(pr("d", "must be positive".into()));
        }
        match e.family.as_str() {
            "fsm" if p.d < 2 => return Err(pr("d", "fsm needs d >= 2".into())),
            "fsm" if p.coordinate >= p.n => {
                return Err(pr("coordinate", format!("must be below n = {}", p.n)));
            }
            "rlm" if p.n % 2 == 1 => return Err(pr("n", "rlm needs an even n".into())),
            "rlm" if p.coordinate >= p.n / 2 => {
                return Err(pr("coordinate", format!("must be below n/2 = {}", p.n / 2)));
            }
            "rlm" if !(p.lambda > 0.0) => return Err(pr("lambda", "must be positive".into())),
            "chain" if p.d < 2 => return Err(pr("d", "chain needs d >= 2".into())),
            _ => {}
        }
        if self.grid.points == 0 {
            return Err(config_error(
                src,
                "grid",
                "points",
                "need at least one grid point",
            ));
        }
        let f = &self.fig1;
        if !(f.fit_start < f.slope_end && f.slope_end <= f.fit_end && f.fit_end <= f.iterations) {
            return Err(config_error(
                src,
                "fig1",
                "fit_start",
                "need fit_start < slope_end <= fit_end <= iterations",
            ));
        }
        if !(f.kappa > 1.0 && f.mu > 0.0 && f.d >= 2) {
            return Err(config_error(
                src,
                "fig1",
                "kappa",
                "need kappa > 1, mu > 0, d >= 2",
            ));
        }
        Ok(())
    }

    pub fn l(&self) -> f64 {
        let p = &self.problem;
        p.l.unwrap_or_else(|| p.kappa.unwrap_or(100.0) * p.mu)
    }

    pub fn family(&self) -> Family {
        let p = &self.problem;
        let (l, mu) = (self.l(), p.mu);
        match self.experiment.family.as_str() {
            "toy" => Family::Toy { mu, l },
            "smooth" => Family::Smooth { l, r: p.r, d: p.d },
            "rlm" => Family::Rlm {
                n: p.n,
                lambda: p.lambda,
                block: p.coordinate,
            },
            "chain" => Family::Chain { d: p.d, l, mu },
            _ => Family::Fsm {
                n: p.n,
                d: p.d,
                l,
                mu,
                r: p.r,
                coordinate: p.coordinate,
            },
        }
    }

    pub fn opt_params(&self) -> OptParams {
        let p = &self.problem;
        let n = match self.experiment.family.as_str() {
            "fsm" | "rlm" => p.n,
            _ => 1,
        };
        let d = match self.experiment.family.as_str() {
            "toy" => 1,
            "rlm" => p.n,
            _ => p.d,
        };
        OptParams {
            l: Some(self.l()),
            mu: Some(p.mu),
            n: Some(n),
            d: Some(d),
            memory: Some(p.memory),
            epoch: None,
            sampling: self.experiment.sampling,
        }
    }

    pub fn problem_params(&self) -> ProblemParams {
        let p = &self.problem;
        ProblemParams {
            l: Some(self.l()),
            mu: Some(p.mu),
            n: Some(p.n),
            r: Some(p.r),
            lambda: Some(p.lambda),
            eps: Some(p.eps),
            alpha: Some(p.alpha),
        }
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(canon.as_bytes())
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse() {
        let c = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(c.l(), 100.0);
        assert_eq!(c.hash().len(), 16);
        assert_eq!(c.hash(), ExperimentConfig::default().hash());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let src = "[experiment]\nfamily = \"fsm\"\noptimizers = [\"sag\", \"adam\"]\n";
        let e = ExperimentConfig::from_toml(src).unwrap_err().to_string();
        assert!(e.contains("line 3") && e.contains("adam"), "{e}");
        let e = ExperimentConfig::from_toml("[problem]\nmu = 1.0\nbogus = 2\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("line 3") && e.contains("bogus"), "{e}");
        let e = ExperimentConfig::from_toml("[experiment]\nseeds = 0\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("line 2"), "{e}");
    }

    #[test]
    fn kappa_or_l() {
        let c = ExperimentConfig::from_toml("[problem]\nkappa = 4.0\nmu = 2.0\n").unwrap();
        assert_eq!(c.l(), 8.0);
        let c = ExperimentConfig::from_toml("[problem]\nl = 10.0\nkappa = 4.0\n");
        assert!(c.is_err());
    }
}
