use std::path::PathBuf;

use dbar_core::potential::EFPotential;
use dbar_core::{Complex64, Domain, PolynomialCurve, Weight};
use serde::{Deserialize, Serialize};

use crate::Failure;

pub const MIN_BOUNDARY_NODES: usize = 64;
pub const MIN_AREA: (usize, usize) = (32, 64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    SolveDomain,
    Orthopoly,
    Verify,
    GfunctionScan,
}

impl Command {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "solve-domain" => Some(Command::SolveDomain),
            "orthopoly" => Some(Command::Orthopoly),
            "verify" => Some(Command::Verify),
            "gfunction-scan" => Some(Command::GfunctionScan),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Command::SolveDomain => "solve-domain",
            Command::Orthopoly => "orthopoly",
            Command::Verify => "verify",
            Command::GfunctionScan => "gfunction-scan",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub t0: f64,
    /// `t₁, t₂, …` as `[re, im]` pairs.
    #[serde(default, with = "dbar_core::cpair::vec")]
    pub t: Vec<Complex64>,
}

/// Cutoff domain as written in the config; built with the core constructors
/// so geometry errors keep their own exit code.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainSpec {
    Disk {
        #[serde(with = "dbar_core::cpair")]
        center: Complex64,
        radius: f64,
    },
    Curve {
        r: f64,
        #[serde(default, with = "dbar_core::cpair::vec")]
        a: Vec<Complex64>,
        #[serde(default = "default_boundary")]
        node_count: usize,
    },
}

impl DomainSpec {
    pub fn build(&self) -> Result<Domain, Failure> {
        Ok(match self {
            DomainSpec::Disk { center, radius } => Domain::disk(*center, *radius)?,
            DomainSpec::Curve { r, a, node_count } => {
                Domain::curve(PolynomialCurve::new(*r, a.clone(), *node_count)?).labeled("curve")
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quadrature {
    /// Boundary nodes M.
    #[serde(default = "default_boundary")]
    pub boundary: usize,
    /// Area resolution `[radial, angular]`.
    #[serde(default = "default_area")]
    pub area: [usize; 2],
}

fn default_boundary() -> usize {
    512
}

fn default_area() -> [usize; 2] {
    [64, 256]
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature { boundary: default_boundary(), area: default_area() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "t_dbar")]
    pub dbar: f64,
    #[serde(default = "t_constancy")]
    pub constancy: f64,
    #[serde(default = "t_gextra")]
    pub gextra: f64,
    #[serde(default = "t_area")]
    pub area_potential: f64,
    #[serde(default = "t_undress")]
    pub undress: f64,
    #[serde(default = "t_omega")]
    pub omega: f64,
}

fn t_dbar() -> f64 {
    1e-4
}
fn t_constancy() -> f64 {
    1e-5
}
fn t_gextra() -> f64 {
    1e-4
}
fn t_area() -> f64 {
    1e-4
}
fn t_undress() -> f64 {
    1e-3
}
fn t_omega() -> f64 {
    1e-10
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            dbar: t_dbar(),
            constancy: t_constancy(),
            gextra: t_gextra(),
            area_potential: t_area(),
            undress: t_undress(),
            omega: t_omega(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub command: Option<Command>,
    pub potential: PotentialSpec,
    pub cutoff: DomainSpec,
    #[serde(default = "default_n_list")]
    pub n_list: Vec<usize>,
    #[serde(rename = "N")]
    pub big_n: usize,
    #[serde(default = "one")]
    pub gamma: f64,
    /// Degree of the boundary polynomial for the equilibrium solve; defaults
    /// to `len(t) − 1`.
    #[serde(default)]
    pub degree: Option<usize>,
    #[serde(default)]
    pub quadrature: Quadrature,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub mc_samples: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Grid size of CSV field scans.
    #[serde(default = "default_grid")]
    pub scan_grid: usize,
}

fn default_n_list() -> Vec<usize> {
    (0..=4).collect()
}

fn one() -> f64 {
    1.0
}

fn default_fd_step() -> f64 {
    1e-4
}

fn default_grid() -> usize {
    41
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, Failure> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Failure::config(format!("config: {e}")))?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), Failure> {
        let q = &self.quadrature;
        if q.boundary < MIN_BOUNDARY_NODES {
            return Err(Failure::config(format!("quadrature.boundary must be >= {MIN_BOUNDARY_NODES}")));
        }
        if q.area[0] < MIN_AREA.0 || q.area[1] < MIN_AREA.1 {
            return Err(Failure::config(format!("quadrature.area must be at least {}x{}", MIN_AREA.0, MIN_AREA.1)));
        }
        if self.mc_samples > 0 && self.seed.is_none() {
            return Err(Failure::config("seed is required when mc_samples > 0"));
        }
        if !(self.fd_step > 0.0 && self.fd_step.is_finite()) {
            return Err(Failure::config("fd_step must be > 0"));
        }
        if self.n_list.is_empty() {
            return Err(Failure::config("n_list is empty"));
        }
        if self.scan_grid < 2 {
            return Err(Failure::config("scan_grid must be >= 2"));
        }
        Ok(())
    }

    pub fn potential(&self) -> Result<EFPotential, Failure> {
        Ok(EFPotential::new(self.potential.t0, self.potential.t.clone())?)
    }

    pub fn weight(&self) -> Result<Weight, Failure> {
        Ok(Weight::new(self.potential()?, self.big_n, self.cutoff.build()?, self.gamma)?)
    }

    pub fn n_max(&self) -> usize {
        *self.n_list.iter().max().expect("checked non-empty")
    }

    pub fn degree(&self) -> usize {
        self.degree.unwrap_or(self.potential.t.len().saturating_sub(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{"potential":{"t0":1.0},"cutoff":{"shape":"disk","center":[0,0],"radius":2},"N":2}"#;

    #[test]
    fn defaults() {
        let cfg = RunConfig::from_json(BASE).unwrap();
        assert_eq!(cfg.n_list, vec![0, 1, 2, 3, 4]);
        assert_eq!(cfg.quadrature.boundary, 512);
        assert_eq!(cfg.gamma, 1.0);
        assert_eq!(cfg.degree(), 0);
        assert!(cfg.command.is_none());
        assert!(cfg.weight().is_ok());
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            BASE.replace(r#""N":2"#, r#""N":2,"mc_samples":10"#),
            BASE.replace(r#""N":2"#, r#""N":2,"fd_step":0"#),
            BASE.replace(r#""N":2"#, r#""N":2,"n_list":[]"#),
            BASE.replace(r#""N":2"#, r#""N":2,"quadrature":{"area":[8,8]}"#),
            BASE.replace(r#""N":2"#, r#""N":2,"extra":1"#),
            BASE.replace("disk", "square"),
        ];
        for text in bad {
            assert_eq!(RunConfig::from_json(&text).unwrap_err().code, 1, "{text}");
        }
    }

    #[test]
    fn curve_cutoff_geometry_errors_keep_code_3() {
        let text = BASE.replace(
            r#"{"shape":"disk","center":[0,0],"radius":2}"#,
            r#"{"shape":"curve","r":1.0,"a":[[0,0],[0,0],[0.9,0]]}"#,
        );
        let cfg = RunConfig::from_json(&text).unwrap();
        assert_eq!(cfg.weight().unwrap_err().code, 3);
    }

    #[test]
    fn command_names_round_trip() {
        for c in [Command::SolveDomain, Command::Orthopoly, Command::Verify, Command::GfunctionScan] {
            assert_eq!(Command::parse(c.name()), Some(c));
        }
        assert_eq!(Command::parse("solve"), None);
    }
}
