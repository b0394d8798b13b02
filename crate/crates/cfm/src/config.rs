//! Experiment configuration files (TOML).

use std::fmt;
use std::path::{Path, PathBuf};

use cfm_core::conformal::Quadrilateral;
use cfm_core::domain::{make_domain, BoundaryTag, RectDomain, RectSide};
use cfm_core::surface::make_catalog_surface;
use cfm_core::{DomainSpec, MeshRecipe, Refinement, SurfaceParameterization};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Modulus,
    Map,
    Convergence,
    Mercator,
    Multiholes,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::Modulus => "modulus",
            Mode::Map => "map",
            Mode::Convergence => "convergence",
            Mode::Mercator => "mercator",
            Mode::Multiholes => "multiholes",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub mode: Mode,
    pub surface: SurfaceConfig,
    pub domain: Option<DomainConfig>,
    #[serde(default)]
    pub mesh: MeshConfig,
    pub degrees: DegreeConfig,
    pub mercator: Option<MercatorConfig>,
    pub multiholes: Option<MultiholesConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    pub name: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub name: String,
    #[serde(default)]
    pub params: Vec<f64>,
    /// `z1..z4`, rectangles only.
    pub corners: Option<[[f64; 2]; 4]>,
    #[serde(default)]
    pub periodic_v: bool,
    /// Sides of the rectangle that are single points on the surface.
    #[serde(default)]
    pub collapse: Vec<Side>,
    /// Cyclic corner shift applied after construction.
    #[serde(default)]
    pub shift: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    #[serde(default = "one")]
    pub hint: usize,
    #[serde(default)]
    pub graded_degrees: bool,
    #[serde(default)]
    pub refine: Vec<RefineConfig>,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig {
            hint: 1,
            graded_degrees: false,
            refine: Vec::new(),
        }
    }
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RefineConfig {
    Corner {
        point: [f64; 2],
        levels: Option<usize>,
        grading: f64,
    },
    AllCorners {
        levels: Option<usize>,
        grading: f64,
    },
    /// `tags` use the boundary tag syntax: `g1`..`g4`, `h1`.., `c`.
    Edge {
        tags: Vec<String>,
        levels: Option<usize>,
        grading: f64,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegreeConfig {
    pub p: Option<Vec<u32>>,
    /// Shorthand for `p = [2, 3, ..., p_max]`.
    pub p_max: Option<u32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MercatorConfig {
    /// Angular radius of the removed polar caps.
    #[serde(default = "default_cap")]
    pub eps: f64,
    #[serde(default = "default_profile_points")]
    pub profile_points: usize,
}

fn default_cap() -> f64 {
    0.01
}

fn default_profile_points() -> usize {
    64
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiholesConfig {
    /// Stopping tolerance on the squared reciprocal error.
    #[serde(default = "default_objective_tol")]
    pub tol: f64,
}

fn default_objective_tol() -> f64 {
    1e-14
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub report: Option<PathBuf>,
    pub isolines: Option<PathBuf>,
    pub mesh: Option<PathBuf>,
    /// Discrepancy profile along the zero meridian (mercator mode).
    pub profile: Option<PathBuf>,
    #[serde(default = "default_levels")]
    pub n_u: usize,
    #[serde(default = "default_levels")]
    pub n_v: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            report: None,
            isolines: None,
            mesh: None,
            profile: None,
            n_u: default_levels(),
            n_v: default_levels(),
        }
    }
}

fn default_levels() -> usize {
    9
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Everything the runner needs, built and checked up front.
#[derive(Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub surface: SurfaceParameterization,
    /// Absent in mercator mode, which builds its own capped globe.
    pub quad: Option<Quadrilateral>,
    pub recipe: MeshRecipe,
    pub degrees: Vec<u32>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| bad(e.to_string().trim_end().replace('\n', " ")))
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| bad(format!("{}: {}", path.display(), e.0)))
    }

    /// Validates the configuration and builds the surface, domain and mesh recipe.
    pub fn prepare(&self, p_override: Option<u32>) -> Result<Experiment, ConfigError> {
        let surface = make_catalog_surface(&self.surface.name, &self.surface.params).map_err(|e| bad(e.to_string()))?;
        let quad = match (&self.domain, self.mode) {
            (Some(_), Mode::Mercator) => return Err(bad("mercator mode builds its own domain; remove [domain]")),
            (None, Mode::Mercator) => None,
            (None, _) => return Err(bad("missing [domain]")),
            (Some(d), _) => Some(Quadrilateral::new(d.build()?, surface.clone()).shifted(d.shift)),
        };
        if let Some(q) = &quad {
            let holes = q.domain.holes.len();
            match (self.mode, holes) {
                (Mode::Multiholes, 0) => return Err(bad("multiholes mode needs a domain with holes")),
                (Mode::Multiholes, _) | (_, 0) => {}
                _ => return Err(bad(format!("domain has {holes} holes; use multiholes mode"))),
            }
        }
        match (self.mode, &self.mercator) {
            (Mode::Mercator, None) => return Err(bad("mercator mode needs a [mercator] section")),
            (Mode::Mercator, Some(m)) if !(m.eps > 0.0 && m.eps < std::f64::consts::FRAC_PI_2) => {
                return Err(bad("mercator.eps must lie in (0, pi/2)"))
            }
            (Mode::Mercator, Some(m)) if m.profile_points == 0 => return Err(bad("mercator.profile_points must be positive")),
            (Mode::Mercator, _) => {}
            (_, Some(_)) => return Err(bad("[mercator] is only used in mercator mode")),
            _ => {}
        }
        if self.multiholes.is_some() && self.mode != Mode::Multiholes {
            return Err(bad("[multiholes] is only used in multiholes mode"));
        }
        if let Some(m) = &self.multiholes {
            if !(m.tol >= 0.0) {
                return Err(bad("multiholes.tol must be non-negative"));
            }
        }
        let out = &self.output;
        if out.isolines.is_some() && self.mode != Mode::Map {
            return Err(bad("isoline export needs map mode"));
        }
        if out.profile.is_some() && self.mode != Mode::Mercator {
            return Err(bad("profile export needs mercator mode"));
        }
        if out.n_u == 0 || out.n_v == 0 {
            return Err(bad("n_u and n_v must be at least 1"));
        }
        let degrees = match p_override {
            Some(p) => vec![p],
            None => self.degrees.schedule()?,
        };
        if degrees.iter().any(|&p| p == 0 || p > 30) {
            return Err(bad("degrees must lie in 1..=30"));
        }
        Ok(Experiment {
            config: self.clone(),
            surface,
            quad,
            recipe: self.mesh.recipe()?,
            degrees,
        })
    }
}

impl DomainConfig {
    fn build(&self) -> Result<DomainSpec, ConfigError> {
        let rect_only = self.corners.is_some() || self.periodic_v || !self.collapse.is_empty();
        if self.name != "rect" {
            if rect_only {
                return Err(bad("corners, periodic_v and collapse apply to rect domains only"));
            }
            return make_domain(&self.name, &self.params).map_err(|e| bad(e.to_string()));
        }
        let p = &self.params;
        if p.len() != 4 {
            return Err(bad(format!("domain `rect` takes 4 parameters, got {}", p.len())));
        }
        let mut r = RectDomain::new([p[0], p[1]], [p[2], p[3]]);
        if let Some(c) = self.corners {
            r = r.corners(c);
        }
        if self.periodic_v {
            r = r.periodic_v();
        }
        for s in &self.collapse {
            r = r.collapse(match s {
                Side::Bottom => RectSide::Bottom,
                Side::Right => RectSide::Right,
                Side::Top => RectSide::Top,
                Side::Left => RectSide::Left,
            });
        }
        r.build("rect").map_err(|e| bad(e.to_string()))
    }
}

impl MeshConfig {
    fn recipe(&self) -> Result<MeshRecipe, ConfigError> {
        if self.hint == 0 {
            return Err(bad("mesh.hint must be positive"));
        }
        let grading_ok = |g: f64| {
            if g > 0.0 && g < 1.0 {
                Ok(g)
            } else {
                Err(bad(format!("grading {g} must lie in (0, 1)")))
            }
        };
        let refinements = self
            .refine
            .iter()
            .map(|r| {
                Ok(match r {
                    RefineConfig::Corner { point, levels, grading } => Refinement::Corner {
                        point: *point,
                        levels: *levels,
                        grading: grading_ok(*grading)?,
                    },
                    RefineConfig::AllCorners { levels, grading } => Refinement::AllCorners {
                        levels: *levels,
                        grading: grading_ok(*grading)?,
                    },
                    RefineConfig::Edge { tags, levels, grading } => Refinement::Edge {
                        tags: tags
                            .iter()
                            .map(|t| BoundaryTag::parse(t).ok_or_else(|| bad(format!("bad boundary tag `{t}`"))))
                            .collect::<Result<_, _>>()?,
                        levels: *levels,
                        grading: grading_ok(*grading)?,
                    },
                })
            })
            .collect::<Result<_, ConfigError>>()?;
        Ok(MeshRecipe {
            hint: self.hint,
            refinements,
            graded_degrees: self.graded_degrees,
        })
    }
}

impl DegreeConfig {
    pub fn schedule(&self) -> Result<Vec<u32>, ConfigError> {
        match (&self.p, self.p_max) {
            (Some(p), None) if !p.is_empty() => Ok(p.clone()),
            (None, Some(m)) if m >= 2 => Ok((2..=m).collect()),
            (None, Some(m)) => Ok(vec![m]),
            _ => Err(bad("[degrees] needs exactly one of a non-empty `p` list or `p_max`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
name = "t"
mode = "modulus"
[surface]
name = "plane"
[domain]
name = "rect"
params = [0.0, 1.0, 0.0, 1.0]
[degrees]
p_max = 4
"#;

    #[test]
    fn schedule_from_p_max() {
        let exp = ExperimentConfig::from_toml(BASE).unwrap().prepare(None).unwrap();
        assert_eq!(exp.degrees, [2, 3, 4]);
        let exp = ExperimentConfig::from_toml(BASE).unwrap().prepare(Some(7)).unwrap();
        assert_eq!(exp.degrees, [7]);
    }

    #[test]
    fn both_schedules_rejected() {
        let cfg = ExperimentConfig::from_toml(&BASE.replace("p_max = 4", "p_max = 4\np = [3]")).unwrap();
        assert!(cfg.prepare(None).is_err());
    }

    #[test]
    fn edge_tags_parse() {
        let text = format!("{BASE}[mesh]\nhint = 2\n[[mesh.refine]]\nkind = \"edge\"\ntags = [\"g2\", \"g4\"]\ngrading = 0.3\n");
        let exp = ExperimentConfig::from_toml(&text).unwrap().prepare(None).unwrap();
        assert_eq!(
            exp.recipe.refinements,
            [Refinement::Edge {
                tags: vec![BoundaryTag::Side(2), BoundaryTag::Side(4)],
                levels: None,
                grading: 0.3
            }]
        );
        let bad_tag = text.replace("\"g4\"", "\"g9\"");
        assert!(ExperimentConfig::from_toml(&bad_tag).unwrap().prepare(None).is_err());
        let bad_grading = text.replace("0.3", "1.5");
        assert!(ExperimentConfig::from_toml(&bad_grading).unwrap().prepare(None).is_err());
    }

    #[test]
    fn unknown_refinement_field_rejected() {
        let text = format!("{BASE}[[mesh.refine]]\nkind = \"all_corners\"\ngrading = 0.2\nrings = 3\n");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }
}
