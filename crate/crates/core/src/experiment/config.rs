use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::BoundaryTag;
use crate::precond::PressureMode;

/// Finest Darcy mesh exponent accepted without an override.
pub const DARCY_MAX_H_EXP: u32 = 6;
/// Finest Biot mesh exponent accepted without an override.
pub const BIOT_MAX_H_EXP: u32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    Table1Left,
    Table1Right,
    Table2,
    Table3,
    Custom,
}

impl ExperimentId {
    pub const PRESETS: [ExperimentId; 4] = [
        ExperimentId::Table1Left,
        ExperimentId::Table1Right,
        ExperimentId::Table2,
        ExperimentId::Table3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Table1Left => "table1-left",
            ExperimentId::Table1Right => "table1-right",
            ExperimentId::Table2 => "table2",
            ExperimentId::Table3 => "table3",
            ExperimentId::Custom => "custom",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentId::Table1Left => {
                "Darcy, constant K, flux fixed on the whole boundary; B1 and B2"
            }
            ExperimentId::Table1Right => {
                "Darcy, K = 1 | K0 jump at x = 1/2, flux fixed left/right; B1 and B2"
            }
            ExperimentId::Table2 => {
                "Darcy, rotated anisotropic tensor, flux fixed left/right; B1 and B2"
            }
            ExperimentId::Table3 => {
                "Biot, constant K, displacement and flux fixed left/right/bottom; B1, B1K, B2, B2K"
            }
            ExperimentId::Custom => "fully specified by a configuration file",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            ExperimentId::Table1Left,
            ExperimentId::Table1Right,
            ExperimentId::Table2,
            ExperimentId::Table3,
            ExperimentId::Custom,
        ]
        .into_iter()
        .find(|id| id.name() == s)
        .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Darcy,
    Biot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Constant,
    Jump,
    Tensor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PrecondId {
    B1,
    B2,
    B1K,
    B2K,
}

impl PrecondId {
    pub fn name(self) -> &'static str {
        match self {
            PrecondId::B1 => "B1",
            PrecondId::B2 => "B2",
            PrecondId::B1K => "B1K",
            PrecondId::B2K => "B2K",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PressureSelection {
    Dg,
    ExactSchur,
    Both,
}

impl PressureSelection {
    pub fn modes(self) -> Vec<PressureMode> {
        match self {
            PressureSelection::Dg => vec![PressureMode::Dg],
            PressureSelection::ExactSchur => vec![PressureMode::ExactSchur],
            PressureSelection::Both => vec![PressureMode::Dg, PressureMode::ExactSchur],
        }
    }
}

impl FromStr for PressureSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dg" => Ok(PressureSelection::Dg),
            "exact-schur" => Ok(PressureSelection::ExactSchur),
            "both" => Ok(PressureSelection::Both),
            _ => Err(Error::Config(format!("unknown pressure mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Md,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "md" => Ok(OutputFormat::Md),
            _ => Err(Error::Config(format!("unknown output format `{s}`"))),
        }
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub problem: Problem,
    pub field: FieldKind,
    /// `K` for constant fields, `K0` for jump and tensor fields.
    pub k_values: Vec<f64>,
    /// Rotation angles of the tensor field (radians).
    pub thetas: Vec<f64>,
    /// Mesh sizes as exponents `e` with `h = 2^-e`.
    pub h_exponents: Vec<u32>,
    pub preconditioners: Vec<PrecondId>,
    pub pressure_mode: PressureSelection,
    /// Sides where the Darcy flux is prescribed. Ignored for Biot.
    pub flux_bc: Vec<BoundaryTag>,
    pub minres: bool,
    pub minres_rtol: f64,
    pub minres_max_iter: usize,
    pub format: OutputFormat,
}

const K_GRID: [f64; 5] = [1.0, 1e-2, 1e-4, 1e-6, 1e-8];

impl ExperimentConfig {
    pub fn preset(id: ExperimentId) -> Result<Self> {
        let darcy =
            |field, flux_bc: Vec<BoundaryTag>, thetas: Vec<f64>, h: Vec<u32>| ExperimentConfig {
                experiment: id,
                problem: Problem::Darcy,
                field,
                k_values: K_GRID.to_vec(),
                thetas,
                h_exponents: h,
                preconditioners: vec![PrecondId::B1, PrecondId::B2],
                pressure_mode: PressureSelection::Both,
                flux_bc,
                minres: false,
                minres_rtol: 1e-8,
                minres_max_iter: 1500,
                format: OutputFormat::Md,
            };
        let side = vec![BoundaryTag::Left, BoundaryTag::Right];
        Ok(match id {
            ExperimentId::Table1Left => darcy(
                FieldKind::Constant,
                BoundaryTag::ALL.to_vec(),
                vec![],
                vec![2, 3, 4, 5],
            ),
            ExperimentId::Table1Right => darcy(FieldKind::Jump, side, vec![], vec![2, 3, 4, 5]),
            ExperimentId::Table2 => {
                darcy(FieldKind::Tensor, side, vec![0.0, FRAC_PI_4], vec![3, 4, 5])
            }
            ExperimentId::Table3 => ExperimentConfig {
                experiment: id,
                problem: Problem::Biot,
                field: FieldKind::Constant,
                k_values: vec![1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-8],
                thetas: vec![],
                h_exponents: vec![2, 3, 4],
                preconditioners: vec![PrecondId::B1, PrecondId::B1K, PrecondId::B2, PrecondId::B2K],
                pressure_mode: PressureSelection::Dg,
                flux_bc: crate::forms::BIOT_DIRICHLET.to_vec(),
                minres: false,
                minres_rtol: 1e-8,
                minres_max_iter: 1500,
                format: OutputFormat::Md,
            },
            ExperimentId::Custom => {
                return Err(Error::Config(
                    "the custom experiment has no preset; use a configuration file".into(),
                ))
            }
        })
    }

    /// Parse a TOML document. Presets may override individual fields; a
    /// custom experiment must give every field.
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        raw.resolve()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn finest_h_exp(&self) -> u32 {
        self.h_exponents.iter().copied().max().unwrap_or(0)
    }

    /// Check the schema rules and the desk-scale cap. `max_h_exp` replaces
    /// the default cap.
    pub fn validate(&self, max_h_exp: Option<u32>) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.k_values.is_empty()
            || self.h_exponents.is_empty()
            || self.preconditioners.is_empty()
        {
            return bad("k_values, h_exponents and preconditioners must be non-empty".into());
        }
        if let Some(k) = self.k_values.iter().find(|&&k| !(k > 0.0 && k <= 1.0)) {
            return bad(format!("K = {k} is outside (0, 1]"));
        }
        if self.h_exponents.contains(&0) {
            return bad("h exponents must be at least 1".into());
        }
        if !(self.minres_rtol > 0.0 && self.minres_rtol < 1.0) || self.minres_max_iter == 0 {
            return bad("minres_rtol must lie in (0, 1) and minres_max_iter be positive".into());
        }
        let default_cap = match self.problem {
            Problem::Darcy => DARCY_MAX_H_EXP,
            Problem::Biot => BIOT_MAX_H_EXP,
        };
        let cap = max_h_exp.unwrap_or(default_cap);
        if self.finest_h_exp() > cap {
            return bad(format!(
                "h = 2^-{} is finer than the cap 2^-{cap}; dense spectra grow cubically (raise it with --max-h-exp)",
                self.finest_h_exp()
            ));
        }
        match self.problem {
            Problem::Darcy => {
                if let Some(p) = self
                    .preconditioners
                    .iter()
                    .find(|p| matches!(p, PrecondId::B1K | PrecondId::B2K))
                {
                    return bad(format!("{} is a Biot preconditioner", p.name()));
                }
                if self.field == FieldKind::Tensor {
                    if self.thetas.is_empty() {
                        return bad("tensor fields need at least one theta".into());
                    }
                    if self.thetas.iter().any(|t| !t.is_finite()) {
                        return bad("theta must be finite".into());
                    }
                }
            }
            Problem::Biot => {
                if self.field != FieldKind::Constant {
                    return bad("the Biot problem uses a constant conductivity".into());
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Option<ExperimentId>,
    problem: Option<Problem>,
    field: Option<FieldKind>,
    k_values: Option<Vec<f64>>,
    thetas: Option<Vec<f64>>,
    h_exponents: Option<Vec<u32>>,
    preconditioners: Option<Vec<PrecondId>>,
    pressure_mode: Option<PressureSelection>,
    flux_bc: Option<Vec<BoundaryTag>>,
    minres: Option<bool>,
    minres_rtol: Option<f64>,
    minres_max_iter: Option<usize>,
    format: Option<OutputFormat>,
}

impl RawConfig {
    fn resolve(self) -> Result<ExperimentConfig> {
        let id = self
            .experiment
            .ok_or_else(|| Error::Config("missing field `experiment`".into()))?;
        if id == ExperimentId::Custom {
            let mut missing = Vec::new();
            let mut need = |present: bool, name: &'static str| {
                if !present {
                    missing.push(name)
                }
            };
            need(self.problem.is_some(), "problem");
            need(self.field.is_some(), "field");
            need(self.k_values.is_some(), "k_values");
            need(self.h_exponents.is_some(), "h_exponents");
            need(self.preconditioners.is_some(), "preconditioners");
            need(self.pressure_mode.is_some(), "pressure_mode");
            need(self.minres.is_some(), "minres");
            need(self.format.is_some(), "format");
            if self.problem == Some(Problem::Darcy) {
                need(self.flux_bc.is_some(), "flux_bc");
            }
            if self.field == Some(FieldKind::Tensor) {
                need(self.thetas.is_some(), "thetas");
            }
            if !missing.is_empty() {
                return Err(Error::Config(format!(
                    "custom experiment is missing: {}",
                    missing.join(", ")
                )));
            }
            let problem = self.problem.unwrap();
            return Ok(ExperimentConfig {
                experiment: id,
                problem,
                field: self.field.unwrap(),
                k_values: self.k_values.unwrap(),
                thetas: self.thetas.unwrap_or_default(),
                h_exponents: self.h_exponents.unwrap(),
                preconditioners: self.preconditioners.unwrap(),
                pressure_mode: self.pressure_mode.unwrap(),
                flux_bc: match problem {
                    Problem::Darcy => self.flux_bc.unwrap(),
                    Problem::Biot => crate::forms::BIOT_DIRICHLET.to_vec(),
                },
                minres: self.minres.unwrap(),
                minres_rtol: self.minres_rtol.unwrap_or(1e-8),
                minres_max_iter: self.minres_max_iter.unwrap_or(1500),
                format: self.format.unwrap(),
            });
        }
        let mut c = ExperimentConfig::preset(id)?;
        if self.problem.is_some_and(|p| p != c.problem) || self.field.is_some_and(|f| f != c.field)
        {
            return Err(Error::Config(format!(
                "preset {id} fixes the problem and field; use `custom` to change them"
            )));
        }
        if let Some(v) = self.k_values {
            c.k_values = v;
        }
        if let Some(v) = self.thetas {
            c.thetas = v;
        }
        if let Some(v) = self.h_exponents {
            c.h_exponents = v;
        }
        if let Some(v) = self.preconditioners {
            c.preconditioners = v;
        }
        if let Some(v) = self.pressure_mode {
            c.pressure_mode = v;
        }
        if let Some(v) = self.flux_bc {
            c.flux_bc = v;
        }
        if let Some(v) = self.minres {
            c.minres = v;
        }
        if let Some(v) = self.minres_rtol {
            c.minres_rtol = v;
        }
        if let Some(v) = self.minres_max_iter {
            c.minres_max_iter = v;
        }
        if let Some(v) = self.format {
            c.format = v;
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_have_table_layouts() {
        let t1 = ExperimentConfig::preset(ExperimentId::Table1Left).unwrap();
        assert_eq!(t1.k_values, vec![1.0, 1e-2, 1e-4, 1e-6, 1e-8]);
        assert_eq!(t1.h_exponents, vec![2, 3, 4, 5]);
        assert_eq!(t1.preconditioners, vec![PrecondId::B1, PrecondId::B2]);
        assert_eq!(t1.flux_bc.len(), 4);
        let t2 = ExperimentConfig::preset(ExperimentId::Table2).unwrap();
        assert_eq!(t2.thetas, vec![0.0, FRAC_PI_4]);
        assert_eq!(t2.finest_h_exp(), 5);
        let t3 = ExperimentConfig::preset(ExperimentId::Table3).unwrap();
        assert_eq!(t3.problem, Problem::Biot);
        assert_eq!(t3.h_exponents, vec![2, 3, 4]);
        assert_eq!(t3.preconditioners.len(), 4);
        for id in ExperimentId::PRESETS {
            ExperimentConfig::preset(id)
                .unwrap()
                .validate(None)
                .unwrap();
        }
        assert!(ExperimentConfig::preset(ExperimentId::Custom).is_err());
    }

    #[test]
    fn toml_round_trip() {
        let c = ExperimentConfig::preset(ExperimentId::Table2).unwrap();
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn preset_overrides() {
        let c = ExperimentConfig::from_toml(
            "experiment = \"table1-left\"\nh_exponents = [2]\nk_values = [1e-3]\n",
        )
        .unwrap();
        assert_eq!(c.h_exponents, vec![2]);
        assert_eq!(c.k_values, vec![1e-3]);
        assert_eq!(c.field, FieldKind::Constant);
        assert!(
            ExperimentConfig::from_toml("experiment = \"table3\"\nfield = \"jump\"\n").is_err()
        );
    }

    #[test]
    fn custom_requires_every_field() {
        let err = ExperimentConfig::from_toml("experiment = \"custom\"\nproblem = \"darcy\"\n")
            .unwrap_err();
        let Error::Config(msg) = err else { panic!() };
        assert!(msg.contains("k_values") && msg.contains("flux_bc"));
        let full = r#"
            experiment = "custom"
            problem = "darcy"
            field = "jump"
            k_values = [1e-3]
            h_exponents = [2, 3]
            preconditioners = ["B1"]
            pressure_mode = "dg"
            flux_bc = ["left", "right"]
            minres = false
            format = "csv"
        "#;
        let c = ExperimentConfig::from_toml(full).unwrap();
        c.validate(None).unwrap();
        assert_eq!(c.flux_bc, vec![BoundaryTag::Left, BoundaryTag::Right]);
    }

    #[test]
    fn validation_rules() {
        let mut c = ExperimentConfig::preset(ExperimentId::Table1Left).unwrap();
        c.h_exponents = vec![7];
        assert!(c.validate(None).is_err());
        assert!(c.validate(Some(7)).is_ok());
        c.h_exponents = vec![0];
        assert!(c.validate(Some(9)).is_err());
        c.h_exponents = vec![2];
        c.k_values = vec![2.0];
        assert!(c.validate(None).is_err());
        c.k_values = vec![1.0];
        c.preconditioners = vec![PrecondId::B2K];
        assert!(c.validate(None).is_err());

        let mut b = ExperimentConfig::preset(ExperimentId::Table3).unwrap();
        b.h_exponents = vec![6];
        assert!(b.validate(None).is_err());
        b.h_exponents = vec![5];
        assert!(b.validate(None).is_ok());
    }

    #[test]
    fn unknown_fields_and_names_are_rejected() {
        assert!(ExperimentConfig::from_toml("experiment = \"table1-left\"\nbogus = 1\n").is_err());
        assert!(ExperimentConfig::from_toml("experiment = \"table9\"\n").is_err());
        assert!("table9".parse::<ExperimentId>().is_err());
        assert_eq!(
            "table2".parse::<ExperimentId>().unwrap(),
            ExperimentId::Table2
        );
    }
}
