//! Model definition files (TOML).
//!
//! Schema:
//!
//! ```toml
//! family = "mechanical-pendulum"   # riemannian-flat | mechanical-pendulum |
//!                                  # mechanical-custom | mane-vectorfield
//! dim = 1
//! mass = 1.0                       # optional, kinetic term (m/2)|v|^2
//!
//! # mechanical-pendulum only:
//! amplitude = 1.0                  # U = amplitude·(1 − cos(2π·harmonics·x))
//! harmonics = 1
//!
//! # mechanical-custom only: Fourier potential U
//! [potential]
//! constant = 1.0
//! [[potential.modes]]
//! mode = [1]
//! cos = -1.0
//! sin = 0.0
//!
//! # mane-vectorfield only: one table per component of X
//! [[field]]
//! constant = 0.5
//! [[field.modes]]
//! mode = [1]
//! cos = 0.0
//! sin = 0.25
//! ```
//!
//! The loader runs the convexity and derivative-consistency audits and
//! rejects files that fail either.

use crate::error::{Error, Result};
use crate::fourier::FourierSeries;
use crate::lagrangian::{Family, LagrangianModel};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub family: Family,
    pub dim: usize,
    #[serde(default = "default_mass")]
    pub mass: f64,
    #[serde(default)]
    pub amplitude: Option<f64>,
    #[serde(default)]
    pub harmonics: Option<i32>,
    #[serde(default)]
    pub potential: Option<FourierSeries>,
    #[serde(default)]
    pub field: Option<Vec<FourierSeries>>,
}

fn default_mass() -> f64 {
    1.0
}

impl ModelFile {
    pub fn into_model(self) -> Result<LagrangianModel> {
        let model = match self.family {
            Family::RiemannianFlat => {
                if self.mass <= 0.0 {
                    // surfaces through the convexity audit below, but give
                    // the audit something to inspect
                    LagrangianModel::mechanical(self.dim, self.mass, FourierSeries::default())
                } else if (self.mass - 1.0).abs() < 1e-15 {
                    LagrangianModel::free(self.dim)
                } else {
                    LagrangianModel::mechanical(self.dim, self.mass, FourierSeries::default())
                }
            }
            Family::MechanicalPendulum => {
                if self.dim != 1 {
                    return Err(Error::ModelFile("mechanical-pendulum requires dim = 1".into()));
                }
                let a = self.amplitude.unwrap_or(1.0);
                let k = self.harmonics.unwrap_or(1);
                if (self.mass - 1.0).abs() > 1e-15 {
                    let potential = FourierSeries::mode1(k, -a, 0.0).with_constant(a);
                    LagrangianModel::mechanical(1, self.mass, potential)
                } else {
                    LagrangianModel::pendulum_family(a, k)
                }
            }
            Family::MechanicalCustom => {
                let potential = self
                    .potential
                    .ok_or_else(|| Error::ModelFile("mechanical-custom needs [potential]".into()))?;
                for m in &potential.modes {
                    if m.mode.len() != self.dim {
                        return Err(Error::ModelFile(format!(
                            "potential mode {:?} does not match dim {}",
                            m.mode, self.dim
                        )));
                    }
                }
                LagrangianModel::mechanical(self.dim, self.mass, potential)
            }
            Family::ManeVectorField => {
                let field = self
                    .field
                    .ok_or_else(|| Error::ModelFile("mane-vectorfield needs [[field]]".into()))?;
                if field.len() != self.dim {
                    return Err(Error::ModelFile(format!(
                        "field has {} components, dim = {}",
                        field.len(),
                        self.dim
                    )));
                }
                LagrangianModel::mane(field)
            }
            Family::Custom => {
                return Err(Error::ModelFile(
                    "custom models are constructed through the API, not files".into(),
                ))
            }
        };
        model.audit_convexity()?;
        model.audit_derivative_consistency(1e-5)?;
        Ok(model)
    }
}

pub fn load_model(path: &Path) -> Result<LagrangianModel> {
    let text = std::fs::read_to_string(path)?;
    load_model_str(&text)
}

pub fn load_model_str(text: &str) -> Result<LagrangianModel> {
    let file: ModelFile =
        toml::from_str(text).map_err(|e| Error::ModelFile(format!("parse error: {e}")))?;
    file.into_model()
}

/// The models used throughout the guide and the regression suite.
pub fn builtin(name: &str) -> Result<LagrangianModel> {
    match name {
        "pendulum" | "pendulum1d" => Ok(LagrangianModel::pendulum()),
        "doubled-pendulum" => Ok(LagrangianModel::doubled_pendulum()),
        "free1d" => Ok(LagrangianModel::free(1)),
        "free2d" => Ok(LagrangianModel::free(2)),
        other => Err(Error::ModelFile(format!(
            "unknown builtin model '{other}' (expected pendulum, doubled-pendulum, free1d, free2d)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_a_pendulum_file() {
        let text = r#"
family = "mechanical-pendulum"
dim = 1
"#;
        let model = load_model_str(text).unwrap();
        assert!((model.eval(&[0.5], &[0.0]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn loads_a_custom_potential() {
        let text = r#"
family = "mechanical-custom"
dim = 1

[potential]
constant = 1.0

[[potential.modes]]
mode = [2]
cos = -1.0
"#;
        let model = load_model_str(text).unwrap();
        // same as the doubled pendulum
        let reference = LagrangianModel::doubled_pendulum();
        for k in 0..8 {
            let x = [k as f64 / 8.0];
            assert!((model.eval(&x, &[0.3]) - reference.eval(&x, &[0.3])).abs() < 1e-12);
        }
    }

    #[test]
    fn loads_a_mane_field() {
        let text = r#"
family = "mane-vectorfield"
dim = 1

[[field]]
constant = 0.5
"#;
        let model = load_model_str(text).unwrap();
        assert!(model.eval(&[0.1], &[0.5]).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonconvex_mass() {
        let text = r#"
family = "mechanical-pendulum"
dim = 1
mass = -1.0
"#;
        assert!(matches!(load_model_str(text), Err(Error::AuditFailed(_))));
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let text = r#"
family = "mane-vectorfield"
dim = 2

[[field]]
constant = 0.5
"#;
        assert!(matches!(load_model_str(text), Err(Error::ModelFile(_))));
    }
}
