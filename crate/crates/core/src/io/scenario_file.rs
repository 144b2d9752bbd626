//! JSON scenario documents. Flows are given in m³/h, periods in hours and
//! concentrations in kg/m³; every such key carries its unit as a suffix.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::constitutive::MaterialParams;
use crate::error::{Error, Result};
use crate::geometry::{ModelKind, Stage, StageSchedule, TankGeometry};
use crate::orchestrator::{InitialLayer, InitialProfile, Numerics, Scenario};
use crate::reactions::{ComponentRegistry, Denitrification, DenitrificationParams, ReactionModel};

const SECONDS_PER_HOUR: f64 = 3600.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub geometry: GeometrySection,
    #[serde(default)]
    pub material: MaterialSection,
    pub reactions: ReactionSection,
    pub schedule: Vec<StageRow>,
    pub initial: InitialSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<OutputSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum GeometrySection {
    Cylinder { area_m2: f64, depth_m: f64 },
    Cone { r_top_m: f64, r_bottom_m: f64, depth_m: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialSection {
    pub rho_x_kg_per_m3: f64,
    pub rho_l_kg_per_m3: f64,
    pub g_m_per_s2: f64,
    pub x_max_kg_per_m3: f64,
    pub v0_m_per_s: f64,
    pub x_breve_kg_per_m3: f64,
    pub eta: f64,
    pub alpha_m2_per_s2: f64,
    pub x_crit_kg_per_m3: f64,
}

impl Default for MaterialSection {
    fn default() -> Self {
        MaterialParams::default().into()
    }
}

impl From<MaterialParams> for MaterialSection {
    fn from(p: MaterialParams) -> Self {
        MaterialSection {
            rho_x_kg_per_m3: p.rho_x,
            rho_l_kg_per_m3: p.rho_l,
            g_m_per_s2: p.g,
            x_max_kg_per_m3: p.x_max,
            v0_m_per_s: p.v0,
            x_breve_kg_per_m3: p.x_breve,
            eta: p.eta,
            alpha_m2_per_s2: p.alpha,
            x_crit_kg_per_m3: p.x_crit,
        }
    }
}

impl From<MaterialSection> for MaterialParams {
    fn from(m: MaterialSection) -> Self {
        MaterialParams {
            rho_x: m.rho_x_kg_per_m3,
            rho_l: m.rho_l_kg_per_m3,
            g: m.g_m_per_s2,
            x_max: m.x_max_kg_per_m3,
            v0: m.v0_m_per_s,
            x_breve: m.x_breve_kg_per_m3,
            eta: m.eta,
            alpha: m.alpha_m2_per_s2,
            x_crit: m.x_crit_kg_per_m3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactionSection {
    pub solids: Vec<String>,
    pub solubles: Vec<String>,
    pub kinetics: KineticsSection,
    /// Optional stoichiometric literals; checked against the built-in model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_c: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_s: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase", deny_unknown_fields)]
pub enum KineticsSection {
    None,
    Denitrification {
        #[serde(rename = "Y")]
        yield_coeff: f64,
        b_per_s: f64,
        #[serde(rename = "f_P")]
        f_p: f64,
        mu_max_per_s: f64,
        #[serde(rename = "K_NO3_kg_per_m3")]
        k_no3_kg_per_m3: f64,
        #[serde(rename = "K_S_kg_per_m3")]
        k_s_kg_per_m3: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageRow {
    pub name: String,
    pub period_h: [f64; 2],
    pub q_f_m3_per_h: f64,
    pub q_u_m3_per_h: f64,
    pub q_e_m3_per_h: f64,
    pub model: Option<ModelKind>,
    pub c_f_kg_per_m3: Vec<f64>,
    pub s_f_kg_per_m3: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub zbar_m: f64,
    pub layers: Vec<LayerRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerRow {
    pub from_m: f64,
    pub to_m: f64,
    pub c_kg_per_m3: Vec<f64>,
    pub s_kg_per_m3: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsSection {
    pub cells: usize,
    pub output_interval_s: f64,
    pub ode_step_s: f64,
    pub cfl_safety: f64,
    pub pipe_area_m2: f64,
}

impl Default for NumericsSection {
    fn default() -> Self {
        let n = Numerics::default();
        NumericsSection {
            cells: n.cells,
            output_interval_s: n.output_interval,
            ode_step_s: n.ode_step,
            cfl_safety: n.cfl_safety,
            pipe_area_m2: n.pipe_area,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: String,
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Converts to SI units and validates everything.
    pub fn build(&self) -> Result<Scenario> {
        let geometry = match self.geometry {
            GeometrySection::Cylinder { area_m2, depth_m } => TankGeometry::cylinder(area_m2, depth_m)?,
            GeometrySection::Cone { r_top_m, r_bottom_m, depth_m } => {
                TankGeometry::cone(r_top_m, r_bottom_m, depth_m)?
            }
        };
        let material = MaterialParams::from(self.material);
        material.validate()?;
        let reactions = self.reactions.build()?;
        let (k_c, k_s) = (reactions.k_c(), reactions.k_s());

        let mut stages = Vec::with_capacity(self.schedule.len());
        for (i, row) in self.schedule.iter().enumerate() {
            let model = row
                .model
                .ok_or_else(|| Error::Config(format!("schedule[{i}] ('{}'): missing 'model' (PDE or ODE)", row.name)))?;
            let per_h = |q: f64| q / SECONDS_PER_HOUR;
            stages.push(Stage {
                name: row.name.clone(),
                t_start: row.period_h[0] * SECONDS_PER_HOUR,
                t_end: row.period_h[1] * SECONDS_PER_HOUR,
                q_f: per_h(row.q_f_m3_per_h),
                q_u: per_h(row.q_u_m3_per_h),
                q_e: per_h(row.q_e_m3_per_h),
                c_feed: row.c_f_kg_per_m3.clone(),
                s_feed: row.s_f_kg_per_m3.clone(),
                model,
            });
        }
        let schedule = StageSchedule::new(stages, k_c, k_s)?;

        let initial = InitialProfile {
            zbar: self.initial.zbar_m,
            layers: self
                .initial
                .layers
                .iter()
                .map(|l| InitialLayer {
                    from: l.from_m,
                    to: l.to_m,
                    c: l.c_kg_per_m3.clone(),
                    s: l.s_kg_per_m3.clone(),
                })
                .collect(),
        };
        let n = &self.numerics;
        let numerics = Numerics {
            cells: n.cells,
            output_interval: n.output_interval_s,
            ode_step: n.ode_step_s,
            cfl_safety: n.cfl_safety,
            pipe_area: n.pipe_area_m2,
        };
        let scenario = Scenario {
            name: self.name.clone(),
            geometry,
            material,
            reactions,
            schedule,
            initial,
            numerics,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

impl ReactionSection {
    fn build(&self) -> Result<ReactionModel> {
        let registry = ComponentRegistry::new(self.solids.clone(), self.solubles.clone())?;
        let model = match self.kinetics {
            KineticsSection::None => {
                if self.sigma_c.is_some() || self.sigma_s.is_some() {
                    return Err(Error::Config("stoichiometry given without kinetics".into()));
                }
                return Ok(ReactionModel::inert(registry));
            }
            KineticsSection::Denitrification {
                yield_coeff,
                b_per_s,
                f_p,
                mu_max_per_s,
                k_no3_kg_per_m3,
                k_s_kg_per_m3,
            } => {
                let params = DenitrificationParams {
                    yield_coeff,
                    decay: b_per_s,
                    f_p,
                    mu_max: mu_max_per_s,
                    k_no3: k_no3_kg_per_m3,
                    k_s: k_s_kg_per_m3,
                };
                let law = Denitrification::new(params, &registry)?;
                let (sigma_c, sigma_s) = law.stoichiometry(&registry);
                ReactionModel::new(registry, sigma_c, sigma_s, Arc::new(law))?
            }
        };
        for (given, label, built) in [
            (&self.sigma_c, "sigma_c", model.sigma_c()),
            (&self.sigma_s, "sigma_s", model.sigma_s()),
        ] {
            if let Some(given) = given {
                let matches = given.len() == built.len()
                    && given.iter().zip(built).all(|(g, b)| {
                        g.len() == b.len() && g.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9 * (1.0 + y.abs()))
                    });
                if !matches {
                    return Err(Error::Config(format!(
                        "{label} does not match the stoichiometry of the kinetics model: expected {built:?}"
                    )));
                }
            }
        }
        Ok(model)
    }
}

/// Loads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<(ScenarioFile, Scenario)> {
    let file = ScenarioFile::load(path)?;
    let scenario = file.build()?;
    Ok((file, scenario))
}

pub const EXAMPLE1: &str = include_str!("../../scenarios/example1.json");
pub const EXAMPLE2: &str = include_str!("../../scenarios/example2.json");

/// The bundled scenarios as `(file name, JSON text)`.
pub fn bundled_examples() -> [(&'static str, &'static str); 2] {
    [("example1.json", EXAMPLE1), ("example2.json", EXAMPLE2)]
}
