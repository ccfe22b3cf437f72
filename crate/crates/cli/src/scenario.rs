//! Scenario files: a flat `key = value` format with `#` comments and dotted
//! section keys, one scenario per file.
//!
//! A scenario pins the flux, the problem form, the initial datum, how the
//! bound parameters are chosen, the solver configuration, and which checks
//! run at which tolerances. Parsing validates every numeric constraint up
//! front — data levels against parabolicity thresholds, compatibility of the
//! datum with the boundary conditions — so invalid problems never reach the
//! solver.

use rate_lab_core::{FluxModel, Grid, Parabolicity, Scheme, SolverConfig};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid scenario: {message}")]
    Validation { message: String },
}

fn validation(message: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation {
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExtensionSpec {
    None,
    /// Match radius at the midpoint between the bound's extremum radius and
    /// the parabolicity threshold, blend width at half the match radius.
    Auto,
    Explicit {
        match_radius: f64,
        blend_width: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluxSpec {
    pub base: FluxModel,
    pub extension: ExtensionSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemForm {
    DensityDirichlet,
    PrimitiveNeumann,
}

impl ProblemForm {
    pub fn name(self) -> &'static str {
        match self {
            ProblemForm::DensityDirichlet => "density_dirichlet",
            ProblemForm::PrimitiveNeumann => "primitive_neumann",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialDatum {
    Sine {
        amplitude: f64,
        mode: u32,
    },
    Cosine {
        amplitude: f64,
        mode: u32,
        offset: f64,
    },
    Bump {
        center: f64,
        width: f64,
        height: f64,
    },
    Custom {
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundSpec {
    Fixed { tau: f64, lambda: f64, m: f64 },
    Optimize { m_floor: MFloor },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MFloor {
    /// 1 for globally parabolic fluxes, the threshold-derived m* otherwise.
    Auto,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifySpec {
    pub max_principle: bool,
    pub monotone_envelopes: bool,
    pub bound_domination: bool,
    pub barrier_domination: bool,
    pub supersolution: bool,
    pub conservation: bool,
    pub gradient_envelope: bool,
    pub tol_max_principle: f64,
    pub tol_envelopes: f64,
    pub bound_slack: f64,
    pub barrier_slack: f64,
    pub tol_conservation: f64,
    pub tol_gradient_envelope: f64,
    pub supersolution_density: usize,
    /// Fit window as fractions of `t_final`.
    pub fit_window: (f64, f64),
}

impl Default for VerifySpec {
    fn default() -> Self {
        VerifySpec {
            max_principle: true,
            monotone_envelopes: true,
            bound_domination: true,
            barrier_domination: true,
            supersolution: true,
            conservation: true,
            gradient_envelope: true,
            tol_max_principle: 1e-8,
            tol_envelopes: 1e-8,
            bound_slack: 1e-8,
            barrier_slack: 1e-8,
            tol_conservation: 1e-8,
            tol_gradient_envelope: 1e-8,
            supersolution_density: 101,
            fit_window: (0.1, 0.9),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub flux: FluxSpec,
    pub form: ProblemForm,
    pub length: f64,
    pub cells: usize,
    pub initial: InitialDatum,
    pub bound: BoundSpec,
    pub solver: SolverConfig,
    pub verify: VerifySpec,
}

impl Scenario {
    /// Node samples of the initial datum with the boundary compatibility
    /// values applied exactly.
    pub fn sample_initial(&self) -> Vec<f64> {
        let grid = Grid::new(self.length, self.cells).expect("validated at parse");
        let n = self.cells;
        let mut values: Vec<f64> = match &self.initial {
            InitialDatum::Sine { amplitude, mode } => (0..=n)
                .map(|i| {
                    amplitude
                        * (*mode as f64 * std::f64::consts::PI * grid.node(i) / self.length).sin()
                })
                .collect(),
            InitialDatum::Cosine {
                amplitude,
                mode,
                offset,
            } => (0..=n)
                .map(|i| {
                    offset
                        + amplitude
                            * (*mode as f64 * std::f64::consts::PI * grid.node(i) / self.length)
                                .cos()
                })
                .collect(),
            InitialDatum::Bump {
                center,
                width,
                height,
            } => (0..=n)
                .map(|i| {
                    let r = (grid.node(i) - center) / width;
                    if r.abs() < 1.0 {
                        height * (1.0 - 1.0 / (1.0 - r * r)).exp()
                    } else {
                        0.0
                    }
                })
                .collect(),
            InitialDatum::Custom { values } => values.clone(),
        };
        if self.form == ProblemForm::DensityDirichlet {
            values[0] = 0.0;
            values[n] = 0.0;
        }
        values
    }

    /// The data level the bound applies to: the sup-norm of the datum for the
    /// density form, the sup-norm of its face gradients for the primitive form.
    pub fn data_level(&self) -> f64 {
        let datum = self.sample_initial();
        match self.form {
            ProblemForm::DensityDirichlet => datum.iter().fold(0.0f64, |acc, &v| acc.max(v.abs())),
            ProblemForm::PrimitiveNeumann => {
                let h = self.length / self.cells as f64;
                datum
                    .windows(2)
                    .fold(0.0f64, |acc, w| acc.max(((w[1] - w[0]) / h).abs()))
            }
        }
    }

    /// Canonical scenario-file rendering; `parse_scenario` round-trips it.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        kv("name", self.name.clone());
        kv("flux.kind", self.flux.base.kind_name().to_string());
        match &self.flux.base {
            FluxModel::AnguigeSchmeiser { a } => kv("flux.a", format!("{a}")),
            FluxModel::Turchin { k0, omega, mu } => {
                kv("flux.k0", format!("{k0}"));
                kv("flux.omega", format!("{omega}"));
                kv("flux.mu", format!("{mu}"));
            }
            _ => {}
        }
        match &self.flux.extension {
            ExtensionSpec::None => kv("flux.extend", "none".into()),
            ExtensionSpec::Auto => kv("flux.extend", "auto".into()),
            ExtensionSpec::Explicit {
                match_radius,
                blend_width,
            } => {
                kv("flux.extend", "explicit".into());
                kv("flux.match_radius", format!("{match_radius}"));
                kv("flux.blend_width", format!("{blend_width}"));
            }
        }
        kv("form", self.form.name().into());
        kv("length", format!("{}", self.length));
        kv("cells", format!("{}", self.cells));
        match &self.initial {
            InitialDatum::Sine { amplitude, mode } => {
                kv("initial.family", "sine".into());
                kv("initial.amplitude", format!("{amplitude}"));
                kv("initial.mode", format!("{mode}"));
            }
            InitialDatum::Cosine {
                amplitude,
                mode,
                offset,
            } => {
                kv("initial.family", "cosine".into());
                kv("initial.amplitude", format!("{amplitude}"));
                kv("initial.mode", format!("{mode}"));
                kv("initial.offset", format!("{offset}"));
            }
            InitialDatum::Bump {
                center,
                width,
                height,
            } => {
                kv("initial.family", "bump".into());
                kv("initial.center", format!("{center}"));
                kv("initial.width", format!("{width}"));
                kv("initial.height", format!("{height}"));
            }
            InitialDatum::Custom { values } => {
                kv("initial.family", "custom".into());
                let list: Vec<String> = values.iter().map(|v| format!("{v:.17e}")).collect();
                kv("initial.values", list.join(","));
            }
        }
        match &self.bound {
            BoundSpec::Fixed { tau, lambda, m } => {
                kv("bound.mode", "fixed".into());
                kv("bound.tau", format!("{tau}"));
                kv("bound.lambda", format!("{lambda}"));
                kv("bound.m", format!("{m}"));
            }
            BoundSpec::Optimize { m_floor } => {
                kv("bound.mode", "optimize".into());
                match m_floor {
                    MFloor::Auto => kv("bound.m_floor", "auto".into()),
                    MFloor::Value(v) => kv("bound.m_floor", format!("{v}")),
                }
            }
        }
        kv("solver.scheme", self.solver.scheme.name().into());
        kv("solver.dt_initial", format!("{}", self.solver.dt_initial));
        kv("solver.dt_min", format!("{}", self.solver.dt_min));
        kv("solver.dt_max", format!("{}", self.solver.dt_max));
        kv("solver.newton_tol", format!("{}", self.solver.newton_tol));
        kv(
            "solver.newton_max_iter",
            format!("{}", self.solver.newton_max_iter),
        );
        kv("solver.t_final", format!("{}", self.solver.t_final));
        kv(
            "solver.output_every",
            format!("{}", self.solver.output_every),
        );
        let v = &self.verify;
        kv("verify.max_principle", format!("{}", v.max_principle));
        kv(
            "verify.monotone_envelopes",
            format!("{}", v.monotone_envelopes),
        );
        kv("verify.bound_domination", format!("{}", v.bound_domination));
        kv(
            "verify.barrier_domination",
            format!("{}", v.barrier_domination),
        );
        kv("verify.supersolution", format!("{}", v.supersolution));
        kv("verify.conservation", format!("{}", v.conservation));
        kv(
            "verify.gradient_envelope",
            format!("{}", v.gradient_envelope),
        );
        kv(
            "verify.tol.max_principle",
            format!("{}", v.tol_max_principle),
        );
        kv("verify.tol.envelopes", format!("{}", v.tol_envelopes));
        kv("verify.tol.bound_slack", format!("{}", v.bound_slack));
        kv("verify.tol.barrier_slack", format!("{}", v.barrier_slack));
        kv("verify.tol.conservation", format!("{}", v.tol_conservation));
        kv(
            "verify.tol.gradient_envelope",
            format!("{}", v.tol_gradient_envelope),
        );
        kv(
            "verify.supersolution_density",
            format!("{}", v.supersolution_density),
        );
        kv(
            "verify.fit_window",
            format!("{},{}", v.fit_window.0, v.fit_window.1),
        );
        out
    }
}

struct KeyTable {
    entries: BTreeMap<String, (usize, String)>,
}

impl KeyTable {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn take_parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, ScenarioError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, raw)) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| ScenarioError::Parse {
                    line,
                    message: format!("cannot parse value `{raw}` for key `{key}`"),
                }),
        }
    }

    fn require<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, ScenarioError> {
        self.take_parsed(key)?.ok_or_else(|| ScenarioError::Parse {
            line: 0,
            message: format!("missing required key `{key}`"),
        })
    }

    fn or_default<T: std::str::FromStr>(
        &mut self,
        key: &str,
        default: T,
    ) -> Result<T, ScenarioError> {
        Ok(self.take_parsed(key)?.unwrap_or(default))
    }
}

/// Parses and fully validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut entries = BTreeMap::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ScenarioError::Parse {
            line: line_no,
            message: "expected `key = value`".into(),
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() || value.is_empty() {
            return Err(ScenarioError::Parse {
                line: line_no,
                message: "empty key or value".into(),
            });
        }
        if entries.insert(key.clone(), (line_no, value)).is_some() {
            return Err(ScenarioError::Parse {
                line: line_no,
                message: format!("duplicate key `{key}`"),
            });
        }
    }
    let mut table = KeyTable { entries };

    let name: String = table.require("name")?;
    let kind: String = table.require("flux.kind")?;
    let base = match kind.as_str() {
        "heat" => FluxModel::Heat,
        "perona_malik" => FluxModel::PeronaMalik,
        "anguige_schmeiser" => {
            let a: f64 = table.require("flux.a")?;
            FluxModel::anguige_schmeiser(a).map_err(|e| validation(e.to_string()))?
        }
        "turchin" => {
            let k0: f64 = table.require("flux.k0")?;
            let omega: f64 = table.require("flux.omega")?;
            let mu: f64 = table.require("flux.mu")?;
            FluxModel::turchin(k0, omega, mu).map_err(|e| validation(e.to_string()))?
        }
        other => {
            return Err(validation(format!(
                "unknown flux kind `{other}` (expected heat, turchin, anguige_schmeiser or \
                 perona_malik)"
            )))
        }
    };
    let extension = match table
        .or_default("flux.extend", "none".to_string())?
        .as_str()
    {
        "none" => ExtensionSpec::None,
        "auto" => ExtensionSpec::Auto,
        "explicit" => ExtensionSpec::Explicit {
            match_radius: table.require("flux.match_radius")?,
            blend_width: table.require("flux.blend_width")?,
        },
        other => return Err(validation(format!("unknown flux.extend mode `{other}`"))),
    };

    let form = match table.require::<String>("form")?.as_str() {
        "density_dirichlet" => ProblemForm::DensityDirichlet,
        "primitive_neumann" => ProblemForm::PrimitiveNeumann,
        other => return Err(validation(format!("unknown problem form `{other}`"))),
    };
    let length: f64 = table.or_default("length", 1.0)?;
    let cells: usize = table.or_default("cells", 200)?;

    let initial = match table.require::<String>("initial.family")?.as_str() {
        "sine" => InitialDatum::Sine {
            amplitude: table.require("initial.amplitude")?,
            mode: table.or_default("initial.mode", 1u32)?,
        },
        "cosine" => InitialDatum::Cosine {
            amplitude: table.require("initial.amplitude")?,
            mode: table.or_default("initial.mode", 1u32)?,
            offset: table.or_default("initial.offset", 0.0)?,
        },
        "bump" => InitialDatum::Bump {
            center: table.require("initial.center")?,
            width: table.require("initial.width")?,
            height: table.require("initial.height")?,
        },
        "custom" => {
            let (line, raw) = table
                .take("initial.values")
                .ok_or_else(|| ScenarioError::Parse {
                    line: 0,
                    message: "missing required key `initial.values`".into(),
                })?;
            let values: Result<Vec<f64>, _> =
                raw.split(',').map(|f| f.trim().parse::<f64>()).collect();
            InitialDatum::Custom {
                values: values.map_err(|_| ScenarioError::Parse {
                    line,
                    message: "initial.values must be a comma-separated list of numbers".into(),
                })?,
            }
        }
        other => {
            return Err(validation(format!(
                "unknown initial datum family `{other}`"
            )))
        }
    };

    let bound = match table
        .or_default("bound.mode", "optimize".to_string())?
        .as_str()
    {
        "fixed" => BoundSpec::Fixed {
            tau: table.require("bound.tau")?,
            lambda: table.require("bound.lambda")?,
            m: table.require("bound.m")?,
        },
        "optimize" => {
            let m_floor = match table
                .or_default("bound.m_floor", "auto".to_string())?
                .as_str()
            {
                "auto" => MFloor::Auto,
                raw => MFloor::Value(raw.parse::<f64>().map_err(|_| {
                    validation(format!(
                        "bound.m_floor must be `auto` or a number, got `{raw}`"
                    ))
                })?),
            };
            BoundSpec::Optimize { m_floor }
        }
        other => return Err(validation(format!("unknown bound.mode `{other}`"))),
    };

    let defaults = SolverConfig::default();
    let scheme = match table
        .or_default("solver.scheme", defaults.scheme.name().to_string())?
        .as_str()
    {
        "implicit_euler" => Scheme::ImplicitEuler,
        "crank_nicolson" => Scheme::CrankNicolson,
        other => return Err(validation(format!("unknown solver.scheme `{other}`"))),
    };
    let solver = SolverConfig {
        dt_initial: table.or_default("solver.dt_initial", defaults.dt_initial)?,
        dt_min: table.or_default("solver.dt_min", defaults.dt_min)?,
        dt_max: table.or_default("solver.dt_max", defaults.dt_max)?,
        newton_tol: table.or_default("solver.newton_tol", defaults.newton_tol)?,
        newton_max_iter: table.or_default("solver.newton_max_iter", defaults.newton_max_iter)?,
        scheme,
        t_final: table.or_default("solver.t_final", defaults.t_final)?,
        output_every: table.or_default("solver.output_every", defaults.output_every)?,
    };

    let dv = VerifySpec::default();
    let fit_window = match table.take("verify.fit_window") {
        None => dv.fit_window,
        Some((line, raw)) => {
            let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
            let parse_err = || ScenarioError::Parse {
                line,
                message: "verify.fit_window must be `lo,hi` with 0 <= lo < hi <= 1".into(),
            };
            if parts.len() != 2 {
                return Err(parse_err());
            }
            let lo: f64 = parts[0].parse().map_err(|_| parse_err())?;
            let hi: f64 = parts[1].parse().map_err(|_| parse_err())?;
            if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo >= hi {
                return Err(parse_err());
            }
            (lo, hi)
        }
    };
    let verify = VerifySpec {
        max_principle: table.or_default("verify.max_principle", dv.max_principle)?,
        monotone_envelopes: table.or_default("verify.monotone_envelopes", dv.monotone_envelopes)?,
        bound_domination: table.or_default("verify.bound_domination", dv.bound_domination)?,
        barrier_domination: table.or_default("verify.barrier_domination", dv.barrier_domination)?,
        supersolution: table.or_default("verify.supersolution", dv.supersolution)?,
        conservation: table.or_default("verify.conservation", dv.conservation)?,
        gradient_envelope: table.or_default("verify.gradient_envelope", dv.gradient_envelope)?,
        tol_max_principle: table.or_default("verify.tol.max_principle", dv.tol_max_principle)?,
        tol_envelopes: table.or_default("verify.tol.envelopes", dv.tol_envelopes)?,
        bound_slack: table.or_default("verify.tol.bound_slack", dv.bound_slack)?,
        barrier_slack: table.or_default("verify.tol.barrier_slack", dv.barrier_slack)?,
        tol_conservation: table.or_default("verify.tol.conservation", dv.tol_conservation)?,
        tol_gradient_envelope: table
            .or_default("verify.tol.gradient_envelope", dv.tol_gradient_envelope)?,
        supersolution_density: table
            .or_default("verify.supersolution_density", dv.supersolution_density)?,
        fit_window,
    };

    if let Some((line, _)) = table.entries.iter().next().map(|(k, v)| (v.0, k.clone())) {
        let key = table.entries.keys().next().unwrap().clone();
        return Err(ScenarioError::Parse {
            line,
            message: format!("unknown key `{key}`"),
        });
    }

    let scenario = Scenario {
        name,
        flux: FluxSpec { base, extension },
        form,
        length,
        cells,
        initial,
        bound,
        solver,
        verify,
    };
    validate(&scenario)?;
    Ok(scenario)
}

fn validate(s: &Scenario) -> Result<(), ScenarioError> {
    Grid::new(s.length, s.cells).map_err(|e| validation(e.to_string()))?;
    s.solver.validate().map_err(|e| validation(e.to_string()))?;

    if let InitialDatum::Custom { values } = &s.initial {
        if values.len() != s.cells + 1 {
            return Err(validation(format!(
                "custom datum has {} values but the grid has {} nodes",
                values.len(),
                s.cells + 1
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(validation("custom datum must be finite"));
        }
    }

    // Boundary compatibility of the datum family with the problem form.
    match (s.form, &s.initial) {
        (ProblemForm::DensityDirichlet, InitialDatum::Sine { .. }) => {}
        (ProblemForm::DensityDirichlet, InitialDatum::Bump { center, width, .. }) => {
            if center - width <= 0.0 || center + width >= s.length {
                return Err(validation(format!(
                    "bump support [{}, {}] must lie strictly inside (0, {})",
                    center - width,
                    center + width,
                    s.length
                )));
            }
        }
        (ProblemForm::DensityDirichlet, InitialDatum::Cosine { .. }) => {
            return Err(validation(
                "cosine data do not vanish on the boundary; the absorbing form needs \
                 sine, bump or a compatible custom table",
            ));
        }
        (ProblemForm::DensityDirichlet, InitialDatum::Custom { values }) => {
            if values[0] != 0.0 || values[s.cells] != 0.0 {
                return Err(validation(
                    "custom data for the absorbing form must be exactly 0 at both ends",
                ));
            }
        }
        (ProblemForm::PrimitiveNeumann, InitialDatum::Cosine { .. })
        | (ProblemForm::PrimitiveNeumann, InitialDatum::Bump { .. }) => {}
        (ProblemForm::PrimitiveNeumann, InitialDatum::Sine { .. }) => {
            return Err(validation(
                "sine data have nonzero end slopes; the zero-flux form needs cosine, bump \
                 or a compatible custom table",
            ));
        }
        (ProblemForm::PrimitiveNeumann, InitialDatum::Custom { values }) => {
            if values[0] != values[1] || values[s.cells] != values[s.cells - 1] {
                return Err(validation(
                    "custom data for the zero-flux form must repeat the end values so the \
                     one-sided boundary slopes vanish exactly",
                ));
            }
        }
    }

    // Data level against the parabolic threshold of the base flux.
    let parabolicity = s
        .flux
        .base
        .parabolicity()
        .map_err(|e| validation(e.to_string()))?;
    if parabolicity.is_degenerate() {
        return Err(validation(format!(
            "degenerate parabolic flux (diffusivity double root at {:.6}); the rate bound \
             does not cover this case",
            parabolicity.radius()
        )));
    }
    let level = s.data_level();
    if !level.is_finite() {
        return Err(validation("initial datum must be finite"));
    }
    if let Parabolicity::Bounded { radius } = parabolicity {
        let what = match s.form {
            ProblemForm::DensityDirichlet => "initial datum sup-norm",
            ProblemForm::PrimitiveNeumann => "initial slope sup-norm",
        };
        if level >= radius {
            return Err(validation(format!(
                "{what} {level:.6} is not strictly below the parabolic threshold {radius:.6} \
                 of flux {}",
                s.flux.base.kind_name()
            )));
        }
    }

    if let ExtensionSpec::Explicit {
        match_radius,
        blend_width,
    } = s.flux.extension
    {
        if !(match_radius > 0.0 && blend_width > 0.0) {
            return Err(validation(
                "explicit extension needs positive match radius and blend width",
            ));
        }
        if match_radius >= parabolicity.radius() {
            return Err(validation(format!(
                "extension match radius {match_radius} must lie strictly inside the parabolic \
                 threshold {:.6}",
                parabolicity.radius()
            )));
        }
    }
    if !matches!(s.flux.extension, ExtensionSpec::None) && !parabolicity.radius().is_finite() {
        return Err(validation(
            "flux extension requires a bounded parabolicity threshold; this flux is already \
             globally parabolic",
        ));
    }

    if let BoundSpec::Fixed { tau, lambda, m } = s.bound {
        rate_lab_core::BoundParams::new(tau, lambda, m, level.max(0.0), s.length)
            .map_err(|e| validation(e.to_string()))?;
    }
    if let BoundSpec::Optimize {
        m_floor: MFloor::Value(v),
    } = s.bound
    {
        if !(v >= 1.0 && v.is_finite()) {
            return Err(validation(format!(
                "bound.m_floor must be at least 1, got {v}"
            )));
        }
    }
    if s.verify.supersolution_density == 0 {
        return Err(validation("verify.supersolution_density must be positive"));
    }
    Ok(())
}
