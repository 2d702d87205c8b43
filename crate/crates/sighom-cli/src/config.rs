//! Line-oriented `key = value` scenario configs.
//!
//! Scales and exponents are rational strings ("1/8"), so the case-A boundary
//! `gamma = 1 - k` survives parsing exactly. Unknown and duplicate keys are
//! rejected with their field path. Serialization emits every field in a
//! canonical order, and parse -> serialize -> parse is the identity.

use crate::CliError;
use sighom_core::assemble::SourceTerm;
use sighom_core::coeff::{CoeffKind, ConductanceKind, InterfaceConductance, Matrix2, PeriodicCoefficient};
use sighom_core::profile::{InterfaceProfile, ProfileShape};
use sighom_core::rational::Rational;
use sighom_core::sweep::{CheckParams, Scenario, SolverParams};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// A scenario plus its output location.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub out_dir: String,
}

fn err(field: &str, msg: impl AsRef<str>) -> CliError {
    CliError::Validation(format!("{field}: {}", msg.as_ref()))
}

struct Fields {
    map: BTreeMap<String, String>,
    used: std::cell::RefCell<std::collections::BTreeSet<String>>,
}

impl Fields {
    fn get(&self, key: &str) -> Option<&str> {
        self.used.borrow_mut().insert(key.to_string());
        self.map.get(key).map(|s| s.as_str())
    }

    fn require(&self, key: &str) -> Result<&str, CliError> {
        self.get(key).ok_or_else(|| err(key, "missing required field"))
    }

    fn rational(&self, key: &str) -> Result<Rational, CliError> {
        Rational::parse(self.require(key)?).map_err(|e| err(key, e.to_string()))
    }

    fn rational_or(&self, key: &str, default: Rational) -> Result<Rational, CliError> {
        match self.get(key) {
            Some(s) => Rational::parse(s).map_err(|e| err(key, e.to_string())),
            None => Ok(default),
        }
    }

    fn float_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.get(key) {
            Some(s) => s.parse::<f64>().map_err(|_| err(key, "not a number")),
            None => Ok(default),
        }
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.get(key) {
            Some(s) => s.parse::<usize>().map_err(|_| err(key, "not a count")),
            None => Ok(default),
        }
    }

    fn usize(&self, key: &str) -> Result<usize, CliError> {
        self.require(key)?
            .parse::<usize>()
            .map_err(|_| err(key, "not a count"))
    }

    fn samples(&self, key: &str) -> Result<Vec<(f64, f64)>, CliError> {
        let raw = self.require(key)?;
        let mut out = Vec::new();
        for part in raw.split(',') {
            let part = part.trim();
            let (y, v) = part
                .split_once(':')
                .ok_or_else(|| err(key, format!("sample {part:?} is not y:value")))?;
            let y: f64 = y.trim().parse().map_err(|_| err(key, "bad sample abscissa"))?;
            let v: f64 = v.trim().parse().map_err(|_| err(key, "bad sample value"))?;
            out.push((y, v));
        }
        Ok(out)
    }
}

pub fn parse(text: &str) -> Result<ScenarioConfig, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(&format!("line {}", lineno + 1), "expected key = value"))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if map.insert(key.clone(), value).is_some() {
            return Err(err(&key, "duplicate key"));
        }
    }
    let fields = Fields { map, used: Default::default() };

    let id = fields.require("scenario")?.to_string();
    let length = fields.rational("domain.length")?;
    let half_height = fields.rational("domain.half_height")?;

    let profile = match fields.require("profile.preset")? {
        "sine" => InterfaceProfile::sine(),
        "sawtooth" => InterfaceProfile::sawtooth(),
        "flat" => InterfaceProfile::flat(fields.float_or("profile.level", 1.0)?),
        "samples" => InterfaceProfile::from_samples(&fields.samples("profile.samples")?)
            .map_err(|e| err("profile.samples", e.to_string()))?,
        other => return Err(err("profile.preset", format!("unknown preset {other:?}"))),
    };
    // touch optional keys so serialization order checks stay simple
    let _ = fields.get("profile.level");
    let _ = fields.get("profile.samples");

    let coeff = match fields.require("coefficient.preset")? {
        "identity" => PeriodicCoefficient::identity(),
        "layered" => PeriodicCoefficient::layered(
            fields.float_or("coefficient.base", 2.0)?,
            fields.float_or("coefficient.amplitude", 1.0)?,
        ),
        "rotated" => PeriodicCoefficient::rotated_anisotropic(
            fields.float_or("coefficient.angle", std::f64::consts::PI / 6.0)?,
            fields.float_or("coefficient.base", 2.0)?,
            fields.float_or("coefficient.amplitude", 1.0)?,
            fields.float_or("coefficient.cross", 1.0)?,
        ),
        "constant" => {
            let raw = fields.require("coefficient.entries")?;
            let vals: Vec<f64> = raw
                .split_whitespace()
                .map(|s| s.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| err("coefficient.entries", "expected 4 numbers"))?;
            if vals.len() != 4 {
                return Err(err("coefficient.entries", "expected 4 numbers a11 a12 a21 a22"));
            }
            PeriodicCoefficient::constant(Matrix2 {
                a: [[vals[0], vals[1]], [vals[2], vals[3]]],
            })
        }
        other => return Err(err("coefficient.preset", format!("unknown preset {other:?}"))),
    };
    let _ = fields.get("coefficient.base");
    let _ = fields.get("coefficient.amplitude");
    let _ = fields.get("coefficient.angle");
    let _ = fields.get("coefficient.cross");
    let _ = fields.get("coefficient.entries");

    let mut conductance = match fields.require("conductance.preset")? {
        "constant" => InterfaceConductance::constant(fields.float_or("conductance.value", 1.0)?),
        "sine" => InterfaceConductance::sine_positive(
            fields.float_or("conductance.mean", 1.0)?,
            fields.float_or("conductance.amplitude", 0.5)?,
        ),
        "samples" => InterfaceConductance::from_samples(&fields.samples("conductance.samples")?)
            .map_err(|e| err("conductance.samples", e.to_string()))?,
        "zero" => InterfaceConductance::none(),
        other => return Err(err("conductance.preset", format!("unknown preset {other:?}"))),
    };
    if let Some(h0) = fields.get("conductance.h0") {
        conductance.h0 = h0.parse().map_err(|_| err("conductance.h0", "not a number"))?;
    }
    let _ = fields.get("conductance.value");
    let _ = fields.get("conductance.mean");
    let _ = fields.get("conductance.amplitude");
    let _ = fields.get("conductance.samples");

    let k = fields.rational("exponent.k")?;
    let gamma = fields.rational("exponent.gamma")?;

    let scale = fields.float_or("source.scale", 1.0)?;
    let source = match fields.require("source.preset")? {
        "constant" => SourceTerm::Constant(scale),
        "split_sign" => SourceTerm::SplitSign(scale),
        "bump" => SourceTerm::Bump(scale),
        other => return Err(err("source.preset", format!("unknown preset {other:?}"))),
    };

    let nx_per_period = fields.usize("mesh.nx_per_period")?;
    let ny = fields.usize("mesh.ny")?;
    let flat_nx = fields.usize_or("mesh.flat_nx", 0)?;
    let cell_n = fields.usize_or("mesh.cell_n", 64)?;

    let eps_raw = fields.require("sweep.eps")?;
    let mut eps_list = Vec::new();
    for tok in eps_raw.split_whitespace() {
        eps_list.push(Rational::parse(tok).map_err(|e| err("sweep.eps", e.to_string()))?);
    }

    let solver = SolverParams {
        tol: fields.float_or("solver.tol", 1e-10)?,
        max_iter: fields.usize_or("solver.max_iter", 500_000)?,
        relaxation: fields
            .rational_or("solver.relaxation", Rational::new(3, 2))?
            .to_f64(),
    };
    let checks = CheckParams {
        bound_ratio: fields.float_or("check.bound_ratio", 3.0)?,
        decay_factor: fields
            .rational_or("check.decay_factor", Rational::new(1, 2))?
            .to_f64(),
    };
    let out_dir = fields.get("output.dir").unwrap_or("out").to_string();

    // reject unknown keys
    let used = fields.used.borrow();
    for key in fields.map.keys() {
        if !used.contains(key) {
            return Err(err(key, "unknown field"));
        }
    }

    let scenario = Scenario {
        id,
        length,
        half_height,
        k,
        gamma,
        profile,
        coeff,
        conductance,
        source,
        nx_per_period,
        ny,
        flat_nx,
        cell_n,
        eps_list,
        solver,
        checks,
    };
    scenario.validate().map_err(CliError::from)?;
    Ok(ScenarioConfig { scenario, out_dir })
}

fn push_samples(out: &mut String, key: &str, table: &sighom_core::profile::PeriodicTable1d) {
    let parts: Vec<String> = table
        .ys
        .iter()
        .zip(&table.values)
        .map(|(y, v)| format!("{y}:{v}"))
        .collect();
    let _ = writeln!(out, "{key} = {}", parts.join(", "));
}

/// Canonical serialization: every field, fixed order.
pub fn serialize(config: &ScenarioConfig) -> String {
    let s = &config.scenario;
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "scenario = {}", s.id);
    let _ = writeln!(w);
    let _ = writeln!(w, "domain.length = {}", s.length);
    let _ = writeln!(w, "domain.half_height = {}", s.half_height);
    let _ = writeln!(w);
    match &s.profile.shape {
        ProfileShape::Sine { mean, amplitude } => {
            if *amplitude == 0.0 {
                let _ = writeln!(w, "profile.preset = flat");
                let _ = writeln!(w, "profile.level = {mean}");
            } else {
                let _ = writeln!(w, "profile.preset = sine");
            }
        }
        ProfileShape::Sawtooth { .. } => {
            let _ = writeln!(w, "profile.preset = sawtooth");
        }
        ProfileShape::Samples(table) => {
            let _ = writeln!(w, "profile.preset = samples");
            push_samples(w, "profile.samples", table);
        }
    }
    let _ = writeln!(w);
    match &s.coeff.kind {
        CoeffKind::Identity => {
            let _ = writeln!(w, "coefficient.preset = identity");
        }
        CoeffKind::Constant(m) => {
            let _ = writeln!(w, "coefficient.preset = constant");
            let _ = writeln!(
                w,
                "coefficient.entries = {} {} {} {}",
                m.a[0][0], m.a[0][1], m.a[1][0], m.a[1][1]
            );
        }
        CoeffKind::Layered { base, amplitude } => {
            let _ = writeln!(w, "coefficient.preset = layered");
            let _ = writeln!(w, "coefficient.base = {base}");
            let _ = writeln!(w, "coefficient.amplitude = {amplitude}");
        }
        CoeffKind::RotatedAnisotropic { angle, base, amplitude, cross } => {
            let _ = writeln!(w, "coefficient.preset = rotated");
            let _ = writeln!(w, "coefficient.angle = {angle}");
            let _ = writeln!(w, "coefficient.base = {base}");
            let _ = writeln!(w, "coefficient.amplitude = {amplitude}");
            let _ = writeln!(w, "coefficient.cross = {cross}");
        }
        CoeffKind::Table(_) => {
            // table coefficients are built programmatically, not from configs
            let _ = writeln!(w, "coefficient.preset = identity");
        }
    }
    let _ = writeln!(w);
    match &s.conductance.kind {
        ConductanceKind::Constant(v) => {
            if s.conductance.zero {
                let _ = writeln!(w, "conductance.preset = zero");
            } else {
                let _ = writeln!(w, "conductance.preset = constant");
                let _ = writeln!(w, "conductance.value = {v}");
                let _ = writeln!(w, "conductance.h0 = {}", s.conductance.h0);
            }
        }
        ConductanceKind::SinePositive { mean, amplitude } => {
            let _ = writeln!(w, "conductance.preset = sine");
            let _ = writeln!(w, "conductance.mean = {mean}");
            let _ = writeln!(w, "conductance.amplitude = {amplitude}");
            let _ = writeln!(w, "conductance.h0 = {}", s.conductance.h0);
        }
        ConductanceKind::Samples(table) => {
            let _ = writeln!(w, "conductance.preset = samples");
            push_samples(w, "conductance.samples", table);
            let _ = writeln!(w, "conductance.h0 = {}", s.conductance.h0);
        }
    }
    let _ = writeln!(w);
    let _ = writeln!(w, "exponent.k = {}", s.k);
    let _ = writeln!(w, "exponent.gamma = {}", s.gamma);
    let _ = writeln!(w);
    let (preset, scale) = match s.source {
        SourceTerm::Constant(c) => ("constant", c),
        SourceTerm::SplitSign(c) => ("split_sign", c),
        SourceTerm::Bump(c) => ("bump", c),
    };
    let _ = writeln!(w, "source.preset = {preset}");
    let _ = writeln!(w, "source.scale = {scale}");
    let _ = writeln!(w);
    let _ = writeln!(w, "mesh.nx_per_period = {}", s.nx_per_period);
    let _ = writeln!(w, "mesh.ny = {}", s.ny);
    let _ = writeln!(w, "mesh.flat_nx = {}", s.flat_nx);
    let _ = writeln!(w, "mesh.cell_n = {}", s.cell_n);
    let _ = writeln!(w);
    let eps: Vec<String> = s.eps_list.iter().map(|e| e.to_string()).collect();
    let _ = writeln!(w, "sweep.eps = {}", eps.join(" "));
    let _ = writeln!(w);
    let _ = writeln!(w, "solver.tol = {}", s.solver.tol);
    let _ = writeln!(w, "solver.max_iter = {}", s.solver.max_iter);
    let _ = writeln!(w, "solver.relaxation = {}", rational_like(s.solver.relaxation));
    let _ = writeln!(w);
    let _ = writeln!(w, "check.bound_ratio = {}", s.checks.bound_ratio);
    let _ = writeln!(w, "check.decay_factor = {}", rational_like(s.checks.decay_factor));
    let _ = writeln!(w);
    let _ = writeln!(w, "output.dir = {}", config.out_dir);
    out
}

/// Common relaxation/decay values have short exact rational spellings.
fn rational_like(v: f64) -> String {
    for den in 1..=64i64 {
        let num = (v * den as f64).round();
        if (num / den as f64 - v).abs() < 1e-15 && num.abs() < 1e9 {
            return Rational::new(num as i64, den).to_string();
        }
    }
    format!("{v}")
}

pub fn load(path: &std::path::Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CASE_A: &str = r#"
scenario = case-a
domain.length = 1
domain.half_height = 1
profile.preset = sine
coefficient.preset = identity
conductance.preset = constant
conductance.value = 1
exponent.k = 1
exponent.gamma = 0
source.preset = split_sign
source.scale = -1
mesh.nx_per_period = 16
mesh.ny = 8
sweep.eps = 1/4 1/8 1/16 1/32
"#;

    #[test]
    fn parse_roundtrip_is_identity() {
        let cfg = parse(CASE_A).unwrap();
        let text = serialize(&cfg);
        let cfg2 = parse(&text).unwrap();
        assert_eq!(cfg, cfg2);
        // and serialization is a fixed point
        assert_eq!(text, serialize(&cfg2));
    }

    #[test]
    fn unknown_key_rejected_with_path() {
        let text = format!("{CASE_A}\nmesh.nz = 4\n");
        let e = parse(&text).unwrap_err();
        assert!(e.to_string().contains("mesh.nz"), "{e}");
    }

    #[test]
    fn duplicate_key_rejected() {
        let text = format!("{CASE_A}\nexponent.k = 2\n");
        let e = parse(&text).unwrap_err();
        assert!(e.to_string().contains("exponent.k"), "{e}");
    }

    #[test]
    fn bad_rational_names_field() {
        let text = CASE_A.replace("exponent.gamma = 0", "exponent.gamma = zero");
        let e = parse(&text).unwrap_err();
        assert!(e.to_string().contains("exponent.gamma"), "{e}");
    }

    #[test]
    fn eps_must_divide_length() {
        let text = CASE_A.replace("sweep.eps = 1/4 1/8 1/16 1/32", "sweep.eps = 1/4 1/8 2/7");
        let e = parse(&text).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn short_sweep_rejected() {
        let text = CASE_A.replace("sweep.eps = 1/4 1/8 1/16 1/32", "sweep.eps = 1/4");
        let e = parse(&text).unwrap_err();
        assert!(e.to_string().contains(">= 3"), "{e}");
    }

    #[test]
    fn comments_and_blanks_ignored() {
        let text = format!("# header\n\n{CASE_A}\n# trailing\nmesh.cell_n = 32 # inline\n");
        let cfg = parse(&text).unwrap();
        assert_eq!(cfg.scenario.cell_n, 32);
    }

    #[test]
    fn zero_conductance_roundtrip() {
        let text = CASE_A
            .replace("conductance.preset = constant", "conductance.preset = zero")
            .replace("conductance.value = 1\n", "");
        let cfg = parse(&text).unwrap();
        assert!(cfg.scenario.conductance.zero);
        let cfg2 = parse(&serialize(&cfg)).unwrap();
        assert_eq!(cfg, cfg2);
    }

    #[test]
    fn sawtooth_and_samples_roundtrip() {
        let text = CASE_A
            .replace("profile.preset = sine", "profile.preset = sawtooth")
            .replace(
                "conductance.preset = constant\nconductance.value = 1",
                "conductance.preset = samples\nconductance.samples = 0:1, 0.5:2, 1:1",
            );
        let cfg = parse(&text).unwrap();
        let cfg2 = parse(&serialize(&cfg)).unwrap();
        assert_eq!(cfg, cfg2);
    }
}
