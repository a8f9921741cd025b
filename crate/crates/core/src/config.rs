//! Run configuration files.
//!
//! Plain `key = value` lines grouped under `[section]` headers; `#` starts a
//! comment. Every section has a fixed key set except `[params]` (free
//! expression parameters) and `[tolerances]` (names from
//! [`crate::tolerances::DEFAULTS`]). Errors carry `file:line`.
//!
//! ```text
//! [family]
//! name = lense-thirring
//! [params]
//! mu = 0.5
//! J = 1.5
//! [grid]
//! kind = sector
//! r_min = 2
//! r_max = 20
//! n = 200
//! m_z = 1
//! [coupling]
//! lambda = 1/6
//! mass = 1
//! N = 1
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use crate::classical::{ClassicalState, Scheme};
use crate::error::{Error, Result};
use crate::expr::{parse, Expr, Params};
use crate::metric::{KerrOrder, Metric};
use crate::operator::{Coupling, GridSpec, Rational};
use crate::tolerances::Tolerances;

/// Gravitational constant and speed of light used by `[units] system = si`.
pub const G_SI: f64 = 6.674_30e-11;
pub const C_SI: f64 = 299_792_458.0;

const SECTIONS: &[(&str, &[&str])] = &[
    ("family", &["name", "order"]),
    ("params", &[]),
    ("units", &["system"]),
    (
        "functions",
        &["V", "W", "Omega_x", "Omega_y", "Omega_z", "O", "g00", "g01", "g02", "g03", "g11", "g12", "g13", "g22", "g23", "g33"],
    ),
    ("frame", &["accel", "rotation"]),
    ("domain", &["r_min", "check_points"]),
    ("grid", &["kind", "r_min", "r_max", "n", "l", "m_z", "l_max", "lo", "hi", "levels"]),
    ("coupling", &["lambda", "mass", "N"]),
    ("orbit", &["x", "p", "momentum", "dt", "steps", "scheme", "sample"]),
    ("packet", &["center", "width", "momentum"]),
    ("sample", &["points", "seed", "r_min", "r_max"]),
    ("tolerances", &[]),
];

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug, Clone)]
struct Section {
    line: usize,
    entries: BTreeMap<String, Entry>,
}

/// A parsed configuration file, before interpretation.
#[derive(Debug, Clone)]
pub struct Document {
    path: String,
    sections: BTreeMap<String, Section>,
}

impl Document {
    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let mut sections: BTreeMap<String, Section> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |msg: String| Error::Config(format!("{path}:{line}: {msg}"));
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| err("unterminated section header".into()))?.trim();
                if !SECTIONS.iter().any(|(s, _)| *s == name) {
                    return Err(err(format!("unknown section [{name}]")));
                }
                if sections.contains_key(name) {
                    return Err(err(format!("duplicate section [{name}]")));
                }
                sections.insert(name.to_string(), Section { line, entries: BTreeMap::new() });
                current = Some(name.to_string());
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let section = current.as_ref().ok_or_else(|| err("entry before the first section header".into()))?;
            let allowed = SECTIONS.iter().find(|(s, _)| s == section).map(|(_, k)| *k).unwrap_or(&[]);
            let free = section == "params" || section == "tolerances";
            if key.is_empty() || (!free && !allowed.contains(&key)) {
                return Err(err(format!("unknown key `{key}` in [{section}]")));
            }
            if value.is_empty() {
                return Err(err(format!("empty value for `{key}`")));
            }
            let sec = sections.get_mut(section).expect("section registered");
            if sec.entries.insert(key.to_string(), Entry { value: value.to_string(), line }).is_some() {
                return Err(err(format!("duplicate key `{key}` in [{section}]")));
            }
        }
        Ok(Self { path: path.to_string(), sections })
    }

    pub fn has(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    fn error_at(&self, line: usize, msg: impl std::fmt::Display) -> Error {
        Error::Config(format!("{}:{line}: {msg}", self.path))
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.sections.get(section).and_then(|s| s.entries.get(key))
    }

    fn require(&self, section: &str, key: &str) -> Result<&Entry> {
        match self.sections.get(section) {
            None => Err(Error::Config(format!("{}: missing [{section}] section", self.path))),
            Some(s) => s
                .entries
                .get(key)
                .ok_or_else(|| self.error_at(s.line, format!("[{section}] needs `{key}`"))),
        }
    }

    fn number(&self, section: &str, key: &str) -> Result<Option<f64>> {
        self.get(section, key)
            .map(|e| {
                e.value
                    .parse::<f64>()
                    .map_err(|_| self.error_at(e.line, format!("`{key}`: `{}` is not a number", e.value)))
            })
            .transpose()
    }

    fn integer<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<Option<T>> {
        self.get(section, key)
            .map(|e| {
                e.value
                    .parse::<T>()
                    .map_err(|_| self.error_at(e.line, format!("`{key}`: `{}` is not an integer", e.value)))
            })
            .transpose()
    }

    fn vector(&self, section: &str, key: &str) -> Result<Option<[f64; 3]>> {
        self.get(section, key).map(|e| self.parse_vector(e, key)).transpose()
    }

    fn parse_vector(&self, e: &Entry, key: &str) -> Result<[f64; 3]> {
        let parts: Vec<&str> = e.value.split([',', ' ']).filter(|s| !s.is_empty()).collect();
        let nums: Vec<f64> = parts
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| self.error_at(e.line, format!("`{key}`: `{}` is not a list of numbers", e.value)))?;
        match nums.len() {
            1 => Ok([nums[0]; 3]),
            3 => Ok([nums[0], nums[1], nums[2]]),
            k => Err(self.error_at(e.line, format!("`{key}` needs 1 or 3 numbers, got {k}"))),
        }
    }

    fn expr(&self, section: &str, key: &str) -> Result<Option<Expr>> {
        self.get(section, key)
            .map(|e| parse(&e.value).map_err(|err| self.error_at(e.line, format!("`{key}`: {err}"))))
            .transpose()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    /// `G = c = 1`, lengths and times in the same unit.
    Geometric,
    /// Masses in kg, angular momenta in kg m^2/s, accelerations in m/s^2,
    /// rotation rates in rad/s; converted to geometric units (metres).
    Si,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub accel: [f64; 3],
    pub rotation: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitSpec {
    pub initial: ClassicalState,
    pub dt: f64,
    pub steps: usize,
    pub scheme: Scheme,
    pub sample: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PacketSpec {
    pub center: f64,
    pub width: f64,
    /// Wave number; operators are built with `hbar = 1`.
    pub momentum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSpec {
    pub points: usize,
    pub seed: u64,
    pub r_min: f64,
    pub r_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum GridSettings {
    Sector { r_min: f64, r_max: f64, n: usize, l: usize, m_z: i32, l_max: Option<usize> },
    Cartesian { lo: [f64; 3], hi: [f64; 3], n: usize },
}

/// Everything a run needs, interpreted from a [`Document`].
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub path: String,
    pub metric: Metric,
    /// Acceleration and rotation of a noninertial family, in geometric units.
    pub frame: Option<Frame>,
    pub units: Units,
    /// Conformal factor for conformal checks.
    pub conformal_factor: Option<Expr>,
    pub coupling: Coupling,
    /// Number of spectral levels reported.
    pub levels: usize,
    pub orbit: Option<OrbitSpec>,
    pub packet: Option<PacketSpec>,
    pub sample: SampleSpec,
    pub tolerances: Tolerances,
    grid: Option<GridSettings>,
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let doc = Document::parse(text, path)?;
        Self::from_document(&doc)
    }

    pub fn from_document(doc: &Document) -> Result<Self> {
        let units = match doc.get("units", "system") {
            None => Units::Geometric,
            Some(e) => match e.value.as_str() {
                "geometric" => Units::Geometric,
                "si" => Units::Si,
                other => return Err(doc.error_at(e.line, format!("unknown unit system `{other}` (geometric, si)"))),
            },
        };
        let params = read_params(doc)?;
        let (metric, frame) = build_metric(doc, &params, units)?;
        let conformal_factor = doc.expr("functions", "O")?.map(|o| o.bind(&params));

        let mut coupling = Coupling::default();
        if let Some(e) = doc.get("coupling", "lambda") {
            coupling.lambda = e.value.parse::<Rational>().map_err(|err| doc.error_at(e.line, err))?;
        }
        if let Some(m) = doc.number("coupling", "mass")? {
            coupling.mass = m;
        }
        if let Some(n) = doc.number("coupling", "N")? {
            coupling.n_param = n;
        }
        coupling.validate().map_err(|err| {
            let line = doc.sections.get("coupling").map_or(0, |s| s.line);
            doc.error_at(line, err)
        })?;

        let grid = read_grid(doc)?;
        let levels = doc.integer("grid", "levels")?.unwrap_or(10);

        let mut tolerances = Tolerances::default();
        if let Some(sec) = doc.sections.get("tolerances") {
            for (k, e) in &sec.entries {
                let v: f64 = e.value.parse().map_err(|_| doc.error_at(e.line, format!("`{k}`: `{}` is not a number", e.value)))?;
                tolerances.set(k, v).map_err(|err| doc.error_at(e.line, err))?;
            }
        }

        Ok(Self {
            path: doc.path.clone(),
            metric,
            frame,
            units,
            conformal_factor,
            coupling,
            levels,
            orbit: read_orbit(doc)?,
            packet: read_packet(doc)?,
            sample: read_sample(doc)?,
            tolerances,
            grid,
        })
    }

    pub fn has_grid(&self) -> bool {
        self.grid.is_some()
    }

    /// The configured grid, with `n` optionally overridden.
    pub fn grid(&self, n_override: Option<usize>) -> Result<GridSpec> {
        let settings = self
            .grid
            .as_ref()
            .ok_or_else(|| Error::Config(format!("{}: missing [grid] section", self.path)))?;
        match *settings {
            GridSettings::Sector { r_min, r_max, n, l, m_z, l_max } => {
                let n = n_override.unwrap_or(n);
                match l_max {
                    Some(l_max) => GridSpec::sector_block(r_min, r_max, n, l, m_z, l_max),
                    None => GridSpec::sector(r_min, r_max, n, l, m_z),
                }
            }
            GridSettings::Cartesian { lo, hi, n } => GridSpec::cartesian(lo, hi, n_override.unwrap_or(n)),
        }
    }
}

fn read_params(doc: &Document) -> Result<Params> {
    let mut params = Params::new();
    if let Some(sec) = doc.sections.get("params") {
        for (k, e) in &sec.entries {
            if !k.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            {
                return Err(doc.error_at(e.line, format!("`{k}` is not a valid parameter name")));
            }
            let v: f64 = e.value.parse().map_err(|_| doc.error_at(e.line, format!("`{k}`: `{}` is not a number", e.value)))?;
            params.insert(k.clone(), v);
        }
    }
    Ok(params)
}

fn param(doc: &Document, params: &Params, name: &str) -> Result<f64> {
    params.get(name).copied().ok_or_else(|| {
        let line = doc.sections.get("params").or(doc.sections.get("family")).map_or(0, |s| s.line);
        doc.error_at(line, format!("[params] needs `{name}`"))
    })
}

fn build_metric(doc: &Document, params: &Params, units: Units) -> Result<(Metric, Option<Frame>)> {
    let name_entry = doc.require("family", "name")?;
    let at = |err: Error| doc.error_at(name_entry.line, err);
    let si = units == Units::Si;
    let c2 = C_SI * C_SI;
    let rotation = doc.vector("frame", "rotation")?;
    let accel = doc.vector("frame", "accel")?;

    let func = |key: &str| doc.expr("functions", key);
    let need = |key: &str| -> Result<Expr> {
        func(key)?.ok_or_else(|| doc.error_at(name_entry.line, format!("family `{}` needs [functions] {key}", name_entry.value)))
    };
    let omega = || -> Result<[Expr; 3]> {
        Ok([
            func("Omega_x")?.unwrap_or_else(Expr::zero),
            func("Omega_y")?.unwrap_or_else(Expr::zero),
            func("Omega_z")?.unwrap_or_else(Expr::zero),
        ])
    };
    if accel.is_some() && name_entry.value != "noninertial" {
        let line = doc.get("frame", "accel").map_or(0, |e| e.line);
        return Err(doc.error_at(line, "`accel` only applies to the noninertial family"));
    }

    let mut frame = None;
    let mut metric = match name_entry.value.as_str() {
        "static" => Metric::static_diagonal(need("V")?, need("W")?, params.clone()).map_err(at)?,
        "rotating-isotropic" => Metric::rotating_isotropic(need("V")?, need("W")?, omega()?, params.clone()).map_err(at)?,
        "kerr" => {
            let order = match doc.get("family", "order") {
                None => KerrOrder::Full,
                Some(e) => match e.value.as_str() {
                    "leading" => KerrOrder::Leading,
                    "full" => KerrOrder::Full,
                    o => return Err(doc.error_at(e.line, format!("unknown Kerr order `{o}` (leading, full)"))),
                },
            };
            let (mu, a) = if si {
                (G_SI * param(doc, params, "M")? / c2, param(doc, params, "a")?)
            } else {
                (param(doc, params, "mu")?, param(doc, params, "a")?)
            };
            Metric::kerr(mu, a, order).map_err(at)?
        }
        "lense-thirring" => {
            let (mu, j) = if si {
                (G_SI * param(doc, params, "M")? / c2, G_SI * param(doc, params, "J")? / (c2 * C_SI))
            } else {
                (param(doc, params, "mu")?, param(doc, params, "J")?)
            };
            Metric::lense_thirring(mu, j).map_err(at)?
        }
        "noninertial" => {
            let mut a = accel.unwrap_or([0.0; 3]);
            let mut o = rotation.unwrap_or([0.0; 3]);
            if si {
                a = a.map(|v| v / c2);
                o = o.map(|v| v / C_SI);
            }
            frame = Some(Frame { accel: a, rotation: o });
            Metric::noninertial(a, o)
        }
        "minkowski" => Metric::minkowski(),
        "custom" => {
            let mut comps: [Expr; 10] = std::array::from_fn(|_| Expr::zero());
            for (k, name) in crate::metric::COMPONENT_NAMES.iter().enumerate() {
                comps[k] = func(name)?.unwrap_or_else(Expr::zero);
            }
            Metric::custom(comps, params.clone())
        }
        other => {
            return Err(doc.error_at(
                name_entry.line,
                format!("unknown family `{other}` (static, rotating-isotropic, kerr, lense-thirring, noninertial, minkowski, custom)"),
            ))
        }
    };
    if let (Some(o), false) = (rotation, name_entry.value == "noninertial") {
        let o = if si { o.map(|v| v / C_SI) } else { o };
        metric = metric.rotate_to_frame(o).map_err(|e| doc.error_at(doc.get("frame", "rotation").map_or(0, |e| e.line), e))?;
    }

    let mut domain = metric.domain().clone();
    if let Some(r_min) = doc.number("domain", "r_min")? {
        domain.r_min = r_min;
    }
    if let Some(e) = doc.get("domain", "check_points") {
        domain.check_points = e
            .value
            .split(';')
            .map(|p| {
                let v = doc.parse_vector(&Entry { value: p.trim().to_string(), line: e.line }, "check_points")?;
                Ok([0.0, v[0], v[1], v[2]])
            })
            .collect::<Result<_>>()?;
    }
    let metric = metric.with_domain(domain);
    metric.validate().map_err(|e| doc.error_at(doc.get("domain", "check_points").map_or(name_entry.line, |e| e.line), e))?;
    Ok((metric, frame))
}

fn read_grid(doc: &Document) -> Result<Option<GridSettings>> {
    let Some(sec) = doc.sections.get("grid") else {
        return Ok(None);
    };
    let kind = doc.get("grid", "kind").map_or("sector", |e| e.value.as_str());
    let settings = match kind {
        "sector" => GridSettings::Sector {
            r_min: doc.number("grid", "r_min")?.ok_or_else(|| doc.error_at(sec.line, "[grid] needs `r_min`"))?,
            r_max: doc.number("grid", "r_max")?.ok_or_else(|| doc.error_at(sec.line, "[grid] needs `r_max`"))?,
            n: doc.integer("grid", "n")?.ok_or_else(|| doc.error_at(sec.line, "[grid] needs `n`"))?,
            l: doc.integer("grid", "l")?.unwrap_or(0),
            m_z: doc.integer("grid", "m_z")?.unwrap_or(0),
            l_max: doc.integer("grid", "l_max")?,
        },
        "cartesian" => GridSettings::Cartesian {
            lo: doc.vector("grid", "lo")?.ok_or_else(|| doc.error_at(sec.line, "[grid] needs `lo`"))?,
            hi: doc.vector("grid", "hi")?.ok_or_else(|| doc.error_at(sec.line, "[grid] needs `hi`"))?,
            n: doc.integer("grid", "n")?.ok_or_else(|| doc.error_at(sec.line, "[grid] needs `n`"))?,
        },
        other => {
            let line = doc.get("grid", "kind").map_or(sec.line, |e| e.line);
            return Err(doc.error_at(line, format!("unknown grid kind `{other}` (sector, cartesian)")));
        }
    };
    Ok(Some(settings))
}

fn read_orbit(doc: &Document) -> Result<Option<OrbitSpec>> {
    let Some(sec) = doc.sections.get("orbit") else {
        return Ok(None);
    };
    let x = doc.vector("orbit", "x")?.ok_or_else(|| doc.error_at(sec.line, "[orbit] needs `x`"))?;
    let initial = match (doc.vector("orbit", "p")?, doc.vector("orbit", "momentum")?) {
        (Some(p), None) => ClassicalState::new(x, p),
        (None, Some(m)) => ClassicalState::with_physical_momentum(x, m),
        (None, None) => ClassicalState::new(x, [0.0; 3]),
        (Some(_), Some(_)) => return Err(doc.error_at(sec.line, "[orbit] takes either `p` or `momentum`, not both")),
    };
    let scheme = match doc.get("orbit", "scheme") {
        None => Scheme::Leapfrog,
        Some(e) => e.value.parse().map_err(|err| doc.error_at(e.line, err))?,
    };
    Ok(Some(OrbitSpec {
        initial,
        dt: doc.number("orbit", "dt")?.ok_or_else(|| doc.error_at(sec.line, "[orbit] needs `dt`"))?,
        steps: doc.integer("orbit", "steps")?.ok_or_else(|| doc.error_at(sec.line, "[orbit] needs `steps`"))?,
        scheme,
        sample: doc.integer("orbit", "sample")?.unwrap_or(1),
    }))
}

fn read_packet(doc: &Document) -> Result<Option<PacketSpec>> {
    let Some(sec) = doc.sections.get("packet") else {
        return Ok(None);
    };
    Ok(Some(PacketSpec {
        center: doc.number("packet", "center")?.ok_or_else(|| doc.error_at(sec.line, "[packet] needs `center`"))?,
        width: doc.number("packet", "width")?.ok_or_else(|| doc.error_at(sec.line, "[packet] needs `width`"))?,
        momentum: doc.number("packet", "momentum")?.unwrap_or(0.0),
    }))
}

fn read_sample(doc: &Document) -> Result<SampleSpec> {
    Ok(SampleSpec {
        points: doc.integer("sample", "points")?.unwrap_or(100),
        seed: doc.integer("sample", "seed")?.unwrap_or(1),
        r_min: doc.number("sample", "r_min")?.unwrap_or(1.0),
        r_max: doc.number("sample", "r_max")?.unwrap_or(10.0),
    })
}

#[cfg(test)]
mod tests;
