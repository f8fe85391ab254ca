//! Flat `key = value` experiment configs.
//!
//! Lines hold one `key = value` pair; `#` starts a comment; list keys
//! (`field`, `epsilon`, `resolution`) may repeat. Every error found is
//! reported with its line number.

use std::collections::BTreeMap;
use std::fmt;

use molab_core::fields::FieldFixture;
use molab_core::geometry::{AxisBox, Domain};
use molab_core::nfunctions::{
    CoefficientMap, DoublePhase, ExponentMap, GrowthData, NFunctionSpec, PowerLaw, VarExpDoublePhase,
};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Check,
    Approx,
    Converge,
    Minimize,
    Gap,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Check => "check",
            Kind::Approx => "approx",
            Kind::Converge => "converge",
            Kind::Minimize => "minimize",
            Kind::Gap => "gap",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainLit {
    UnitSquare,
    UnitBall(usize),
    LShape,
    Box { min: Vec<f64>, max: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Polygon(Vec<[f64; 2]>),
}

impl DomainLit {
    pub fn build(&self) -> molab_core::Result<Domain> {
        match self {
            DomainLit::UnitSquare => Ok(Domain::unit_square()),
            DomainLit::UnitBall(d) => Ok(Domain::unit_ball(*d)),
            DomainLit::LShape => Ok(Domain::l_shape()),
            DomainLit::Box { min, max } => Domain::axis_box(min.clone(), max.clone()),
            DomainLit::Ball { center, radius } => Domain::ball(center.clone(), *radius),
            DomainLit::Polygon(v) => Domain::polygon(v.clone()),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainLit::UnitSquare | DomainLit::LShape | DomainLit::Polygon(_) => 2,
            DomainLit::UnitBall(d) => *d,
            DomainLit::Box { min, .. } => min.len(),
            DomainLit::Ball { center, .. } => center.len(),
        }
    }

    fn text(&self) -> String {
        match self {
            DomainLit::UnitSquare => "unit_square".into(),
            DomainLit::UnitBall(d) => format!("unit_ball {d}"),
            DomainLit::LShape => "l_shape".into(),
            DomainLit::Box { min, max } => format!("box {} {}", nums(min), nums(max)),
            DomainLit::Ball { center, radius } => format!("ball {} {radius}", nums(center)),
            DomainLit::Polygon(v) => {
                format!("polygon {}", nums(&v.iter().flat_map(|p| p.iter().copied()).collect::<Vec<_>>()))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Power,
    DoublePhase,
    VarExp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Composite,
    Ball,
}

/// A radius, absolute or as a fraction of the cover radius `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsLit {
    Abs(f64),
    /// `R / k`.
    RFrac(f64),
}

impl EpsLit {
    pub fn resolve(self, r: f64) -> f64 {
        match self {
            EpsLit::Abs(e) => e,
            EpsLit::RFrac(k) => r / k,
        }
    }

    fn text(self) -> String {
        match self {
            EpsLit::Abs(e) => format!("{e}"),
            EpsLit::RFrac(k) => format!("R/{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub domain: DomainLit,
    pub family: Family,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub coefficient: CoefficientMap,
    pub sup_a: f64,
    pub p_x: Option<ExponentMap>,
    pub q_x: Option<ExponentMap>,
    pub n: usize,
    pub pad: f64,
    /// Partition smoothing; `None` selects `clamp(4h, 2h, inflate/2)`.
    pub smoothing: Option<f64>,
    pub mode: Mode,
    pub field: Vec<FieldFixture>,
    pub boundary: Vec<FieldFixture>,
    pub truncate: Option<f64>,
    pub epsilon: Vec<EpsLit>,
    pub resolution: Vec<usize>,
    pub rel_tol: f64,
    pub lux_tol: f64,
    pub max_iter: usize,
    pub step_tol: f64,
    pub slack: f64,
    /// `D > 1` of the continuity assumption.
    pub budget_d: f64,
    /// Ball radii of the continuity and sandwich checks, in `(0, 1/2)`.
    pub gamma: Vec<f64>,
    pub csv: String,
    pub json: String,
    pub svg: String,
}

/// One problem in a config text; line 0 means the file as a whole.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "config: {}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

const LIST_KEYS: [&str; 5] = ["field", "boundary", "epsilon", "resolution", "gamma"];
const KEYS: [&str; 30] = [
    "experiment", "domain", "family", "p", "q", "alpha", "coefficient", "sup_a", "p_x", "q_x", "n", "pad",
    "smoothing", "mode", "field", "boundary", "truncate", "epsilon", "resolution", "rel_tol", "lux_tol",
    "max_iter", "step_tol", "slack", "csv", "json", "svg", "dim", "budget_d", "gamma",
];

fn nums(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(" ")
}

fn parse_nums(s: &str) -> Result<Vec<f64>, String> {
    s.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("malformed number `{t}`"))
        })
        .collect()
}

fn split_head(s: &str) -> (&str, &str) {
    let s = s.trim();
    match s.find(char::is_whitespace) {
        Some(i) => (&s[..i], s[i..].trim()),
        None => (s, ""),
    }
}

fn arity(name: &str, args: &[f64], n: usize) -> Result<(), String> {
    if args.len() == n {
        Ok(())
    } else {
        Err(format!("`{name}` takes {n} numbers, got {}", args.len()))
    }
}

fn index(v: f64, what: &str) -> Result<usize, String> {
    if v >= 0.0 && v.fract() == 0.0 && v < 3.0 {
        Ok(v as usize)
    } else {
        Err(format!("{what} must be 0, 1 or 2, got {v}"))
    }
}

fn parse_domain(s: &str) -> Result<DomainLit, String> {
    let (head, rest) = split_head(s);
    let a = parse_nums(rest)?;
    match head {
        "unit_square" => arity(head, &a, 0).map(|_| DomainLit::UnitSquare),
        "l_shape" => arity(head, &a, 0).map(|_| DomainLit::LShape),
        "unit_ball" => match a.as_slice() {
            [] => Ok(DomainLit::UnitBall(2)),
            [d] if (1.0..=3.0).contains(d) && d.fract() == 0.0 => Ok(DomainLit::UnitBall(*d as usize)),
            _ => Err("`unit_ball` takes an optional dimension in 1..=3".into()),
        },
        "box" => {
            if a.is_empty() || a.len() % 2 != 0 || a.len() > 6 {
                return Err("`box` takes the min corner then the max corner".into());
            }
            let (min, max) = a.split_at(a.len() / 2);
            AxisBox::new(min.to_vec(), max.to_vec()).map_err(|e| e.to_string())?;
            Ok(DomainLit::Box { min: min.to_vec(), max: max.to_vec() })
        }
        "ball" => {
            if a.len() < 2 || a.len() > 4 {
                return Err("`ball` takes a center and a radius".into());
            }
            let (center, r) = a.split_at(a.len() - 1);
            if !(r[0] > 0.0) {
                return Err("ball radius must be positive".into());
            }
            Ok(DomainLit::Ball { center: center.to_vec(), radius: r[0] })
        }
        "polygon" => {
            if a.len() < 6 || a.len() % 2 != 0 {
                return Err("`polygon` takes at least three x y vertex pairs".into());
            }
            let v: Vec<[f64; 2]> = a.chunks(2).map(|c| [c[0], c[1]]).collect();
            Domain::polygon(v.clone()).map_err(|e| e.to_string())?;
            Ok(DomainLit::Polygon(v))
        }
        other => Err(format!("unknown domain `{other}`")),
    }
}

fn parse_coefficient(s: &str) -> Result<CoefficientMap, String> {
    let (head, rest) = split_head(s);
    let a = parse_nums(rest)?;
    let c = match head {
        "const" => {
            arity(head, &a, 1)?;
            CoefficientMap::Const(a[0])
        }
        "abspow" => {
            arity(head, &a, 3)?;
            CoefficientMap::AbsPow { axis: index(a[0], "axis")?, alpha: a[1], scale: a[2] }
        }
        "distpow" => {
            if a.len() < 3 {
                return Err("`distpow` takes a point, an exponent and a scale".into());
            }
            let (point, tail) = a.split_at(a.len() - 2);
            CoefficientMap::DistPow { point: point.to_vec(), alpha: tail[0], scale: tail[1] }
        }
        "checkerboard" => {
            arity(head, &a, 1)?;
            CoefficientMap::Checkerboard { scale: a[0] }
        }
        other => return Err(format!("unknown coefficient `{other}`")),
    };
    if !c.is_nonnegative() {
        return Err("coefficient must be nonnegative".into());
    }
    Ok(c)
}

fn coefficient_text(c: &CoefficientMap) -> String {
    match c {
        CoefficientMap::Const(v) => format!("const {v}"),
        CoefficientMap::AbsPow { axis, alpha, scale } => format!("abspow {axis} {alpha} {scale}"),
        CoefficientMap::DistPow { point, alpha, scale } => format!("distpow {} {alpha} {scale}", nums(point)),
        CoefficientMap::Checkerboard { scale } => format!("checkerboard {scale}"),
    }
}

fn parse_exponent(s: &str) -> Result<ExponentMap, String> {
    let (head, rest) = split_head(s);
    let a = parse_nums(rest)?;
    match head {
        "const" => arity(head, &a, 1).map(|_| ExponentMap::Const(a[0])),
        "sin" => {
            arity(head, &a, 4)?;
            Ok(ExponentMap::SinPerturb { axis: index(a[0], "axis")?, amplitude: a[1], frequency: a[2], base: a[3] })
        }
        other => Err(format!("unknown exponent map `{other}`")),
    }
}

fn exponent_text(e: &ExponentMap) -> String {
    match e {
        ExponentMap::Const(v) => format!("const {v}"),
        ExponentMap::SinPerturb { axis, amplitude, frequency, base } => {
            format!("sin {axis} {amplitude} {frequency} {base}")
        }
    }
}

fn parse_fixture(s: &str) -> Result<FieldFixture, String> {
    let (head, rest) = split_head(s);
    let a = parse_nums(rest)?;
    match head {
        "const" => arity(head, &a, 1).map(|_| FieldFixture::Const(a[0])),
        "linear" => {
            if a.is_empty() {
                return Err("`linear` takes the coefficient vector".into());
            }
            Ok(FieldFixture::Linear(a))
        }
        "bump" => {
            if a.len() < 3 {
                return Err("`bump` takes a center, a radius and a height".into());
            }
            let (center, tail) = a.split_at(a.len() - 2);
            if !(tail[0] > 0.0) {
                return Err("bump radius must be positive".into());
            }
            Ok(FieldFixture::Bump { center: center.to_vec(), radius: tail[0], height: tail[1] })
        }
        "spike" => {
            if a.len() < 3 {
                return Err("`spike` takes a center, an exponent and a clip level".into());
            }
            let (center, tail) = a.split_at(a.len() - 2);
            Ok(FieldFixture::PowerSpike { center: center.to_vec(), beta: tail[0], clip: tail[1] })
        }
        other => Err(format!("unknown field `{other}`")),
    }
}

fn fixture_text(f: &FieldFixture) -> String {
    match f {
        FieldFixture::Const(c) => format!("const {c}"),
        FieldFixture::Linear(b) => format!("linear {}", nums(b)),
        FieldFixture::Bump { center, radius, height } => format!("bump {} {radius} {height}", nums(center)),
        FieldFixture::PowerSpike { center, beta, clip } => format!("spike {} {beta} {clip}", nums(center)),
        FieldFixture::Product(_) | FieldFixture::Sum(_) => unreachable!("configs hold only atomic fixtures"),
    }
}

fn parse_eps(s: &str) -> Result<EpsLit, String> {
    let t = s.trim();
    if let Some(k) = t.strip_prefix("R/") {
        let k: f64 = k.trim().parse().map_err(|_| format!("malformed radius `{t}`"))?;
        if !(k > 0.0 && k.is_finite()) {
            return Err(format!("malformed radius `{t}`"));
        }
        return Ok(EpsLit::RFrac(k));
    }
    let v: f64 = t.parse().map_err(|_| format!("malformed radius `{t}`"))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(format!("radius must be positive, got {t}"));
    }
    Ok(EpsLit::Abs(v))
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| format!("malformed number `{}`", s.trim()))
}

fn parse_usize(s: &str) -> Result<usize, String> {
    s.trim().parse::<usize>().map_err(|_| format!("malformed count `{}`", s.trim()))
}

struct Entries {
    single: BTreeMap<String, (usize, String)>,
    lists: BTreeMap<String, Vec<(usize, String)>>,
}

fn tokenize(text: &str, errors: &mut Vec<ConfigError>) -> Entries {
    let mut single = BTreeMap::new();
    let mut lists: BTreeMap<String, Vec<(usize, String)>> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            errors.push(ConfigError { line, message: format!("expected `key = value`, got `{content}`") });
            continue;
        };
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            errors.push(ConfigError { line, message: format!("unknown key `{k}`") });
            continue;
        }
        if LIST_KEYS.contains(&k) {
            lists.entry(k.to_string()).or_default().push((line, v.to_string()));
        } else if let Some((first, _)) = single.get(k) {
            errors.push(ConfigError { line, message: format!("duplicate key `{k}` (first set on line {first})") });
        } else {
            single.insert(k.to_string(), (line, v.to_string()));
        }
    }
    Entries { single, lists }
}

/// Parses and validates a config, collecting every error.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, Vec<ConfigError>> {
    let mut errors = Vec::new();
    let entries = tokenize(text, &mut errors);
    let line_of = |k: &str| entries.single.get(k).map_or(0, |e| e.0);

    macro_rules! get {
        ($key:expr, $parse:expr, $default:expr) => {
            match entries.single.get($key) {
                Some((line, v)) => match $parse(v.as_str()) {
                    Ok(x) => Some(x),
                    Err(message) => {
                        errors.push(ConfigError { line: *line, message: format!("{}: {message}", $key) });
                        None
                    }
                },
                None => $default,
            }
        };
    }
    macro_rules! list {
        ($key:expr, $parse:expr) => {
            entries
                .lists
                .get($key)
                .map(|items| {
                    items
                        .iter()
                        .filter_map(|(line, v)| match $parse(v.as_str()) {
                            Ok(x) => Some(x),
                            Err(message) => {
                                errors.push(ConfigError { line: *line, message: format!("{}: {message}", $key) });
                                None
                            }
                        })
                        .collect::<Vec<_>>()
                })
                .unwrap_or_default()
        };
    }

    let kind = get!(
        "experiment",
        |s: &str| match s {
            "check" => Ok(Kind::Check),
            "approx" => Ok(Kind::Approx),
            "converge" => Ok(Kind::Converge),
            "minimize" => Ok(Kind::Minimize),
            "gap" => Ok(Kind::Gap),
            other => Err(format!("unknown experiment `{other}`")),
        },
        None
    );
    let domain = get!("domain", parse_domain, Some(DomainLit::UnitSquare));
    let family = get!(
        "family",
        |s: &str| match s {
            "power" => Ok(Family::Power),
            "double_phase" => Ok(Family::DoublePhase),
            "varexp" => Ok(Family::VarExp),
            other => Err(format!("unknown family `{other}`")),
        },
        Some(Family::DoublePhase)
    );
    let p = get!("p", parse_f64, None);
    let q = get!("q", parse_f64, None);
    let alpha = get!("alpha", parse_f64, Some(1.0));
    let coefficient = get!("coefficient", parse_coefficient, Some(CoefficientMap::Const(1.0)));
    let sup_a = get!("sup_a", parse_f64, Some(1.0));
    let p_x = get!("p_x", parse_exponent, None);
    let q_x = get!("q_x", parse_exponent, None);
    let n = get!("n", parse_usize, Some(128));
    let pad = get!("pad", parse_f64, Some(0.1));
    let smoothing = get!("smoothing", parse_f64, None);
    let mode = get!(
        "mode",
        |s: &str| match s {
            "composite" => Ok(Mode::Composite),
            "ball" => Ok(Mode::Ball),
            other => Err(format!("unknown mode `{other}`")),
        },
        Some(Mode::Composite)
    );
    let field = list!("field", parse_fixture);
    let boundary = list!("boundary", parse_fixture);
    let truncate = get!("truncate", parse_f64, None);
    let epsilon = list!("epsilon", parse_eps);
    let resolution = list!("resolution", parse_usize);
    let default_tol = if kind == Some(Kind::Gap) { 0.02 } else { 0.01 };
    let rel_tol = get!("rel_tol", parse_f64, Some(default_tol));
    let lux_tol = get!("lux_tol", parse_f64, Some(molab_core::modular::LUX_TOL));
    let max_iter = get!("max_iter", parse_usize, Some(5000));
    let step_tol = get!("step_tol", parse_f64, Some(1e-10));
    let slack = get!("slack", parse_f64, Some(1e-6));
    let budget_d = get!("budget_d", parse_f64, Some(2.0));
    let mut gamma = list!("gamma", parse_f64);
    if !entries.lists.contains_key("gamma") {
        gamma = vec![0.05, 0.1, 0.2];
    }
    let csv = get!("csv", |s: &str| Ok::<_, String>(s.to_string()), Some("report.csv".to_string()));
    let json = get!("json", |s: &str| Ok::<_, String>(s.to_string()), Some("report.json".to_string()));
    let svg = get!("svg", |s: &str| Ok::<_, String>(s.to_string()), Some("plot.svg".to_string()));
    if let Some((line, _)) = entries.single.get("dim") {
        errors.push(ConfigError { line: *line, message: "dim follows from the domain; remove it".into() });
    }

    if kind.is_none() && !entries.single.contains_key("experiment") {
        errors.push(ConfigError { line: 0, message: "missing key `experiment`".into() });
    }
    let is_power = family == Some(Family::Power);
    if p.is_none() && !entries.single.contains_key("p") {
        errors.push(ConfigError { line: 0, message: "missing key `p`".into() });
    }
    if q.is_none() && !is_power && !entries.single.contains_key("q") {
        errors.push(ConfigError { line: 0, message: "missing key `q`".into() });
    }
    if let Some(p) = p {
        if !(p > 1.0) {
            errors.push(ConfigError { line: line_of("p"), message: "p must exceed 1".into() });
        }
    }
    if let (Some(p), Some(q)) = (p, q) {
        if !(q > p) {
            errors.push(ConfigError { line: line_of("q"), message: "q must exceed p".into() });
        }
    }
    if let Some(a) = alpha {
        if !(a > 0.0 && a <= 1.0) {
            errors.push(ConfigError { line: line_of("alpha"), message: "alpha in (0,1]".into() });
        }
    }
    if family == Some(Family::VarExp) && (p_x.is_none() || q_x.is_none()) {
        errors.push(ConfigError { line: line_of("family"), message: "varexp needs both `p_x` and `q_x`".into() });
    }
    if n == Some(0) {
        errors.push(ConfigError { line: line_of("n"), message: "n must be positive".into() });
    }
    for (key, v) in [("rel_tol", rel_tol), ("lux_tol", lux_tol), ("step_tol", step_tol), ("slack", slack)] {
        if v.is_some_and(|v| !(v > 0.0)) {
            errors.push(ConfigError { line: line_of(key), message: format!("{key} must be positive") });
        }
    }
    if budget_d.is_some_and(|d| !(d > 1.0)) {
        errors.push(ConfigError { line: line_of("budget_d"), message: "budget_d must exceed 1".into() });
    }
    if gamma.iter().any(|&g| !(g > 0.0 && g < 0.5)) {
        errors.push(ConfigError { line: 0, message: "gamma values must lie in (0, 1/2)".into() });
    }
    if truncate.is_some_and(|k| !(k > 0.0)) {
        errors.push(ConfigError { line: line_of("truncate"), message: "truncate must be positive".into() });
    }
    match kind {
        Some(Kind::Converge) | Some(Kind::Approx) => {
            if field.is_empty() && !entries.lists.contains_key("field") {
                errors.push(ConfigError { line: 0, message: format!("`{}` needs at least one `field`", kind.unwrap().name()) });
            }
            if epsilon.is_empty() && !entries.lists.contains_key("epsilon") {
                errors.push(ConfigError { line: 0, message: format!("`{}` needs at least one `epsilon`", kind.unwrap().name()) });
            }
        }
        Some(Kind::Minimize) | Some(Kind::Gap) => {
            if boundary.is_empty() && !entries.lists.contains_key("boundary") {
                errors.push(ConfigError { line: 0, message: "boundary data `boundary` is required".into() });
            }
            if kind == Some(Kind::Gap) && resolution.is_empty() && !entries.lists.contains_key("resolution") {
                errors.push(ConfigError { line: 0, message: "`gap` needs at least one `resolution`".into() });
            }
        }
        _ => {}
    }
    if let Some(dom) = &domain {
        let d = dom.dim();
        for f in field.iter().chain(&boundary) {
            if f.dim().is_some_and(|k| k != d) {
                errors.push(ConfigError { line: 0, message: format!("field fixture dimension differs from the domain dimension {d}") });
            }
        }
    }
    if !errors.is_empty() {
        errors.sort_by_key(|e| e.line);
        return Err(errors);
    }
    let family = family.unwrap();
    let p = p.unwrap();
    Ok(ExperimentConfig {
        kind: kind.unwrap(),
        domain: domain.unwrap(),
        family,
        p,
        q: if is_power { q.unwrap_or(p + 1.0) } else { q.unwrap() },
        alpha: alpha.unwrap(),
        coefficient: coefficient.unwrap(),
        sup_a: sup_a.unwrap(),
        p_x,
        q_x,
        n: n.unwrap(),
        pad: pad.unwrap(),
        smoothing,
        mode: mode.unwrap(),
        field,
        boundary,
        truncate,
        epsilon,
        resolution,
        rel_tol: rel_tol.unwrap(),
        lux_tol: lux_tol.unwrap(),
        max_iter: max_iter.unwrap(),
        step_tol: step_tol.unwrap(),
        slack: slack.unwrap(),
        budget_d: budget_d.unwrap(),
        gamma,
        csv: csv.unwrap(),
        json: json.unwrap(),
        svg: svg.unwrap(),
    })
}

impl ExperimentConfig {
    /// Canonical text: every key in fixed order with explicit defaults.
    pub fn to_text(&self) -> String {
        let mut out = Vec::new();
        let mut put = |k: &str, v: String| out.push(format!("{k} = {v}"));
        put("experiment", self.kind.name().into());
        put("domain", self.domain.text());
        put(
            "family",
            match self.family {
                Family::Power => "power",
                Family::DoublePhase => "double_phase",
                Family::VarExp => "varexp",
            }
            .into(),
        );
        put("p", format!("{}", self.p));
        put("q", format!("{}", self.q));
        put("alpha", format!("{}", self.alpha));
        put("coefficient", coefficient_text(&self.coefficient));
        put("sup_a", format!("{}", self.sup_a));
        if let Some(e) = &self.p_x {
            put("p_x", exponent_text(e));
        }
        if let Some(e) = &self.q_x {
            put("q_x", exponent_text(e));
        }
        put("n", format!("{}", self.n));
        put("pad", format!("{}", self.pad));
        if let Some(s) = self.smoothing {
            put("smoothing", format!("{s}"));
        }
        put("mode", match self.mode { Mode::Composite => "composite", Mode::Ball => "ball" }.into());
        for f in &self.field {
            put("field", fixture_text(f));
        }
        for f in &self.boundary {
            put("boundary", fixture_text(f));
        }
        if let Some(k) = self.truncate {
            put("truncate", format!("{k}"));
        }
        for e in &self.epsilon {
            put("epsilon", e.text());
        }
        for r in &self.resolution {
            put("resolution", format!("{r}"));
        }
        put("rel_tol", format!("{}", self.rel_tol));
        put("lux_tol", format!("{}", self.lux_tol));
        put("max_iter", format!("{}", self.max_iter));
        put("step_tol", format!("{}", self.step_tol));
        put("slack", format!("{}", self.slack));
        put("budget_d", format!("{}", self.budget_d));
        for g in &self.gamma {
            put("gamma", format!("{g}"));
        }
        put("csv", self.csv.clone());
        put("json", self.json.clone());
        put("svg", self.svg.clone());
        out.join("\n") + "\n"
    }

    /// SHA-256 of the canonical text, in hex.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_text().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// The N-function described by the config.
    pub fn nfunction(&self) -> molab_core::Result<NFunctionSpec> {
        let d = self.dim();
        match self.family {
            Family::Power => Ok(NFunctionSpec::Power(PowerLaw::new(self.p, d)?)),
            Family::DoublePhase => Ok(NFunctionSpec::DoublePhase(DoublePhase::with_defaults(
                self.p,
                self.q,
                self.alpha,
                d,
                self.coefficient.clone(),
                self.sup_a,
            )?)),
            Family::VarExp => {
                let (px, qx) = (self.p_x.clone().expect("validated"), self.q_x.clone().expect("validated"));
                let g = GrowthData::new(self.p, self.q, self.alpha, 1.0, 1.0, 1.0 + self.sup_a, 2f64.powf(self.q), d)?;
                let holder = self.coefficient.nominal_seminorm(self.alpha).ok_or_else(|| {
                    molab_core::Error::Domain("no closed-form Hölder seminorm for this coefficient".into())
                })?;
                let (cp, cq) = (px.nominal_log_holder(), qx.nominal_log_holder());
                Ok(NFunctionSpec::VarExp(VarExpDoublePhase::new(g, px, qx, cp, cq, self.coefficient.clone(), holder)?))
            }
        }
    }

    /// The summed field fixture.
    pub fn field_fixture(&self) -> FieldFixture {
        sum_of(&self.field)
    }

    pub fn boundary_fixture(&self) -> FieldFixture {
        sum_of(&self.boundary)
    }
}

fn sum_of(items: &[FieldFixture]) -> FieldFixture {
    match items {
        [one] => one.clone(),
        many => FieldFixture::Sum(many.to_vec()),
    }
}
