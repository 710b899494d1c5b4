use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::refstab::default_delta;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    HConvergence,
    KRobustness,
    DeltaSensitivity,
    EdgeShrink,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "h_convergence" | "h" => Ok(Self::HConvergence),
            "k_robustness" | "k" => Ok(Self::KRobustness),
            "delta_sensitivity" | "delta" => Ok(Self::DeltaSensitivity),
            "edge_shrink" | "shrink" => Ok(Self::EdgeShrink),
            _ => Err(Error::Config(format!("unknown experiment '{s}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::HConvergence => "h_convergence",
            Self::KRobustness => "k_robustness",
            Self::DeltaSensitivity => "delta_sensitivity",
            Self::EdgeShrink => "edge_shrink",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFamily {
    /// Regular hexagons; sizes are hexagons across the unit square.
    Hexagonal,
    /// Random Voronoi cells; sizes are cell counts.
    Voronoi,
    /// Voronoi cells after Lloyd iterations.
    Cvt,
}

impl MeshFamily {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "hexa" | "hexagonal" | "hex" => Ok(Self::Hexagonal),
            "voro" | "voronoi" => Ok(Self::Voronoi),
            "cvt" => Ok(Self::Cvt),
            _ => Err(Error::Config(format!("unknown mesh family '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KPrimeRule {
    K,
    KMinus1,
}

impl KPrimeRule {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "k" => Ok(Self::K),
            "k-1" => Ok(Self::KMinus1),
            _ => Err(Error::Config(format!("kprime must be 'k' or 'k-1', got '{s}'"))),
        }
    }

    pub fn apply(self, k: usize) -> usize {
        match self {
            Self::K => k,
            Self::KMinus1 => k.saturating_sub(1),
        }
    }
}

/// Mesh size of the reference triangulation as a function of k.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DeltaRule {
    /// k⁻², with 1/2 and 1/3 for k = 0, 1.
    KSq,
    /// k⁻¹, at most 1/2.
    KInv,
    Const(f64),
}

impl DeltaRule {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ksq" => Ok(Self::KSq),
            "kinv" => Ok(Self::KInv),
            _ => {
                let v = s
                    .strip_prefix("const:")
                    .ok_or_else(|| Error::Config(format!("unknown delta rule '{s}'")))?;
                let d = parse_real(v)?;
                if !(d > 0.0 && d <= 1.0) {
                    return Err(Error::Config(format!("constant delta must lie in (0, 1], got {d}")));
                }
                Ok(Self::Const(d))
            }
        }
    }

    pub fn delta(self, k: usize) -> f64 {
        match self {
            Self::KSq => default_delta(k),
            Self::KInv => (1.0 / k.max(1) as f64).min(0.5),
            Self::Const(d) => d,
        }
    }

    pub fn label(self) -> String {
        match self {
            Self::KSq => "ksq".into(),
            Self::KInv => "kinv".into(),
            Self::Const(d) => format!("const:{d:?}"),
        }
    }
}

/// Parses a real number, also accepting powers of two written `2^-4`.
pub fn parse_real(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some(e) = s.strip_prefix("2^") {
        let e: i32 = e.parse().map_err(|_| Error::Config(format!("bad exponent in '{s}'")))?;
        return Ok(2f64.powi(e));
    }
    s.parse().map_err(|_| Error::Config(format!("bad number '{s}'")))
}

/// Settings of one study, read from a flat `key = value` file.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub name: String,
    pub family: MeshFamily,
    pub sizes: Vec<usize>,
    pub seed: u64,
    pub lloyd: usize,
    pub ks: Vec<usize>,
    pub kprime: KPrimeRule,
    pub alpha: f64,
    pub t: f64,
    pub deltas: Vec<DeltaRule>,
    pub shrink: Vec<f64>,
    pub tol: f64,
    pub output: PathBuf,
    /// Record wall time; when off the seconds column is left empty so that
    /// repeated runs give identical files.
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            name: kind.name().to_string(),
            family: MeshFamily::Hexagonal,
            sizes: vec![8, 16, 32],
            seed: 1,
            lloyd: 30,
            ks: vec![1, 2, 3],
            kprime: KPrimeRule::K,
            alpha: 1.0,
            t: 1.0,
            deltas: vec![DeltaRule::KSq],
            shrink: vec![1.0],
            tol: 1e-12,
            output: PathBuf::from("results"),
            timing: true,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", no + 1)))?;
            pairs.push((no + 1, k.trim().to_string(), v.trim().to_string()));
        }
        let kind = pairs
            .iter()
            .find(|(_, k, _)| k == "experiment")
            .map(|(_, _, v)| ExperimentKind::parse(v))
            .transpose()?
            .ok_or_else(|| Error::Config("missing key 'experiment'".into()))?;
        let mut c = Self::new(kind);
        for (no, key, val) in pairs {
            let err = |e: Error| Error::Config(format!("line {no}: {e}"));
            let ints = |v: &str| -> Result<Vec<usize>> {
                v.split(',').map(|s| s.trim().parse().map_err(|_| Error::Config(format!("bad integer '{s}'")))).collect()
            };
            match key.as_str() {
                "experiment" => {}
                "name" => c.name = val,
                "mesh" => c.family = MeshFamily::parse(&val).map_err(err)?,
                "sizes" => c.sizes = ints(&val).map_err(err)?,
                "seed" => c.seed = val.parse().map_err(|_| Error::Config(format!("line {no}: bad seed")))?,
                "lloyd" => c.lloyd = val.parse().map_err(|_| Error::Config(format!("line {no}: bad lloyd count")))?,
                "k" => c.ks = ints(&val).map_err(err)?,
                "kprime" => c.kprime = KPrimeRule::parse(&val).map_err(err)?,
                "alpha" => c.alpha = parse_real(&val).map_err(err)?,
                "t" => c.t = parse_real(&val).map_err(err)?,
                "delta" => c.deltas = val.split(',').map(|s| DeltaRule::parse(s.trim())).collect::<Result<_>>().map_err(err)?,
                "shrink" => c.shrink = val.split(',').map(parse_real).collect::<Result<_>>().map_err(err)?,
                "tol" => c.tol = parse_real(&val).map_err(err)?,
                "output" => c.output = PathBuf::from(val),
                "timing" => {
                    c.timing = match val.as_str() {
                        "on" | "true" | "1" => true,
                        "off" | "false" | "0" => false,
                        _ => return Err(Error::Config(format!("line {no}: timing must be on or off"))),
                    }
                }
                _ => return Err(Error::Config(format!("line {no}: unknown key '{key}'"))),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ks.is_empty() || self.ks.iter().any(|&k| k < 1) {
            return Err(Error::Config("k values must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.t != 1.0 && self.t != -1.0 {
            return Err(Error::Config(format!("t must be 1 or -1, got {}", self.t)));
        }
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return Err(Error::Config("sizes must be a nonempty list of positive integers".into()));
        }
        if self.deltas.is_empty() {
            return Err(Error::Config("at least one delta rule is needed".into()));
        }
        if self.shrink.is_empty() || self.shrink.iter().any(|s| !(*s > 0.0 && *s <= 1.0)) {
            return Err(Error::Config("shrink factors must lie in (0, 1]".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config("tol must be positive".into()));
        }
        Ok(())
    }
}
