//! Flat `key = value` run configuration. No nesting, `#` comments, every key
//! validated against the known set; offending keys are named in errors.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use nonlocal_core::{DomainShape, FracParams, Grid, Profile, QuadPreset, QuadratureSpec};

const KNOWN_KEYS: &[&str] = &[
    "s",
    "p",
    "n",
    "half_width",
    "resolution",
    "resolutions",
    "domain",
    "domain_radius",
    "domain_half_width",
    "domain_inner",
    "domain_outer",
    "f_value",
    "g",
    "g_value",
    "g_gradient",
    "g_offset",
    "g_beta",
    "g_r0",
    "g_cap",
    "g_radius",
    "g_length",
    "g_inner",
    "g_outer",
    "quad",
    "grad_tol",
    "max_iters",
    "max_sweeps",
    "out",
    "points",
    "point",
    "target",
    "beta",
    "scale",
    "family",
];

#[derive(Debug, Clone)]
pub struct RunConfig {
    entries: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", lineno + 1))?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                bail!("line {}: unknown key `{key}`", lineno + 1);
            }
            if entries.insert(key.clone(), value).is_some() {
                bail!("line {}: duplicate key `{key}`", lineno + 1);
            }
        }
        Ok(RunConfig { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text)
    }

    /// Canonical text form (sorted keys) for reproducibility records.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| anyhow!("key `{key}`: bad number `{v}`")),
        }
    }

    pub fn f64_req(&self, key: &str) -> Result<f64> {
        self.get(key)
            .ok_or_else(|| anyhow!("missing key `{key}`"))?
            .parse()
            .map_err(|_| anyhow!("key `{key}`: bad number"))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| anyhow!("key `{key}`: bad integer `{v}`")),
        }
    }

    pub fn params(&self) -> Result<FracParams> {
        let s = self.f64_req("s")?;
        let p = self.f64_req("p")?;
        let n = self.usize_or("n", 1)?;
        FracParams::new(s, p, n).map_err(|e| anyhow!("{e}"))
    }

    pub fn grid(&self) -> Result<Grid> {
        let l = self.f64_or("half_width", 2.0)?;
        let m = self.usize_or("resolution", 129)?;
        Grid::new(self.usize_or("n", 1)?, l, m).map_err(|e| anyhow!("{e}"))
    }

    pub fn quad(&self, flag_override: Option<QuadPreset>) -> Result<QuadratureSpec> {
        let preset = if let Some(p) = flag_override {
            p
        } else {
            match self.get("quad") {
                None => QuadPreset::Standard,
                Some(v) => v.parse().map_err(|e| anyhow!("key `quad`: {e}"))?,
            }
        };
        Ok(QuadratureSpec::preset(preset))
    }

    pub fn domain(&self) -> Result<DomainShape> {
        match self.get("domain").unwrap_or("ball") {
            "ball" => Ok(DomainShape::Ball {
                radius: self.f64_or("domain_radius", 1.0)?,
            }),
            "box" => Ok(DomainShape::Box {
                half_width: self.f64_or("domain_half_width", 1.0)?,
            }),
            "ring" => Ok(DomainShape::Ring {
                inner: self.f64_req("domain_inner")?,
                outer: self.f64_req("domain_outer")?,
            }),
            "punctured-interval" => Ok(DomainShape::PuncturedInterval {
                radius: self.f64_or("domain_radius", 1.0)?,
            }),
            other => bail!("key `domain`: unknown shape `{other}`"),
        }
    }

    /// Boundary-data profile from the `g*` keys.
    pub fn g_profile(&self) -> Result<Profile> {
        let profile = match self.get("g").unwrap_or("constant") {
            "constant" => Profile::Constant {
                value: self.f64_or("g_value", 0.0)?,
            },
            "linear" => {
                let grad = self.get("g_gradient").unwrap_or("1");
                let parts: Vec<f64> = grad
                    .split(',')
                    .map(|t| t.trim().parse())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| anyhow!("key `g_gradient`: bad vector"))?;
                let mut gradient = [0.0f64; 3];
                for (a, v) in parts.iter().enumerate().take(3) {
                    gradient[a] = *v;
                }
                Profile::Linear {
                    gradient,
                    offset: self.f64_or("g_offset", 0.0)?,
                }
            }
            "power-positive-part" | "half-space" => Profile::HalfSpacePower {
                beta: self.f64_req("g_beta")?,
                normal: [1.0, 0.0, 0.0],
            },
            "truncated-minorant" => Profile::TruncatedMinorant {
                s: self.f64_req("s")?,
                length: self.f64_or("g_length", 1.0)?,
            },
            "cone" => Profile::Cone {
                beta: self.f64_req("g_beta")?,
                center: [0.0; 3],
            },
            "ring" | "one-dim-shell" => Profile::Ring {
                beta: self.f64_req("g_beta")?,
                r0: self.f64_or("g_r0", 1.0)?,
                cap: self
                    .get("g_cap")
                    .map(|v| v.parse())
                    .transpose()
                    .map_err(|_| anyhow!("key `g_cap`: bad number"))?,
                center: [0.0; 3],
            },
            "indicator-ball" => Profile::IndicatorBall {
                radius: self.f64_or("g_radius", 1.0)?,
            },
            "smooth-cutoff" => Profile::SmoothCutoff {
                radius: self.f64_or("g_radius", 1.0)?,
            },
            "transition-out" => Profile::TransitionOut {
                inner: self.f64_or("g_inner", 2.0)?,
                outer: self.f64_or("g_outer", 4.0)?,
            },
            "abs" => Profile::AbsNorm,
            other => bail!("key `g`: unknown profile family `{other}`"),
        };
        profile.validate().map_err(|e| anyhow!("{e}"))?;
        Ok(profile)
    }

    pub fn resolutions(&self) -> Result<Vec<usize>> {
        match self.get("resolutions") {
            None => Ok(vec![129, 257, 513]),
            Some(v) => v
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse()
                        .map_err(|_| anyhow!("key `resolutions`: bad list"))
                })
                .collect(),
        }
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        match self.get("points") {
            None => Ok(vec![0.25, 0.5, 1.0, 2.0]),
            Some(v) => v
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse()
                        .map_err(|_| anyhow!("key `points`: bad list"))
                })
                .collect(),
        }
    }
}
