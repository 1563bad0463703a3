//! Run configuration: INI-style sections with `key = value` lines.
//!
//! ```text
//! [field]
//! p = 2
//! e = 2
//! eisenstein = -2, 0, 1
//! precision = 24
//!
//! [pipeline]
//! regime = even
//! k_max = 8
//! e_max = 6
//! depth = 3
//! b_window = 7
//!
//! [query]
//! alpha = 1 + pi^2; pi
//! k = 0..3
//!
//! [output]
//! format = csv
//! path = out.csv
//!
//! [run]
//! seed = 7
//! workers = 2
//! ```
//!
//! Only the output path may be overridden from the environment
//! (`INTERTWINE_OUTPUT`).

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use ini::Ini;
use intertwine::integrator::TruncationSpec;
use intertwine::{make_field, Elem, LocalFieldCtx, Mat};

pub const OUTPUT_ENV: &str = "INTERTWINE_OUTPUT";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Odd,
    Even,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug)]
pub struct FieldConfig {
    pub p: u64,
    pub e: u32,
    pub eisenstein: Vec<i64>,
    pub precision: u32,
}

impl FieldConfig {
    pub fn context(&self) -> Result<LocalFieldCtx> {
        make_field(self.p, self.e, &self.eisenstein, self.precision)
            .map_err(|e| anyhow!("field: {e}"))
    }
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub regime: Regime,
    pub k_max: i64,
    pub e_max: i64,
    pub v_max: i64,
    pub depth: u32,
    pub b_window: i64,
    pub max_degree: usize,
    /// block size in `u = q^{-2ns}`
    pub n: u32,
}

impl PipelineConfig {
    pub fn truncation(&self) -> TruncationSpec {
        TruncationSpec {
            m: self.depth,
            b_window: self.b_window,
            e_max: self.e_max,
            v_max: self.v_max,
            k_max: self.k_max,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct QueryConfig {
    pub alpha: Vec<String>,
    pub k: Vec<i64>,
    pub g: Option<String>,
    pub h: Option<String>,
    pub n: usize,
    pub rank: usize,
    pub lattice_i: i64,
    pub trials: usize,
}

#[derive(Clone, Debug)]
pub struct OutputConfig {
    pub format: Format,
    pub path: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub field: FieldConfig,
    pub pipeline: PipelineConfig,
    pub query: QueryConfig,
    pub output: OutputConfig,
    pub seed: u64,
    pub workers: usize,
}

struct Reader<'a> {
    ini: &'a Ini,
}

impl Reader<'_> {
    fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.ini.section(Some(section)).and_then(|s| s.get(key)).map(str::trim)
    }

    fn parse<T: std::str::FromStr>(&self, section: &str, key: &str, default: Option<T>) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(section, key) {
            Some(v) => v
                .parse::<T>()
                .map_err(|e| anyhow!("{section}.{key}: cannot parse {v:?}: {e}")),
            None => default.ok_or_else(|| anyhow!("{section}.{key}: missing")),
        }
    }
}

fn int_list(path: &str, s: &str) -> Result<Vec<i64>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: i64 = a.trim().parse().with_context(|| format!("{path}: bad range start in {part:?}"))?;
            let b: i64 = b.trim().parse().with_context(|| format!("{path}: bad range end in {part:?}"))?;
            if b < a {
                bail!("{path}: empty range {part:?}");
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().with_context(|| format!("{path}: bad integer {part:?}"))?);
        }
    }
    Ok(out)
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_str_env(&text, std::env::var(OUTPUT_ENV).ok())
    }

    /// Parses `text`; `output_override` replaces `output.path`.
    pub fn from_str_env(text: &str, output_override: Option<String>) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| anyhow!("config: {e}"))?;
        let r = Reader { ini: &ini };

        let p: u64 = r.parse("field", "p", None)?;
        let e: u32 = r.parse("field", "e", Some(1))?;
        let eisenstein = match r.raw("field", "eisenstein") {
            Some(s) => int_list("field.eisenstein", s)?,
            None => {
                let mut v = vec![0i64; e as usize + 1];
                v[0] = -(p as i64);
                v[e as usize] = 1;
                v
            }
        };
        let precision: u32 = r.parse("field", "precision", Some(if p == 2 { 24 } else { 16 }))?;
        let field = FieldConfig {
            p,
            e,
            eisenstein,
            precision,
        };

        let regime = match r.raw("pipeline", "regime") {
            None => {
                if p == 2 {
                    Regime::Even
                } else {
                    Regime::Odd
                }
            }
            Some("odd") => Regime::Odd,
            Some("even") => Regime::Even,
            Some(other) => bail!("pipeline.regime: expected odd or even, got {other:?}"),
        };
        match regime {
            Regime::Even if p != 2 || e < 2 => {
                bail!("pipeline.regime: even needs p = 2 and e ≥ 2 (got p = {p}, e = {e})")
            }
            Regime::Odd if p == 2 => bail!("pipeline.regime: odd needs p odd"),
            _ => {}
        }
        let pipeline = PipelineConfig {
            regime,
            k_max: r.parse("pipeline", "k_max", Some(6))?,
            e_max: r.parse("pipeline", "e_max", Some(5))?,
            v_max: r.parse("pipeline", "v_max", Some(2))?,
            depth: r.parse("pipeline", "depth", Some(3))?,
            b_window: r.parse("pipeline", "b_window", Some(7))?,
            max_degree: r.parse("pipeline", "max_degree", Some(1))?,
            n: r.parse("pipeline", "n", Some(2))?,
        };
        for (key, v) in [
            ("k_max", pipeline.k_max),
            ("e_max", pipeline.e_max),
            ("v_max", pipeline.v_max),
            ("depth", pipeline.depth as i64),
            ("b_window", pipeline.b_window),
            ("n", pipeline.n as i64),
        ] {
            if v <= 0 {
                bail!("pipeline.{key}: must be positive, got {v}");
            }
        }

        let alpha = r
            .raw("query", "alpha")
            .map(|s| {
                s.split(';')
                    .map(|x| x.trim().to_string())
                    .filter(|x| !x.is_empty())
                    .collect()
            })
            .unwrap_or_default();
        let k = match r.raw("query", "k") {
            Some(s) => int_list("query.k", s)?,
            None => vec![0, 1, 2],
        };
        let query = QueryConfig {
            alpha,
            k,
            g: r.raw("query", "g").map(String::from),
            h: r.raw("query", "h").map(String::from),
            n: r.parse("query", "n", Some(2))?,
            rank: r.parse("query", "rank", Some(1))?,
            lattice_i: r.parse("query", "lattice_i", Some(0))?,
            trials: r.parse("query", "trials", Some(0))?,
        };
        if query.n == 0 || query.n % 2 != 0 {
            bail!("query.n: must be even and positive, got {}", query.n);
        }

        let format = match r.raw("output", "format").unwrap_or("csv") {
            "csv" => Format::Csv,
            "json" => Format::Json,
            other => bail!("output.format: expected csv or json, got {other:?}"),
        };
        let path = output_override
            .or_else(|| r.raw("output", "path").map(String::from))
            .filter(|s| !s.is_empty() && s != "-")
            .map(PathBuf::from);

        Ok(RunConfig {
            field,
            pipeline,
            query,
            output: OutputConfig { format, path },
            seed: r.parse("run", "seed", Some(7))?,
            workers: r.parse("run", "workers", Some(0))?,
        })
    }
}

/// `a, b; c, d` with entries in the field's expression syntax.
pub fn parse_matrix(ctx: &LocalFieldCtx, s: &str) -> Result<Mat> {
    let rows: Vec<Vec<Elem>> = s
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|x| ctx.parse(x.trim()).map_err(|e| anyhow!("matrix entry {x:?}: {e}")))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        bail!("matrix {s:?} is not square");
    }
    Ok(Mat::from_vec(n, rows.into_iter().flatten().collect()))
}
