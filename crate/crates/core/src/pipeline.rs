//! Single-image quantization: sample, reduce, seed or precluster, refine,
//! map, measure.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::color::Palette;
use crate::error::{Error, Result};
use crate::histogram::{SamplingMode, Substrate, WeightedData};
use crate::imageio::RawImage;
use crate::init::{initialize, InitScheme, SeedConfig};
use crate::kmeans::{wsm, ClusterState, Termination};
use crate::metrics::{map_pixels, psnr, Mapped, QuantReport};
use crate::precluster::{pad_with_maximin, PreclusterMethod};

/// Where WSM gets its initial centers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Seeding {
    Init(InitScheme),
    Precluster(PreclusterMethod),
}

impl Seeding {
    pub fn token(self) -> &'static str {
        match self {
            Seeding::Init(s) => s.token(),
            Seeding::Precluster(p) => p.token(),
        }
    }
}

impl FromStr for Seeding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Ok(i) = s.parse::<InitScheme>() {
            return Ok(Seeding::Init(i));
        }
        s.parse::<PreclusterMethod>()
            .map(Seeding::Precluster)
            .map_err(|_| Error::InvalidToken {
                what: "initializer",
                token: s.to_owned(),
            })
    }
}

/// A quantization method: a preclusterer on its own, or WSM seeded by an
/// initializer or preclusterer (`wsm-<x>`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Standalone(PreclusterMethod),
    Wsm(Seeding),
}

impl Method {
    /// All standalone preclusterers followed by every `wsm-<x>` variant.
    pub fn all() -> Vec<Method> {
        let mut out: Vec<Method> = PreclusterMethod::ALL.into_iter().map(Method::Standalone).collect();
        out.extend(InitScheme::ALL.into_iter().map(|s| Method::Wsm(Seeding::Init(s))));
        out.extend(PreclusterMethod::ALL.into_iter().map(|p| Method::Wsm(Seeding::Precluster(p))));
        out
    }

    /// Combines a `--method` token with an optional `--init` token.
    /// `wsm` requires an initializer; other methods reject one.
    pub fn from_parts(method: &str, init: Option<&str>) -> Result<Method> {
        match (method, init) {
            ("wsm", Some(i)) => Ok(Method::Wsm(i.parse()?)),
            ("wsm", None) => Err(Error::InvalidParameter("method wsm needs an initializer".into())),
            (m, None) => m.parse(),
            (m, Some(i)) => {
                let parsed: Method = m.parse()?;
                match parsed {
                    Method::Wsm(s) if s == i.parse()? => Ok(parsed),
                    _ => Err(Error::InvalidParameter(format!("method {m} does not take initializer {i}"))),
                }
            }
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Standalone(p) => f.write_str(p.token()),
            Method::Wsm(s) => write!(f, "wsm-{}", s.token()),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let invalid = || Error::InvalidToken {
            what: "method",
            token: s.to_owned(),
        };
        if let Some(rest) = s.strip_prefix("wsm-") {
            return rest.parse().map(Method::Wsm).map_err(|_| invalid());
        }
        s.parse().map(Method::Standalone).map_err(|_| invalid())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantizeConfig {
    pub method: Method,
    pub k: usize,
    pub sampling: SamplingMode,
    pub seed: u64,
    pub termination: Termination,
    /// Measure wall time. When off, reports carry `time_ms = 0`.
    pub timing: bool,
}

impl QuantizeConfig {
    pub fn new(method: Method, k: usize) -> Self {
        QuantizeConfig {
            method,
            k,
            sampling: SamplingMode::default(),
            seed: 0,
            termination: Termination::default(),
            timing: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Quantized {
    pub palette: Palette,
    pub mapped: Mapped,
    /// Present for WSM methods.
    pub clustering: Option<ClusterState>,
    pub report: QuantReport,
}

pub fn run_quantize(img: &RawImage, image_name: &str, cfg: &QuantizeConfig) -> Result<Quantized> {
    if cfg.k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    cfg.termination.validate()?;
    let start = Instant::now();
    let pixels = cfg.sampling.sample(img);
    let data = Substrate::build(&pixels, cfg.sampling, cfg.seed)?;
    let mut flags = Vec::new();
    let (palette, clustering) = match cfg.method {
        Method::Standalone(p) => {
            let r = p.run(&pixels, &data, cfg.k)?;
            if r.short {
                flags.push("short".to_owned());
            }
            (r.palette, None)
        }
        Method::Wsm(seeding) => {
            if cfg.k > data.len() {
                return Err(Error::TooManyClusters {
                    k: cfg.k,
                    available: data.len(),
                });
            }
            let init = match seeding {
                Seeding::Init(s) => initialize(s, &data, &SeedConfig::new(cfg.k, cfg.seed))?,
                Seeding::Precluster(p) => {
                    let r = p.run(&pixels, &data, cfg.k)?;
                    if r.short {
                        flags.push(format!("padded={}", cfg.k - r.palette.len()));
                        pad_with_maximin(r.palette.colors, &data, cfg.k)
                    } else {
                        r.palette.colors
                    }
                }
            };
            let state = wsm(&data, &init, &cfg.termination)?;
            if state.repairs > 0 {
                flags.push(format!("repairs={}", state.repairs));
            }
            if state.sse_trace.windows(2).any(|w| w[1] > w[0]) {
                flags.push("sse-increase".to_owned());
            }
            (Palette::new(state.centers.clone()), Some(state))
        }
    };
    let mapped = map_pixels(img, &palette)?;
    let time_ms = if cfg.timing {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    let report = QuantReport {
        image: image_name.to_owned(),
        method: cfg.method.to_string(),
        k: cfg.k,
        run: 0,
        seed: cfg.seed,
        sampling: cfg.sampling,
        mse: mapped.mse,
        psnr: psnr(mapped.mse)?,
        iterations: clustering.as_ref().map_or(0, |s| s.iterations),
        ndc_per_point_iter: clustering.as_ref().map_or(0.0, |s| s.ndc_per_point_iteration()),
        time_ms,
        actual_k: palette.len(),
        flags: flags.join(";"),
    };
    Ok(Quantized {
        palette,
        mapped,
        clustering,
        report,
    })
}
