//! Experiment configuration, loaded from TOML and overridden by CLI flags.

use std::fmt;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use switchbf::channel::ChannelConfig;
use switchbf::connectivity::{interleaved_spec, subset_partition, ConnectivitySpec};
use switchbf::nm::NmConfig;
use switchbf::qrqu::QrquConfig;

use crate::error::{ExperimentError, Result};

/// Precoder families a sweep can evaluate. The declaration order is the
/// order records are sorted in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "UOP")]
    Uop,
    #[serde(rename = "SHD-NM")]
    ShdNm,
    #[serde(rename = "SHD-QRQU")]
    ShdQrqu,
    #[serde(rename = "SHD-NM-PC")]
    ShdNmPc,
    #[serde(rename = "SHD-QRQU-PC")]
    ShdQrquPc,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Uop, Method::ShdNm, Method::ShdQrqu, Method::ShdNmPc, Method::ShdQrquPc];

    pub fn name(self) -> &'static str {
        match self {
            Method::Uop => "UOP",
            Method::ShdNm => "SHD-NM",
            Method::ShdQrqu => "SHD-QRQU",
            Method::ShdNmPc => "SHD-NM-PC",
            Method::ShdQrquPc => "SHD-QRQU-PC",
        }
    }

    pub fn partially_connected(self) -> bool {
        matches!(self, Method::ShdNmPc | Method::ShdQrquPc)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ExperimentError::Config(format!("unknown method {s:?}")))
    }
}

/// Where the connectivity mask of the PC methods comes from.
///
/// Textual forms: `subset`, `interleaved:<period>`, `full`, or a path to a
/// `CONNSPEC1` file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ConnectivityRef {
    Subset,
    Interleaved(usize),
    Full,
    File(PathBuf),
}

impl ConnectivityRef {
    pub fn resolve(&self, n_t: usize, k_t: usize) -> Result<ConnectivitySpec> {
        let spec = match self {
            ConnectivityRef::Subset => subset_partition(n_t, k_t)?,
            ConnectivityRef::Interleaved(p) => interleaved_spec(n_t, k_t, *p)?,
            ConnectivityRef::Full => ConnectivitySpec::fully_connected(n_t, k_t)?,
            ConnectivityRef::File(path) => {
                let file = File::open(path)
                    .map_err(|e| ExperimentError::Config(format!("cannot open {}: {e}", path.display())))?;
                ConnectivitySpec::read_from(file)?
            }
        };
        if spec.n_t() != n_t || spec.k_t() != k_t {
            return Err(ExperimentError::Config(format!(
                "connectivity is {}x{} but the experiment needs {n_t}x{k_t}",
                spec.n_t(),
                spec.k_t()
            )));
        }
        if let Err(violations) = spec.validate() {
            let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
            return Err(ExperimentError::Infeasible(list.join("; ")));
        }
        Ok(spec)
    }
}

impl FromStr for ConnectivityRef {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "subset" => return Ok(ConnectivityRef::Subset),
            "full" => return Ok(ConnectivityRef::Full),
            _ => {}
        }
        if let Some(p) = s.strip_prefix("interleaved:") {
            let period = p
                .parse()
                .map_err(|_| ExperimentError::Config(format!("bad interleaving period {p:?}")))?;
            return Ok(ConnectivityRef::Interleaved(period));
        }
        if s.is_empty() {
            return Err(ExperimentError::Config("empty connectivity reference".into()));
        }
        Ok(ConnectivityRef::File(PathBuf::from(s)))
    }
}

impl TryFrom<String> for ConnectivityRef {
    type Error = ExperimentError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ConnectivityRef> for String {
    fn from(c: ConnectivityRef) -> String {
        c.to_string()
    }
}

impl fmt::Display for ConnectivityRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConnectivityRef::Subset => f.write_str("subset"),
            ConnectivityRef::Interleaved(p) => write!(f, "interleaved:{p}"),
            ConnectivityRef::Full => f.write_str("full"),
            ConnectivityRef::File(p) => write!(f, "{}", p.display()),
        }
    }
}

/// One Monte-Carlo experiment. Antenna counts come from the array
/// geometries in `channel`; its `seed` is ignored, every trial derives its
/// own from `master_seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub channel: ChannelConfig,
    pub k_t: usize,
    /// Receive RF chains. The receiver is an ideal combiner, so this only
    /// bounds the stream count.
    pub k_r: usize,
    pub snr_db_list: Vec<f64>,
    pub n_s_list: Vec<usize>,
    pub trials: usize,
    pub methods: Vec<Method>,
    pub connectivity: Option<ConnectivityRef>,
    pub master_seed: u64,
    pub output_path: Option<PathBuf>,
    /// Record wall-clock design time. Off by default so that output is
    /// byte-reproducible.
    pub timing: bool,
    pub nm: NmConfig,
    pub qrqu: QrquConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            channel: ChannelConfig::reference(0),
            k_t: 4,
            k_r: 4,
            snr_db_list: vec![-10.0, -5.0, 0.0, 5.0, 10.0],
            n_s_list: vec![2],
            trials: 100,
            methods: vec![Method::Uop, Method::ShdNm, Method::ShdQrqu],
            connectivity: None,
            master_seed: 0,
            output_path: None,
            timing: false,
            nm: NmConfig::default(),
            qrqu: QrquConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExperimentError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| ExperimentError::Config(e.to_string()))
    }

    pub fn n_t(&self) -> usize {
        self.channel.n_t()
    }

    pub fn n_r(&self) -> usize {
        self.channel.n_r()
    }

    /// Checks everything that can be checked without generating a channel,
    /// and resolves the connectivity mask when a PC method needs one.
    pub fn validate(&self) -> Result<Option<ConnectivitySpec>> {
        let bad = |msg: String| Err(ExperimentError::Config(msg));
        self.channel.validate().map_err(|e| ExperimentError::Config(e.to_string()))?;
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.methods.is_empty() {
            return bad("no methods selected".into());
        }
        if self.snr_db_list.is_empty() || self.snr_db_list.iter().any(|s| !s.is_finite()) {
            return bad("snr_db_list must be a non-empty list of finite values".into());
        }
        if self.n_s_list.is_empty() {
            return bad("n_s_list must not be empty".into());
        }
        let (n_t, n_r) = (self.n_t(), self.n_r());
        if self.k_t > n_t {
            return bad(format!("k_t = {} exceeds N_t = {n_t}", self.k_t));
        }
        for &n_s in &self.n_s_list {
            if n_s == 0 || n_s > self.k_t || n_s > self.k_r || n_s > n_r {
                return bad(format!(
                    "N_s = {n_s} must satisfy 1 <= N_s <= min(k_t = {}, k_r = {}, N_r = {n_r})",
                    self.k_t, self.k_r
                ));
            }
        }
        let needs_mask = self.methods.iter().any(|m| m.partially_connected());
        match (&self.connectivity, needs_mask) {
            (None, true) => bad("partially connected methods need a connectivity spec".into()),
            (Some(c), true) => c.resolve(n_t, self.k_t).map(Some),
            (_, false) => Ok(None),
        }
    }
}
