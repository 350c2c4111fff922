//! Connectivity masks for partially connected switch networks.
//!
//! Column `ℓ` of the `N_t × k_t` matrix `G_t` marks the antennas the `ℓ`-th
//! splitter can reach. A well-formed spec has every column summing to the
//! splitter fan-out `s_t`, every row summing to the combiner fan-in `c_t`,
//! and `k_t · s_t = N_t · c_t`.

use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{complexify, numerical_rank, CMatrix, RMatrix};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectivitySpec {
    n_t: usize,
    k_t: usize,
    /// Row-major `N_t × k_t`.
    g: Vec<bool>,
    pub s_t: usize,
    pub c_t: usize,
}

/// One broken invariant of a [`ConnectivitySpec`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    ColumnSum { column: usize, expected: usize, actual: usize },
    RowSum { row: usize, expected: usize, actual: usize },
    ConnectionCount { k_s: usize, n_c: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ColumnSum { column, expected, actual } => {
                write!(f, "column {column} connects {actual} antennas, expected s_t = {expected}")
            }
            Violation::RowSum { row, expected, actual } => {
                write!(f, "row {row} combines {actual} inputs, expected c_t = {expected}")
            }
            Violation::ConnectionCount { k_s, n_c } => {
                write!(f, "k_t*s_t = {k_s} differs from N_t*c_t = {n_c}")
            }
        }
    }
}

impl ConnectivitySpec {
    /// Wrap a row-major mask without checking the invariants; see
    /// [`ConnectivitySpec::validate`].
    pub fn new(n_t: usize, k_t: usize, g: Vec<bool>, s_t: usize, c_t: usize) -> Result<Self> {
        if n_t == 0 || k_t == 0 {
            return Err(Error::InvalidParameter("connectivity dimensions must be positive".into()));
        }
        if g.len() != n_t * k_t {
            return Err(Error::DimensionMismatch(format!("mask has {} entries, expected {}", g.len(), n_t * k_t)));
        }
        Ok(Self { n_t, k_t, g, s_t, c_t })
    }

    pub fn from_fn(n_t: usize, k_t: usize, s_t: usize, c_t: usize, f: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let g = (0..n_t).flat_map(|i| (0..k_t).map(move |j| (i, j))).map(|(i, j)| f(i, j)).collect();
        Self::new(n_t, k_t, g, s_t, c_t)
    }

    /// Every switch present.
    pub fn fully_connected(n_t: usize, k_t: usize) -> Result<Self> {
        Self::from_fn(n_t, k_t, n_t, k_t, |_, _| true)
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn k_t(&self) -> usize {
        self.k_t
    }

    pub fn allowed(&self, antenna: usize, chain: usize) -> bool {
        self.g[antenna * self.k_t + chain]
    }

    pub fn connections(&self) -> usize {
        self.g.iter().filter(|&&b| b).count()
    }

    pub fn is_fully_connected(&self) -> bool {
        self.g.iter().all(|&b| b)
    }

    /// The mask as a 0/1 real matrix.
    pub fn to_matrix(&self) -> RMatrix {
        RMatrix::from_fn(self.n_t, self.k_t, |i, j| if self.allowed(i, j) { 1.0 } else { 0.0 })
    }

    /// All violated invariants; empty when the spec is well formed.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for j in 0..self.k_t {
            let actual = (0..self.n_t).filter(|&i| self.allowed(i, j)).count();
            if actual != self.s_t {
                out.push(Violation::ColumnSum { column: j, expected: self.s_t, actual });
            }
        }
        for i in 0..self.n_t {
            let actual = (0..self.k_t).filter(|&j| self.allowed(i, j)).count();
            if actual != self.c_t {
                out.push(Violation::RowSum { row: i, expected: self.c_t, actual });
            }
        }
        let (k_s, n_c) = (self.k_t * self.s_t, self.n_t * self.c_t);
        if k_s != n_c {
            out.push(Violation::ConnectionCount { k_s, n_c });
        }
        out
    }

    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }

    /// Zero every entry of `f_rf` whose switch is absent.
    pub fn apply_mask(&self, f_rf: &RMatrix) -> Result<RMatrix> {
        self.check_shape(f_rf.nrows(), f_rf.ncols())?;
        Ok(RMatrix::from_fn(f_rf.nrows(), f_rf.ncols(), |i, j| if self.allowed(i, j) { f_rf[(i, j)] } else { 0.0 }))
    }

    pub(crate) fn check_shape(&self, rows: usize, cols: usize) -> Result<()> {
        if (rows, cols) != (self.n_t, self.k_t) {
            return Err(Error::DimensionMismatch(format!(
                "mask is {}x{} but the analog precoder is {rows}x{cols}",
                self.n_t, self.k_t
            )));
        }
        Ok(())
    }

    /// Reject masks under which no analog precoder can give
    /// `rank(H₁ F_RF) = N_s`.
    pub fn check_feasible(&self, h1: &CMatrix, n_streams: usize, rank_tol: f64) -> Result<()> {
        self.check_shape(h1.ncols(), self.k_t)?;
        if let Err(v) = self.validate() {
            return Err(Error::InfeasibleConnectivity(format!("malformed mask: {}", v[0])));
        }
        let column_support = |j: usize| {
            RMatrix::from_diagonal(&nalgebra::DVector::from_fn(self.n_t, |i, _| if self.allowed(i, j) { 1.0 } else { 0.0 }))
        };
        let useful = (0..self.k_t)
            .filter(|&j| numerical_rank(&(h1 * complexify(&column_support(j))), rank_tol) > 0)
            .count();
        if useful < n_streams {
            return Err(Error::InfeasibleConnectivity(format!(
                "only {useful} RF chains reach the channel's signal space, need {n_streams}"
            )));
        }
        let any = RMatrix::from_diagonal(&nalgebra::DVector::from_fn(self.n_t, |i, _| {
            if (0..self.k_t).any(|j| self.allowed(i, j)) {
                1.0
            } else {
                0.0
            }
        }));
        let reach = numerical_rank(&(h1 * complexify(&any)), rank_tol);
        if reach < n_streams {
            return Err(Error::InfeasibleConnectivity(format!(
                "connected antennas span rank {reach} of the channel, need {n_streams}"
            )));
        }
        Ok(())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "CONNSPEC1 {} {} {} {}", self.n_t, self.k_t, self.s_t, self.c_t)?;
        for i in 0..self.n_t {
            let row: Vec<&str> = (0..self.k_t).map(|j| if self.allowed(i, j) { "1" } else { "0" }).collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let bad = |reason: String| Error::Parse { kind: "connectivity", reason };
        let mut lines = BufReader::new(r).lines().filter(|l| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
        let header = lines.next().ok_or_else(|| bad("empty file".into()))??;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 5 || fields[0] != "CONNSPEC1" {
            return Err(bad(format!("bad header {header:?}")));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|e| bad(format!("{s:?}: {e}")));
        let (n_t, k_t, s_t, c_t) = (num(fields[1])?, num(fields[2])?, num(fields[3])?, num(fields[4])?);
        let mut g = Vec::with_capacity(n_t * k_t);
        for row in 0..n_t {
            let line = lines.next().ok_or_else(|| bad(format!("missing row {row}")))??;
            let digits: Vec<&str> = line.split_whitespace().collect();
            if digits.len() != k_t {
                return Err(bad(format!("row {row} has {} entries, expected {k_t}", digits.len())));
            }
            for d in digits {
                g.push(match d {
                    "0" => false,
                    "1" => true,
                    other => return Err(bad(format!("row {row}: {other:?} is not 0 or 1"))),
                });
            }
        }
        if let Some(extra) = lines.next() {
            return Err(bad(format!("trailing content {:?}", extra?)));
        }
        Self::new(n_t, k_t, g, s_t, c_t)
    }
}

impl FromStr for ConnectivitySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::read_from(s.as_bytes())
    }
}

impl fmt::Display for ConnectivitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut buf = Vec::new();
        self.write_to(&mut buf).map_err(|_| fmt::Error)?;
        f.write_str(&String::from_utf8_lossy(&buf))
    }
}

/// Mutually exclusive contiguous blocks of `N_t / k_t` antennas, `c_t = 1`.
pub fn subset_partition(n_t: usize, k_t: usize) -> Result<ConnectivitySpec> {
    if k_t == 0 || n_t % k_t != 0 {
        return Err(Error::InvalidParameter(format!("k_t = {k_t} does not divide N_t = {n_t}")));
    }
    let block = n_t / k_t;
    ConnectivitySpec::from_fn(n_t, k_t, block, 1, |i, j| i / block == j)
}

/// Row `r` connects to every column `j` with `j ≡ r (mod period)`.
///
/// `period = 2` on 64×4 gives the alternating `[1 0 1 0] / [0 1 0 1]` mask.
pub fn interleaved_spec(n_t: usize, k_t: usize, period: usize) -> Result<ConnectivitySpec> {
    if period == 0 || k_t % period != 0 || n_t % period != 0 {
        return Err(Error::InvalidParameter(format!(
            "period {period} must divide both N_t = {n_t} and k_t = {k_t}"
        )));
    }
    ConnectivitySpec::from_fn(n_t, k_t, n_t / period, k_t / period, |i, j| j % period == i % period)
}

/// Free-function form of [`ConnectivitySpec::apply_mask`].
pub fn apply_mask(f_rf: &RMatrix, spec: &ConnectivitySpec) -> Result<RMatrix> {
    spec.apply_mask(f_rf)
}
