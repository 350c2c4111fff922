//! Clustered narrowband mmWave channel with uniform planar arrays.
//!
//! A realization is the normalized sum of `N_cl · N_ray` rank-one ray
//! contributions `α · Λ_r · Λ_t · a_r(doa) · a_t(dod)ᴴ`, scaled by
//! `γ = sqrt(N_t N_r / (N_cl N_ray))` so that `E‖H‖²_F = N_t N_r` when both
//! ends are omnidirectional. Every random draw comes from an explicit
//! [`SimRng`] handle seeded from the configuration.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::{Read, Write};

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};

/// Portable, seedable generator used for every stochastic operation.
pub type SimRng = rand_chacha::ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Default Laplacian angular spread (scale parameter), 7.5 degrees.
pub const DEFAULT_ANGLE_SPREAD: f64 = 7.5 * PI / 180.0;

/// Uniform planar array in the yz-plane, broadside along +x.
///
/// Elevation is measured from the +z axis, so boresight sits at
/// `(azimuth, elevation) = (0, π/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub n_y: usize,
    pub n_z: usize,
    /// Element spacing in wavelengths.
    pub spacing: f64,
    pub sector_azimuth_halfwidth: f64,
    pub sector_elevation_halfwidth: f64,
    /// Disables sector gating entirely.
    pub omni: bool,
}

impl ArrayGeometry {
    /// Half-wavelength omnidirectional array.
    pub fn omni(n_y: usize, n_z: usize) -> Self {
        Self {
            n_y,
            n_z,
            spacing: 0.5,
            sector_azimuth_halfwidth: PI,
            sector_elevation_halfwidth: FRAC_PI_2,
            omni: true,
        }
    }

    /// Half-wavelength array with an ideal sector pattern of the given
    /// half-widths (radians).
    pub fn sectored(n_y: usize, n_z: usize, azimuth_halfwidth: f64, elevation_halfwidth: f64) -> Self {
        Self {
            n_y,
            n_z,
            spacing: 0.5,
            sector_azimuth_halfwidth: azimuth_halfwidth,
            sector_elevation_halfwidth: elevation_halfwidth,
            omni: false,
        }
    }

    pub fn len(&self) -> usize {
        self.n_y * self.n_z
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_y == 0 || self.n_z == 0 {
            return Err(Error::InvalidParameter(format!(
                "array dimensions must be positive, got {}x{}",
                self.n_y, self.n_z
            )));
        }
        if !(self.spacing > 0.0) || !self.spacing.is_finite() {
            return Err(Error::InvalidParameter(format!("element spacing must be > 0, got {}", self.spacing)));
        }
        if !self.omni && (self.sector_azimuth_halfwidth < 0.0 || self.sector_elevation_halfwidth < 0.0) {
            return Err(Error::InvalidParameter("sector half-widths must be non-negative".into()));
        }
        Ok(())
    }
}

/// Array response for a plane wave from `(azimuth, elevation)`.
///
/// Element `(m, n)` lives at index `m · n_z + n` and equals
/// `exp(j 2π d (m sinφ sinθ + n cosθ)) / √N`.
pub fn steering_vector(geometry: &ArrayGeometry, azimuth: f64, elevation: f64) -> CVector {
    let n = geometry.len();
    let kd = 2.0 * PI * geometry.spacing;
    let uy = azimuth.sin() * elevation.sin();
    let uz = elevation.cos();
    let norm = 1.0 / (n as f64).sqrt();
    DVector::from_iterator(
        n,
        (0..geometry.n_y).flat_map(move |m| {
            (0..geometry.n_z).map(move |k| Complex64::from_polar(norm, kd * (m as f64 * uy + k as f64 * uz)))
        }),
    )
}

/// Ideal 0/1 sector pattern. Always 1 for omnidirectional arrays.
pub fn element_gain(geometry: &ArrayGeometry, azimuth: f64, elevation: f64) -> f64 {
    if geometry.omni {
        return 1.0;
    }
    let az = wrap_angle(azimuth);
    if az.abs() <= geometry.sector_azimuth_halfwidth
        && (elevation - FRAC_PI_2).abs() <= geometry.sector_elevation_halfwidth
    {
        1.0
    } else {
        0.0
    }
}

/// How cluster mean directions are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeanAngleLaw {
    /// Means are uniform within each end's sector (uniform over the sphere
    /// for omnidirectional arrays).
    #[default]
    Confined,
    /// Means are uniform over the sphere at both ends; sectored arrays then
    /// gate the rays that land outside the sector.
    Gated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelConfig {
    pub n_clusters: usize,
    pub n_rays: usize,
    /// Laplacian scale of the per-ray angular offsets, radians.
    pub angle_spread: f64,
    pub tx_geometry: ArrayGeometry,
    pub rx_geometry: ArrayGeometry,
    pub seed: u64,
    pub mean_law: MeanAngleLaw,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self::reference(0)
    }
}

impl ChannelConfig {
    /// 8 clusters of 10 rays, 8×8 transmit UPA with a 60°×30° sector and a
    /// 4×4 omnidirectional receive UPA.
    pub fn reference(seed: u64) -> Self {
        Self {
            n_clusters: 8,
            n_rays: 10,
            angle_spread: DEFAULT_ANGLE_SPREAD,
            tx_geometry: ArrayGeometry::sectored(8, 8, PI / 6.0, PI / 12.0),
            rx_geometry: ArrayGeometry::omni(4, 4),
            seed,
            mean_law: MeanAngleLaw::Confined,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_clusters == 0 || self.n_rays == 0 {
            return Err(Error::InvalidParameter("need at least one cluster and one ray".into()));
        }
        if !(self.angle_spread >= 0.0) || !self.angle_spread.is_finite() {
            return Err(Error::InvalidParameter(format!("angle spread must be >= 0, got {}", self.angle_spread)));
        }
        self.tx_geometry.validate()?;
        self.rx_geometry.validate()
    }

    pub fn n_t(&self) -> usize {
        self.tx_geometry.len()
    }

    pub fn n_r(&self) -> usize {
        self.rx_geometry.len()
    }

    /// Normalization factor `sqrt(N_t N_r / (N_cl N_ray))`.
    pub fn gamma(&self) -> f64 {
        ((self.n_t() * self.n_r()) as f64 / (self.n_clusters * self.n_rays) as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub azimuth: f64,
    pub elevation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayAngles {
    pub cluster: usize,
    pub ray: usize,
    pub dod: Direction,
    pub doa: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub cluster: usize,
    pub ray: usize,
    pub alpha: Complex64,
    pub dod: Direction,
    pub doa: Direction,
}

#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// `N_r × N_t` channel matrix.
    pub h: CMatrix,
    pub rays: Vec<Ray>,
}

impl ChannelRealization {
    /// Rebuild `H` from the stored rays.
    pub fn reconstruct(&self, config: &ChannelConfig) -> CMatrix {
        channel_from_rays(config, &self.rays)
    }
}

fn channel_from_rays(config: &ChannelConfig, rays: &[Ray]) -> CMatrix {
    let (tx, rx) = (&config.tx_geometry, &config.rx_geometry);
    let mut h = CMatrix::zeros(rx.len(), tx.len());
    for ray in rays {
        let gain = element_gain(rx, ray.doa.azimuth, ray.doa.elevation)
            * element_gain(tx, ray.dod.azimuth, ray.dod.elevation);
        if gain == 0.0 {
            continue;
        }
        let a_r = steering_vector(rx, ray.doa.azimuth, ray.doa.elevation);
        let a_t = steering_vector(tx, ray.dod.azimuth, ray.dod.elevation);
        h.ger(ray.alpha * gain, &a_r, &a_t.conjugate(), Complex64::new(1.0, 0.0));
    }
    h * Complex64::new(config.gamma(), 0.0)
}

/// Wrap an angle into `(-π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

fn laplacian<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> f64 {
    // inverse CDF; u in [-1/2, 1/2)
    let u: f64 = rng.random::<f64>() - 0.5;
    if scale == 0.0 {
        return 0.0;
    }
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
}

fn uniform_sphere<R: Rng + ?Sized>(rng: &mut R) -> Direction {
    let azimuth = PI * (2.0 * rng.random::<f64>() - 1.0);
    let elevation = (1.0 - 2.0 * rng.random::<f64>()).clamp(-1.0, 1.0).acos();
    Direction { azimuth, elevation }
}

fn mean_direction<R: Rng + ?Sized>(rng: &mut R, geometry: &ArrayGeometry, law: MeanAngleLaw) -> Direction {
    if geometry.omni || law == MeanAngleLaw::Gated {
        return uniform_sphere(rng);
    }
    let azimuth = geometry.sector_azimuth_halfwidth * (2.0 * rng.random::<f64>() - 1.0);
    let elevation = FRAC_PI_2 + geometry.sector_elevation_halfwidth * (2.0 * rng.random::<f64>() - 1.0);
    Direction { azimuth, elevation }
}

fn offset<R: Rng + ?Sized>(rng: &mut R, mean: Direction, spread: f64) -> Direction {
    let azimuth = wrap_angle(mean.azimuth + laplacian(rng, spread));
    let elevation = (mean.elevation + laplacian(rng, spread)).clamp(0.0, PI);
    Direction { azimuth, elevation }
}

/// Draw the departure and arrival direction of every ray, cluster by cluster.
pub fn sample_ray_angles<R: Rng + ?Sized>(config: &ChannelConfig, rng: &mut R) -> Vec<RayAngles> {
    let mut out = Vec::with_capacity(config.n_clusters * config.n_rays);
    for cluster in 0..config.n_clusters {
        let dod_mean = mean_direction(rng, &config.tx_geometry, config.mean_law);
        let doa_mean = mean_direction(rng, &config.rx_geometry, config.mean_law);
        for ray in 0..config.n_rays {
            let dod = offset(rng, dod_mean, config.angle_spread);
            let doa = offset(rng, doa_mean, config.angle_spread);
            out.push(RayAngles { cluster, ray, dod, doa });
        }
    }
    out
}

/// Circularly-symmetric complex normal with unit variance.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draw one channel realization: angles first, then ray gains.
pub fn generate_channel<R: Rng + ?Sized>(config: &ChannelConfig, rng: &mut R) -> Result<ChannelRealization> {
    config.validate()?;
    let angles = sample_ray_angles(config, rng);
    let rays: Vec<Ray> = angles
        .into_iter()
        .map(|a| Ray { cluster: a.cluster, ray: a.ray, alpha: complex_normal(rng), dod: a.dod, doa: a.doa })
        .collect();
    let h = channel_from_rays(config, &rays);
    Ok(ChannelRealization { h, rays })
}

/// Convenience: seed a fresh generator from `config.seed` and draw.
pub fn generate_seeded(config: &ChannelConfig) -> Result<ChannelRealization> {
    generate_channel(config, &mut rng_from_seed(config.seed))
}

const DUMP_MAGIC: &str = "MMWCH1";

/// Write `h` as a text header line `MMWCH1 N_r N_t seed` followed by the
/// row-major entries as little-endian `f64` real/imaginary pairs.
pub fn write_channel_dump<W: Write>(mut w: W, h: &CMatrix, seed: u64) -> Result<()> {
    writeln!(w, "{DUMP_MAGIC} {} {} {seed}", h.nrows(), h.ncols())?;
    for i in 0..h.nrows() {
        for j in 0..h.ncols() {
            let z = h[(i, j)];
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Inverse of [`write_channel_dump`]; returns the matrix and its seed.
pub fn read_channel_dump<R: Read>(mut r: R) -> Result<(CMatrix, u64)> {
    let bad = |reason: String| Error::Parse { kind: "channel dump", reason };
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let nl = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| bad("missing header line".into()))?;
    let header = std::str::from_utf8(&bytes[..nl]).map_err(|e| bad(e.to_string()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != DUMP_MAGIC {
        return Err(bad(format!("bad header {header:?}")));
    }
    let parse = |s: &str| s.parse::<u64>().map_err(|e| bad(format!("{s:?}: {e}")));
    let (n_r, n_t, seed) = (parse(fields[1])? as usize, parse(fields[2])? as usize, parse(fields[3])?);
    let body = &bytes[nl + 1..];
    if body.len() != n_r * n_t * 16 {
        return Err(bad(format!("expected {} payload bytes, found {}", n_r * n_t * 16, body.len())));
    }
    let mut vals = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let mut h = CMatrix::zeros(n_r, n_t);
    for i in 0..n_r {
        for j in 0..n_t {
            let re = vals.next().unwrap();
            let im = vals.next().unwrap();
            h[(i, j)] = Complex64::new(re, im);
        }
    }
    Ok((h, seed))
}
