//! Network geometry sampling and line-of-sight channel generation.
//!
//! A scenario places the source at the center of a disk-shaped cluster,
//! relays uniformly over the disk, the destination at a fixed range on the
//! reference azimuth and eavesdroppers at uniform ranges/azimuths. Channel
//! gains follow the line-of-sight law `d^(−α/2) e^{jφ}`.
//!
//! All randomness comes from a ChaCha8 stream seeded per scenario, so a
//! `(config, seed)` pair always reproduces the same scenario bit for bit.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;
use thiserror::Error;

use crate::numerics::{CMatrix, CVector};

/// PRNG identifier recorded in output headers.
pub const PRNG_ID: &str = "ChaCha8Rng/rand_chacha-0.3/seed_from_u64";

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("invalid geometry config: {0}")]
    InvalidConfig(String),
    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),
}

/// How per-link phase offsets are assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseModel {
    /// Physical LOS phase `2πd/λ mod 2π`, fully determined by geometry.
    Geometric,
    /// Independent uniform phase in `[0, 2π)` per link.
    UniformRandom,
}

/// Geometry and noise parameters of one network draw.
#[derive(Debug, Clone, serde::Serialize)]
pub struct GeometryConfig {
    /// Carrier wavelength in meters.
    pub wavelength: f64,
    /// Cluster disk radius in meters.
    pub cluster_radius: f64,
    /// Path-loss exponent (≥ 2).
    pub path_loss_exponent: f64,
    /// Noise power in watts.
    pub noise_power: f64,
    /// Total cooperating nodes N (source plus N−1 relays).
    pub n_nodes: usize,
    /// Number of eavesdroppers J.
    pub n_eavesdroppers: usize,
    /// Source-to-destination distance in meters.
    pub dest_distance: f64,
    /// Source-to-eavesdropper range bounds in meters.
    pub eav_distance_min: f64,
    pub eav_distance_max: f64,
    pub phase_model: PhaseModel,
}

impl Default for GeometryConfig {
    /// 900 MHz carrier (λ = 0.33 m), disk radius 5λ, exponent 4, −60 dBm
    /// noise, destination at 20R, eavesdroppers in [40R, 100R].
    fn default() -> Self {
        let wavelength = 0.33;
        let r = 5.0 * wavelength;
        GeometryConfig {
            wavelength,
            cluster_radius: r,
            path_loss_exponent: 4.0,
            noise_power: 1e-9,
            n_nodes: 10,
            n_eavesdroppers: 1,
            dest_distance: 20.0 * r,
            eav_distance_min: 40.0 * r,
            eav_distance_max: 100.0 * r,
            phase_model: PhaseModel::Geometric,
        }
    }
}

impl GeometryConfig {
    pub fn validate(&self) -> Result<(), ChannelError> {
        let bad = |msg: String| Err(ChannelError::InvalidConfig(msg));
        if !(self.wavelength > 0.0) {
            return bad(format!("wavelength must be > 0, got {}", self.wavelength));
        }
        if !(self.cluster_radius > 0.0) {
            return bad(format!("cluster_radius must be > 0, got {}", self.cluster_radius));
        }
        if !(self.noise_power > 0.0) {
            return bad(format!("noise_power must be > 0, got {}", self.noise_power));
        }
        if !(self.path_loss_exponent >= 2.0) {
            return bad(format!(
                "path_loss_exponent must be >= 2, got {}",
                self.path_loss_exponent
            ));
        }
        if self.n_nodes < 1 {
            return bad("n_nodes must be >= 1".into());
        }
        if !(self.dest_distance > 0.0) {
            return bad(format!("dest_distance must be > 0, got {}", self.dest_distance));
        }
        if !(self.eav_distance_min > 0.0 && self.eav_distance_min <= self.eav_distance_max) {
            return bad(format!(
                "eavesdropper range [{}, {}] is invalid",
                self.eav_distance_min, self.eav_distance_max
            ));
        }
        Ok(())
    }
}

/// One sampled network: positions plus the derived channel vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Node 0 is the source at the cluster center.
    pub node_positions: Vec<[f64; 2]>,
    pub dest_position: [f64; 2],
    pub eav_positions: Vec<[f64; 2]>,
    /// N×1 node-to-destination channel vector.
    pub h: CVector,
    /// N×J matrix; column j is the channel vector to eavesdropper j.
    pub g: CMatrix,
    pub noise_power: f64,
}

impl Scenario {
    /// Channel vector of eavesdropper `j`.
    pub fn g_col(&self, j: usize) -> CVector {
        self.g.column(j).into_owned()
    }
}

/// Line-of-sight complex gain `d^(−α/2) e^{jφ}`.
pub fn los_gain(
    distance: f64,
    phase: f64,
    path_loss_exponent: f64,
) -> Result<Complex64, ChannelError> {
    if !(distance > 0.0) {
        return Err(ChannelError::NonPositiveDistance(distance));
    }
    let mag = distance.powf(-path_loss_exponent / 2.0);
    Ok(Complex64::from_polar(mag, phase))
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Sample one scenario. Deterministic in `(config, seed)`.
///
/// Draw order is fixed: relay positions (radius, angle per relay), then
/// eavesdroppers (range, azimuth per eavesdropper), then — only under
/// `PhaseModel::UniformRandom` — destination-link phases followed by the
/// eavesdropper-link phases column by column.
pub fn sample_scenario(config: &GeometryConfig, seed: u64) -> Result<Scenario, ChannelError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = config.n_nodes;
    let j = config.n_eavesdroppers;

    let mut node_positions = Vec::with_capacity(n);
    node_positions.push([0.0, 0.0]); // source at the cluster center
    for _ in 1..n {
        // area-uniform draw over the disk
        let r = config.cluster_radius * rng.gen::<f64>().sqrt();
        let ang = TAU * rng.gen::<f64>();
        node_positions.push([r * ang.cos(), r * ang.sin()]);
    }

    // destination on the reference azimuth
    let dest_position = [config.dest_distance, 0.0];

    let mut eav_positions = Vec::with_capacity(j);
    for _ in 0..j {
        let range = config.eav_distance_min
            + (config.eav_distance_max - config.eav_distance_min) * rng.gen::<f64>();
        let az = TAU * rng.gen::<f64>();
        eav_positions.push([range * az.cos(), range * az.sin()]);
    }

    let alpha = config.path_loss_exponent;
    let phase_of = |d: f64, rng: &mut ChaCha8Rng| match config.phase_model {
        PhaseModel::Geometric => (TAU * d / config.wavelength).rem_euclid(TAU),
        PhaseModel::UniformRandom => TAU * rng.gen::<f64>(),
    };

    let mut h = CVector::zeros(n);
    for i in 0..n {
        let d = dist(node_positions[i], dest_position);
        let phi = phase_of(d, &mut rng);
        h[i] = los_gain(d, phi, alpha)?;
    }
    let mut g = CMatrix::zeros(n, j);
    for col in 0..j {
        for i in 0..n {
            let d = dist(node_positions[i], eav_positions[col]);
            let phi = phase_of(d, &mut rng);
            g[(i, col)] = los_gain(d, phi, alpha)?;
        }
    }

    Ok(Scenario {
        node_positions,
        dest_position,
        eav_positions,
        h,
        g,
        noise_power: config.noise_power,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn los_gain_trivial_values() {
        let g = los_gain(1.0, 0.0, 4.0).unwrap();
        assert!((g - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let g = los_gain(2.0, 0.0, 4.0).unwrap();
        assert!((g - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        let g = los_gain(1.0, FRAC_PI_2, 4.0).unwrap();
        assert!((g - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(matches!(
            los_gain(0.0, 0.0, 4.0),
            Err(ChannelError::NonPositiveDistance(_))
        ));
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let cfg = GeometryConfig { n_eavesdroppers: 3, ..Default::default() };
        let a = sample_scenario(&cfg, 1234).unwrap();
        let b = sample_scenario(&cfg, 1234).unwrap();
        assert_eq!(a, b);
        let c = sample_scenario(&cfg, 1235).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn nodes_stay_inside_cluster() {
        let cfg = GeometryConfig { n_nodes: 10, ..Default::default() };
        let s = sample_scenario(&cfg, 5).unwrap();
        assert_eq!(s.node_positions.len(), 10);
        assert_eq!(s.node_positions[0], [0.0, 0.0]);
        for p in &s.node_positions {
            assert!(dist(*p, [0.0, 0.0]) <= cfg.cluster_radius + 1e-12);
        }
    }

    #[test]
    fn eavesdropper_ranges_match_default_window() {
        // R = 5λ = 1.65 m puts the window at [66, 165] m from the source
        let cfg = GeometryConfig { n_eavesdroppers: 3, ..Default::default() };
        assert!((cfg.eav_distance_min - 66.0).abs() < 1e-12);
        assert!((cfg.eav_distance_max - 165.0).abs() < 1e-12);
        for seed in 0..50 {
            let s = sample_scenario(&cfg, seed).unwrap();
            for p in &s.eav_positions {
                let d = dist(*p, [0.0, 0.0]);
                assert!((66.0..=165.0).contains(&d));
            }
        }
    }

    #[test]
    fn channel_magnitude_law() {
        let cfg = GeometryConfig { n_nodes: 8, n_eavesdroppers: 2, ..Default::default() };
        let s = sample_scenario(&cfg, 77).unwrap();
        let half = cfg.path_loss_exponent / 2.0;
        for i in 0..8 {
            let d = dist(s.node_positions[i], s.dest_position);
            assert!((s.h[i].norm() * d.powf(half) - 1.0).abs() < 1e-12);
            for j in 0..2 {
                let d = dist(s.node_positions[i], s.eav_positions[j]);
                assert!((s.g[(i, j)].norm() * d.powf(half) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn uniform_random_phase_model_is_deterministic_too() {
        let cfg = GeometryConfig { phase_model: PhaseModel::UniformRandom, ..Default::default() };
        let a = sample_scenario(&cfg, 9).unwrap();
        let b = sample_scenario(&cfg, 9).unwrap();
        assert_eq!(a, b);
        // magnitudes still follow the path-loss law
        let d = dist(a.node_positions[1], a.dest_position);
        assert!((a.h[1].norm() * d.powf(2.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn radial_cdf_matches_area_uniform_law() {
        // Kolmogorov-Smirnov distance between the empirical radial CDF and
        // r²/R² over 10^5 relay draws.
        let cfg = GeometryConfig { n_nodes: 11, ..Default::default() };
        let mut radii = Vec::with_capacity(100_000);
        let mut seed = 0u64;
        while radii.len() < 100_000 {
            let s = sample_scenario(&cfg, seed).unwrap();
            for p in &s.node_positions[1..] {
                radii.push(dist(*p, [0.0, 0.0]));
            }
            seed += 1;
        }
        radii.truncate(100_000);
        radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = radii.len() as f64;
        let r2 = cfg.cluster_radius * cfg.cluster_radius;
        let mut ks: f64 = 0.0;
        for (i, r) in radii.iter().enumerate() {
            let model = r * r / r2;
            let above = (i + 1) as f64 / n - model;
            let below = model - i as f64 / n;
            ks = ks.max(above.max(below));
        }
        assert!(ks < 0.01, "KS distance {ks}");
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let cfg = GeometryConfig { n_nodes: 0, ..Default::default() };
        assert!(matches!(sample_scenario(&cfg, 0), Err(ChannelError::InvalidConfig(_))));
        let cfg = GeometryConfig { eav_distance_min: 10.0, eav_distance_max: 5.0, ..Default::default() };
        assert!(cfg.validate().is_err());
        let cfg = GeometryConfig { noise_power: 0.0, ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}
