//! Link budget, path loss, SNR, ranging variance and GPS covariance.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, Error};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Thermal noise density at 290 K, dBm/Hz.
pub const THERMAL_NOISE_DBM_HZ: f64 = -174.0;

/// Reference distance below which path loss is clamped, meters.
pub const REFERENCE_DISTANCE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RssiNormalization {
    /// Ratio of received to maximum power in milliwatts.
    Linear,
    /// Ratio of the two powers expressed in dBm (`p_max / p_r`).
    Dbm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioConfig {
    pub p_t_dbm: f64,
    pub g_t_dbi: f64,
    pub g_r_dbi: f64,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    pub eta_los: f64,
    pub eta_nlos: f64,
    /// Aggregate wall loss applied to every NLOS link, dB.
    pub wall_loss_db: f64,
    /// Log-normal shadowing standard deviation, dB.
    pub sigma_s_db: f64,
    pub beta_eff_hz: f64,
    pub rssi_normalization: RssiNormalization,
}

impl Default for RadioConfig {
    fn default() -> Self {
        let bandwidth_hz = 1e6;
        RadioConfig {
            p_t_dbm: -10.0,
            g_t_dbi: 2.0,
            g_r_dbi: 2.0,
            carrier_hz: 2.4e9,
            bandwidth_hz,
            noise_figure_db: 10.0,
            eta_los: 2.0,
            eta_nlos: 3.5,
            wall_loss_db: 25.0,
            sigma_s_db: 0.0,
            beta_eff_hz: bandwidth_hz / 12f64.sqrt(),
            rssi_normalization: RssiNormalization::Linear,
        }
    }
}

impl RadioConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(format!("radio: {m}")));
        if !(self.bandwidth_hz > 0.0) {
            return bad("bandwidth must be positive");
        }
        if !(self.carrier_hz > 0.0) {
            return bad("carrier frequency must be positive");
        }
        if self.eta_los > self.eta_nlos {
            return bad("eta_los must not exceed eta_nlos");
        }
        if !(self.sigma_s_db >= 0.0) {
            return bad("sigma_s must be non-negative");
        }
        if !(self.beta_eff_hz > 0.0) {
            return bad("beta_eff must be positive");
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    /// Receiver noise power `-174 + 10 log10(B) + NF`, dBm.
    pub fn noise_power_dbm(&self) -> f64 {
        THERMAL_NOISE_DBM_HZ + 10.0 * self.bandwidth_hz.log10() + self.noise_figure_db
    }

    /// Received power at the reference distance in LOS, no walls, no shadowing.
    pub fn max_received_power_dbm(&self) -> f64 {
        received_power_dbm(self, REFERENCE_DISTANCE, true, 0.0, 0.0)
    }
}

/// One agent's radio observation of the target beacon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub p_r_dbm: f64,
    pub snr: f64,
    /// Ranging variance, m².
    pub var_range: f64,
    /// Ranging variance plus projected GPS variance, m².
    pub var_total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpsModel {
    /// Per-axis variance inside GPS-denied cells, m².
    pub sigma2_denied: f64,
    /// Per-axis variance elsewhere, m².
    pub sigma2_normal: f64,
}

impl Default for GpsModel {
    fn default() -> Self {
        GpsModel {
            sigma2_denied: 100.0,
            sigma2_normal: 0.0,
        }
    }
}

impl GpsModel {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.sigma2_normal >= 0.0) || !(self.sigma2_denied >= self.sigma2_normal) {
            return Err(ConfigError::Invalid(
                "gps: need 0 <= sigma2_normal <= sigma2_denied".into(),
            ));
        }
        Ok(())
    }
}

pub fn path_loss_db(cfg: &RadioConfig, d: f64, los: bool) -> f64 {
    let d = d.max(REFERENCE_DISTANCE);
    let eta = if los { cfg.eta_los } else { cfg.eta_nlos };
    20.0 * (4.0 * PI / cfg.wavelength()).log10() + 10.0 * eta * d.log10()
}

pub fn received_power_dbm(
    cfg: &RadioConfig,
    d: f64,
    los: bool,
    wall_loss_db: f64,
    shadow_db: f64,
) -> f64 {
    cfg.p_t_dbm + cfg.g_t_dbi + cfg.g_r_dbi - (path_loss_db(cfg, d, los) + wall_loss_db) + shadow_db
}

/// Received power normalized by its reference maximum, in `(0, 1]`.
pub fn rssi_reward(cfg: &RadioConfig, p_r_dbm: f64) -> f64 {
    let p_max = cfg.max_received_power_dbm();
    let r = match cfg.rssi_normalization {
        RssiNormalization::Linear => 10f64.powf((p_r_dbm - p_max) / 10.0),
        RssiNormalization::Dbm => p_max / p_r_dbm,
    };
    r.min(1.0)
}

pub fn snr_linear(cfg: &RadioConfig, p_r_dbm: f64) -> f64 {
    10f64.powf((p_r_dbm - cfg.noise_power_dbm()) / 10.0)
}

/// Time-of-arrival ranging variance `c² / (8π² SNR β²)`, m².
pub fn ranging_variance(cfg: &RadioConfig, snr: f64) -> Result<f64, Error> {
    if !(snr > 0.0) {
        return Err(Error::NonPositiveSnr(snr));
    }
    Ok(SPEED_OF_LIGHT.powi(2) / (8.0 * PI * PI * snr * cfg.beta_eff_hz.powi(2)))
}

pub fn gps_covariance(gps: &GpsModel, in_denied: bool) -> Matrix2<f64> {
    let s2 = if in_denied {
        gps.sigma2_denied
    } else {
        gps.sigma2_normal
    };
    Matrix2::from_diagonal_element(s2)
}

/// Full link evaluation for an agent at distance `d` from the target.
/// `var_total` is left equal to `var_range`; the GPS projection is added by
/// the localization step once the bearing is known.
pub fn measure(cfg: &RadioConfig, d: f64, los: bool, shadow_db: f64) -> Result<Measurement, Error> {
    let walls = if los { 0.0 } else { cfg.wall_loss_db };
    let p_r_dbm = received_power_dbm(cfg, d, los, walls, shadow_db);
    let snr = snr_linear(cfg, p_r_dbm);
    let var_range = ranging_variance(cfg, snr)?;
    Ok(Measurement {
        p_r_dbm,
        snr,
        var_range,
        var_total: var_range,
    })
}
