//! Air-to-ground link model.
//!
//! Geometry, LoS probability, path gain, SNR and Shannon rate for a single
//! UAV to ground-user link, plus the closed-form transmit-power and altitude
//! feasibility bounds. Everything is in SI linear units; dB values are
//! converted once when a [`ChannelParams`] is built.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("non-finite coordinate in link geometry")]
    NonFinite,
    #[error("UAV altitude must be positive, got {0} m")]
    UavOnGround(f64),
    #[error("ground user altitude must be 0, got {0} m")]
    UserAirborne(f64),
    #[error("invalid channel parameter: {0}")]
    InvalidParams(&'static str),
}

/// Convert a dB ratio to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Convert a dBm power (or dBm/Hz density) to W (or W/Hz).
pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm) / 1000.0
}

/// Radio and propagation environment constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Carrier frequency in Hz.
    pub carrier_frequency: f64,
    pub light_speed: f64,
    /// Path loss exponent.
    pub path_loss_exponent: f64,
    /// LoS probability scale.
    pub b1: f64,
    /// LoS probability exponent.
    pub b2: f64,
    /// Elevation offset of the LoS curve, in degrees.
    pub zeta_deg: f64,
    /// Linear excess attenuation for LoS links.
    pub mu_los: f64,
    /// Linear excess attenuation for NLoS links.
    pub mu_nlos: f64,
    /// AWGN power spectral density in W/Hz.
    pub noise_psd: f64,
}

impl Default for ChannelParams {
    /// Dense-urban defaults: 2 GHz, alpha = 2, b1 = 0.36, b2 = 0.21,
    /// 3 dB / 23 dB excess loss, -170 dBm/Hz noise and zeta = 0.
    fn default() -> Self {
        Self {
            carrier_frequency: 2.0e9,
            light_speed: SPEED_OF_LIGHT,
            path_loss_exponent: 2.0,
            b1: 0.36,
            b2: 0.21,
            zeta_deg: 0.0,
            mu_los: db_to_linear(3.0),
            mu_nlos: db_to_linear(23.0),
            noise_psd: dbm_to_watts(-170.0),
        }
    }
}

impl ChannelParams {
    /// Free-space constant `(4 pi f_c / c)^2`.
    pub fn k0(&self) -> f64 {
        let x = 4.0 * PI * self.carrier_frequency / self.light_speed;
        x * x
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let all_finite = [
            self.carrier_frequency,
            self.light_speed,
            self.path_loss_exponent,
            self.b1,
            self.b2,
            self.zeta_deg,
            self.mu_los,
            self.mu_nlos,
            self.noise_psd,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !all_finite {
            return Err(ChannelError::InvalidParams("all parameters must be finite"));
        }
        if self.carrier_frequency <= 0.0 || self.light_speed <= 0.0 {
            return Err(ChannelError::InvalidParams("carrier frequency and light speed must be positive"));
        }
        if !(self.mu_nlos > self.mu_los && self.mu_los >= 1.0) {
            return Err(ChannelError::InvalidParams("need mu_nlos > mu_los >= 1 (linear)"));
        }
        if self.b1 <= 0.0 || self.b2 <= 0.0 {
            return Err(ChannelError::InvalidParams("b1 and b2 must be positive"));
        }
        if self.path_loss_exponent < 2.0 {
            return Err(ChannelError::InvalidParams("path loss exponent must be >= 2"));
        }
        if self.zeta_deg < 0.0 {
            return Err(ChannelError::InvalidParams("zeta must be >= 0 degrees"));
        }
        if self.noise_psd <= 0.0 {
            return Err(ChannelError::InvalidParams("noise PSD must be positive"));
        }
        Ok(())
    }

    /// Noise power `B * N0` over a bandwidth in Hz.
    pub fn noise_power(&self, bandwidth: f64) -> f64 {
        bandwidth * self.noise_psd
    }
}

/// A point in the arena. Ground users sit at `h = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position3 {
    pub x: f64,
    pub y: f64,
    pub h: f64,
}

impl Position3 {
    pub const fn new(x: f64, y: f64, h: f64) -> Self {
        Self { x, y, h }
    }

    pub const fn ground(x: f64, y: f64) -> Self {
        Self { x, y, h: 0.0 }
    }
}

/// Distance and elevation angle of a UAV as seen from a ground user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    /// 3D distance in m.
    pub distance: f64,
    /// Elevation angle in radians, in `[0, pi/2]`.
    pub elevation: f64,
}

pub fn link_geometry(uav: Position3, user: Position3) -> Result<LinkGeometry, ChannelError> {
    let coords = [uav.x, uav.y, uav.h, user.x, user.y, user.h];
    if coords.iter().any(|v| !v.is_finite()) {
        return Err(ChannelError::NonFinite);
    }
    if uav.h <= 0.0 {
        return Err(ChannelError::UavOnGround(uav.h));
    }
    if user.h != 0.0 {
        return Err(ChannelError::UserAirborne(user.h));
    }
    let dx = uav.x - user.x;
    let dy = uav.y - user.y;
    let distance = (uav.h * uav.h + dx * dx + dy * dy).sqrt();
    // clamp guards asin against h/d rounding a hair above 1
    let elevation = (uav.h / distance).min(1.0).asin();
    Ok(LinkGeometry { distance, elevation })
}

/// LoS probability at elevation `theta` (radians), clamped to `[0, 1]`.
///
/// Below the `zeta` offset the base of the power law is negative and the
/// probability is taken as 0.
pub fn los_probability(theta: f64, params: &ChannelParams) -> f64 {
    let base = theta.to_degrees() - params.zeta_deg;
    if base <= 0.0 {
        return 0.0;
    }
    (params.b1 * base.powf(params.b2)).clamp(0.0, 1.0)
}

/// Mean excess attenuation `P_LoS mu_LoS + P_NLoS mu_NLoS` at elevation `theta`.
pub fn mean_attenuation(theta: f64, params: &ChannelParams) -> f64 {
    let p = los_probability(theta, params);
    p * params.mu_los + (1.0 - p) * params.mu_nlos
}

/// Linear channel power gain.
pub fn channel_gain(geom: LinkGeometry, params: &ChannelParams) -> f64 {
    let attenuation = mean_attenuation(geom.elevation, params);
    1.0 / (params.k0() * geom.distance.powf(params.path_loss_exponent) * attenuation)
}

/// Received SNR (linear) for a user given its power and bandwidth share.
pub fn snr(power_per_user: f64, gain: f64, bandwidth_per_user: f64, params: &ChannelParams) -> f64 {
    power_per_user * gain / params.noise_power(bandwidth_per_user)
}

/// Shannon rate in bit/s.
pub fn rate(power_per_user: f64, gain: f64, bandwidth_per_user: f64, params: &ChannelParams) -> f64 {
    bandwidth_per_user * (1.0 + snr(power_per_user, gain, bandwidth_per_user, params)).log2()
}

/// Worst-case (pure NLoS) transmit power that guarantees SNR `gamma` at
/// distance `d` with noise power `sigma2`.
pub fn min_transmit_power(d: f64, gamma: f64, sigma2: f64, params: &ChannelParams) -> f64 {
    gamma * sigma2 * params.k0() * d.powf(params.path_loss_exponent) * params.mu_nlos
}

/// Lower altitude limit implied by the LoS requirement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AltitudeFloor {
    /// `h >= altitude`; `elevation_deg` is the required elevation angle.
    Bounded { altitude: f64, elevation_deg: f64 },
    /// The power budget meets the target even over a pure NLoS link, so any
    /// elevation works. The log argument of the bound is non-positive here.
    Unconstrained,
    /// The required LoS probability is not reachable at any elevation up to
    /// 90 degrees at this distance.
    Unsatisfiable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AltitudeBounds {
    pub floor: AltitudeFloor,
    /// Highest altitude at which even a pure LoS link still meets the target.
    pub upper: f64,
    /// `S = p_max / (gamma K0 sigma^2 d^alpha)`.
    pub power_ratio: f64,
}

impl AltitudeBounds {
    /// Numeric lower bound (0 when unconstrained, `None` when unsatisfiable).
    pub fn lower(&self) -> Option<f64> {
        match self.floor {
            AltitudeFloor::Bounded { altitude, .. } => Some(altitude),
            AltitudeFloor::Unconstrained => Some(0.0),
            AltitudeFloor::Unsatisfiable => None,
        }
    }

    /// True when no altitude satisfies both limits.
    pub fn is_empty(&self) -> bool {
        match self.lower() {
            Some(lower) => lower > self.upper,
            None => true,
        }
    }

    pub fn contains(&self, h: f64) -> bool {
        match self.lower() {
            Some(lower) => h >= lower && h <= self.upper,
            None => false,
        }
    }
}

/// Altitude window for a user at distance `d` under power budget `p_max`.
///
/// The floor follows from requiring the mixed attenuation at the user's
/// elevation to stay below `S`, i.e. `P_LoS >= (mu_NLoS - S)/(mu_NLoS - mu_LoS)`,
/// inverted through the LoS power law. The ceiling assumes pure LoS.
pub fn altitude_bounds(
    d: f64,
    p_max: f64,
    gamma: f64,
    sigma2: f64,
    params: &ChannelParams,
) -> AltitudeBounds {
    let k0 = params.k0();
    let alpha = params.path_loss_exponent;
    let s = p_max / (gamma * k0 * sigma2 * d.powf(alpha));
    let upper = (p_max / (gamma * k0 * sigma2 * params.mu_los)).powf(1.0 / alpha);

    let span = params.mu_los - params.mu_nlos;
    let arg = (s / span - params.mu_nlos / span) / params.b1;
    let floor = if arg <= 0.0 {
        AltitudeFloor::Unconstrained
    } else {
        let m = arg.ln() / params.b2;
        let elevation_deg = params.zeta_deg + m.exp();
        if !(elevation_deg <= 90.0) || params.b1 * arg > 1.0 {
            AltitudeFloor::Unsatisfiable
        } else {
            AltitudeFloor::Bounded {
                altitude: d * (elevation_deg.to_radians()).sin(),
                elevation_deg,
            }
        }
    };
    AltitudeBounds {
        floor,
        upper,
        power_ratio: s,
    }
}
