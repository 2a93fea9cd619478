//! Spherical-earth slant range and round-trip time for LEO links.
//!
//! The UE sits on a sphere of radius [`EARTH_RADIUS_KM`]; the satellite is at
//! `altitude_km` above it. With a transparent payload the signal also traverses
//! the feeder link to the gateway, so the round trip covers both legs twice.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Mean earth radius.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

pub const SPEED_OF_LIGHT_KM_S: f64 = 299_792.458;

/// Operational elevation range of a beam, in degrees.
pub const MIN_ELEVATION_DEG: f64 = 10.0;
pub const MAX_ELEVATION_DEG: f64 = 90.0;

/// Feeder-link elevation used when none is configured.
pub const DEFAULT_FEEDER_ELEVATION_DEG: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Payload {
    /// Bent pipe: the base station sits behind a gateway on the ground.
    Transparent,
    /// The satellite hosts the base station.
    Regenerative,
}

impl std::fmt::Display for Payload {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Payload::Transparent => f.write_str("transparent"),
            Payload::Regenerative => f.write_str("regenerative"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitGeometry {
    pub altitude_km: f64,
    /// UE to satellite elevation.
    pub service_elevation_deg: f64,
    /// Gateway to satellite elevation; only used for transparent payloads.
    #[serde(default = "default_feeder")]
    pub feeder_elevation_deg: f64,
    pub payload: Payload,
}

fn default_feeder() -> f64 {
    DEFAULT_FEEDER_ELEVATION_DEG
}

impl OrbitGeometry {
    pub fn new(altitude_km: f64, service_elevation_deg: f64, payload: Payload) -> Result<Self> {
        let geom = OrbitGeometry {
            altitude_km,
            service_elevation_deg,
            feeder_elevation_deg: DEFAULT_FEEDER_ELEVATION_DEG,
            payload,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn with_feeder_elevation(mut self, feeder_elevation_deg: f64) -> Result<Self> {
        self.feeder_elevation_deg = feeder_elevation_deg;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.altitude_km > 0.0) || !self.altitude_km.is_finite() {
            return Err(Error::invalid(format!(
                "altitude must be positive, got {} km",
                self.altitude_km
            )));
        }
        check_operational("service", self.service_elevation_deg)?;
        if self.payload == Payload::Transparent {
            check_operational("feeder", self.feeder_elevation_deg)?;
        }
        Ok(())
    }

    /// UE to satellite distance in km.
    pub fn service_slant_range_km(&self) -> Result<f64> {
        slant_range_km(self.altitude_km, self.service_elevation_deg)
    }

    pub fn round_trip_time_ms(&self) -> Result<f64> {
        round_trip_time_ms(self)
    }
}

fn check_operational(which: &str, elevation: f64) -> Result<()> {
    if !(MIN_ELEVATION_DEG..=MAX_ELEVATION_DEG).contains(&elevation) {
        return Err(Error::invalid(format!(
            "{which} elevation {elevation} deg outside [{MIN_ELEVATION_DEG}, {MAX_ELEVATION_DEG}]"
        )));
    }
    Ok(())
}

/// Distance from a ground terminal to a satellite at `altitude_km`, seen at
/// `elevation_deg` above the horizon.
///
/// `d = sqrt(R² sin²ε + h² + 2hR) − R sin ε`. Equals the altitude at zenith.
pub fn slant_range_km(altitude_km: f64, elevation_deg: f64) -> Result<f64> {
    if !(altitude_km > 0.0) || !altitude_km.is_finite() {
        return Err(Error::invalid(format!(
            "altitude must be positive, got {altitude_km} km"
        )));
    }
    if !(0.0..=90.0).contains(&elevation_deg) {
        return Err(Error::invalid(format!(
            "elevation {elevation_deg} deg outside [0, 90]"
        )));
    }
    let r = EARTH_RADIUS_KM;
    let h = altitude_km;
    let sin_e = elevation_deg.to_radians().sin();
    let d = ((r * sin_e).powi(2) + h * h + 2.0 * h * r).sqrt() - r * sin_e;
    // sin(90°) is exactly 1.0, but the subtraction can still leave an ulp of noise.
    Ok(if elevation_deg == 90.0 { h } else { d.max(h) })
}

/// Round-trip time in milliseconds. Transparent payloads add the feeder leg.
pub fn round_trip_time_ms(geom: &OrbitGeometry) -> Result<f64> {
    geom.validate()?;
    let service = slant_range_km(geom.altitude_km, geom.service_elevation_deg)?;
    let one_way_km = match geom.payload {
        Payload::Regenerative => service,
        Payload::Transparent => {
            service + slant_range_km(geom.altitude_km, geom.feeder_elevation_deg)?
        }
    };
    Ok(2.0 * one_way_km / SPEED_OF_LIGHT_KM_S * 1e3)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Solves the earth-centre triangle `(R+h)² = R² + d² + 2Rd·sin ε` for `d`
    /// by bisection, independent of the closed form.
    fn law_of_cosines_range(h: f64, elevation_deg: f64) -> f64 {
        let r = EARTH_RADIUS_KM;
        let s = elevation_deg.to_radians().sin();
        let f = |d: f64| r * r + d * d + 2.0 * r * d * s - (r + h).powi(2);
        let (mut lo, mut hi) = (0.0, 50_000.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn zenith_range_is_altitude() {
        assert_eq!(slant_range_km(600.0, 90.0).unwrap(), 600.0);
    }

    #[test]
    fn closed_form_matches_triangle_oracle() {
        for (h, e, expected) in [(600.0, 10.0, 1931.6), (1200.0, 30.0, 1998.9)] {
            let got = slant_range_km(h, e).unwrap();
            let oracle = law_of_cosines_range(h, e);
            assert!(
                (got - oracle).abs() < 1e-6,
                "{h} km @ {e}: {got} vs {oracle}"
            );
            assert!((got - expected).abs() < 0.05, "{h} km @ {e}: {got}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(slant_range_km(0.0, 30.0).is_err());
        assert!(slant_range_km(-5.0, 30.0).is_err());
        assert!(slant_range_km(600.0, 91.0).is_err());
        assert!(slant_range_km(600.0, -1.0).is_err());
        assert!(OrbitGeometry::new(600.0, 5.0, Payload::Regenerative).is_err());
        let geom = OrbitGeometry::new(600.0, 30.0, Payload::Transparent).unwrap();
        assert!(geom.with_feeder_elevation(9.0).is_err());
        // feeder elevation is ignored for regenerative payloads
        let regen = OrbitGeometry {
            feeder_elevation_deg: 0.0,
            ..OrbitGeometry::new(600.0, 30.0, Payload::Regenerative).unwrap()
        };
        assert!(regen.validate().is_ok());
    }

    #[test]
    fn rtt_examples() {
        let regen = OrbitGeometry::new(600.0, 90.0, Payload::Regenerative).unwrap();
        assert!((regen.round_trip_time_ms().unwrap() - 4.0).abs() < 0.5);

        let worst = OrbitGeometry::new(600.0, 10.0, Payload::Transparent).unwrap();
        assert!((worst.round_trip_time_ms().unwrap() - 26.0).abs() < 0.5);

        let leo600 = OrbitGeometry::new(600.0, 30.0, Payload::Transparent).unwrap();
        assert!((leo600.round_trip_time_ms().unwrap() - 20.0).abs() < 0.5);
    }

    #[test]
    fn transparent_exceeds_regenerative() {
        for h in [300.0, 600.0, 1200.0, 2000.0] {
            for e in [10.0, 25.0, 45.0, 70.0, 90.0] {
                let regen = OrbitGeometry::new(h, e, Payload::Regenerative).unwrap();
                let transp = OrbitGeometry::new(h, e, Payload::Transparent).unwrap();
                assert!(transp.round_trip_time_ms().unwrap() > regen.round_trip_time_ms().unwrap());
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn range_decreases_with_elevation(h in 100.0f64..40_000.0, e1 in 0.5f64..90.0, de in 0.01f64..10.0) {
                let e2 = (e1 + de).min(90.0);
                prop_assume!(e2 > e1);
                let d1 = slant_range_km(h, e1).unwrap();
                let d2 = slant_range_km(h, e2).unwrap();
                prop_assert!(d2 < d1);
                prop_assert!(d2 >= h);
            }

            #[test]
            fn range_increases_with_altitude(h in 100.0f64..40_000.0, dh in 1.0f64..1000.0, e in 0.0f64..=90.0) {
                prop_assert!(slant_range_km(h + dh, e).unwrap() > slant_range_km(h, e).unwrap());
            }
        }
    }
}
