//! Uplink link budget: free-space path loss and operating SNR.
//!
//! All quantities are handled in the log domain. The EIRP is configured in dBm
//! and converted to dBW before the Boltzmann term is applied.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Boltzmann constant, dBW/Hz/K.
pub const BOLTZMANN_DBW_PER_HZ_K: f64 = -228.6;

const DBM_TO_DBW: f64 = -30.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkBudgetParams {
    pub eirp_dbm: f64,
    /// Satellite antenna gain to noise temperature, dB/K.
    pub g_over_t_db_k: f64,
    pub bandwidth_hz: f64,
    pub carrier_ghz: f64,
    pub loss_atm_db: f64,
    pub loss_shadow_db: f64,
    pub loss_scint_db: f64,
    pub loss_polar_db: f64,
}

impl Default for LinkBudgetParams {
    /// Single-PRB IoT uplink at 2 GHz: 23 dBm UE, G/T of -4.9 dB/K, 180 kHz.
    fn default() -> Self {
        LinkBudgetParams {
            eirp_dbm: 23.0,
            g_over_t_db_k: -4.9,
            bandwidth_hz: 180e3,
            carrier_ghz: 2.0,
            loss_atm_db: 0.07,
            loss_shadow_db: 3.0,
            loss_scint_db: 2.2,
            loss_polar_db: 0.0,
        }
    }
}

impl LinkBudgetParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::invalid("bandwidth must be positive"));
        }
        if !(self.carrier_ghz > 0.0) {
            return Err(Error::invalid("carrier frequency must be positive"));
        }
        let losses = [
            ("atmospheric", self.loss_atm_db),
            ("shadow", self.loss_shadow_db),
            ("scintillation", self.loss_scint_db),
            ("polarization", self.loss_polar_db),
        ];
        for (name, loss) in losses {
            if !(loss >= 0.0) {
                return Err(Error::invalid(format!(
                    "{name} loss must be >= 0 dB, got {loss}"
                )));
            }
        }
        Ok(())
    }

    fn total_extra_loss_db(&self) -> f64 {
        self.loss_atm_db + self.loss_shadow_db + self.loss_scint_db + self.loss_polar_db
    }
}

/// Free-space path loss in dB for a carrier in GHz and a distance in metres.
pub fn fspl_db(carrier_ghz: f64, distance_m: f64) -> Result<f64> {
    if !(carrier_ghz > 0.0) || !(distance_m > 0.0) {
        return Err(Error::invalid(format!(
            "path loss needs positive carrier and distance, got {carrier_ghz} GHz, {distance_m} m"
        )));
    }
    Ok(10.0 * (3.245 + carrier_ghz.powi(2).log10() + distance_m.powi(2).log10()))
}

/// Uplink SNR in dB at `distance_m`.
pub fn snr_db(params: &LinkBudgetParams, distance_m: f64) -> Result<f64> {
    params.validate()?;
    let path_loss = fspl_db(params.carrier_ghz, distance_m)?;
    let eirp_dbw = params.eirp_dbm + DBM_TO_DBW;
    Ok(eirp_dbw + params.g_over_t_db_k
        - BOLTZMANN_DBW_PER_HZ_K
        - path_loss
        - params.total_extra_loss_db()
        - 10.0 * params.bandwidth_hz.log10())
}
