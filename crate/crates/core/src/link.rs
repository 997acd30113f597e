//! RF link budget, free-space path loss, Shannon rates and transfer latencies.
//!
//! Powers are configured in dBm and gains in dBi. Linear SNRs use watts, so a
//! dB sum `P(dBm) + G_k + G_GS − L − 10·log10(K_B·T·B)` carries the −30 dB
//! dBm→dBW shift.

use crate::error::{Error, Result};
use crate::scalar::{from_db, to_db, Scalar};

/// How link rates are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMode {
    /// A flat configured rate for every ground link.
    Fixed,
    /// `B·log2(1 + SNR)` from the link budget.
    Shannon,
}

/// RF parameters of the satellite/ground-station and inter-satellite links.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget<T> {
    /// Satellite transmit power (dBm).
    pub tx_power_sat: T,
    /// Ground station transmit power (dBm).
    pub tx_power_gs: T,
    /// Satellite antenna gain (dBi).
    pub gain_sat: T,
    /// Ground station antenna gain (dBi).
    pub gain_gs: T,
    /// Carrier frequency (Hz).
    pub carrier_freq: T,
    /// Receiver noise temperature (K).
    pub noise_temp: T,
    /// Total ground-link bandwidth `B` (Hz).
    pub total_bandwidth: T,
    /// Number of resource blocks `N`; each block has `B/N` Hz.
    pub num_resource_blocks: usize,
    /// Bandwidth of one ISL hop (Hz).
    pub isl_bandwidth: T,
    /// ISL spectral efficiency (bit/s/Hz).
    pub isl_spectral_efficiency: T,
    /// Flat ground-link rate used in [`RateMode::Fixed`] (bit/s).
    pub fixed_rate: Option<T>,
    pub boltzmann: T,
    pub light_speed: T,
}

impl<T: Scalar> Default for LinkBudget<T> {
    fn default() -> Self {
        Self {
            tx_power_sat: T::lit(40.0),
            tx_power_gs: T::lit(40.0),
            gain_sat: T::lit(6.98),
            gain_gs: T::lit(6.98),
            carrier_freq: T::lit(2.4e9),
            noise_temp: T::lit(354.81),
            total_bandwidth: T::lit(1e6),
            num_resource_blocks: 1,
            isl_bandwidth: T::lit(16e6),
            isl_spectral_efficiency: T::one(),
            fixed_rate: Some(T::lit(16e6)),
            boltzmann: T::lit(1.380649e-23),
            light_speed: T::lit(299_792_458.0),
        }
    }
}

impl<T: Scalar> LinkBudget<T> {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("tx_power_sat", self.tx_power_sat),
            ("tx_power_gs", self.tx_power_gs),
            ("gain_sat", self.gain_sat),
            ("gain_gs", self.gain_gs),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::Invalid(format!("{name} must be finite")));
            }
        }
        let positive = [
            ("carrier_freq", self.carrier_freq),
            ("noise_temp", self.noise_temp),
            ("total_bandwidth", self.total_bandwidth),
            ("isl_bandwidth", self.isl_bandwidth),
            ("isl_spectral_efficiency", self.isl_spectral_efficiency),
            ("boltzmann", self.boltzmann),
            ("light_speed", self.light_speed),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::Invalid(format!("{name} must be > 0")));
            }
        }
        if self.num_resource_blocks == 0 {
            return Err(Error::Invalid("num_resource_blocks N must be >= 1".into()));
        }
        if let Some(r) = self.fixed_rate {
            if !(r.is_finite() && r > T::zero()) {
                return Err(Error::Invalid("fixed_rate must be > 0".into()));
            }
        }
        Ok(())
    }

    /// Resource-block bandwidth `B^D = B/N`.
    pub fn rb_bandwidth(&self) -> T {
        self.total_bandwidth / T::count(self.num_resource_blocks)
    }

    /// Thermal noise power `K_B·T·B` in watts.
    pub fn noise_power(&self, bandwidth: T) -> T {
        self.boltzmann * self.noise_temp * bandwidth
    }

    /// ISL rate `B^h·β_h` (bit/s).
    pub fn isl_rate(&self) -> T {
        self.isl_bandwidth * self.isl_spectral_efficiency
    }

    pub fn rate_mode(&self) -> RateMode {
        if self.fixed_rate.is_some() {
            RateMode::Fixed
        } else {
            RateMode::Shannon
        }
    }
}

/// Serialized model size: `z` bits per sample times `|N|` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayloadSpec {
    pub sample_bits: u64,
    pub num_samples: u64,
}

impl PayloadSpec {
    /// A payload of exactly `bits` bits.
    pub fn from_bits(bits: u64) -> Self {
        Self {
            sample_bits: 1,
            num_samples: bits,
        }
    }

    pub fn bits(&self) -> u64 {
        self.sample_bits * self.num_samples
    }

    pub fn validate(&self) -> Result<()> {
        if self.bits() == 0 {
            return Err(Error::Invalid("payload size z*|N| must be > 0".into()));
        }
        Ok(())
    }
}

impl Default for PayloadSpec {
    /// One megabyte.
    fn default() -> Self {
        Self {
            sample_bits: 8,
            num_samples: 1_000_000,
        }
    }
}

/// Free-space path loss `(4π·d·f/c)²` as a linear ratio.
pub fn free_space_path_loss<T: Scalar>(distance: T, freq: T, light_speed: T) -> Result<T> {
    if !(distance > T::zero()) {
        return Err(Error::domain(format!("distance must be > 0, got {distance}")));
    }
    if !(freq > T::zero()) {
        return Err(Error::domain(format!("frequency must be > 0, got {freq}")));
    }
    let x = T::lit(4.0) * T::PI() * distance * freq / light_speed;
    Ok(x * x)
}

/// Free-space path loss in dB.
pub fn free_space_path_loss_db<T: Scalar>(distance: T, freq: T, light_speed: T) -> Result<T> {
    free_space_path_loss(distance, freq, light_speed).map(to_db)
}

/// Linear SNR of the symmetric AWGN channel over the full band `B`,
/// with both ends transmitting at the satellite power.
pub fn snr_symmetric<T: Scalar>(budget: &LinkBudget<T>, distance: T) -> Result<T> {
    let loss = free_space_path_loss(distance, budget.carrier_freq, budget.light_speed)?;
    let p_watt = from_db(budget.tx_power_sat) / T::lit(1000.0);
    let gains = from_db(budget.gain_sat + budget.gain_gs);
    Ok(p_watt * gains / (budget.noise_power(budget.total_bandwidth) * loss))
}

fn snr_db<T: Scalar>(budget: &LinkBudget<T>, power_dbm: T, bandwidth: T, distance: T) -> Result<T> {
    let loss_db = free_space_path_loss_db(distance, budget.carrier_freq, budget.light_speed)?;
    Ok(power_dbm - T::lit(30.0) + budget.gain_sat + budget.gain_gs
        - loss_db
        - to_db(budget.noise_power(bandwidth)))
}

/// Ground-station broadcast SNR (dB): GS power over the full band `B`.
pub fn snr_uplink_db<T: Scalar>(budget: &LinkBudget<T>, distance: T) -> Result<T> {
    snr_db(budget, budget.tx_power_gs, budget.total_bandwidth, distance)
}

/// Sink upload SNR (dB): satellite power over one resource block `B^D`.
pub fn snr_downlink_db<T: Scalar>(budget: &LinkBudget<T>, distance: T) -> Result<T> {
    snr_db(budget, budget.tx_power_sat, budget.rb_bandwidth(), distance)
}

/// Shannon capacity `B·log2(1 + snr)` (bit/s).
pub fn shannon_rate<T: Scalar>(bandwidth: T, snr: T) -> Result<T> {
    if snr < T::zero() || snr.is_nan() {
        return Err(Error::domain(format!("snr must be >= 0, got {snr}")));
    }
    Ok(bandwidth * (T::one() + snr).log2())
}

/// Transmission plus propagation time `z·|N|/R + d/c`.
pub fn comm_time<T: Scalar>(payload: &PayloadSpec, rate: T, distance: T, light_speed: T) -> Result<T> {
    if !(rate > T::zero()) {
        return Err(Error::domain(format!("rate must be > 0, got {rate}")));
    }
    let bits = T::from_u64(payload.bits()).expect("payload bits representable");
    Ok(bits / rate + distance / light_speed)
}

/// Latency of the GS broadcasting the global model to a satellite.
pub fn uplink_latency<T: Scalar>(budget: &LinkBudget<T>, payload: &PayloadSpec, distance: T) -> Result<T> {
    let rate = match budget.fixed_rate {
        Some(r) => r,
        None => shannon_rate(budget.total_bandwidth, from_db(snr_uplink_db(budget, distance)?))?,
    };
    comm_time(payload, rate, distance, budget.light_speed)
}

/// Latency of a satellite uploading a model to the GS on one resource block.
pub fn downlink_latency<T: Scalar>(budget: &LinkBudget<T>, payload: &PayloadSpec, distance: T) -> Result<T> {
    let rate = match budget.fixed_rate {
        Some(r) => r,
        None => shannon_rate(budget.rb_bandwidth(), from_db(snr_downlink_db(budget, distance)?))?,
    };
    comm_time(payload, rate, distance, budget.light_speed)
}

/// Time to push one model across a single intra-plane hop.
pub fn isl_hop_time<T: Scalar>(payload: &PayloadSpec, budget: &LinkBudget<T>) -> Result<T> {
    let rate = budget.isl_rate();
    if !(rate > T::zero()) {
        return Err(Error::domain("ISL rate B^h*beta_h must be > 0"));
    }
    Ok(T::from_u64(payload.bits()).expect("payload bits representable") / rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const C: f64 = 299_792_458.0;

    fn shannon_budget(n: usize) -> LinkBudget<f64> {
        LinkBudget {
            num_resource_blocks: n,
            fixed_rate: None,
            ..LinkBudget::default()
        }
    }

    #[test]
    fn fspl_values() {
        // 20*log10(4*pi*d*f/c) evaluated by hand: 160.05 dB and 163.57 dB.
        let a = free_space_path_loss_db(1e6, 2.4e9, C).unwrap();
        assert!((a - 160.05).abs() < 0.01, "{a}");
        let b = free_space_path_loss_db(1.5e6, 2.4e9, C).unwrap();
        assert!((b - 163.57).abs() < 0.01, "{b}");
        let c = free_space_path_loss_db(2e6, 2.4e9, C).unwrap();
        assert!((c - a - 20.0 * 2f64.log10()).abs() < 1e-9);
        assert!(matches!(free_space_path_loss(0.0, 2.4e9, C), Err(Error::Domain(_))));
    }

    #[test]
    fn table_i_snr_near_3_5_db() {
        let b = shannon_budget(5);
        let snr = to_db(snr_symmetric(&b, 1.5e6).unwrap());
        // 40 - 30 + 13.96 - 163.57 + 143.1
        assert!((snr - 3.5).abs() < 0.05, "{snr}");
        let down = snr_downlink_db(&b, 1.5e6).unwrap();
        assert!((down - (snr + 10.0 * 5f64.log10())).abs() < 1e-9);
        assert!((down - 10.5).abs() < 0.05, "{down}");
    }

    #[test]
    fn halving_path_loss_doubles_snr() {
        let b = shannon_budget(1);
        let near = snr_symmetric(&b, 1e6).unwrap();
        let far = snr_symmetric(&b, 2f64.sqrt() * 1e6).unwrap();
        assert!((near / far - 2.0).abs() < 1e-12);
    }

    #[test]
    fn snr_is_symmetric_in_direction() {
        let mut b = shannon_budget(1);
        let fwd = snr_symmetric(&b, 1.2e6).unwrap();
        std::mem::swap(&mut b.gain_sat, &mut b.gain_gs);
        assert_eq!(fwd, snr_symmetric(&b, 1.2e6).unwrap());
    }

    #[test]
    fn linear_and_db_forms_agree() {
        let b = shannon_budget(1);
        for d in [5e5, 1e6, 3e6] {
            let lin = to_db(snr_symmetric(&b, d).unwrap());
            assert!((lin - snr_uplink_db(&b, d).unwrap()).abs() < 1e-9);
            assert!((lin - snr_downlink_db(&b, d).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn shannon_cases() {
        assert_eq!(shannon_rate(1e6, 0.0).unwrap(), 0.0);
        assert_eq!(shannon_rate(1e6, 1.0).unwrap(), 1e6);
        let r = shannon_rate(20e6_f64, 31.62).unwrap();
        assert!((r - 100.6e6).abs() < 0.1e6, "{r}");
        assert!(matches!(shannon_rate(1e6, -0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn comm_time_cases() {
        let p = PayloadSpec::from_bits(8_000_000);
        let t = comm_time(&p, 16e6, 1.5e6, C).unwrap();
        assert!((t - (0.5 + 1.5e6 / C)).abs() < 1e-12);
        assert!((t - 0.505).abs() < 1e-4);
        let zero = PayloadSpec::from_bits(0);
        assert_eq!(comm_time(&zero, 16e6, 1.5e6, C).unwrap(), 1.5e6 / C);
        let double = PayloadSpec::from_bits(16_000_000);
        let t2 = comm_time(&double, 16e6, 1.5e6, C).unwrap();
        assert!((t2 - t - 0.5).abs() < 1e-12);
        assert!(matches!(comm_time(&p, 0.0, 1.0, C), Err(Error::Domain(_))));
    }

    #[test]
    fn fixed_rate_latencies() {
        let b = LinkBudget::<f64>::default();
        let p = PayloadSpec::default();
        let up = uplink_latency(&b, &p, 1.5e6).unwrap();
        let down = downlink_latency(&b, &p, 1.5e6).unwrap();
        assert!((up - 0.505).abs() < 1e-4);
        assert_eq!(up, down);
    }

    #[test]
    fn shannon_latencies() {
        let p = PayloadSpec::default();
        let one = shannon_budget(1);
        let up = uplink_latency(&one, &p, 1.5e6).unwrap();
        let down = downlink_latency(&one, &p, 1.5e6).unwrap();
        assert!((up - down).abs() < 1e-9 * up);
        let mut prev = 0.0;
        for n in [1, 2, 4, 8] {
            let t = downlink_latency(&shannon_budget(n), &p, 1.5e6).unwrap();
            assert!(t > prev, "N={n}: {t} <= {prev}");
            prev = t;
        }
    }

    #[test]
    fn isl_hops() {
        let b = LinkBudget::<f64>::default();
        assert_eq!(isl_hop_time(&PayloadSpec::from_bits(8_000_000), &b).unwrap(), 0.5);
        assert_eq!(isl_hop_time(&PayloadSpec::from_bits(0), &b).unwrap(), 0.0);
        let zero = LinkBudget { isl_spectral_efficiency: 0.0, ..b };
        assert!(isl_hop_time(&PayloadSpec::default(), &zero).is_err());
    }

    proptest! {
        #[test]
        fn latency_monotone_and_additive(
            bits_a in 0u64..50_000_000,
            bits_b in 0u64..50_000_000,
            d1 in 1e5f64..3e6,
            extra in 0f64..1e6,
        ) {
            let b = shannon_budget(4);
            let pa = PayloadSpec::from_bits(bits_a);
            let pab = PayloadSpec::from_bits(bits_a + bits_b);
            let la = downlink_latency(&b, &pa, d1).unwrap();
            prop_assert!(la > 0.0);
            prop_assert!(downlink_latency(&b, &pab, d1).unwrap() >= la);
            prop_assert!(downlink_latency(&b, &pa, d1 + extra).unwrap() >= la);

            let rate = 16e6;
            let ta = comm_time(&pa, rate, d1, C).unwrap();
            let tb = comm_time(&PayloadSpec::from_bits(bits_b), rate, d1, C).unwrap();
            let tab = comm_time(&pab, rate, d1, C).unwrap();
            prop_assert!((tab - (ta + tb - d1 / C)).abs() < 1e-9);
        }
    }
}
