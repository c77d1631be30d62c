//! Device parameters: couplings, detunings, coherence times, readout
//! fidelities, and the human-editable key-value configuration document that
//! carries them.
//!
//! Angular-frequency config keys carry the conventional `/2pi` values with the
//! unit in the key name (`g1_mhz = 19.2` means g1 = 2pi x 19.2 MHz); times
//! carry their unit the same way (`t1_q1_us`, `rotation_ns`).

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{DeviceError, Result};
use crate::tomography::ReadoutMatrix;
use ramsey_core::HilbertLayout;

pub const CONFIG_SCHEMA_VERSION: u64 = 1;

/// Coherence and readout figures for one qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitParams {
    /// Energy relaxation time, seconds.
    pub t1: f64,
    /// Dephasing time entering the off-diagonal decay law
    /// exp(-t/2T1 - t/T2*), seconds.
    pub t2_star: f64,
    /// P(read 0 | prepared 0).
    pub f0: f64,
    /// P(read 1 | prepared 1).
    pub f1: f64,
    /// P(read 0 | prepared 1); defaults to 1 - f1.
    pub e01: f64,
    /// P(read 1 | prepared 0); defaults to 1 - f0.
    pub e10: f64,
}

impl QubitParams {
    pub fn new(t1: f64, t2_star: f64, f0: f64, f1: f64) -> Self {
        Self { t1, t2_star, f0, f1, e01: 1.0 - f1, e10: 1.0 - f0 }
    }

    /// Binary readout confusion matrix, column k = prepared state k.
    pub fn readout_matrix(&self) -> Result<ReadoutMatrix> {
        ReadoutMatrix::new(2, vec![self.f0, self.e01, self.e10, self.f1])
    }

    /// Rate entering the number-operator dissipator so the off-diagonal
    /// decays exactly as exp(-t/2T1 - t/T2*).
    pub fn dephasing_rate(&self) -> f64 {
        2.0 / self.t2_star
    }
}

/// Full device description. Defaults reproduce the reference parameter
/// table; `main_text_coherence` switches to the alternative dephasing times
/// quoted alongside it.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceParams {
    /// Base coupling of the interfering qubit's upper transition to the
    /// resonator, rad/s. The ladder Hamiltonian carries sqrt(2) * g1.
    pub g1: f64,
    /// Ancilla-resonator coupling, rad/s.
    pub g2: f64,
    /// Resonator frequency, rad/s (only the lab-frame bookkeeping sees it).
    pub omega_r: f64,
    /// Default detuning of the conditional coupling, rad/s; sweeps override
    /// it per point.
    pub delta: f64,
    pub q1: QubitParams,
    pub q2: QubitParams,
    /// Resonator relaxation time, seconds.
    pub t_r: f64,
    /// Resonator truncation: photon numbers 0..=n_max.
    pub n_max: usize,
    /// Length of one microwave rotation pulse, seconds; with noise enabled a
    /// rotation contributes this much idle decoherence.
    pub rotation_duration: f64,
    /// Fixed integrator step, seconds.
    pub dt: f64,
}

const US: f64 = 1e-6;
const NS: f64 = 1e-9;

impl Default for DeviceParams {
    fn default() -> Self {
        Self::table_defaults()
    }
}

impl DeviceParams {
    /// Reference parameter set (coherence times from the device table:
    /// T2* = 3.0 us / 2.4 us).
    pub fn table_defaults() -> Self {
        Self {
            g1: 2.0 * PI * 19.2e6,
            g2: 2.0 * PI * 19.9e6,
            omega_r: 2.0 * PI * 5.582e9,
            delta: 0.0,
            q1: QubitParams::new(17.1 * US, 3.0 * US, 0.9930, 0.8917),
            q2: QubitParams::new(23.4 * US, 2.4 * US, 0.9803, 0.9073),
            t_r: 10.0 * US,
            n_max: 2,
            rotation_duration: 40.0 * NS,
            dt: 0.01 * NS,
        }
    }

    /// Same device with the alternative dephasing times (T2* = 3.6 us /
    /// 2.7 us).
    pub fn main_text_coherence() -> Self {
        let mut p = Self::table_defaults();
        p.q1.t2_star = 3.6 * US;
        p.q2.t2_star = 2.7 * US;
        p
    }

    /// Subsystem layout: interfering qubit (3 levels) x ancilla (2) x
    /// resonator (n_max + 1).
    pub fn layout(&self) -> HilbertLayout {
        HilbertLayout::new(vec![3, 2, self.n_max + 1]).expect("static layout")
    }

    /// Resonant ancilla-resonator swap duration pi / (2 g2).
    pub fn swap_duration(&self) -> f64 {
        PI / (2.0 * self.g2)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("g1", self.g1),
            ("g2", self.g2),
            ("t_r", self.t_r),
            ("rotation_duration", self.rotation_duration),
            ("dt", self.dt),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(DeviceError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.delta < 0.0 || !self.delta.is_finite() {
            return Err(DeviceError::Config(format!(
                "delta must be >= 0 (conditional phases in (0, pi]), got {}",
                self.delta
            )));
        }
        if self.n_max < 1 {
            return Err(DeviceError::Config("n_max must be at least 1".into()));
        }
        for (label, q) in [("q1", &self.q1), ("q2", &self.q2)] {
            if q.t1 <= 0.0 || q.t2_star <= 0.0 || !q.t1.is_finite() || !q.t2_star.is_finite() {
                return Err(DeviceError::Config(format!("{label}: coherence times must be positive")));
            }
            // Pure-dephasing relation 1/T_phi = 1/T2* - 1/(2 T1) must stay
            // positive, i.e. T2* < 2 T1.
            if 1.0 / q.t2_star - 1.0 / (2.0 * q.t1) <= 0.0 {
                return Err(DeviceError::Config(format!(
                    "{label}: T2* = {} exceeds the 2*T1 = {} dephasing bound",
                    q.t2_star,
                    2.0 * q.t1
                )));
            }
            for (fname, f) in [("f0", q.f0), ("f1", q.f1), ("e01", q.e01), ("e10", q.e10)] {
                if !(0.0..=1.0).contains(&f) {
                    return Err(DeviceError::Config(format!(
                        "{label}.{fname} = {f} is not a probability"
                    )));
                }
            }
            q.readout_matrix()?;
        }
        Ok(())
    }

    /// Parses the key-value configuration document. Unknown keys are
    /// rejected; omitted keys keep their defaults.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut params = Self::table_defaults();
        let mut entries: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                DeviceError::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim().to_string();
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(DeviceError::Config(format!("duplicate key `{key}`")));
            }
        }

        let schema = entries.remove("schema_version").ok_or_else(|| {
            DeviceError::Config("missing required key `schema_version`".into())
        })?;
        let schema: u64 = schema
            .parse()
            .map_err(|_| DeviceError::Config(format!("bad schema_version `{schema}`")))?;
        if schema != CONFIG_SCHEMA_VERSION {
            return Err(DeviceError::Config(format!(
                "unsupported schema_version {schema}, expected {CONFIG_SCHEMA_VERSION}"
            )));
        }

        let mut take = |key: &str| entries.remove(key);
        let parse_f64 = |key: &str, value: String| -> Result<f64> {
            value
                .parse::<f64>()
                .map_err(|_| DeviceError::Config(format!("key `{key}`: bad number `{value}`")))
        };

        if let Some(v) = take("g1_mhz") {
            params.g1 = 2.0 * PI * 1e6 * parse_f64("g1_mhz", v)?;
        }
        if let Some(v) = take("g2_mhz") {
            params.g2 = 2.0 * PI * 1e6 * parse_f64("g2_mhz", v)?;
        }
        if let Some(v) = take("omega_r_ghz") {
            params.omega_r = 2.0 * PI * 1e9 * parse_f64("omega_r_ghz", v)?;
        }
        if let Some(v) = take("delta_mhz") {
            params.delta = 2.0 * PI * 1e6 * parse_f64("delta_mhz", v)?;
        }
        if let Some(v) = take("t1_q1_us") {
            params.q1.t1 = US * parse_f64("t1_q1_us", v)?;
        }
        if let Some(v) = take("t2star_q1_us") {
            params.q1.t2_star = US * parse_f64("t2star_q1_us", v)?;
        }
        if let Some(v) = take("t1_q2_us") {
            params.q2.t1 = US * parse_f64("t1_q2_us", v)?;
        }
        if let Some(v) = take("t2star_q2_us") {
            params.q2.t2_star = US * parse_f64("t2star_q2_us", v)?;
        }
        if let Some(v) = take("t_r_us") {
            params.t_r = US * parse_f64("t_r_us", v)?;
        }
        if let Some(v) = take("n_max") {
            params.n_max = v
                .parse::<usize>()
                .map_err(|_| DeviceError::Config(format!("key `n_max`: bad integer `{v}`")))?;
        }
        if let Some(v) = take("rotation_ns") {
            params.rotation_duration = NS * parse_f64("rotation_ns", v)?;
        }
        if let Some(v) = take("dt_ns") {
            params.dt = NS * parse_f64("dt_ns", v)?;
        }
        for (key, field) in [
            ("f0_q1", 0usize),
            ("f1_q1", 1),
            ("e01_q1", 2),
            ("e10_q1", 3),
            ("f0_q2", 4),
            ("f1_q2", 5),
            ("e01_q2", 6),
            ("e10_q2", 7),
        ] {
            if let Some(v) = take(key) {
                let value = parse_f64(key, v)?;
                let q = if field < 4 { &mut params.q1 } else { &mut params.q2 };
                match field % 4 {
                    0 => {
                        q.f0 = value;
                        q.e10 = 1.0 - value;
                    }
                    1 => {
                        q.f1 = value;
                        q.e01 = 1.0 - value;
                    }
                    2 => q.e01 = value,
                    _ => q.e10 = value,
                }
            }
        }

        if let Some(unknown) = entries.keys().next() {
            return Err(DeviceError::Config(format!("unknown key `{unknown}`")));
        }
        params.validate()?;
        Ok(params)
    }

    /// Renders the full configuration document for this parameter set.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("schema_version = {CONFIG_SCHEMA_VERSION}\n"));
        s.push_str(&format!("g1_mhz = {}\n", self.g1 / (2.0 * PI * 1e6)));
        s.push_str(&format!("g2_mhz = {}\n", self.g2 / (2.0 * PI * 1e6)));
        s.push_str(&format!("omega_r_ghz = {}\n", self.omega_r / (2.0 * PI * 1e9)));
        s.push_str(&format!("delta_mhz = {}\n", self.delta / (2.0 * PI * 1e6)));
        s.push_str(&format!("t1_q1_us = {}\n", self.q1.t1 / US));
        s.push_str(&format!("t2star_q1_us = {}\n", self.q1.t2_star / US));
        s.push_str(&format!("t1_q2_us = {}\n", self.q2.t1 / US));
        s.push_str(&format!("t2star_q2_us = {}\n", self.q2.t2_star / US));
        s.push_str(&format!("t_r_us = {}\n", self.t_r / US));
        s.push_str(&format!("n_max = {}\n", self.n_max));
        s.push_str(&format!("f0_q1 = {}\n", self.q1.f0));
        s.push_str(&format!("f1_q1 = {}\n", self.q1.f1));
        s.push_str(&format!("f0_q2 = {}\n", self.q2.f0));
        s.push_str(&format!("f1_q2 = {}\n", self.q2.f1));
        s.push_str(&format!("rotation_ns = {}\n", self.rotation_duration / NS));
        s.push_str(&format!("dt_ns = {}\n", self.dt / NS));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        DeviceParams::table_defaults().validate().unwrap();
        DeviceParams::main_text_coherence().validate().unwrap();
    }

    #[test]
    fn swap_duration_matches_quarter_period() {
        let p = DeviceParams::table_defaults();
        assert!((p.swap_duration() - 12.563e-9).abs() < 5e-12);
    }

    #[test]
    fn config_roundtrip_preserves_params() {
        let p = DeviceParams::main_text_coherence();
        let parsed = DeviceParams::from_config_str(&p.to_config_string()).unwrap();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(1.0);
        assert!(close(p.g1, parsed.g1));
        assert!(close(p.g2, parsed.g2));
        assert!(close(p.omega_r, parsed.omega_r));
        assert!(close(p.q1.t1, parsed.q1.t1));
        assert!(close(p.q1.t2_star, parsed.q1.t2_star));
        assert!(close(p.q2.t2_star, parsed.q2.t2_star));
        assert!(close(p.t_r, parsed.t_r));
        assert!(close(p.dt, parsed.dt));
        assert_eq!(p.n_max, parsed.n_max);
        assert_eq!(p.q1.f0, parsed.q1.f0);
        assert_eq!(p.q2.f1, parsed.q2.f1);
    }

    #[test]
    fn config_rejects_unknown_key() {
        let text = "schema_version = 1\nbogus_key = 3\n";
        assert!(matches!(
            DeviceParams::from_config_str(text),
            Err(DeviceError::Config(_))
        ));
    }

    #[test]
    fn config_requires_schema_version() {
        assert!(DeviceParams::from_config_str("g1_mhz = 19.2\n").is_err());
    }

    #[test]
    fn config_accepts_comments_and_overrides() {
        let text = "# device overrides\nschema_version = 1\nt2star_q1_us = 3.6 # alternative preset\n";
        let p = DeviceParams::from_config_str(text).unwrap();
        assert!((p.q1.t2_star - 3.6e-6).abs() < 1e-18);
        assert_eq!(p.q2, DeviceParams::table_defaults().q2);
    }

    #[test]
    fn dephasing_bound_is_enforced() {
        let text = "schema_version = 1\nt2star_q1_us = 40.0\n";
        assert!(DeviceParams::from_config_str(text).is_err());
    }
}
