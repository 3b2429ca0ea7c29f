use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("unknown override key {0:?}")]
    UnknownKey(String),
    #[error("inconsistent override: {0}")]
    InconsistentOverride(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// The literal constants of the parameter table. Desk-scale runs scale
/// them down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub k: f64,
    pub b: f64,
    pub phi: f64,
    pub c: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            k: 21.0,
            b: 36.0,
            phi: 216.0,
            c: 324.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub n: usize,
    pub epsilon: f64,
    pub k: usize,
    pub h_sep: usize,
    pub h_diam: usize,
    pub h: usize,
    pub s: f64,
    pub phi: f64,
    pub kappa: f64,
    pub c: f64,
    pub c_prime: f64,
    /// Fixed `k'`; when absent it is derived every iteration as
    /// `324²·load·w·k` with the active constant.
    pub k_prime: Option<u64>,
    pub t: usize,
    pub b_max: usize,
    pub constants: Constants,
    pub overrides: BTreeMap<String, f64>,
    pub load_max: usize,
    pub samples: usize,
    pub adversarial: usize,
    /// Fraction of each batch's edges removed after the player answers.
    pub removal: f64,
    pub certify_samples: usize,
    pub seed: u64,
}

const KEYS: &[&str] = &[
    "21",
    "36",
    "216",
    "324",
    "k",
    "h_sep",
    "h_diam",
    "h",
    "s",
    "kappa",
    "phi",
    "b_max",
    "t",
    "c",
    "c_prime",
    "k_prime",
    "load_max",
    "samples",
    "adversarial",
    "removal",
    "certify_samples",
];

fn ceil_int(x: f64) -> usize {
    (x - 1e-9).ceil().max(0.0) as usize
}

impl GameConfig {
    /// `k'` for a cover of width `w` and load `load`.
    pub fn k_prime_for(&self, load: usize, w: usize) -> u64 {
        self.k_prime.unwrap_or_else(|| {
            let kc = self.constants.c.round() as u64;
            kc.saturating_mul(kc)
                .saturating_mul(load as u64)
                .saturating_mul(w as u64)
                .saturating_mul(self.k as u64)
        })
    }

    /// Re-checks the invariant chain.
    pub fn check(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::InconsistentOverride(m));
        if self.k < 2 {
            return bad(format!("k = {} < 2", self.k));
        }
        if self.h_sep < 2 * self.b_max {
            return bad(format!("h_sep = {} < 2·b_max = {}", self.h_sep, 2 * self.b_max));
        }
        if self.h_sep < 1 || self.h_diam < self.h_sep {
            return bad(format!("need h_diam >= h_sep >= 1, got {} and {}", self.h_diam, self.h_sep));
        }
        if self.h < self.h_diam {
            return bad(format!("h = {} < h_diam = {}", self.h, self.h_diam));
        }
        if !(self.s >= 1.0) || !(self.kappa >= 1.0) {
            return bad("s and kappa must be at least 1".into());
        }
        if (self.t as f64) < self.h as f64 * self.s + 2.0 - 1e-9 {
            return bad(format!("t = {} < h·s + 2", self.t));
        }
        if !(self.phi > 0.0) {
            return bad("phi must be positive".into());
        }
        if !self.overrides.contains_key("216") {
            let cap = self.k as f64 / (self.constants.phi * self.h as f64 * self.s * self.kappa);
            if self.phi > cap * (1.0 + 1e-12) {
                return bad(format!("phi = {} exceeds k/(216·h·s·κ) = {cap}", self.phi));
            }
        }
        if !(self.c > 0.0 && self.c < 1.0 && self.c_prime > 0.0 && self.c_prime < 1.0) {
            return bad("c and c' must lie in (0, 1)".into());
        }
        if !(0.0..1.0).contains(&self.removal) {
            return bad("removal fraction must lie in [0, 1)".into());
        }
        if self.load_max == 0 {
            return bad("load_max must be positive".into());
        }
        Ok(())
    }
}

/// Fills every parameter from `n`, `ε` and the overrides. Returns the config
/// and any warnings.
pub fn derive_config(
    n: usize,
    epsilon: f64,
    overrides: &BTreeMap<String, f64>,
    seed: u64,
) -> Result<(GameConfig, Vec<String>), ConfigError> {
    if n < 1 {
        return Err(ConfigError::InvalidInput("n must be positive".into()));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(ConfigError::InvalidInput("epsilon must lie in (0, 1]".into()));
    }
    for key in overrides.keys() {
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey(key.clone()));
        }
    }
    let get = |key: &str| overrides.get(key).copied();
    let mut warnings = Vec::new();
    if n >= 3 {
        let ln = (n as f64).ln();
        let floor = ln.ln() / ln;
        if epsilon < floor {
            warnings.push(format!(
                "epsilon = {epsilon} is below ln ln n / ln n = {floor:.4}"
            ));
        }
    }
    let constants = Constants {
        k: get("21").unwrap_or(21.0),
        b: get("36").unwrap_or(36.0),
        phi: get("216").unwrap_or(216.0),
        c: get("324").unwrap_or(324.0),
    };
    let int = |key: &str, default: usize| get(key).map_or(default, |x| x.round().max(0.0) as usize);

    let k = int("k", ceil_int(constants.k * (n as f64).powf(epsilon)));
    let b_max = int("b_max", ceil_int(constants.b / epsilon));
    let h_sep = int("h_sep", 2 * b_max);
    let h_diam = int("h_diam", ceil_int(h_sep as f64 / (epsilon * epsilon)));
    let h = int("h", h_diam);
    let s = get("s").unwrap_or(1.0 / epsilon);
    let kappa = get("kappa").unwrap_or(1.0);
    let phi = get("phi").unwrap_or_else(|| (k as f64 / (constants.phi * h as f64 * s * kappa)).min(1.0));
    let t = int("t", ceil_int(h as f64 * s) + 2);
    let cfg = GameConfig {
        n,
        epsilon,
        k,
        h_sep,
        h_diam,
        h,
        s,
        phi,
        kappa,
        c: get("c").unwrap_or(1.0 / constants.c),
        c_prime: get("c_prime").unwrap_or(0.5),
        k_prime: get("k_prime").map(|x| x.round().max(1.0) as u64),
        t,
        b_max,
        constants,
        overrides: overrides.clone(),
        load_max: int("load_max", n.max(1)),
        samples: int("samples", 32),
        adversarial: int("adversarial", 8),
        removal: get("removal").unwrap_or(0.0),
        certify_samples: int("certify_samples", 16),
        seed,
    };
    cfg.check()?;
    Ok((cfg, warnings))
}

/// Parses `KEY=VALUE` pairs.
pub fn parse_overrides<'a, I: IntoIterator<Item = &'a str>>(
    items: I,
) -> Result<BTreeMap<String, f64>, ConfigError> {
    let mut out = BTreeMap::new();
    for item in items {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| ConfigError::InvalidInput(format!("expected KEY=VALUE, got {item:?}")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| ConfigError::InvalidInput(format!("bad value in {item:?}")))?;
        out.insert(key.trim().to_string(), value);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    #[test]
    fn default_constants() {
        let (cfg, warnings) = derive_config(1024, 0.5, &BTreeMap::new(), 0).unwrap();
        assert_eq!(cfg.k, 672);
        assert_eq!(cfg.h_sep, 144);
        assert_eq!(cfg.b_max, 72);
        assert_eq!(cfg.c, 1.0 / 324.0);
        assert_eq!(cfg.c_prime, 0.5);
        assert_eq!(cfg.h_diam, 576);
        assert_eq!(cfg.t, 576 * 2 + 2);
        assert!(warnings.is_empty());
    }

    #[test]
    fn scaled_constants() {
        let (cfg, _) = derive_config(256, 0.5, &ov(&[("21", 1.0), ("36", 4.0)]), 0).unwrap();
        assert_eq!((cfg.k, cfg.h_sep, cfg.b_max), (16, 16, 8));
    }

    #[test]
    fn k_prime_arithmetic() {
        let (cfg, _) = derive_config(256, 0.5, &ov(&[("21", 1.0), ("36", 4.0)]), 0).unwrap();
        // 324² · 2 · 3 · 16
        assert_eq!(cfg.k_prime_for(2, 3), 104_976 * 96);
        assert_eq!(cfg.k_prime_for(2, 3), 10_077_696);
    }

    #[test]
    fn inconsistent_overrides() {
        assert!(matches!(
            derive_config(64, 0.5, &ov(&[("k", 1.0)]), 0),
            Err(ConfigError::InconsistentOverride(_))
        ));
        assert!(matches!(
            derive_config(64, 0.5, &ov(&[("h_sep", 3.0)]), 0),
            Err(ConfigError::InconsistentOverride(_))
        ));
        assert!(matches!(
            derive_config(64, 0.5, &ov(&[("phi", 0.9)]), 0),
            Err(ConfigError::InconsistentOverride(_))
        ));
        assert!(derive_config(64, 0.5, &ov(&[("phi", 0.9), ("216", 1.0)]), 0).is_ok());
        assert!(matches!(
            derive_config(64, 0.5, &ov(&[("zeta", 1.0)]), 0),
            Err(ConfigError::UnknownKey(_))
        ));
    }

    #[test]
    fn small_epsilon_warns() {
        let (_, warnings) = derive_config(1 << 20, 0.05, &ov(&[("k", 2.0)]), 0).unwrap();
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn override_parsing() {
        let o = parse_overrides(["21=1", "k = 3"]).unwrap();
        assert_eq!(o["21"], 1.0);
        assert_eq!(o["k"], 3.0);
        assert!(parse_overrides(["oops"]).is_err());
    }
}
