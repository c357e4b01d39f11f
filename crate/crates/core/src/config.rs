use serde::{Deserialize, Serialize};

use crate::error::{HenonError, Result};

/// Parameters fixing one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapConfig {
    pub a: f64,
    pub b: f64,
    /// Sign of the second coordinate, `+1` (orientation reversing) or `-1`.
    pub s: i8,
    pub eps: f64,
    pub delta: f64,
    /// Binding scale; `None` means the largest admissible value `(sigma/100) log 2`.
    pub tau: Option<f64>,
    pub escape_radius: f64,
    pub fixed_point_tol: f64,
    pub horizon: usize,
    /// Length of the critical orbit used by the binding checks.
    pub binding_horizon: usize,
    pub log_scale_after: usize,
    pub n_contr: usize,
    pub n_back: usize,
    pub max_spacing: f64,
    pub max_turn: f64,
    pub angle_tol: f64,
    pub ambiguity_tol: f64,
    pub approx_const: f64,
    pub contraction_const: f64,
    pub stable_slope_const: f64,
    pub n_max: usize,
    pub depth_cap: usize,
    pub vk_m: usize,
    pub vk_kmax: usize,
    pub seed: u64,
}

impl Default for MapConfig {
    fn default() -> Self {
        MapConfig {
            a: 2.0,
            b: 1e-4,
            s: 1,
            eps: 0.1,
            delta: 0.05,
            tau: None,
            escape_radius: 3.0,
            fixed_point_tol: 1e-12,
            horizon: 60,
            binding_horizon: 128,
            log_scale_after: 40,
            n_contr: 20,
            n_back: 30,
            max_spacing: 1e-3,
            max_turn: 1e-2,
            angle_tol: 1e-8,
            ambiguity_tol: 1e-9,
            approx_const: 100.0,
            contraction_const: 10.0,
            stable_slope_const: 0.1,
            n_max: 14,
            depth_cap: 64,
            vk_m: 4,
            vk_kmax: 6,
            seed: 20240607,
        }
    }
}

impl MapConfig {
    pub fn new(a: f64, b: f64, s: i8) -> Self {
        MapConfig { a, b, s, ..Default::default() }
    }

    pub fn with_a(&self, a: f64) -> Self {
        MapConfig { a, ..self.clone() }
    }

    pub fn sqrt_b(&self) -> f64 {
        self.b.sqrt()
    }

    pub fn sign(&self) -> f64 {
        f64::from(self.s)
    }

    pub fn sigma(&self) -> f64 {
        2.0 - self.eps / 2.0
    }

    pub fn lambda1(&self) -> f64 {
        4.0 - self.eps / 2.0
    }

    pub fn lambda2(&self) -> f64 {
        4.0 + self.eps / 2.0
    }

    pub fn tau_max(&self) -> f64 {
        self.sigma() / 100.0 * std::f64::consts::LN_2
    }

    pub fn tau(&self) -> f64 {
        self.tau.unwrap_or_else(|| self.tau_max())
    }

    /// `2 / log(1/b)`.
    pub fn beta(&self) -> f64 {
        2.0 / (1.0 / self.b).ln()
    }

    /// Half-height `b^{1/4}` of the critical box `I(delta)`.
    pub fn b_quarter(&self) -> f64 {
        self.b.powf(0.25)
    }

    pub fn orientation_preserving(&self) -> bool {
        self.s == -1
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(HenonError::Config(m.to_string()));
        if !(self.a.is_finite()) {
            return bad("a must be finite");
        }
        if !(self.b >= 0.0 && self.b < 1.0) {
            return bad("b must lie in [0, 1)");
        }
        if self.s != 1 && self.s != -1 {
            return bad("s must be +1 or -1");
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad("eps must lie in (0, 1)");
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("delta must lie in (0, 1)");
        }
        if let Some(t) = self.tau {
            if !(t > 0.0) || t > self.tau_max() * (1.0 + 1e-15) {
                return bad("tau must lie in (0, (sigma/100) log 2]");
            }
        }
        if !(self.escape_radius > 0.0) || !(self.fixed_point_tol > 0.0) {
            return bad("escape radius and tolerances must be positive");
        }
        if self.horizon == 0 || self.n_contr == 0 || self.n_back == 0 {
            return bad("horizons must be positive");
        }
        if !(self.max_spacing > 0.0 && self.max_turn > 0.0) {
            return bad("refinement caps must be positive");
        }
        if self.vk_m == 0 || self.vk_kmax == 0 {
            return bad("V_k parameters must be positive");
        }
        Ok(())
    }

    /// Flat `key = value` listing, one entry per field.
    pub fn to_kv(&self) -> Vec<(String, String)> {
        let f = |x: f64| format!("{:.16e}", x);
        vec![
            ("a".into(), f(self.a)),
            ("b".into(), f(self.b)),
            ("s".into(), self.s.to_string()),
            ("eps".into(), f(self.eps)),
            ("delta".into(), f(self.delta)),
            ("tau".into(), f(self.tau())),
            ("escape_radius".into(), f(self.escape_radius)),
            ("fixed_point_tol".into(), f(self.fixed_point_tol)),
            ("horizon".into(), self.horizon.to_string()),
            ("binding_horizon".into(), self.binding_horizon.to_string()),
            ("log_scale_after".into(), self.log_scale_after.to_string()),
            ("n_contr".into(), self.n_contr.to_string()),
            ("n_back".into(), self.n_back.to_string()),
            ("max_spacing".into(), f(self.max_spacing)),
            ("max_turn".into(), f(self.max_turn)),
            ("angle_tol".into(), f(self.angle_tol)),
            ("ambiguity_tol".into(), f(self.ambiguity_tol)),
            ("approx_const".into(), f(self.approx_const)),
            ("contraction_const".into(), f(self.contraction_const)),
            ("stable_slope_const".into(), f(self.stable_slope_const)),
            ("n_max".into(), self.n_max.to_string()),
            ("depth_cap".into(), self.depth_cap.to_string()),
            ("vk_m".into(), self.vk_m.to_string()),
            ("vk_kmax".into(), self.vk_kmax.to_string()),
            ("seed".into(), self.seed.to_string()),
        ]
    }

    pub fn set_kv(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(k: &str, v: &str) -> Result<T> {
            v.trim().parse::<T>().map_err(|_| HenonError::Config(format!("cannot parse value {v:?} for key {k}")))
        }
        let v = value;
        match key.trim() {
            "a" => self.a = num(key, v)?,
            "b" => self.b = num(key, v)?,
            "s" => self.s = num(key, v)?,
            "eps" => self.eps = num(key, v)?,
            "delta" => self.delta = num(key, v)?,
            "tau" => self.tau = Some(num(key, v)?),
            "escape_radius" => self.escape_radius = num(key, v)?,
            "fixed_point_tol" => self.fixed_point_tol = num(key, v)?,
            "horizon" => self.horizon = num(key, v)?,
            "binding_horizon" => self.binding_horizon = num(key, v)?,
            "log_scale_after" => self.log_scale_after = num(key, v)?,
            "n_contr" => self.n_contr = num(key, v)?,
            "n_back" => self.n_back = num(key, v)?,
            "max_spacing" => self.max_spacing = num(key, v)?,
            "max_turn" => self.max_turn = num(key, v)?,
            "angle_tol" => self.angle_tol = num(key, v)?,
            "ambiguity_tol" => self.ambiguity_tol = num(key, v)?,
            "approx_const" => self.approx_const = num(key, v)?,
            "contraction_const" => self.contraction_const = num(key, v)?,
            "stable_slope_const" => self.stable_slope_const = num(key, v)?,
            "n_max" => self.n_max = num(key, v)?,
            "depth_cap" => self.depth_cap = num(key, v)?,
            "vk_m" => self.vk_m = num(key, v)?,
            "vk_kmax" => self.vk_kmax = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            other => return Err(HenonError::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }
}
