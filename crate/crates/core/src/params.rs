//! Physical parameters of the driven atoms plus cavity system, derived
//! rates, validity ratios and decoherence budgets.
//!
//! All rates are dimensionless, measured in units of a single reference
//! rate (conventionally |g_a| = 1).

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("n_atoms must be at least 1")]
    NoAtoms,
    #[error("{0} must be finite")]
    NonFinite(&'static str),
    #[error("{0} must be nonnegative, got {1}")]
    Negative(&'static str, f64),
    #[error("laser detuning {0} is zero")]
    ZeroDetuning(&'static str),
    #[error("{0}")]
    Undefined(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub n_atoms: u64,
    pub g_a: C64,
    pub g_b: C64,
    pub omega_1: C64,
    pub omega_2: C64,
    pub delta_1: f64,
    pub omega_ab: f64,
    pub delta: f64,
    pub kappa: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub gamma_o: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        if self.n_atoms == 0 {
            return Err(ParamError::NoAtoms);
        }
        let complex = [
            ("g_a", self.g_a),
            ("g_b", self.g_b),
            ("omega_1", self.omega_1),
            ("omega_2", self.omega_2),
        ];
        for (name, z) in complex {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(ParamError::NonFinite(name));
            }
        }
        for (name, x) in [
            ("delta_1", self.delta_1),
            ("omega_ab", self.omega_ab),
            ("delta", self.delta),
        ] {
            if !x.is_finite() {
                return Err(ParamError::NonFinite(name));
            }
        }
        for (name, x) in [
            ("kappa", self.kappa),
            ("gamma_a", self.gamma_a),
            ("gamma_b", self.gamma_b),
            ("gamma_o", self.gamma_o),
        ] {
            if !x.is_finite() {
                return Err(ParamError::NonFinite(name));
            }
            if x < 0.0 {
                return Err(ParamError::Negative(name, x));
            }
        }
        if self.delta_1 == 0.0 {
            return Err(ParamError::ZeroDetuning("delta_1"));
        }
        if self.delta_2() == 0.0 {
            return Err(ParamError::ZeroDetuning("delta_2"));
        }
        Ok(())
    }

    pub fn n(&self) -> f64 {
        self.n_atoms as f64
    }

    pub fn delta_2(&self) -> f64 {
        self.delta_1 + self.omega_ab
    }

    pub fn gamma_total(&self) -> f64 {
        self.gamma_a + self.gamma_b + self.gamma_o
    }

    /// Lorentzian denominator Δ² + Γ²/4 for laser `l` (1 or 2).
    pub fn lorentz(&self, l: u8) -> f64 {
        let d = if l == 1 { self.delta_1 } else { self.delta_2() };
        let g = self.gamma_total();
        d * d + g * g / 4.0
    }

    pub fn kappa_prime(&self) -> f64 {
        self.kappa + self.n() * self.gamma_total() * self.g_a.norm_sqr() / self.lorentz(2)
    }

    /// Equal split of a total excited-state decay rate over the three branches.
    pub fn with_equal_branches(mut self, gamma_total: f64) -> Self {
        self.gamma_a = gamma_total / 3.0;
        self.gamma_b = gamma_total / 3.0;
        self.gamma_o = gamma_total / 3.0;
        self
    }

    /// Light shifts (s_a, s_b); the ground levels move by -s_a and -s_b.
    pub fn stark_shifts(&self) -> (f64, f64) {
        (
            self.delta_1 * self.omega_1.norm_sqr() / (4.0 * self.lorentz(1)),
            self.delta_2() * self.omega_2.norm_sqr() / (4.0 * self.lorentz(2)),
        )
    }

    /// Rescale every rate-dimension quantity by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            n_atoms: self.n_atoms,
            g_a: self.g_a * s,
            g_b: self.g_b * s,
            omega_1: self.omega_1 * s,
            omega_2: self.omega_2 * s,
            delta_1: self.delta_1 * s,
            omega_ab: self.omega_ab * s,
            delta: self.delta * s,
            kappa: self.kappa * s,
            gamma_a: self.gamma_a * s,
            gamma_b: self.gamma_b * s,
            gamma_o: self.gamma_o * s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub delta_2: f64,
    pub gamma_total: f64,
    pub kappa_prime: f64,
    /// Twisting strength for matched Raman processes, `None` otherwise.
    pub chi: Option<f64>,
    /// N|g_a g_b|/(κΓ); `None` when κΓ = 0.
    pub cooperativity: Option<f64>,
}

pub const RAMAN_MATCH_TOL: f64 = 1e-9;

/// Relative mismatch of the two Raman amplitudes Ω₁g_b*/Δ₁ and Ω₂g_a*/Δ₂.
pub fn raman_mismatch(p: &PhysicalParams) -> f64 {
    let r1 = p.omega_1 * p.g_b.conj() / p.delta_1;
    let r2 = p.omega_2 * p.g_a.conj() / p.delta_2();
    let diff = (r1 - r2).norm();
    if r1.norm() == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / r1.norm()
    }
}

pub fn derive(p: &PhysicalParams) -> Result<DerivedParams, ParamError> {
    p.validate()?;
    let gamma_total = p.gamma_total();
    let chi = if raman_mismatch(p) <= RAMAN_MATCH_TOL && p.delta != 0.0 {
        Some((p.omega_1 * p.g_b / p.delta_1).norm_sqr() / p.delta)
    } else {
        None
    };
    let kg = p.kappa * gamma_total;
    Ok(DerivedParams {
        delta_2: p.delta_2(),
        gamma_total,
        kappa_prime: p.kappa_prime(),
        chi,
        cooperativity: if kg > 0.0 {
            Some(p.n() * (p.g_a * p.g_b).norm() / kg)
        } else {
            None
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Warn,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub pass: f64,
    pub warn: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { pass: 1e-2, warn: 1e-1 }
    }
}

impl Thresholds {
    pub fn verdict(&self, ratio: f64) -> Verdict {
        if ratio < self.pass {
            Verdict::Pass
        } else if ratio < self.warn {
            Verdict::Warn
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ratio {
    pub value: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub ratio_excited_1: Ratio,
    pub ratio_excited_2: Ratio,
    pub ratio_freqs: Ratio,
    pub ratio_cavity: Ratio,
    pub mean_photon_estimate: f64,
}

impl ValidityReport {
    pub fn ratios(&self) -> [(&'static str, Ratio); 4] {
        [
            ("ratio_excited_1", self.ratio_excited_1),
            ("ratio_excited_2", self.ratio_excited_2),
            ("ratio_freqs", self.ratio_freqs),
            ("ratio_cavity", self.ratio_cavity),
        ]
    }

    pub fn worst(&self) -> Verdict {
        self.ratios()
            .iter()
            .map(|(_, r)| r.verdict)
            .max_by_key(|v| *v as u8)
            .unwrap_or(Verdict::Pass)
    }

    pub fn max_ratio(&self) -> f64 {
        self.ratios().iter().map(|(_, r)| r.value).fold(0.0, f64::max)
    }
}

pub fn check_validity(p: &PhysicalParams) -> Result<ValidityReport, ParamError> {
    check_validity_with(p, &Thresholds::default())
}

pub fn check_validity_with(
    p: &PhysicalParams,
    th: &Thresholds,
) -> Result<ValidityReport, ParamError> {
    p.validate()?;
    let d1 = p.lorentz(1);
    let d2 = p.lorentz(2);
    let kp = p.kappa_prime();
    let cav_den = p.delta * p.delta + kp * kp / 4.0;
    let e1 = p.omega_1.norm_sqr() / 4.0 / d1;
    let e2 = p.omega_2.norm_sqr() / 4.0 / d2;
    let freqs = p.delta.abs().max(kp) / p.omega_ab.abs();
    let cavity_num = p.n() * (p.omega_1 * p.g_b).norm_sqr() / 4.0;
    let cavity = if cavity_num == 0.0 {
        0.0
    } else {
        cavity_num / (d1 * cav_den)
    };
    let r = |value: f64| Ratio { value, verdict: th.verdict(value) };
    Ok(ValidityReport {
        ratio_excited_1: r(e1),
        ratio_excited_2: r(e2),
        ratio_freqs: r(freqs),
        ratio_cavity: r(cavity),
        mean_photon_estimate: cavity,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    /// Expected number of spontaneously scattered atoms.
    pub n_gamma: f64,
    /// Expected number of photons leaking from the cavity; `None` is unbounded.
    pub n_kappa: Option<f64>,
}

pub fn decoherence_budget(p: &PhysicalParams) -> Result<Budget, ParamError> {
    p.validate()?;
    let g2 = (p.g_a * p.g_b).norm();
    if g2 == 0.0 {
        return Err(ParamError::Undefined(
            "decoherence budget needs nonzero cavity couplings".into(),
        ));
    }
    let n_kappa = if p.kappa == 0.0 {
        Some(0.0)
    } else if p.delta == 0.0 {
        None
    } else {
        Some(p.kappa / p.delta.abs())
    };
    Ok(Budget {
        n_gamma: p.gamma_total() * p.delta.abs() / g2,
        n_kappa,
    })
}

/// |Ω₂| that equalizes the light shifts of |a⟩ and |b⟩.
pub fn balance_stark(p: &PhysicalParams) -> Result<f64, ParamError> {
    p.validate()?;
    let (d1, d2) = (p.delta_1, p.delta_2());
    if d1 * d2 < 0.0 {
        return Err(ParamError::Undefined(format!(
            "no real Stark-balancing drive for opposite detunings {d1} and {d2}"
        )));
    }
    Ok(p.omega_1.norm() * ((d1 * p.lorentz(2)) / (d2 * p.lorentz(1))).sqrt())
}

/// Ω₂ making both Raman amplitudes identical.
pub fn match_raman(p: &PhysicalParams) -> Result<C64, ParamError> {
    p.validate()?;
    if p.g_a.norm() == 0.0 {
        return Err(ParamError::Undefined("Raman matching needs g_a != 0".into()));
    }
    Ok(p.omega_1 * p.g_b.conj() * p.delta_2() / (p.g_a.conj() * p.delta_1))
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn working_point() -> PhysicalParams {
        PhysicalParams {
            n_atoms: 1_000_000,
            g_a: C64::new(1.0, 0.0),
            g_b: C64::new(1.0, 0.0),
            omega_1: C64::new(1e4, 0.0),
            omega_2: C64::new(1e4, 0.0),
            delta_1: 1e5,
            omega_ab: 1e4,
            delta: 500.0,
            kappa: 100.0,
            gamma_a: 0.0,
            gamma_b: 0.0,
            gamma_o: 0.0,
        }
        .with_equal_branches(100.0)
    }
}
