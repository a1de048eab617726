//! Monoatomic gas `p_M = θ^{5/2} P(q)`, `q = ρθ^{-3/2}`, with entropy `s_M = S(q)`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use super::eos::ThermoPoint;
use super::ThermoError;
use crate::num;

/// Scalar pressure profile `P(q)` with its derivative.
pub trait PressureFunction: Send + Sync {
    fn p(&self, q: f64) -> f64;
    fn dp(&self, q: f64) -> f64;
    fn name(&self) -> &str {
        "custom"
    }
    /// `(5/3)P(q) - P'(q) q`; override when the difference cancels badly.
    fn gap(&self, q: f64) -> f64 {
        5.0 / 3.0 * self.p(q) - self.dp(q) * q
    }
    /// Closed-form entropy profile, when one is known.
    fn entropy(&self, _q: f64) -> Option<f64> {
        None
    }
    fn normalization(&self) -> EntropyNormalization {
        EntropyNormalization::AtOne
    }
}

/// Additive constant fixing `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyNormalization {
    /// `S(q) → 0` as `q → ∞`; needs an integrable tail of `S'`.
    AtInfinity,
    /// `S(1) = 0`.
    AtOne,
}

/// `P(q) = q`: the ideal monoatomic gas, `S(q) = -log q`.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdealPressure;

impl PressureFunction for IdealPressure {
    fn p(&self, q: f64) -> f64 {
        q
    }
    fn dp(&self, _q: f64) -> f64 {
        1.0
    }
    fn name(&self) -> &str {
        "ideal"
    }
    fn entropy(&self, q: f64) -> Option<f64> {
        Some(-num::ln(q))
    }
}

/// `P(q) = p̄ q^{5/3} + q (1+q)^{-β}`, `0 < β ≤ 1`.
///
/// Ideal at low `q`, degenerate `p̄ q^{5/3}` at high `q`; `S'` is integrable at infinity.
#[derive(Debug, Clone, Copy)]
pub struct DegeneratePressure {
    pub p_bar: f64,
    pub beta: f64,
}

impl DegeneratePressure {
    pub fn new(p_bar: f64, beta: f64) -> Result<Self, ThermoError> {
        if !(p_bar > 0.0 && p_bar.is_finite()) {
            return Err(ThermoError::Parameter { name: "p_bar", value: p_bar });
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(ThermoError::Parameter { name: "beta", value: beta });
        }
        Ok(DegeneratePressure { p_bar, beta })
    }
}

impl PressureFunction for DegeneratePressure {
    fn p(&self, q: f64) -> f64 {
        self.p_bar * num::powf(q, 5.0 / 3.0) + q * num::powf(1.0 + q, -self.beta)
    }
    fn dp(&self, q: f64) -> f64 {
        5.0 / 3.0 * self.p_bar * num::powf(q, 2.0 / 3.0)
            + num::powf(1.0 + q, -self.beta - 1.0) * (1.0 + (1.0 - self.beta) * q)
    }
    fn name(&self) -> &str {
        "degenerate"
    }
    fn gap(&self, q: f64) -> f64 {
        q * num::powf(1.0 + q, -self.beta - 1.0) * (2.0 / 3.0 + (2.0 / 3.0 + self.beta) * q)
    }
    fn normalization(&self) -> EntropyNormalization {
        EntropyNormalization::AtInfinity
    }
}

// 8-point Gauss–Legendre on [-1, 1].
const GL_X: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_W: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

const LOG_Q_MIN: f64 = -12.0 * core::f64::consts::LN_10;
const NODES_PER_DECADE: usize = 16;
const DECADES: usize = 24;

struct EntropyTable {
    dz: f64,
    values: Vec<f64>,
}

#[derive(Clone)]
pub struct Monoatomic {
    pressure: Arc<dyn PressureFunction>,
    table: Option<Arc<EntropyTable>>,
}

fn zd_gap(pf: &dyn PressureFunction, q: f64) -> f64 {
    pf.gap(q)
}

/// `-S'(q) q` as a function of `z = log q`.
fn minus_ds_times_q(pf: &dyn PressureFunction, z: f64) -> f64 {
    let q = num::exp(z);
    1.5 * zd_gap(pf, q) / q
}

/// `∫_a^b (-S'(e^z)) e^z dz`, composite Gauss–Legendre.
fn integrate_log(pf: &dyn PressureFunction, a: f64, b: f64, max_panel: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let panels = libm::ceil((b - a).abs() / max_panel).max(1.0) as usize;
    let w = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * w;
        let mut acc = 0.0;
        for (x, wt) in GL_X.iter().zip(GL_W.iter()) {
            acc += wt * minus_ds_times_q(pf, mid + 0.5 * w * x);
        }
        total += 0.5 * w * acc;
    }
    total
}

impl Monoatomic {
    pub fn new(pressure: Arc<dyn PressureFunction>) -> Result<Self, ThermoError> {
        validate(pressure.as_ref())?;
        let table = if pressure.entropy(1.0).is_some() {
            None
        } else {
            Some(Arc::new(build_table(pressure.as_ref())?))
        };
        Ok(Monoatomic { pressure, table })
    }

    pub fn pressure(&self) -> &dyn PressureFunction {
        self.pressure.as_ref()
    }

    /// Entropy profile `S(q)`.
    pub fn entropy_profile(&self, q: f64) -> f64 {
        if let Some(s) = self.pressure.entropy(q) {
            return s;
        }
        let table = self.table.as_ref().expect("table built when no closed form");
        let pf = self.pressure.as_ref();
        let z = num::ln(q);
        let n = table.values.len() - 1;
        let zmax = LOG_Q_MIN + n as f64 * table.dz;
        let k = if z <= LOG_Q_MIN {
            0
        } else if z >= zmax {
            n
        } else {
            (((z - LOG_Q_MIN) / table.dz) + 0.5) as usize
        };
        let zk = LOG_Q_MIN + k as f64 * table.dz;
        table.values[k] - integrate_log(pf, zk, z, table.dz)
    }

    /// `S'(q) = -(3/2)((5/3)P - P'q)/q²`.
    pub fn entropy_derivative(&self, q: f64) -> f64 {
        -1.5 * zd_gap(self.pressure.as_ref(), q) / (q * q)
    }

    pub(crate) fn eval(&self, rho: f64, theta: f64) -> ThermoPoint {
        let pf = self.pressure.as_ref();
        let sq = num::sqrt(theta);
        let t32 = theta * sq;
        let t52 = t32 * theta;
        let q = rho / t32;
        let pp = pf.p(q);
        let dp = pf.dp(q);
        let gap = zd_gap(pf, q);
        let ds = -1.5 * gap / (q * q);
        ThermoPoint {
            p: t52 * pp,
            e: 1.5 * t52 * pp / rho,
            s: self.entropy_profile(q),
            dp_drho: theta * dp,
            dp_dtheta: 1.5 * t32 * gap,
            de_drho: 1.5 * t52 * (dp * q - pp) / (rho * rho),
            de_dtheta: 2.25 * t32 * gap / rho,
            ds_drho: ds / t32,
            ds_dtheta: -1.5 * ds * q / theta,
            ..Default::default()
        }
    }
}

fn validate(pf: &dyn PressureFunction) -> Result<(), ThermoError> {
    let p0 = pf.p(0.0);
    if !(p0.abs() <= 1e-14) {
        return Err(ThermoError::Structure { condition: "P(0) = 0", q: 0.0 });
    }
    for k in 0..=160 {
        let q = num::powf(10.0, -8.0 + 0.1 * k as f64);
        let (p, dp) = (pf.p(q), pf.dp(q));
        if !(p.is_finite() && dp.is_finite()) {
            return Err(ThermoError::Structure { condition: "P finite", q });
        }
        if !(dp > 0.0) {
            return Err(ThermoError::Structure { condition: "P'(q) > 0", q });
        }
        if !(zd_gap(pf, q) > 1e-12 * p.abs()) {
            return Err(ThermoError::Structure { condition: "(5/3)P(q) - P'(q)q > 0", q });
        }
    }
    Ok(())
}

fn build_table(pf: &dyn PressureFunction) -> Result<EntropyTable, ThermoError> {
    let dz = core::f64::consts::LN_10 / NODES_PER_DECADE as f64;
    let n = NODES_PER_DECADE * DECADES;
    let zmax = LOG_Q_MIN + n as f64 * dz;
    let tail = match pf.normalization() {
        EntropyNormalization::AtInfinity => {
            // power-law tail -S'(r) r ≈ C r^{-b}, so S(q) ≈ (-S'(q) q) / b
            let g1 = minus_ds_times_q(pf, zmax);
            let g2 = minus_ds_times_q(pf, zmax + core::f64::consts::LN_10);
            let b = -libm::log10(g2 / g1);
            if !(b > 1e-3 && b.is_finite()) {
                return Err(ThermoError::Structure {
                    condition: "entropy derivative integrable at infinity",
                    q: num::exp(zmax),
                });
            }
            g1 / b
        }
        EntropyNormalization::AtOne => 0.0,
    };
    let mut values = alloc::vec![0.0; n + 1];
    values[n] = tail;
    for k in (0..n).rev() {
        let a = LOG_Q_MIN + k as f64 * dz;
        values[k] = values[k + 1] + integrate_log(pf, a, a + dz, dz);
    }
    if pf.normalization() == EntropyNormalization::AtOne {
        let one = values[NODES_PER_DECADE * 12];
        for v in values.iter_mut() {
            *v -= one;
        }
    }
    Ok(EntropyTable { dz, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Linear;
    impl PressureFunction for Linear {
        fn p(&self, q: f64) -> f64 {
            q
        }
        fn dp(&self, _q: f64) -> f64 {
            1.0
        }
    }

    #[test]
    fn tabulated_ideal_entropy_matches_log() {
        let m = Monoatomic::new(Arc::new(Linear)).unwrap();
        for &q in &[1e-9, 1e-3, 0.37, 1.0, 2.5, 1e4, 1e11, 1e14] {
            let s = m.entropy_profile(q);
            assert!((s + num::ln(q)).abs() < 1e-10, "q = {q}: {s}");
        }
    }

    #[test]
    fn degenerate_entropy_tail_vanishes() {
        let pf = DegeneratePressure::new(0.5, 0.5).unwrap();
        let m = Monoatomic::new(Arc::new(pf)).unwrap();
        // large-q asymptote S(q) ≈ (3/2)(2/3 + β) q^{-β} / β
        let q: f64 = 1e10;
        let approx = 1.5 * (2.0 / 3.0 + 0.5) * q.powf(-0.5) / 0.5;
        assert!((m.entropy_profile(q) - approx).abs() / approx < 1e-4);
        let mut prev = f64::INFINITY;
        for k in 0..200 {
            let s = m.entropy_profile(10f64.powf(-6.0 + 0.1 * k as f64));
            assert!(s < prev);
            prev = s;
        }
        assert!(m.entropy_profile(1e15) < 1e-6);
    }

    #[test]
    fn rejects_q_to_five_thirds() {
        struct Pure;
        impl PressureFunction for Pure {
            fn p(&self, q: f64) -> f64 {
                q.powf(5.0 / 3.0)
            }
            fn dp(&self, q: f64) -> f64 {
                5.0 / 3.0 * q.powf(2.0 / 3.0)
            }
        }
        assert!(matches!(
            Monoatomic::new(Arc::new(Pure)),
            Err(ThermoError::Structure { .. })
        ));
    }
}
