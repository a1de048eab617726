use super::functional::{relative_energy, Reference, ReferenceState};
use super::RelEnergyError;
use crate::linalg::Vector;
use crate::thermo::EquationOfState;

/// Smooth cutoff `ψ_δ(ρ, θ) = ψ(ρ)ψ(θ)` with `ψ = 1` on `[δ, 1/δ]` and `ψ = 0` outside
/// `(δ/2, 2/δ)`; the ramps are quintic smoothsteps, hence `C²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    delta: f64,
}

fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

impl Cutoff {
    pub fn new(delta: f64) -> Result<Self, RelEnergyError> {
        if delta > 0.0 && delta < 0.5 {
            Ok(Cutoff { delta })
        } else {
            Err(RelEnergyError::Cutoff { delta })
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    fn profile(&self, v: f64) -> f64 {
        let d = self.delta;
        let up = smoothstep((v - 0.5 * d) / (0.5 * d));
        let down = 1.0 - smoothstep((v - 1.0 / d) / (1.0 / d));
        up * down
    }

    pub fn eval(&self, rho: f64, theta: f64) -> f64 {
        self.profile(rho) * self.profile(theta)
    }

    /// `(ψ_δ h, (1 - ψ_δ) h)`
    pub fn split(&self, rho: f64, theta: f64, h: f64) -> (f64, f64) {
        let psi = self.eval(rho, theta);
        (psi * h, (1.0 - psi) * h)
    }

    /// `[δ, 1/δ]²`
    pub fn in_box(&self, rho: f64, theta: f64) -> bool {
        let (lo, hi) = (self.delta, 1.0 / self.delta);
        (lo..=hi).contains(&rho) && (lo..=hi).contains(&theta)
    }

    /// Admissible references: `2δ < ρ̃, θ̃ < 1/δ - δ`.
    pub fn admits_reference(&self, rho: f64, theta: f64) -> bool {
        let (lo, hi) = (2.0 * self.delta, 1.0 / self.delta - self.delta);
        rho > lo && rho < hi && theta > lo && theta < hi
    }
}

/// State paired with the reference it is measured against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoercivitySample {
    pub rho: f64,
    pub theta: f64,
    pub u: Vector,
    pub reference: ReferenceState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoercivityReport {
    /// Smallest observed `E / bound`; the largest constant valid on the samples.
    pub c_delta: f64,
    pub argmin: Option<usize>,
    pub samples: usize,
    pub pass: bool,
    /// First sample with `E ≤ 0` and a positive bound, or `E < 0`.
    pub violation: Option<usize>,
}

/// `[|ρ - ρ̃|² + |θ - θ̃|² + |u - ũ|²]_ess + [1 + ρ + ρ|s| + ρe + ρ|u|²]_res`
pub fn coercivity_bound(eos: &EquationOfState, cutoff: &Cutoff, s: &CoercivitySample) -> Result<f64, RelEnergyError> {
    let r = &s.reference;
    let near = (s.rho - r.rho) * (s.rho - r.rho) + (s.theta - r.theta) * (s.theta - r.theta) + (s.u - r.u).norm_sq();
    let far = 1.0
        + s.rho
        + eos.entropy_density(s.rho, s.theta)?.abs()
        + eos.energy_density(s.rho, s.theta)?
        + s.rho * s.u.norm_sq();
    let psi = cutoff.eval(s.rho, s.theta);
    Ok(psi * near + (1.0 - psi) * far)
}

pub fn coercivity_check(
    eos: &EquationOfState,
    cutoff: &Cutoff,
    samples: &[CoercivitySample],
) -> Result<CoercivityReport, RelEnergyError> {
    if samples.is_empty() {
        return Err(RelEnergyError::Empty);
    }
    let mut c = f64::INFINITY;
    let mut argmin = None;
    let mut violation = None;
    for (k, s) in samples.iter().enumerate() {
        let r = s.reference;
        if !cutoff.admits_reference(r.rho, r.theta) {
            return Err(RelEnergyError::Reference { rho: r.rho, theta: r.theta });
        }
        let reference = Reference::new(eos, r)?;
        let e = relative_energy(eos, s.rho, s.theta, s.u, &reference)?;
        let b = coercivity_bound(eos, cutoff, s)?;
        if e < 0.0 || (b > 0.0 && e <= 0.0) || e.is_nan() {
            violation.get_or_insert(k);
            continue;
        }
        if b > 0.0 && e / b < c {
            c = e / b;
            argmin = Some(k);
        }
    }
    let pass = violation.is_none() && c > 0.0;
    Ok(CoercivityReport { c_delta: c, argmin, samples: samples.len(), pass, violation })
}
