//! Model parameters, the Hamiltonian, and the `t <-> z` coordinate map.
//!
//! Units: hbar = 1, energies in units of `1/T`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::specfun::Complex;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("parameter `{field}` must be finite, got {value}")]
    NonFinite { field: &'static str, value: f64 },
    #[error("parameter `t_cap` must be positive, got {0}")]
    NonPositivePeriod(f64),
}

/// Deterministic model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DKParams {
    pub delta0: f64,
    pub delta1: f64,
    pub j: f64,
    pub t_cap: f64,
}

impl DKParams {
    pub fn new(delta0: f64, delta1: f64, j: f64, t_cap: f64) -> Result<Self, ModelError> {
        let p = Self {
            delta0,
            delta1,
            j,
            t_cap,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with `T = 1`.
    pub fn unit(delta0: f64, delta1: f64, j: f64) -> Result<Self, ModelError> {
        Self::new(delta0, delta1, j, 1.0)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (field, value) in [
            ("delta0", self.delta0),
            ("delta1", self.delta1),
            ("j", self.j),
            ("t_cap", self.t_cap),
        ] {
            if !value.is_finite() {
                return Err(ModelError::NonFinite { field, value });
            }
        }
        if self.t_cap <= 0.0 {
            return Err(ModelError::NonPositivePeriod(self.t_cap));
        }
        Ok(())
    }

    pub fn with_j(self, j: f64) -> Self {
        Self { j, ..self }
    }

    pub fn with_delta0(self, delta0: f64) -> Self {
        Self { delta0, ..self }
    }

    pub fn with_delta1(self, delta1: f64) -> Self {
        Self { delta1, ..self }
    }

    /// Diabatic detuning `Delta0 + Delta1 tanh(t/T)`; exact limits at `t = +-inf`.
    pub fn detuning(&self, t: f64) -> f64 {
        self.delta0 + self.delta1 * tanh_limit(t / self.t_cap)
    }

    /// Principal root `sqrt(Delta1^2 - J^2)`.
    pub fn root(&self) -> Complex {
        Complex::new(self.delta1 * self.delta1 - self.j * self.j, 0.0).sqrt()
    }
}

fn tanh_limit(x: f64) -> f64 {
    if x == f64::INFINITY {
        1.0
    } else if x == f64::NEG_INFINITY {
        -1.0
    } else {
        x.tanh()
    }
}

/// `sech(x)` without overflow in `cosh`.
pub fn sech(x: f64) -> f64 {
    let a = x.abs();
    if a.is_infinite() {
        return 0.0;
    }
    let e = (-a).exp();
    2.0 * e / (1.0 + e * e)
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `z = (1 + tanh(t/T)) / 2`, computed as a logistic so that `1 - z`
/// keeps full relative precision through [`one_minus_z_of_t`].
pub fn z_of_t(t: f64, t_cap: f64) -> f64 {
    let x = t / t_cap;
    if x == f64::INFINITY {
        1.0
    } else if x == f64::NEG_INFINITY {
        0.0
    } else {
        1.0 / (1.0 + (-2.0 * x).exp())
    }
}

pub fn one_minus_z_of_t(t: f64, t_cap: f64) -> f64 {
    z_of_t(-t, t_cap)
}

/// `ln z(t)`, finite for every finite `t`.
pub fn ln_z_of_t(t: f64, t_cap: f64) -> f64 {
    -softplus(-2.0 * t / t_cap)
}

/// Parameters of the hypergeometric equation satisfied by `C1(z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypergeomParams {
    pub lambda: Complex,
    pub mu: Complex,
    pub nu: Complex,
}

pub fn dk_hypergeometric_params(p: &DKParams) -> HypergeomParams {
    let it = Complex::new(0.0, p.t_cap);
    let r = p.root();
    HypergeomParams {
        lambda: it * (r + p.delta1),
        mu: it * (p.delta1 - r),
        nu: Complex::new(0.5, -p.t_cap * (p.delta0 - p.delta1)),
    }
}

/// Traceless Hermitian 2x2 Hamiltonian at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianMatrix {
    pub entries: [[Complex; 2]; 2],
}

impl HamiltonianMatrix {
    pub fn from_real(detuning: f64, offdiag: f64) -> Self {
        let c = |x: f64| Complex::new(x, 0.0);
        Self {
            entries: [[c(detuning), c(offdiag)], [c(offdiag), c(-detuning)]],
        }
    }

    pub fn trace(&self) -> Complex {
        self.entries[0][0] + self.entries[1][1]
    }

    pub fn is_hermitian(&self) -> bool {
        self.entries[1][0] == self.entries[0][1].conj()
            && self.entries[0][0].im == 0.0
            && self.entries[1][1].im == 0.0
    }

    /// Eigenvalues `(-E, +E)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let d = self.entries[0][0].re;
        let e = d.hypot(self.entries[0][1].norm());
        (-e, e)
    }
}

/// `H(t)` for an instantaneous coupling value `J_noisy(t)`.
pub fn hamiltonian_at(p: &DKParams, coupling: f64, t: f64) -> HamiltonianMatrix {
    HamiltonianMatrix::from_real(p.detuning(t), coupling * sech(t / p.t_cap))
}

/// Gap between the adiabatic levels, `2 sqrt(detuning^2 + coupling^2 sech^2)`.
pub fn adiabatic_gap(p: &DKParams, coupling: f64, t: f64) -> f64 {
    2.0 * p.detuning(t).hypot(coupling * sech(t / p.t_cap))
}

/// Zero of the diabatic detuning, if the levels cross at all.
pub fn level_crossing_time(p: &DKParams) -> Option<f64> {
    if p.delta1 == 0.0 {
        return None;
    }
    let ratio = -p.delta0 / p.delta1;
    (ratio.abs() < 1.0).then(|| p.t_cap * ratio.atanh())
}

/// Diabatic amplitudes `(C1, C2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudePair {
    pub c1: Complex,
    pub c2: Complex,
}

impl AmplitudePair {
    pub fn new(c1: Complex, c2: Complex) -> Self {
        Self { c1, c2 }
    }

    /// The state `(1, 0)`.
    pub fn up() -> Self {
        Self::new(Complex::new(1.0, 0.0), Complex::new(0.0, 0.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c1.norm_sqr() + self.c2.norm_sqr()
    }

    /// Removes the global phase so that `c1` is real and non-negative.
    pub fn phase_aligned(&self) -> Self {
        let n = self.c1.norm();
        if n == 0.0 {
            let m = self.c2.norm();
            if m == 0.0 {
                return *self;
            }
            let phase = self.c2.conj() / m;
            return Self::new(self.c1, self.c2 * phase);
        }
        let phase = self.c1.conj() / n;
        Self::new(Complex::new(n, 0.0), self.c2 * phase)
    }

    pub fn max_component_diff(&self, other: &Self) -> f64 {
        (self.c1 - other.c1).norm().max((self.c2 - other.c2).norm())
    }
}
