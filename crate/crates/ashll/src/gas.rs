//! Ideal-gas state representations, conversions, physical fluxes and
//! Roe-averaged interface states.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};
use crate::scalar::Scalar;

/// Viscosity law for viscous cases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ViscosityModel<S> {
    Constant { mu: S },
    Sutherland { mu_ref: S, t_ref: S, s: S },
}

impl<S: Scalar> ViscosityModel<S> {
    pub fn mu(&self, temperature: S) -> S {
        match *self {
            ViscosityModel::Constant { mu } => mu,
            ViscosityModel::Sutherland { mu_ref, t_ref, s } => {
                mu_ref * (temperature / t_ref).powf(S::lit(1.5)) * (t_ref + s) / (temperature + s)
            }
        }
    }
}

/// Ideal-gas model: ratio of specific heats plus transport parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasModel<S> {
    pub gamma: S,
    /// Prandtl number, used by the viscous flux.
    pub prandtl: S,
    /// Specific gas constant in the case's nondimensionalization; fixes
    /// the temperature scale T = p / (rho R).
    pub gas_constant: S,
    pub viscosity_model: ViscosityModel<S>,
}

impl<S: Scalar> GasModel<S> {
    /// Inviscid air-like gas with gamma = 1.4.
    pub fn air() -> Self {
        GasModel {
            gamma: S::lit(1.4),
            prandtl: S::lit(0.72),
            gas_constant: S::one(),
            viscosity_model: ViscosityModel::Constant { mu: S::zero() },
        }
    }

    pub fn with_gamma(gamma: S) -> Self {
        GasModel {
            gamma,
            ..Self::air()
        }
    }
}

/// Pointwise gas state in primitive variables (rho, u, v, p).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimitiveState<S> {
    pub rho: S,
    pub u: S,
    pub v: S,
    pub p: S,
}

/// Pointwise gas state in conserved variables (rho, rho u, rho v, rho E).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedState<S> {
    pub rho: S,
    pub rho_u: S,
    pub rho_v: S,
    pub rho_e: S,
}

/// 4-component numerical flux through a face, per unit face length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxVector<S> {
    pub mass: S,
    pub x_momentum: S,
    pub y_momentum: S,
    pub energy: S,
}

/// Roe-averaged quantities at a face with unit normal n.
#[derive(Debug, Clone, Copy)]
pub struct RoeAverage<S> {
    pub rho_hat: S,
    pub u_hat: S,
    pub v_hat: S,
    pub a_hat: S,
    pub q_hat: S,
}

impl<S: Scalar> PrimitiveState<S> {
    pub fn new(rho: S, u: S, v: S, p: S) -> Self {
        PrimitiveState { rho, u, v, p }
    }

    pub fn sound_speed(&self, gas: &GasModel<S>) -> S {
        (gas.gamma * self.p / self.rho).sqrt()
    }

    /// Velocity component along the unit normal (nx, ny).
    pub fn normal_velocity(&self, nx: S, ny: S) -> S {
        self.u * nx + self.v * ny
    }

    pub fn mach(&self, gas: &GasModel<S>) -> S {
        (self.u * self.u + self.v * self.v).sqrt() / self.sound_speed(gas)
    }

    pub fn temperature(&self, gas: &GasModel<S>) -> S {
        self.p / (self.rho * gas.gas_constant)
    }

    /// Specific total enthalpy H = (rho E + p) / rho.
    pub fn total_enthalpy(&self, gas: &GasModel<S>) -> S {
        let e = self.p / ((gas.gamma - S::one()) * self.rho);
        e + self.p / self.rho + S::half() * (self.u * self.u + self.v * self.v)
    }

    pub fn is_physical(&self) -> bool {
        self.rho > S::zero() && self.p > S::zero() && self.rho.is_finite() && self.p.is_finite()
    }
}

impl<S: Scalar> ConservedState<S> {
    pub fn zero() -> Self {
        ConservedState {
            rho: S::zero(),
            rho_u: S::zero(),
            rho_v: S::zero(),
            rho_e: S::zero(),
        }
    }
}

pub fn primitive_to_conserved<S: Scalar>(
    w: &PrimitiveState<S>,
    gas: &GasModel<S>,
) -> ConservedState<S> {
    let kinetic = S::half() * w.rho * (w.u * w.u + w.v * w.v);
    ConservedState {
        rho: w.rho,
        rho_u: w.rho * w.u,
        rho_v: w.rho * w.v,
        rho_e: w.p / (gas.gamma - S::one()) + kinetic,
    }
}

pub fn conserved_to_primitive<S: Scalar>(
    cons: &ConservedState<S>,
    gas: &GasModel<S>,
) -> Result<PrimitiveState<S>> {
    let rho = cons.rho;
    if !(rho > S::zero()) {
        return Err(SolverError::NonPhysicalState {
            rho: rho.to_f64().unwrap_or(f64::NAN),
            p: f64::NAN,
            cell: None,
        });
    }
    let u = cons.rho_u / rho;
    let v = cons.rho_v / rho;
    let p = (gas.gamma - S::one()) * (cons.rho_e - S::half() * rho * (u * u + v * v));
    if !(p > S::zero()) {
        return Err(SolverError::NonPhysicalState {
            rho: rho.to_f64().unwrap_or(f64::NAN),
            p: p.to_f64().unwrap_or(f64::NAN),
            cell: None,
        });
    }
    Ok(PrimitiveState { rho, u, v, p })
}

/// Convective flux through a face with unit normal (nx, ny):
/// (rho q, rho u q + p nx, rho v q + p ny, (rho E + p) q) with q = u nx + v ny.
pub fn physical_flux<S: Scalar>(
    w: &PrimitiveState<S>,
    nx: S,
    ny: S,
    gas: &GasModel<S>,
) -> FluxVector<S> {
    let q = w.normal_velocity(nx, ny);
    let rho_e = primitive_to_conserved(w, gas).rho_e;
    FluxVector {
        mass: w.rho * q,
        x_momentum: w.rho * w.u * q + w.p * nx,
        y_momentum: w.rho * w.v * q + w.p * ny,
        energy: (rho_e + w.p) * q,
    }
}

/// Standard sqrt(rho)-weighted Roe averages of velocity and total enthalpy;
/// the averaged sound speed follows from the averaged enthalpy.
pub fn roe_average<S: Scalar>(
    left: &PrimitiveState<S>,
    right: &PrimitiveState<S>,
    nx: S,
    ny: S,
    gas: &GasModel<S>,
) -> RoeAverage<S> {
    let wl = left.rho.sqrt();
    let wr = right.rho.sqrt();
    let inv = S::one() / (wl + wr);
    let u_hat = (wl * left.u + wr * right.u) * inv;
    let v_hat = (wl * left.v + wr * right.v) * inv;
    let h_hat = (wl * left.total_enthalpy(gas) + wr * right.total_enthalpy(gas)) * inv;
    let a_hat =
        ((gas.gamma - S::one()) * (h_hat - S::half() * (u_hat * u_hat + v_hat * v_hat))).sqrt();
    RoeAverage {
        rho_hat: wl * wr,
        u_hat,
        v_hat,
        a_hat,
        q_hat: u_hat * nx + v_hat * ny,
    }
}

impl<S: Scalar> FluxVector<S> {
    pub fn zero() -> Self {
        FluxVector {
            mass: S::zero(),
            x_momentum: S::zero(),
            y_momentum: S::zero(),
            energy: S::zero(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.mass.is_finite()
            && self.x_momentum.is_finite()
            && self.y_momentum.is_finite()
            && self.energy.is_finite()
    }
}

macro_rules! impl_vec4_ops {
    ($t:ident, $($f:ident),+) => {
        impl<S: Scalar> Add for $t<S> {
            type Output = Self;
            fn add(self, rhs: Self) -> Self {
                $t { $($f: self.$f + rhs.$f),+ }
            }
        }
        impl<S: Scalar> Sub for $t<S> {
            type Output = Self;
            fn sub(self, rhs: Self) -> Self {
                $t { $($f: self.$f - rhs.$f),+ }
            }
        }
        impl<S: Scalar> Neg for $t<S> {
            type Output = Self;
            fn neg(self) -> Self {
                $t { $($f: -self.$f),+ }
            }
        }
        impl<S: Scalar> Mul<S> for $t<S> {
            type Output = Self;
            fn mul(self, s: S) -> Self {
                $t { $($f: self.$f * s),+ }
            }
        }
        impl<S: Scalar> AddAssign for $t<S> {
            fn add_assign(&mut self, rhs: Self) {
                $(self.$f = self.$f + rhs.$f;)+
            }
        }
    };
}

impl_vec4_ops!(FluxVector, mass, x_momentum, y_momentum, energy);
impl_vec4_ops!(ConservedState, rho, rho_u, rho_v, rho_e);
