//! Independent analytic reference solutions used by tests and the
//! acceptance suite: exact Riemann solver, normal/oblique shock jump
//! relations and the Couette profile. None of these share flux code with
//! the numerical schemes.

use crate::error::{Result, SolverError};
use crate::gas::{GasModel, PrimitiveState};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveKind {
    Shock,
    Rarefaction,
}

/// Exact solution of a 1D Riemann problem; sample with `sample(x_over_t)`.
#[derive(Debug, Clone)]
pub struct RiemannExactSolution<S> {
    pub star_pressure: S,
    pub star_velocity: S,
    pub left_wave: WaveKind,
    pub right_wave: WaveKind,
    left: PrimitiveState<S>,
    right: PrimitiveState<S>,
    gamma: S,
}

fn pressure_fn<S: Scalar>(p: S, w: &PrimitiveState<S>, a: S, gamma: S) -> (S, S) {
    if p > w.p {
        // shock branch
        let big_a = S::two() / ((gamma + S::one()) * w.rho);
        let big_b = (gamma - S::one()) / (gamma + S::one()) * w.p;
        let sq = (big_a / (p + big_b)).sqrt();
        let f = (p - w.p) * sq;
        let df = sq * (S::one() - (p - w.p) / (S::two() * (p + big_b)));
        (f, df)
    } else {
        // rarefaction branch
        let exp = (gamma - S::one()) / (S::two() * gamma);
        let f = S::two() * a / (gamma - S::one()) * ((p / w.p).powf(exp) - S::one());
        let df = (p / w.p).powf(-(gamma + S::one()) / (S::two() * gamma)) / (w.rho * a);
        (f, df)
    }
}

/// Exact Riemann solver: Newton iteration on the star pressure to
/// |dp| < 1e-12, then wave-fan sampling. The 1D problem runs along x;
/// the tangential velocity v is advected passively with the contact.
pub fn exact_riemann<S: Scalar>(
    left: &PrimitiveState<S>,
    right: &PrimitiveState<S>,
    gas: &GasModel<S>,
) -> Result<RiemannExactSolution<S>> {
    let gamma = gas.gamma;
    let a_l = left.sound_speed(gas);
    let a_r = right.sound_speed(gas);
    let du = right.u - left.u;
    // vacuum criterion
    if S::two() / (gamma - S::one()) * (a_l + a_r) <= du {
        return Err(SolverError::VacuumGenerated);
    }
    // two-rarefaction initial guess, floored away from zero
    let z = (gamma - S::one()) / (S::two() * gamma);
    let guess = ((a_l + a_r - S::half() * (gamma - S::one()) * du)
        / (a_l / left.p.powf(z) + a_r / right.p.powf(z)))
    .powf(S::one() / z);
    let mut p = guess.max(S::lit(1e-14));
    for _ in 0..100 {
        let (f_l, df_l) = pressure_fn(p, left, a_l, gamma);
        let (f_r, df_r) = pressure_fn(p, right, a_r, gamma);
        let f = f_l + f_r + du;
        let step = f / (df_l + df_r);
        p = (p - step).max(S::lit(1e-14));
        if step.abs() < S::lit(1e-12) * (S::one() + p) {
            break;
        }
    }
    let (f_l, _) = pressure_fn(p, left, a_l, gamma);
    let (f_r, _) = pressure_fn(p, right, a_r, gamma);
    let u_star = S::half() * (left.u + right.u) + S::half() * (f_r - f_l);
    Ok(RiemannExactSolution {
        star_pressure: p,
        star_velocity: u_star,
        left_wave: if p > left.p {
            WaveKind::Shock
        } else {
            WaveKind::Rarefaction
        },
        right_wave: if p > right.p {
            WaveKind::Shock
        } else {
            WaveKind::Rarefaction
        },
        left: *left,
        right: *right,
        gamma,
    })
}

impl<S: Scalar> RiemannExactSolution<S> {
    /// State along the ray x/t = xi.
    pub fn sample(&self, xi: S) -> PrimitiveState<S> {
        let gamma = self.gamma;
        let gm = (gamma - S::one()) / (gamma + S::one());
        let p_star = self.star_pressure;
        let u_star = self.star_velocity;
        let left = &self.left;
        let right = &self.right;
        let a_l = (gamma * left.p / left.rho).sqrt();
        let a_r = (gamma * right.p / right.rho).sqrt();
        if xi <= u_star {
            // left of the contact
            match self.left_wave {
                WaveKind::Shock => {
                    let ratio = p_star / left.p;
                    let s =
                        left.u - a_l * ((gamma + S::one()) / (S::two() * gamma) * ratio
                            + (gamma - S::one()) / (S::two() * gamma))
                            .sqrt();
                    if xi <= s {
                        *left
                    } else {
                        let rho = left.rho * (ratio + gm) / (gm * ratio + S::one());
                        PrimitiveState::new(rho, u_star, left.v, p_star)
                    }
                }
                WaveKind::Rarefaction => {
                    let a_star = a_l * (p_star / left.p).powf((gamma - S::one()) / (S::two() * gamma));
                    let head = left.u - a_l;
                    let tail = u_star - a_star;
                    if xi <= head {
                        *left
                    } else if xi >= tail {
                        let rho = left.rho * (p_star / left.p).powf(S::one() / gamma);
                        PrimitiveState::new(rho, u_star, left.v, p_star)
                    } else {
                        // inside the fan
                        let two = S::two();
                        let u = (two / (gamma + S::one()))
                            * (a_l + S::half() * (gamma - S::one()) * left.u + xi);
                        let a = (two / (gamma + S::one()))
                            * (a_l + S::half() * (gamma - S::one()) * (left.u - xi));
                        let rho = left.rho * (a / a_l).powf(two / (gamma - S::one()));
                        let p = left.p * (a / a_l).powf(two * gamma / (gamma - S::one()));
                        PrimitiveState::new(rho, u, left.v, p)
                    }
                }
            }
        } else {
            match self.right_wave {
                WaveKind::Shock => {
                    let ratio = p_star / right.p;
                    let s = right.u
                        + a_r
                            * ((gamma + S::one()) / (S::two() * gamma) * ratio
                                + (gamma - S::one()) / (S::two() * gamma))
                                .sqrt();
                    if xi >= s {
                        *right
                    } else {
                        let rho = right.rho * (ratio + gm) / (gm * ratio + S::one());
                        PrimitiveState::new(rho, u_star, right.v, p_star)
                    }
                }
                WaveKind::Rarefaction => {
                    let a_star =
                        a_r * (p_star / right.p).powf((gamma - S::one()) / (S::two() * gamma));
                    let head = right.u + a_r;
                    let tail = u_star + a_star;
                    if xi >= head {
                        *right
                    } else if xi <= tail {
                        let rho = right.rho * (p_star / right.p).powf(S::one() / gamma);
                        PrimitiveState::new(rho, u_star, right.v, p_star)
                    } else {
                        let two = S::two();
                        let u = (two / (gamma + S::one()))
                            * (-a_r + S::half() * (gamma - S::one()) * right.u + xi);
                        let a = (two / (gamma + S::one()))
                            * (a_r - S::half() * (gamma - S::one()) * (right.u - xi));
                        let rho = right.rho * (a / a_r).powf(two / (gamma - S::one()));
                        let p = right.p * (a / a_r).powf(two * gamma / (gamma - S::one()));
                        PrimitiveState::new(rho, u, right.v, p)
                    }
                }
            }
        }
    }
}

/// Rankine-Hugoniot ratios across a normal shock with upstream Mach M > 1:
/// (density ratio, pressure ratio, velocity ratio in the shock frame).
pub fn normal_shock_rh<S: Scalar>(mach: S, gas: &GasModel<S>) -> (S, S, S) {
    let g = gas.gamma;
    let m2 = mach * mach;
    let density = (g + S::one()) * m2 / ((g - S::one()) * m2 + S::two());
    let pressure = S::one() + S::two() * g * (m2 - S::one()) / (g + S::one());
    (density, pressure, S::one() / density)
}

/// Post-shock state in the lab frame for a moving shock of Mach `mach`
/// (relative to the pre-shock gas) whose front line makes `shock_angle`
/// with the x-axis and propagates in the +x direction. The pre-shock gas
/// may carry a velocity; its shock-normal component reduces the effective
/// shock strength. Tangential velocity is preserved across the front.
pub fn oblique_post_shock<S: Scalar>(
    pre: &PrimitiveState<S>,
    mach: S,
    shock_angle: S,
    gas: &GasModel<S>,
) -> PrimitiveState<S> {
    let (sin_a, cos_a) = (shock_angle.sin(), shock_angle.cos());
    // unit normal of the front in the direction of propagation
    let (nx, ny) = (sin_a, -cos_a);
    let a1 = pre.sound_speed(gas);
    let shock_speed = mach * a1;
    let q1 = pre.u * nx + pre.v * ny;
    let m_rel = (shock_speed - q1) / a1;
    let (r_rho, r_p, _) = normal_shock_rh(m_rel, gas);
    // normal velocity jump in the lab frame
    let q2 = shock_speed - (shock_speed - q1) / r_rho;
    let dq = q2 - q1;
    PrimitiveState::new(
        pre.rho * r_rho,
        pre.u + dq * nx,
        pre.v + dq * ny,
        pre.p * r_p,
    )
}

/// Analytic steady Couette profiles between a fixed wall at y = 0 and a
/// wall moving with `u_wall` at y = h, both isothermal at `t_wall`,
/// constant viscosity: linear velocity, quadratic temperature from viscous
/// dissipation.
#[derive(Debug, Clone, Copy)]
pub struct CouetteExact<S> {
    pub u_wall: S,
    pub h: S,
    pub mu: S,
    pub t_wall: S,
    conductivity: S,
}

pub fn couette_exact<S: Scalar>(
    u_wall: S,
    h: S,
    mu: S,
    t_wall: S,
    gas: &GasModel<S>,
) -> CouetteExact<S> {
    let cp = gas.gamma * gas.gas_constant / (gas.gamma - S::one());
    CouetteExact {
        u_wall,
        h,
        mu,
        t_wall,
        conductivity: mu * cp / gas.prandtl,
    }
}

impl<S: Scalar> CouetteExact<S> {
    pub fn velocity(&self, y: S) -> S {
        self.u_wall * y / self.h
    }

    pub fn temperature(&self, y: S) -> S {
        let eta = y / self.h;
        self.t_wall
            + self.mu * self.u_wall * self.u_wall / (S::two() * self.conductivity)
                * eta
                * (S::one() - eta)
    }
}
