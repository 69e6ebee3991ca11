//! All-speed HLL-type fluxes: pressure-ratio shock sensor, pressure
//! dissipative flux, low-Mach velocity-jump fix, and the assembled
//! ASHLLEM/ASHLLC interface fluxes, plus the linear-perturbation stability
//! diagnostic.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gas::{physical_flux, roe_average, FluxVector, GasModel, PrimitiveState, RoeAverage};
use crate::riemann::{davis_wave_speeds, hll_flux, hllc_flux, hllem_flux, WaveSpeeds};
use crate::scalar::Scalar;

/// Which contact-restoring base flux an all-speed scheme wraps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllSpeedKind {
    Ashllem,
    Ashllc,
}

/// Face pressure-ratio function f = min(pL/pR, pR/pL)^3: near 1 in smooth
/// flow, near 0 across strong shocks.
pub fn face_pressure_function<S: Scalar>(p_l: S, p_r: S) -> S {
    let r = (p_l / p_r).min(p_r / p_l);
    r * r * r
}

/// Per-face sensor values over a structured grid. Faces are indexed like
/// the mesh: i-faces (n_xi+1) x n_eta, j-faces n_xi x (n_eta+1).
#[derive(Debug, Clone)]
pub struct ShockSensorField<S> {
    pub n_xi: usize,
    pub n_eta: usize,
    /// Pressure-ratio function f per face.
    pub f_i: Vec<S>,
    pub f_j: Vec<S>,
    /// Neighborhood minimum f_p per face: the minimum of f over every face
    /// of the two cells sharing it.
    pub fp_i: Vec<S>,
    pub fp_j: Vec<S>,
}

/// Two-pass gather: per-face f from cell-centered pressures, then per-face
/// f_p as the minimum of f over all faces of the left and right cells.
/// `pressure` is addressed with a one-cell ghost pad: (i, j) in
/// [0, n_xi+2) x [0, n_eta+2), interior cell (i, j) at (i+1, j+1). Faces of
/// ghost cells do not exist and contribute f = 1.
///
/// `periodic_edges` flags the [i_min, i_max, j_min, j_max] domain edges
/// whose boundary faces are real (wrap-around) faces. Boundary faces of
/// every other edge keep f = 1: ghost states are boundary-condition
/// artifacts and must never spuriously activate shock dissipation at
/// domain boundaries.
pub fn shock_sensor<S: Scalar>(
    n_xi: usize,
    n_eta: usize,
    pressure: &dyn Fn(usize, usize) -> S,
    periodic_edges: [bool; 4],
) -> ShockSensorField<S> {
    let mut f_i = vec![S::one(); (n_xi + 1) * n_eta];
    for j in 0..n_eta {
        for i in 0..=n_xi {
            if (i == 0 && !periodic_edges[0]) || (i == n_xi && !periodic_edges[1]) {
                continue;
            }
            f_i[j * (n_xi + 1) + i] = face_pressure_function(pressure(i, j + 1), pressure(i + 1, j + 1));
        }
    }
    let mut f_j = vec![S::one(); n_xi * (n_eta + 1)];
    for j in 0..=n_eta {
        for i in 0..n_xi {
            if (j == 0 && !periodic_edges[2]) || (j == n_eta && !periodic_edges[3]) {
                continue;
            }
            f_j[j * n_xi + i] = face_pressure_function(pressure(i + 1, j), pressure(i + 1, j + 1));
        }
    }
    // minimum of f over the four faces of an interior cell; 1 outside
    let cell_min = |i: isize, j: isize| -> S {
        if i < 0 || j < 0 || i >= n_xi as isize || j >= n_eta as isize {
            return S::one();
        }
        let (iu, ju) = (i as usize, j as usize);
        f_i[ju * (n_xi + 1) + iu]
            .min(f_i[ju * (n_xi + 1) + iu + 1])
            .min(f_j[ju * n_xi + iu])
            .min(f_j[(ju + 1) * n_xi + iu])
    };
    let mut fp_i = vec![S::one(); (n_xi + 1) * n_eta];
    for j in 0..n_eta {
        for i in 0..=n_xi {
            fp_i[j * (n_xi + 1) + i] =
                cell_min(i as isize - 1, j as isize).min(cell_min(i as isize, j as isize));
        }
    }
    let mut fp_j = vec![S::one(); n_xi * (n_eta + 1)];
    for j in 0..=n_eta {
        for i in 0..n_xi {
            fp_j[j * n_xi + i] =
                cell_min(i as isize, j as isize - 1).min(cell_min(i as isize, j as isize));
        }
    }
    ShockSensorField {
        n_xi,
        n_eta,
        f_i,
        f_j,
        fp_i,
        fp_j,
    }
}

/// Pressure dissipative flux added in the subsonic branch:
/// F_p = (f_p - 1) (S_L S_R / (S_R - S_L)) delta_2 (dp / a_hat^2) R_2.
/// Vanishes in smooth flow (f_p = 1) and for zero pressure jump.
pub fn pressure_dissipation_flux<S: Scalar>(
    roe: &RoeAverage<S>,
    speeds: &WaveSpeeds<S>,
    f_p: S,
    dp: S,
) -> FluxVector<S> {
    let delta2 = roe.a_hat / (roe.a_hat + roe.q_hat.abs());
    let coeff = (f_p - S::one()) * speeds.s_l * speeds.s_r / (speeds.s_r - speeds.s_l) * delta2
        * dp
        / (roe.a_hat * roe.a_hat);
    FluxVector {
        mass: coeff,
        x_momentum: coeff * roe.u_hat,
        y_momentum: coeff * roe.v_hat,
        energy: coeff * S::half() * (roe.u_hat * roe.u_hat + roe.v_hat * roe.v_hat),
    }
}

/// Local Mach indicator z = min(max(M_L, M_R), 1) built from velocity
/// magnitudes.
pub fn low_mach_z<S: Scalar>(
    left: &PrimitiveState<S>,
    right: &PrimitiveState<S>,
    gas: &GasModel<S>,
) -> S {
    left.mach(gas).max(right.mach(gas)).min(S::one())
}

/// Low-Mach velocity-jump reduction, blended back toward the unmodified
/// velocities by f_p so the fix is turned off around strong shocks.
/// Density and pressure are untouched.
pub fn modify_velocities<S: Scalar>(
    left: &PrimitiveState<S>,
    right: &PrimitiveState<S>,
    z: S,
    f_p: S,
) -> (PrimitiveState<S>, PrimitiveState<S>) {
    let half = S::half();
    let star_l_u = half * ((S::one() + z) * left.u + (S::one() - z) * right.u);
    let star_l_v = half * ((S::one() + z) * left.v + (S::one() - z) * right.v);
    let star_r_u = half * ((S::one() + z) * right.u + (S::one() - z) * left.u);
    let star_r_v = half * ((S::one() + z) * right.v + (S::one() - z) * left.v);
    let one_m = S::one() - f_p;
    (
        PrimitiveState {
            u: f_p * star_l_u + one_m * left.u,
            v: f_p * star_l_v + one_m * left.v,
            ..*left
        },
        PrimitiveState {
            u: f_p * star_r_u + one_m * right.u,
            v: f_p * star_r_v + one_m * right.v,
            ..*right
        },
    )
}

/// Assembled all-speed flux: velocity modification, base HLLEM/HLLC flux on
/// the modified states, and the pressure dissipative flux in the subsonic
/// branch. Supersonic faces return the pure upwind flux of the unmodified
/// states.
pub fn ashll_flux<S: Scalar>(
    kind: AllSpeedKind,
    left: &PrimitiveState<S>,
    right: &PrimitiveState<S>,
    f_p: S,
    nx: S,
    ny: S,
    gas: &GasModel<S>,
) -> Result<FluxVector<S>> {
    let z = low_mach_z(left, right, gas);
    let (ml, mr) = modify_velocities(left, right, z, f_p);
    let speeds = davis_wave_speeds(&ml, &mr, nx, ny, gas);
    if speeds.s_l >= S::zero() {
        return Ok(physical_flux(left, nx, ny, gas));
    }
    if speeds.s_r <= S::zero() {
        return Ok(physical_flux(right, nx, ny, gas));
    }
    let base = match kind {
        AllSpeedKind::Ashllem => hllem_flux(&ml, &mr, nx, ny, gas),
        AllSpeedKind::Ashllc => {
            hllc_flux(&ml, &mr, nx, ny, gas).unwrap_or_else(|_| hll_flux(&ml, &mr, nx, ny, gas))
        }
    };
    let roe = roe_average(&ml, &mr, nx, ny, gas);
    let f_p_term = pressure_dissipation_flux(&roe, &speeds, f_p, right.p - left.p);
    Ok(base + f_p_term)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbationDirection {
    /// Shock-normal propagation: wave speeds are (S_M, S_R).
    Normal,
    /// Shock-tangential propagation: wave speeds are (S_L, S_R).
    Transverse,
}

/// Linear-perturbation coefficient xi_p: the contribution of the pressure
/// dissipative flux to the perturbed momentum update behind a steady planar
/// shock. Nonpositive in subsonic configurations with nonnegative star
/// velocity, which is the mechanism that damps the instability.
pub fn xi_p_diagnostic<S: Scalar>(
    direction: PerturbationDirection,
    state_star: &PrimitiveState<S>,
    speeds: &WaveSpeeds<S>,
    f_p: S,
    courant: S,
    gas: &GasModel<S>,
) -> S {
    let a = state_star.sound_speed(gas);
    let wave = speeds.s_l * speeds.s_r / (speeds.s_r - speeds.s_l);
    match direction {
        PerturbationDirection::Normal => {
            let u = state_star.u;
            (S::one() - f_p) * wave * courant * u / (a * (u + a) * (u + a))
        }
        PerturbationDirection::Transverse => {
            let v = state_star.v;
            S::lit(4.0) * (S::one() - f_p) * wave * courant * v / (a * (v + a) * (v + a))
        }
    }
}
